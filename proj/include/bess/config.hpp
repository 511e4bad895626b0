#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "bess/economics.hpp"
#include "bess/system.hpp"

namespace bess {

/// Raised for parse and validation problems; the message carries the file,
/// the line (when the format provides one) and the offending key.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Scenario {
    SystemConfig system;
    EconParams econ;
    Indicator indicator = Indicator::lcoe;
    std::vector<double> sizes_kwh;  // empty when the file defines no grid
};

/// Reads a scenario document (TOML-style sections for .toml, JSON for .json),
/// resolves CSV paths relative to the file, synthesizes any series that are
/// not given, and validates the result. Unknown keys are rejected.
Scenario load_scenario(const std::string& path);

/// "lo:hi:step" -> {lo, lo+step, ..., <= hi}; throws ConfigError on bad input.
std::vector<double> parse_size_range(const std::string& text);

}  // namespace bess
