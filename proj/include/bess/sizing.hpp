#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bess/config.hpp"
#include "bess/economics.hpp"
#include "bess/engine.hpp"

namespace bess {

// Nearest whole-module count for a requested size, never below one module.
int quantized_modules(double size_kwh, double module_kwh);

// One simulated configuration of the sweep with its financial scores.
struct SizeRun {
    double size_kwh = 0.0;
    int n_modules = 0;
    double lcoe_eur_mwh = 0.0;
    double npv_eur = 0.0;
    std::optional<double> irr;
    bool irr_multiple = false;
    int replacements = 0;
    double fuel_liters = 0.0;
    long genset_starts = 0;
    double penalized_mwh = 0.0;
    double injected_mwh = 0.0;
    double unserved_mwh = 0.0;
    double mean_efficiency = 1.0;
    double runtime_seconds = 0.0;

    double value(Indicator indicator) const;
};

struct SweepOptions {
    int threads = 1;
    // Energy/power model, 10-minute steps, one simulated year extrapolated.
    bool approximate = false;
};

struct CurvePoint {
    double size_kwh = 0.0;
    double value = 0.0;
};

struct IndicatorCurve {
    Indicator indicator = Indicator::lcoe;
    bool maximize = false;
    std::vector<CurvePoint> points;
    std::size_t optimum = 0;

    const CurvePoint& best() const { return points.at(optimum); }
};

std::vector<SizeRun> sweep_runs(const Scenario& scenario, const SweepOptions& options = {});
IndicatorCurve make_curve(const std::vector<SizeRun>& runs, Indicator indicator);
IndicatorCurve sweep(const Scenario& scenario, const SweepOptions& options = {});

// Argmin for lcoe, argmax for npv/irr; ties break to the smallest size.
std::size_t optimum_index(const std::vector<CurvePoint>& points, Indicator indicator);
CurvePoint find_optimum(const IndicatorCurve& curve);

struct ScenarioCurve {
    std::string label;
    IndicatorCurve curve;
    std::vector<SizeRun> runs;
    std::vector<double> delta_vs_baseline;  // per size, relative to the baseline value
    double optimum_value_variation = 0.0;   // relative change of the optimum's value
    double optimum_size_shift_kwh = 0.0;
};

struct SensitivityReport {
    std::string factor;
    Indicator indicator = Indicator::lcoe;
    std::vector<double> sizes_kwh;
    std::vector<ScenarioCurve> scenarios;  // [0] is the baseline
};

const std::vector<std::string>& sensitivity_factors();
SensitivityReport run_sensitivity(const Scenario& scenario, const std::string& factor,
                                  const SweepOptions& options = {});

struct ApproxReport {
    std::vector<SizeRun> baseline;
    std::vector<SizeRun> approx;
    IndicatorCurve baseline_curve;
    IndicatorCurve approx_curve;
    std::vector<double> rel_error;  // per size, on the scenario indicator
    double mean_rel_error = 0.0;
    double baseline_seconds = 0.0;  // mean wall-clock per configuration
    double approx_seconds = 0.0;
    double speedup = 0.0;
};

ApproxReport fast_approximation(const Scenario& scenario, const SweepOptions& options = {});

}  // namespace bess
