#pragma once

#include "bess/timeseries.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bess {

struct AgeingParams {
    bool enabled = true;
    double calendar_fade_per_year = 0.015;
    double cycle_fade_per_efc = 4.0e-5;
};

/// One-way efficiency over a (soc, c-rate, temperature) grid.
/// Queries interpolate trilinearly and clamp at the grid edges.
struct EfficiencyTable {
    Array soc_axis;
    Array c_rate_axis;
    Array temp_axis;
    std::vector<double> values;  // soc-major, then c-rate, then temperature

    double at(double soc, double c_rate, double temp_c) const;
    double& cell(Eigen::Index i, Eigen::Index j, Eigen::Index k);
};

EfficiencyTable default_efficiency_table();
/// Long-format CSV: header "soc,c_rate,temp_c,efficiency", one row per grid
/// point, full grid required.
EfficiencyTable load_efficiency_table_csv(const std::string& path);

/// Per-cell open-circuit voltage vs SOC, linearly interpolated, clamped.
struct OcvCurve {
    Array soc_axis;
    Array volts;
    double at(double soc) const;
};

OcvCurve default_ocv_curve();
/// CSV: header "soc,voltage", soc strictly increasing.
OcvCurve load_ocv_curve_csv(const std::string& path);

struct EcParams {
    OcvCurve ocv = default_ocv_curve();
    double internal_resistance_ohm = 0.06;  // per cell
    int series_cells = 180;
    int parallel_strings = 0;  // 0 means one string per module
};

enum class EfficiencyMode { fixed, table, constant };
enum class BatteryModelKind { ep, ec };

struct BatterySpec {
    double module_kwh = 6.5;
    int n_modules = 1;
    double soc_min = 0.05;
    double soc_max = 0.95;
    double eta_charge = 0.95;
    double eta_discharge = 0.95;
    EfficiencyMode efficiency_mode = EfficiencyMode::fixed;
    double constant_efficiency = 0.95;
    std::optional<EfficiencyTable> efficiency_table;
    std::optional<EcParams> ec;
    AgeingParams ageing;
    double temperature_c = 25.0;

    double rated_kwh() const { return module_kwh * n_modules; }
    int strings() const {
        return ec && ec->parallel_strings > 0 ? ec->parallel_strings : n_modules;
    }
    void validate() const;
};

struct BatteryState {
    double soc = 0.5;
    double soh = 1.0;
    double rated_kwh = 0.0;
    double throughput_kwh = 0.0;  // cumulative |energy| at the cell boundary
    long replacements = 0;
    double age_years = 0.0;

    double usable_kwh() const { return rated_kwh * soh; }
};

BatteryState initial_state(const BatterySpec& spec, double soc0);

/// Nameplate capacity needed to keep `useful_kwh` available across the DoD
/// window and worst-case fade: useful / (dod * (1 - max_fade)).
double min_rated_capacity(double useful_kwh, double dod, double max_fade);

/// One-way efficiency for the requested operating point. In constant mode the
/// scalar average is returned regardless of inputs; in fixed mode the charge
/// efficiency (callers needing the discharge value read the spec directly).
double efficiency_lookup(const BatterySpec& spec, double soc, double c_rate,
                         double temp_c);

struct StepResult {
    BatteryState state;
    double p_actual_kw = 0.0;   // terminal power actually realized, signed
    double loss_kw = 0.0;       // conversion losses, >= 0
    double eta_weight_kwh = 0.0;  // |cell-boundary energy| for duty averaging
    double eta_value = 1.0;       // one-way efficiency applied or implied
};

/// Energy/power model. p_request > 0 charges. The request is clipped so the
/// SOC window is never violated; never throws for any power.
StepResult ep_step(const BatteryState& state, const BatterySpec& spec,
                   double p_request_kw, double dt_hours);

/// Equivalent-circuit model: OCV source plus series resistance per cell.
/// The step solves the quadratic power-current relation at the step-start
/// SOC, clips at SOC and voltage limits and at the resistance-limited maximum
/// power; losses are i^2 R so efficiency emerges.
StepResult ec_step(const BatteryState& state, const BatterySpec& spec,
                   double p_request_kw, double dt_hours);

StepResult battery_step(BatteryModelKind kind, const BatteryState& state,
                        const BatterySpec& spec, double p_request_kw,
                        double dt_hours);

/// Largest terminal charge power (kW, >= 0) the model accepts for one step.
double max_charge_kw(BatteryModelKind kind, const BatteryState& state,
                     const BatterySpec& spec, double dt_hours);
/// Largest terminal discharge power magnitude (kW, >= 0) for one step.
double max_discharge_kw(BatteryModelKind kind, const BatteryState& state,
                        const BatterySpec& spec, double dt_hours);

/// Linear calendar plus cycle fade; crossing SOH 0.7 replaces the battery
/// (SOH back to 1, replacement counter incremented). Identity when ageing is
/// disabled.
BatteryState age_update(const BatteryState& state, const BatterySpec& spec,
                        double dt_years, double efc_increment);

constexpr double kReplacementSoh = 0.7;

}  // namespace bess
