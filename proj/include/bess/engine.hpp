#pragma once

#include <vector>

#include "bess/system.hpp"

namespace bess {

struct AnnualAggregates {
    double energy_delivered_mwh = 0.0;  // load actually served
    double energy_injected_mwh = 0.0;   // exported to the grid
    double peak_window_energy_mwh = 0.0;
    double penalized_deviation_mwh = 0.0;
    double fuel_liters = 0.0;
    long genset_starts = 0;
    double genset_hours = 0.0;
    double pv_curtailed_mwh = 0.0;
    double battery_throughput_mwh = 0.0;
    double unserved_mwh = 0.0;
};

struct SimulationResult {
    std::vector<AnnualAggregates> years;
    BatteryState final_battery;
    std::vector<int> replacement_years;   // year index (0-based) of each swap
    double max_balance_residual_kw = 0.0;
    double mean_one_way_efficiency = 1.0;  // duty-weighted over all cell energy
    long steps = 0;
    double runtime_seconds = 0.0;

    double total_fuel_liters() const;
    double total_cost_fuel_and_starts(double fuel_price, double start_cost) const;
    long total_starts() const;
};

// Steps the configured system over horizon_years, reusing the one-year input
// data each year with PV scaled by the plant degradation factor.
SimulationResult simulate(const SystemConfig& cfg, int horizon_years);

// Replicates a one-year result across the lifetime: energies follow the PV
// degradation factor and replacements are predicted from the first-year SOH
// fade rate.
SimulationResult extrapolate_single_year(const SimulationResult& one_year,
                                         const SystemConfig& cfg, int lifetime_years);

}  // namespace bess
