#pragma once

#include <optional>
#include <string>

#include "bess/system.hpp"
#include "bess/timeseries.hpp"

namespace bess {

struct SimulationResult;

enum class Indicator { lcoe, npv, irr };

struct EconParams {
    double discount_rate = 0.05;
    double capex_battery_per_kwh = 300.0;
    double capex_converter_per_kva = 80.0;
    double capex_pv_per_kwp = 900.0;
    double capex_genset = 20000.0;
    double opex_frac_of_capex = 0.02;  // per year
    double opex_fixed_per_year = 0.0;
    double replacement_battery_per_kwh = 200.0;
    double fuel_price_per_liter = 1.5;
    double genset_start_cost = 15.0;
    double feed_in_tariff_per_mwh = 120.0;
    double peak_bonus_per_mwh = 200.0;
    // Out-of-band deviation price; forfeits the tariff when unset.
    std::optional<double> penalty_per_mwh;

    double penalty_rate() const { return penalty_per_mwh.value_or(feed_in_tariff_per_mwh); }
    void validate() const;
};

// Year 0 is the investment year and carries no energy or operating costs.
struct CashflowSchedule {
    Array capex;       // currency spent in year n (initial plus replacements)
    Array opex;        // currency spent in year n
    Array income;      // currency earned in year n
    Array energy_mwh;  // billed energy of year n

    Eigen::Index years() const { return capex.size() - 1; }
    Array cashflow() const { return income - capex - opex; }
};

CashflowSchedule build_cashflows(const SimulationResult& sim, const SystemConfig& cfg,
                                 const EconParams& econ);

// Discounted lifetime cost per discounted lifetime MWh.
double lcoe(const CashflowSchedule& sched, double discount_rate);

double npv(const Array& cashflow, double discount_rate);
double npv(const CashflowSchedule& sched, double discount_rate);

// Discount rate in (-0.99, 10] at which the NPV crosses zero, found by a
// sign scan plus bisection. Empty when the cash flow never changes sign.
// With several sign changes the smallest root is returned and *multiple_roots
// (when given) is set.
std::optional<double> irr(const Array& cashflow, bool* multiple_roots = nullptr);

double score(const CashflowSchedule& sched, Indicator indicator, double discount_rate);
bool higher_is_better(Indicator indicator);
Indicator indicator_from_name(const std::string& name);
std::string indicator_name(Indicator indicator);

}  // namespace bess
