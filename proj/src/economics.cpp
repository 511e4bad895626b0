#include "bess/economics.hpp"

#include <cmath>
#include <stdexcept>

#include "bess/engine.hpp"

namespace bess {

void EconParams::validate() const {
    if (discount_rate <= -1.0) throw std::invalid_argument("discount_rate must be > -1");
    const double prices[] = {capex_battery_per_kwh, capex_converter_per_kva,
                             capex_pv_per_kwp,      capex_genset,
                             opex_frac_of_capex,    opex_fixed_per_year,
                             replacement_battery_per_kwh, fuel_price_per_liter,
                             genset_start_cost,     feed_in_tariff_per_mwh,
                             peak_bonus_per_mwh,    penalty_rate()};
    for (double p : prices) {
        if (!(p >= 0.0)) throw std::invalid_argument("economic prices must be >= 0");
    }
}

CashflowSchedule build_cashflows(const SimulationResult& sim, const SystemConfig& cfg,
                                 const EconParams& econ) {
    const auto n_years = static_cast<Eigen::Index>(sim.years.size());
    if (n_years < 1) throw std::invalid_argument("simulation covers no years");

    CashflowSchedule s;
    s.capex = Array::Zero(n_years + 1);
    s.opex = Array::Zero(n_years + 1);
    s.income = Array::Zero(n_years + 1);
    s.energy_mwh = Array::Zero(n_years + 1);

    const double rated = cfg.battery.rated_kwh();
    double initial_capex = rated * econ.capex_battery_per_kwh +
                           cfg.converter.rating_kva * econ.capex_converter_per_kva +
                           cfg.pv.installed_kwp * econ.capex_pv_per_kwp;
    if (cfg.genset) initial_capex += econ.capex_genset;
    s.capex[0] = initial_capex;

    for (int y : sim.replacement_years) {
        if (y < 0 || y >= n_years) throw std::invalid_argument("replacement year out of range");
        s.capex[y + 1] += rated * econ.replacement_battery_per_kwh;
    }

    for (Eigen::Index n = 1; n <= n_years; ++n) {
        const AnnualAggregates& a = sim.years[static_cast<std::size_t>(n - 1)];
        s.opex[n] = econ.opex_frac_of_capex * initial_capex + econ.opex_fixed_per_year +
                    a.fuel_liters * econ.fuel_price_per_liter +
                    static_cast<double>(a.genset_starts) * econ.genset_start_cost;
        if (cfg.application == Application::pv_injection) {
            s.income[n] = a.energy_injected_mwh * econ.feed_in_tariff_per_mwh +
                          a.peak_window_energy_mwh * econ.peak_bonus_per_mwh -
                          a.penalized_deviation_mwh * econ.penalty_rate();
            s.energy_mwh[n] = a.energy_injected_mwh;
        } else {
            s.energy_mwh[n] = a.energy_delivered_mwh;
        }
    }
    return s;
}

double lcoe(const CashflowSchedule& sched, double discount_rate) {
    double cost = 0.0;
    double energy = 0.0;
    for (Eigen::Index n = 0; n < sched.capex.size(); ++n) {
        const double disc = std::pow(1.0 + discount_rate, static_cast<double>(n));
        cost += (sched.capex[n] + sched.opex[n]) / disc;
        energy += sched.energy_mwh[n] / disc;
    }
    if (energy <= 0.0) throw std::runtime_error("discounted energy sum is zero");
    return cost / energy;
}

double npv(const Array& cashflow, double discount_rate) {
    double v = 0.0;
    for (Eigen::Index n = 0; n < cashflow.size(); ++n) {
        v += cashflow[n] / std::pow(1.0 + discount_rate, static_cast<double>(n));
    }
    return v;
}

double npv(const CashflowSchedule& sched, double discount_rate) {
    return npv(sched.cashflow(), discount_rate);
}

std::optional<double> irr(const Array& cashflow, bool* multiple_roots) {
    if (multiple_roots) *multiple_roots = false;
    bool has_pos = false, has_neg = false;
    for (Eigen::Index n = 0; n < cashflow.size(); ++n) {
        has_pos |= cashflow[n] > 0.0;
        has_neg |= cashflow[n] < 0.0;
    }
    if (!has_pos || !has_neg) return std::nullopt;

    constexpr double lo_bound = -0.99;
    constexpr double hi_bound = 10.0;
    constexpr int scan_steps = 2200;

    double prev_x = lo_bound;
    double prev_f = npv(cashflow, prev_x);
    std::optional<double> root;
    for (int i = 1; i <= scan_steps; ++i) {
        const double x = lo_bound + (hi_bound - lo_bound) * i / scan_steps;
        const double f = npv(cashflow, x);
        if (prev_f == 0.0) {
            if (root) {
                if (multiple_roots) *multiple_roots = true;
                break;
            }
            root = prev_x;
        } else if ((prev_f < 0.0) != (f < 0.0)) {
            double a = prev_x, b = x, fa = prev_f;
            for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
                const double m = 0.5 * (a + b);
                const double fm = npv(cashflow, m);
                if (fm == 0.0) {
                    a = b = m;
                    break;
                }
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            if (root) {
                if (multiple_roots) *multiple_roots = true;
                break;
            }
            root = 0.5 * (a + b);
        }
        prev_x = x;
        prev_f = f;
    }
    return root;
}

double score(const CashflowSchedule& sched, Indicator indicator, double discount_rate) {
    switch (indicator) {
        case Indicator::lcoe:
            return lcoe(sched, discount_rate);
        case Indicator::npv:
            return npv(sched, discount_rate);
        case Indicator::irr: {
            const auto r = irr(sched.cashflow());
            if (!r) throw std::runtime_error("IRR undefined: cash flow has no sign change");
            return *r;
        }
    }
    throw std::logic_error("unknown indicator");
}

bool higher_is_better(Indicator indicator) { return indicator != Indicator::lcoe; }

Indicator indicator_from_name(const std::string& name) {
    if (name == "lcoe") return Indicator::lcoe;
    if (name == "npv") return Indicator::npv;
    if (name == "irr") return Indicator::irr;
    throw std::invalid_argument("unknown indicator '" + name + "' (use lcoe, npv or irr)");
}

std::string indicator_name(Indicator indicator) {
    switch (indicator) {
        case Indicator::lcoe:
            return "lcoe";
        case Indicator::npv:
            return "npv";
        case Indicator::irr:
            return "irr";
    }
    return "?";
}

}  // namespace bess
