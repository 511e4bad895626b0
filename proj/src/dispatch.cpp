#include "bess/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bess {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieCredit = 1e-6;  // currency per soc unit, terminal tie-break

void planning_etas(const BatterySpec& spec, double& eta_c, double& eta_d) {
    switch (spec.efficiency_mode) {
        case EfficiencyMode::constant:
            eta_c = eta_d = spec.constant_efficiency;
            return;
        case EfficiencyMode::table:
            eta_c = eta_d = efficiency_lookup(spec, 0.5, 0.25, spec.temperature_c);
            return;
        case EfficiencyMode::fixed:
        default:
            eta_c = spec.eta_charge;
            eta_d = spec.eta_discharge;
            return;
    }
}

// Applies the battery step and closes the bus balance: leftover surplus backs
// the genset off and curtails PV; leftover deficit bumps the genset (when on)
// and the rest goes unserved.
DispatchDecision settle_microgrid(const MicrogridStepInput& in, bool on, bool started,
                                  double p_gen, double request, const BatteryState& batt,
                                  const SystemConfig& cfg, double dt_hours) {
    const double conv = cfg.converter.rating_kva;
    request = std::clamp(request, -conv, conv);
    DispatchDecision d;
    d.genset_on = on;
    d.genset_started = started;
    d.batt = battery_step(cfg.battery_model, batt, cfg.battery, request, dt_hours);
    const double gen_cap =
        cfg.genset && on ? cfg.genset->rated_kw * cfg.genset->max_load_fraction() : 0.0;

    double surplus = in.pv_kw + p_gen - in.load_kw - d.batt.p_actual_kw;
    if (surplus >= 0.0) {
        const double back = std::min(surplus, p_gen);
        p_gen -= back;
        surplus -= back;
        d.pv_curtailed_kw = std::min(surplus, in.pv_kw);
    } else {
        double deficit = -surplus;
        const double add = std::min(deficit, std::max(0.0, gen_cap - p_gen));
        p_gen += add;
        deficit -= add;
        d.unserved_kw = deficit;
    }
    d.p_genset_kw = p_gen;
    return d;
}

}  // namespace

DispatchDecision microgrid_basic_step(const MicrogridStepInput& in, const BatteryState& batt,
                                      const SystemConfig& cfg, double dt_hours) {
    bool on = in.genset_on;
    bool started = false;
    if (cfg.genset) {
        if (!on && batt.soc <= cfg.dispatch.soc_start + 1e-12) {
            on = true;
            started = true;
        } else if (on && batt.soc >= cfg.dispatch.soc_stop - 1e-12) {
            on = false;
        }
    } else {
        on = false;
    }

    double p_gen = 0.0;
    double request;
    if (on) {
        const Genset& g = *cfg.genset;
        const double room = std::min(max_charge_kw(cfg.battery_model, batt, cfg.battery, dt_hours),
                                     cfg.converter.rating_kva);
        const double net = in.load_kw - in.pv_kw;
        p_gen = std::clamp(net + room, 0.0, g.rated_kw);
        if (net > g.rated_kw) p_gen = std::min(net, g.rated_kw * g.max_load_fraction());
        request = in.pv_kw + p_gen - in.load_kw;
    } else {
        request = in.pv_kw - in.load_kw;
    }
    return settle_microgrid(in, on, started, p_gen, request, batt, cfg, dt_hours);
}

namespace {

// Value-table model shared by the solver and the plan extraction.
struct PlanModel {
    double cap = 0.0;  // usable kWh at current soh
    double eta_c = 1.0, eta_d = 1.0;
    double conv = 0.0, gen_rated = 0.0, gen_cap = 0.0;
    double fuel_price = 0.0, start_cost = 0.0;
    double dt = 0.0;  // hours
    double soc_lo = 0.0, soc_hi = 1.0;
    int n = 2;
    const Genset* gen = nullptr;

    double level(int k) const { return soc_lo + (soc_hi - soc_lo) * k / (n - 1); }
    // Signed bus power that moves soc by dsoc over one step (+ = charging).
    double bus_power(double dsoc) const {
        return dsoc > 0.0 ? dsoc * cap / (dt * eta_c) : dsoc * cap * eta_d / dt;
    }
    double fuel_cost(double p_gen) const {
        return genset_fuel_rate(*gen, p_gen / gen_rated, true) * dt * fuel_price;
    }
    // Landing soc when the genset is off; false when the net load is
    // unservable by the battery alone.
    bool off_landing(double soc, double net_kw, double* landing) const {
        if (net_kw <= 0.0) {
            const double room_rate = (soc_hi - soc) * cap / (dt * eta_c);
            const double p_c = std::min({-net_kw, conv, std::max(0.0, room_rate)});
            *landing = soc + p_c * eta_c * dt / cap;
            return true;
        }
        const double avail_rate = std::max(0.0, (soc - soc_lo)) * cap * eta_d / dt;
        if (net_kw > std::min(conv, avail_rate) + 1e-9) return false;
        *landing = soc - net_kw * dt / (eta_d * cap);
        return true;
    }
    // Genset power needed to hit a soc change; negative result means PV
    // surplus is curtailed at p_gen = 0. Returns false when infeasible.
    bool on_power(double dsoc, double net_kw, double pv_kw, double* p_gen) const {
        const double p_bus = bus_power(dsoc);
        if (std::abs(p_bus) > conv + 1e-9) return false;
        double p = net_kw + p_bus;
        if (p < 0.0) {
            if (-p > pv_kw + 1e-9) return false;  // cannot curtail more than PV
            p = 0.0;
        }
        if (p > gen_cap + 1e-9) return false;
        *p_gen = p;
        return true;
    }
};

PlanModel make_plan_model(const BatteryState& batt, const SystemConfig& cfg, double dt_hours) {
    if (!cfg.genset) throw std::invalid_argument("optimized dispatch requires a genset");
    PlanModel m;
    m.cap = batt.usable_kwh();
    planning_etas(cfg.battery, m.eta_c, m.eta_d);
    m.conv = cfg.converter.rating_kva;
    m.gen = &*cfg.genset;
    m.gen_rated = m.gen->rated_kw;
    m.gen_cap = m.gen_rated * m.gen->max_load_fraction();
    m.fuel_price = m.gen->fuel_price_per_liter;
    m.start_cost = m.gen->start_cost;
    m.dt = dt_hours;
    m.soc_lo = cfg.battery.soc_min;
    m.soc_hi = cfg.battery.soc_max;
    m.n = std::max(2, cfg.dispatch.n_soc);
    return m;
}

double interp_value(const double* v, const PlanModel& m, double soc) {
    if (soc <= m.soc_lo) return v[0];
    if (soc >= m.soc_hi) return v[m.n - 1];
    const double pos = (soc - m.soc_lo) / (m.soc_hi - m.soc_lo) * (m.n - 1);
    const int k = std::min(m.n - 2, static_cast<int>(pos));
    const double f = pos - k;
    if (f < 1e-12) return v[k];
    if (f > 1.0 - 1e-12) return v[k + 1];
    if (v[k] == kInf || v[k + 1] == kInf) return kInf;
    return v[k] + f * (v[k + 1] - v[k]);
}

}  // namespace

DayPlan microgrid_optimized_day(const TimeSeries& load_fc, const TimeSeries& pv_fc,
                                const BatteryState& batt, bool genset_on,
                                const SystemConfig& cfg) {
    if (!aligned(load_fc, pv_fc)) {
        throw std::invalid_argument("load and pv forecasts must share the day grid");
    }
    const int T = static_cast<int>(load_fc.size());
    const double dt = load_fc.step_hours();
    const PlanModel m = make_plan_model(batt, cfg, dt);
    const int n = m.n;

    // Reachable level window per step, from converter-limited soc movement.
    const double span = m.soc_hi - m.soc_lo;
    const double dlevel = span / (n - 1);
    const int up = static_cast<int>(
        std::min<double>(n - 1, m.conv * m.eta_c * m.dt / m.cap / dlevel + 1.0));
    const int down = static_cast<int>(
        std::min<double>(n - 1, m.conv * m.dt / (m.eta_d * m.cap) / dlevel + 1.0));

    // value[t][on][k]; layered flat storage, terminal layer at t = T
    std::vector<double> value(static_cast<std::size_t>(T + 1) * 2 * n);
    auto layer = [&](int t, int on) { return value.data() + (static_cast<std::size_t>(t) * 2 + on) * n; };
    for (int on = 0; on < 2; ++on) {
        double* v = layer(T, on);
        for (int k = 0; k < n; ++k) {
            const double soc = m.level(k);
            v[k] = soc >= batt.soc - cfg.dispatch.terminal_slack - 1e-9 ? -kTieCredit * soc : kInf;
        }
    }

    for (int t = T - 1; t >= 0; --t) {
        const double net = load_fc.values[t] - pv_fc.values[t];
        const double pv = pv_fc.values[t];
        const double* v_off = layer(t + 1, 0);
        const double* v_on = layer(t + 1, 1);
        for (int on_s = 0; on_s < 2; ++on_s) {
            double* v = layer(t, on_s);
            const double start = on_s ? 0.0 : m.start_cost;
            for (int k = 0; k < n; ++k) {
                const double soc = m.level(k);
                double best = kInf;
                double landing;
                if (m.off_landing(soc, net, &landing)) {
                    best = interp_value(v_off, m, landing);
                }
                const int k2_lo = std::max(0, k - down);
                const int k2_hi = std::min(n - 1, k + up);
                for (int k2 = k2_lo; k2 <= k2_hi; ++k2) {
                    double p_gen;
                    if (!m.on_power(m.level(k2) - soc, net, pv, &p_gen)) continue;
                    if (v_on[k2] == kInf) continue;
                    const double c = m.fuel_cost(p_gen) + start + v_on[k2];
                    if (c < best) best = c;
                }
                v[k] = best;
            }
        }
    }

    // Infeasible day: even genset-always-on cannot serve the forecast.
    if (interp_value(layer(0, genset_on ? 1 : 0), m, batt.soc) == kInf) {
        int bad = 0;
        for (int t = 0; t < T; ++t) {
            const double net = load_fc.values[t] - pv_fc.values[t];
            if (net > m.gen_cap + m.conv) {
                bad = t;
                break;
            }
        }
        throw std::runtime_error("optimized dispatch: day infeasible at step " +
                                 std::to_string(bad) + " (forecast net load " +
                                 std::to_string(load_fc.values[bad] - pv_fc.values[bad]) +
                                 " kW exceeds genset plus battery capability)");
    }

    // Forward extraction with continuous soc against the value tables.
    DayPlan plan;
    plan.on.resize(static_cast<std::size_t>(T));
    plan.target_soc.resize(static_cast<std::size_t>(T));
    double soc = batt.soc;
    bool on = genset_on;
    for (int t = 0; t < T; ++t) {
        const double net = load_fc.values[t] - pv_fc.values[t];
        const double pv = pv_fc.values[t];
        const double* v_off = layer(t + 1, 0);
        const double* v_on = layer(t + 1, 1);
        const double start = on ? 0.0 : m.start_cost;

        double best = kInf;
        bool best_on = false;
        double best_landing = soc;
        double best_cost = 0.0;
        double landing;
        if (m.off_landing(soc, net, &landing)) {
            best = interp_value(v_off, m, landing);
            best_landing = landing;
        }
        const double pos = (soc - m.soc_lo) / dlevel;
        const int k2_lo = std::max(0, static_cast<int>(pos) - down - 1);
        const int k2_hi = std::min(n - 1, static_cast<int>(pos) + up + 1);
        for (int k2 = k2_lo; k2 <= k2_hi; ++k2) {
            double p_gen;
            if (!m.on_power(m.level(k2) - soc, net, pv, &p_gen)) continue;
            if (v_on[k2] == kInf) continue;
            const double cost = m.fuel_cost(p_gen) + start;
            if (cost + v_on[k2] < best - 1e-15) {
                best = cost + v_on[k2];
                best_on = true;
                best_landing = m.level(k2);
                best_cost = cost;
            }
        }
        if (best == kInf) {
            throw std::runtime_error("optimized dispatch: plan extraction failed at step " +
                                     std::to_string(t));
        }
        plan.on[t] = best_on ? 1 : 0;
        plan.target_soc[t] = best_landing;
        plan.planned_cost += best_on ? best_cost : 0.0;
        soc = best_landing;
        on = best_on;
    }
    return plan;
}

DispatchDecision microgrid_planned_step(const MicrogridStepInput& in, const DayPlan& plan,
                                        int step_of_day, const BatteryState& batt,
                                        const SystemConfig& cfg, double dt_hours,
                                        bool* forced_on) {
    const auto t = static_cast<std::size_t>(step_of_day);
    if (t >= plan.on.size()) throw std::out_of_range("step beyond day plan");
    const bool planned_on = plan.on[t] != 0;

    // Recovery only needs to lift the battery off its floor; the next plan
    // re-optimizes from the real state, so charging further would overrule it.
    const double recover_soc = std::min(cfg.battery.soc_min + 0.05, cfg.dispatch.soc_stop);
    if (*forced_on && (planned_on || batt.soc >= recover_soc - 1e-12)) {
        *forced_on = false;
    }
    if (!planned_on && !*forced_on && in.load_kw > in.pv_kw &&
        batt.soc <= cfg.battery.soc_min + 1e-9) {
        *forced_on = true;  // stranded at the soc floor with net demand
    }
    const bool on = planned_on || *forced_on;
    const bool started = on && !in.genset_on;

    double p_gen = 0.0;
    double request;
    const double conv = cfg.converter.rating_kva;
    if (on && cfg.genset) {
        const Genset& g = *cfg.genset;
        const double net = in.load_kw - in.pv_kw;
        if (*forced_on && !planned_on) {
            const double room = std::min(
                max_charge_kw(cfg.battery_model, batt, cfg.battery, dt_hours), conv);
            p_gen = std::clamp(net + room, 0.0, g.rated_kw);
            if (net > g.rated_kw) p_gen = std::min(net, g.rated_kw * g.max_load_fraction());
        } else {
            double eta_c, eta_d;
            planning_etas(cfg.battery, eta_c, eta_d);
            const double cap = batt.usable_kwh();
            const double dsoc = plan.target_soc[t] - batt.soc;
            double p_bus = dsoc > 0.0 ? dsoc * cap / (dt_hours * eta_c)
                                      : dsoc * cap * eta_d / dt_hours;
            p_bus = std::clamp(p_bus, -conv, conv);
            p_gen = std::clamp(net + p_bus, 0.0, g.rated_kw * g.max_load_fraction());
        }
        request = in.pv_kw + p_gen - in.load_kw;
    } else {
        request = in.pv_kw - in.load_kw;
    }
    return settle_microgrid(in, on, started, p_gen, request, batt, cfg, dt_hours);
}

bool in_peak_window(Minute minute_of_day, const DispatchConfig& d) {
    const double m = static_cast<double>(minute_of_day);
    return m >= d.peak_start_hour * 60.0 && m < d.peak_end_hour * 60.0;
}

namespace {

// Peak floor plus the raising passes that restore ramp feasibility in both
// directions without ever lowering a commitment.
void finish_profile(Array& vals, const TimeSeries& grid, double floor_kw, double ramp_kw,
                    const DispatchConfig& d) {
    const auto T = vals.size();
    for (Eigen::Index i = 0; i < T; ++i) {
        const Minute mod = minute_of_day(grid.start + static_cast<Minute>(i) * grid.step_minutes);
        if (in_peak_window(mod, d)) vals[i] = std::max(vals[i], floor_kw);
    }
    for (Eigen::Index i = T - 2; i >= 0; --i) vals[i] = std::max(vals[i], vals[i + 1] - ramp_kw);
    for (Eigen::Index i = 1; i < T; ++i) vals[i] = std::max(vals[i], vals[i - 1] - ramp_kw);
}

}  // namespace

AnnouncedProfile pv_injection_announce(const TimeSeries& pv_fc_day, const BatteryState& batt,
                                       const SystemConfig& cfg) {
    const DispatchConfig& d = cfg.dispatch;
    const double kwp = cfg.pv.installed_kwp;
    const double conv = cfg.converter.rating_kva;
    const double ramp_kw = d.ramp_frac_per_minute * kwp * pv_fc_day.step_minutes;
    const double floor_kw = d.peak_fraction * kwp;
    const double dt_h = pv_fc_day.step_hours();
    const auto T = pv_fc_day.size();

    TimeSeries smooth = moving_average(pv_fc_day, d.smoothing_minutes);
    Array base = smooth.values;
    base[0] = std::min(base[0], conv);
    for (Eigen::Index i = 1; i < T; ++i) {
        base[i] = std::min(std::clamp(base[i], base[i - 1] - ramp_kw, base[i - 1] + ramp_kw), conv);
    }

    Array prof = base;
    finish_profile(prof, pv_fc_day, floor_kw, ramp_kw, d);

    // Energy the battery must supply from the evening ramp-in onward, and the
    // pre-evening commitment reduction that reserves it.
    Eigen::Index evening = T;
    for (Eigen::Index i = 0; i < T; ++i) {
        const Minute mod =
            minute_of_day(pv_fc_day.start + static_cast<Minute>(i) * pv_fc_day.step_minutes);
        if (in_peak_window(mod, d)) {
            evening = i;
            break;
        }
    }
    const auto ramp_steps =
        static_cast<Eigen::Index>(std::ceil(floor_kw / std::max(ramp_kw, 1e-9)));
    evening = std::max<Eigen::Index>(0, evening - ramp_steps);

    double e_need = 0.0;
    for (Eigen::Index i = evening; i < T; ++i) {
        e_need += std::max(0.0, prof[i] - pv_fc_day.values[i]) * dt_h;
    }
    const double usable =
        (cfg.battery.soc_max - cfg.battery.soc_min) * batt.usable_kwh();

    AnnouncedProfile out;
    out.battery_warning = usable + 1e-9 < e_need;

    const double reserve = std::min(e_need * 1.15, usable);
    if (evening > 0 && reserve > 0.0) {
        const double shave_kw = reserve / (static_cast<double>(evening) * dt_h);
        Array vals = base;
        for (Eigen::Index i = 0; i < evening; ++i) vals[i] = std::max(0.0, vals[i] - shave_kw);
        finish_profile(vals, pv_fc_day, floor_kw, ramp_kw, d);
        prof = vals;
    }

    out.committed.start = pv_fc_day.start;
    out.committed.step_minutes = pv_fc_day.step_minutes;
    out.committed.values = prof;
    return out;
}

bool announced_profile_valid(const AnnouncedProfile& profile, const SystemConfig& cfg) {
    const TimeSeries& s = profile.committed;
    const DispatchConfig& d = cfg.dispatch;
    const double ramp_kw = d.ramp_frac_per_minute * cfg.pv.installed_kwp * s.step_minutes;
    const double floor_kw = d.peak_fraction * cfg.pv.installed_kwp;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        const double v = s.values[i];
        if (!(v >= -1e-9) || v > cfg.converter.rating_kva + 1e-9) return false;
        if (i > 0 && std::abs(v - s.values[i - 1]) > ramp_kw + 1e-9) return false;
        const Minute mod = minute_of_day(s.start + static_cast<Minute>(i) * s.step_minutes);
        if (in_peak_window(mod, d) && v < floor_kw - 1e-9) return false;
    }
    return true;
}

DispatchDecision pv_injection_step(double pv_kw, double committed_kw, const BatteryState& batt,
                                   const SystemConfig& cfg, double dt_hours) {
    const double conv = cfg.converter.rating_kva;
    DispatchDecision d;
    if (pv_kw >= committed_kw) {
        const double surplus = pv_kw - committed_kw;
        const double request = std::min(surplus, conv);
        d.batt = battery_step(cfg.battery_model, batt, cfg.battery, request, dt_hours);
        const double leftover = surplus - d.batt.p_actual_kw;
        const double extra = std::min(leftover, std::max(0.0, conv - committed_kw));
        d.p_injected_kw = committed_kw + extra;
        d.pv_curtailed_kw = leftover - extra;
    } else {
        const double want = std::min(committed_kw - pv_kw, conv);
        d.batt = battery_step(cfg.battery_model, batt, cfg.battery, -want, dt_hours);
        d.p_injected_kw = pv_kw - d.batt.p_actual_kw;
    }
    return d;
}

}  // namespace bess
