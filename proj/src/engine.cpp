#include "bess/engine.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "bess/dispatch.hpp"

namespace bess {

void SystemConfig::validate() const {
    if (step_minutes <= 0 || kMinutesPerDay % step_minutes != 0) {
        throw std::invalid_argument("simulation.step_minutes must divide a day");
    }
    if (lifetime_years < 1) throw std::invalid_argument("simulation.lifetime_years must be >= 1");
    battery.validate();
    if (battery_model == BatteryModelKind::ec && !battery.ec) {
        throw std::invalid_argument("battery.model = ec requires equivalent-circuit parameters");
    }
    if (pv.installed_kwp < 0.0) throw std::invalid_argument("pv.installed_kwp must be >= 0");
    if (!(pv.annual_degradation >= 0.0 && pv.annual_degradation < 1.0)) {
        throw std::invalid_argument("pv.annual_degradation must be in [0,1)");
    }
    if (converter.rating_kva <= 0.0) throw std::invalid_argument("converter.rating_kva must be > 0");
    if (genset) genset->validate();

    if (application == Application::pv_injection) {
        if (dispatch.strategy != DispatchStrategy::pv_injection) {
            throw std::invalid_argument("pv_injection application requires dispatch.strategy = pv_injection");
        }
    } else if (dispatch.strategy == DispatchStrategy::pv_injection) {
        throw std::invalid_argument("dispatch.strategy = pv_injection requires the pv_injection application");
    }
    if (dispatch.strategy == DispatchStrategy::optimized && !genset) {
        throw std::invalid_argument("optimized dispatch requires a genset");
    }
    if (!(dispatch.soc_start >= 0.0 && dispatch.soc_start < dispatch.soc_stop &&
          dispatch.soc_stop <= 1.0)) {
        throw std::invalid_argument("dispatch thresholds must satisfy 0 <= start < stop <= 1");
    }
    if (dispatch.n_soc < 2) throw std::invalid_argument("dispatch.n_soc must be >= 2");
    if (!(dispatch.terminal_slack >= 0.0 && dispatch.terminal_slack <= 1.0)) {
        throw std::invalid_argument("dispatch.terminal_slack must be in [0,1]");
    }
    if (dispatch.smoothing_minutes <= 0 || dispatch.ramp_frac_per_minute <= 0.0) {
        throw std::invalid_argument("dispatch smoothing and ramp limits must be > 0");
    }
    if (!(dispatch.peak_start_hour >= 0.0 && dispatch.peak_start_hour < dispatch.peak_end_hour &&
          dispatch.peak_end_hour <= 24.0)) {
        throw std::invalid_argument("dispatch peak window hours are invalid");
    }
    if (dispatch.peak_fraction < 0.0 || dispatch.tolerance_frac < 0.0) {
        throw std::invalid_argument("dispatch peak fraction and tolerance must be >= 0");
    }
    if (!(forecast.blend_weight >= 0.0 && forecast.blend_weight <= 1.0)) {
        throw std::invalid_argument("forecast.blend_weight must be in [0,1]");
    }
    if (forecast.smoothing_minutes <= 0) {
        throw std::invalid_argument("forecast.smoothing_minutes must be > 0");
    }
}

double SimulationResult::total_fuel_liters() const {
    double total = 0.0;
    for (const auto& y : years) total += y.fuel_liters;
    return total;
}

long SimulationResult::total_starts() const {
    long total = 0;
    for (const auto& y : years) total += y.genset_starts;
    return total;
}

double SimulationResult::total_cost_fuel_and_starts(double fuel_price, double start_cost) const {
    return total_fuel_liters() * fuel_price + static_cast<double>(total_starts()) * start_cost;
}

namespace {

TimeSeries make_baseline(const TimeSeries& actual, ForecastBaseline kind,
                         const ForecastSpec& f) {
    switch (kind) {
        case ForecastBaseline::perfect:
            return actual;
        case ForecastBaseline::persistence:
            return persistence_forecast(actual, 7 * kMinutesPerDay);
        case ForecastBaseline::smoothed:
        default:
            return moving_average(actual, f.smoothing_minutes);
    }
}

TimeSeries make_forecast(const TimeSeries& actual, ForecastBaseline kind,
                         const ForecastSpec& f) {
    return blend_forecast(make_baseline(actual, kind, f), actual, f.blend_weight);
}

TimeSeries day_slice(const TimeSeries& s, int day, int steps_per_day, double scale) {
    TimeSeries out;
    out.start = s.start + static_cast<Minute>(day) * kMinutesPerDay;
    out.step_minutes = s.step_minutes;
    out.values = s.values.segment(static_cast<Eigen::Index>(day) * steps_per_day,
                                  steps_per_day) *
                 scale;
    return out;
}

}  // namespace

SimulationResult simulate(const SystemConfig& cfg, int horizon_years) {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.validate();
    if (horizon_years < 1) throw std::invalid_argument("horizon_years must be >= 1");

    const int step = cfg.step_minutes;
    const double dt = step / 60.0;
    const int spd = kMinutesPerDay / step;
    const auto year_steps = static_cast<Eigen::Index>(spd) * kDaysPerYear;

    const TimeSeries pv = resample(cfg.pv_producible, step);
    if (pv.size() != year_steps) {
        throw std::invalid_argument("pv series must cover exactly one year at the simulation step");
    }
    TimeSeries load;
    const bool microgrid = cfg.application == Application::microgrid;
    if (microgrid) {
        load = resample(cfg.load, step);
        if (load.size() != year_steps) {
            throw std::invalid_argument(
                "load series must cover exactly one year at the simulation step");
        }
    }

    const bool optimized = cfg.dispatch.strategy == DispatchStrategy::optimized;
    TimeSeries pv_fc, load_fc;
    if (optimized || !microgrid) pv_fc = make_forecast(pv, cfg.forecast.pv, cfg.forecast);
    if (optimized) load_fc = make_forecast(load, cfg.forecast.load, cfg.forecast);

    BatteryState state = initial_state(cfg.battery, 0.5);
    const double rated = cfg.battery.rated_kwh();
    bool genset_on = false;
    bool forced_on = false;

    SimulationResult res;
    res.years.reserve(static_cast<std::size_t>(horizon_years));
    double eta_weighted = 0.0;
    double eta_weight = 0.0;

    for (int year = 0; year < horizon_years; ++year) {
        const double f_pv = pv_degradation_factor(cfg.pv, year);
        AnnualAggregates agg;
        for (int day = 0; day < kDaysPerYear; ++day) {
            DayPlan plan;
            AnnouncedProfile ann;
            if (optimized) {
                try {
                    plan = microgrid_optimized_day(day_slice(load_fc, day, spd, 1.0),
                                                   day_slice(pv_fc, day, spd, f_pv), state,
                                                   genset_on, cfg);
                } catch (const std::runtime_error& e) {
                    throw std::runtime_error("year " + std::to_string(year) + ", day " +
                                             std::to_string(day) + ": " + e.what());
                }
            } else if (!microgrid) {
                ann = pv_injection_announce(day_slice(pv_fc, day, spd, f_pv), state, cfg);
            }

            for (int s = 0; s < spd; ++s) {
                const Eigen::Index i = static_cast<Eigen::Index>(day) * spd + s;
                const double pv_now = pv.values[i] * f_pv;
                const double prev_throughput = state.throughput_kwh;

                DispatchDecision d;
                double load_now = 0.0;
                if (microgrid) {
                    load_now = load.values[i];
                    const MicrogridStepInput in{load_now, pv_now, genset_on};
                    d = optimized ? microgrid_planned_step(in, plan, s, state, cfg, dt, &forced_on)
                                  : microgrid_basic_step(in, state, cfg, dt);
                    genset_on = d.genset_on;
                } else {
                    d = pv_injection_step(pv_now, ann.committed.values[s], state, cfg, dt);
                }

                state = d.batt.state;
                const double step_throughput = state.throughput_kwh - prev_throughput;
                const long prev_rep = state.replacements;
                state = age_update(state, cfg.battery, dt / 8760.0,
                                   step_throughput / (2.0 * rated));
                if (state.replacements > prev_rep) res.replacement_years.push_back(year);

                if (microgrid) {
                    agg.energy_delivered_mwh += (load_now - d.unserved_kw) * dt / 1000.0;
                    agg.unserved_mwh += d.unserved_kw * dt / 1000.0;
                    if (cfg.genset) {
                        agg.fuel_liters +=
                            genset_fuel_rate(*cfg.genset,
                                             d.genset_on ? d.p_genset_kw / cfg.genset->rated_kw
                                                         : 0.0,
                                             d.genset_on) *
                            dt;
                        agg.genset_starts += d.genset_started ? 1 : 0;
                        agg.genset_hours += d.genset_on ? dt : 0.0;
                    }
                } else {
                    agg.energy_injected_mwh += d.p_injected_kw * dt / 1000.0;
                    const Minute mod = minute_of_day(pv.start + i * step);
                    if (in_peak_window(mod, cfg.dispatch)) {
                        agg.peak_window_energy_mwh += d.p_injected_kw * dt / 1000.0;
                    }
                    const double dev = std::abs(d.p_injected_kw - ann.committed.values[s]);
                    const double band = cfg.dispatch.tolerance_frac * cfg.pv.installed_kwp;
                    agg.penalized_deviation_mwh += std::max(0.0, dev - band) * dt / 1000.0;
                }
                agg.pv_curtailed_mwh += d.pv_curtailed_kw * dt / 1000.0;
                agg.battery_throughput_mwh += step_throughput / 1000.0;
                eta_weighted += d.batt.eta_weight_kwh * d.batt.eta_value;
                eta_weight += d.batt.eta_weight_kwh;

                const double charge = std::max(d.batt.p_actual_kw, 0.0);
                const double discharge = std::max(-d.batt.p_actual_kw, 0.0);
                const double lhs =
                    (load_now - d.unserved_kw) + charge + d.pv_curtailed_kw + d.p_injected_kw;
                const double rhs = pv_now + d.p_genset_kw + discharge;
                res.max_balance_residual_kw =
                    std::max(res.max_balance_residual_kw, std::abs(lhs - rhs));
                ++res.steps;
            }
        }
        res.years.push_back(agg);
    }

    res.final_battery = state;
    res.mean_one_way_efficiency = eta_weight > 0.0 ? eta_weighted / eta_weight : 1.0;
    res.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

SimulationResult extrapolate_single_year(const SimulationResult& one_year,
                                         const SystemConfig& cfg, int lifetime_years) {
    const auto t0 = std::chrono::steady_clock::now();
    if (one_year.years.size() != 1) {
        throw std::invalid_argument("single-year extrapolation needs a one-year result");
    }
    if (lifetime_years < 1) throw std::invalid_argument("lifetime_years must be >= 1");

    const AnnualAggregates& a0 = one_year.years.front();
    SimulationResult res;
    res.years.reserve(static_cast<std::size_t>(lifetime_years));
    for (int y = 0; y < lifetime_years; ++y) {
        const double ratio = pv_degradation_factor(cfg.pv, y);
        AnnualAggregates a = a0;
        a.energy_injected_mwh *= ratio;
        a.peak_window_energy_mwh *= ratio;
        a.pv_curtailed_mwh *= ratio;
        res.years.push_back(a);
    }

    const double consumed = 1.0 - kReplacementSoh;
    const double fade1 = static_cast<double>(one_year.replacement_years.size()) * consumed +
                         (1.0 - one_year.final_battery.soh);
    if (cfg.battery.ageing.enabled && fade1 > 0.0) {
        for (int k = 1;; ++k) {
            const auto year_one_based =
                static_cast<int>(std::ceil(consumed * k / fade1 - 1e-9));
            if (year_one_based > lifetime_years) break;
            res.replacement_years.push_back(year_one_based - 1);
        }
    }

    res.final_battery = one_year.final_battery;
    const double total_fade = fade1 * lifetime_years -
                              consumed * static_cast<double>(res.replacement_years.size());
    res.final_battery.soh = std::clamp(1.0 - total_fade, kReplacementSoh, 1.0);
    res.final_battery.age_years = static_cast<double>(lifetime_years);
    res.max_balance_residual_kw = one_year.max_balance_residual_kw;
    res.mean_one_way_efficiency = one_year.mean_one_way_efficiency;
    res.steps = one_year.steps;
    res.runtime_seconds =
        one_year.runtime_seconds +
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace bess
