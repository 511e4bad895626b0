#include "bess/sizing.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace bess {

namespace {

double rel_delta(double value, double reference) {
    return (value - reference) / std::max(std::abs(reference), 1e-12);
}

std::string strategy_label(DispatchStrategy s) {
    switch (s) {
        case DispatchStrategy::basic: return "basic";
        case DispatchStrategy::optimized: return "optimized";
        case DispatchStrategy::pv_injection: return "pv_injection";
    }
    return "?";
}

std::string model_label(BatteryModelKind m) {
    return m == BatteryModelKind::ec ? "ec_model" : "ep_model";
}

// The approximation pipeline runs at 10-minute resolution when the input
// series allow it; otherwise the configured step is kept.
int approx_step_minutes(const SystemConfig& cfg) {
    const int step = 10;
    const auto fits = [&](const TimeSeries& ts) {
        return ts.size() == 0 ||
               (ts.step_minutes <= step && step % ts.step_minutes == 0);
    };
    if (fits(cfg.pv_producible) && fits(cfg.load)) return step;
    return cfg.step_minutes;
}

SizeRun run_one(const Scenario& scenario, double size_kwh, bool approximate) {
    const auto t0 = std::chrono::steady_clock::now();

    SystemConfig cfg = scenario.system;
    cfg.battery.n_modules = quantized_modules(size_kwh, cfg.battery.module_kwh);
    SimulationResult sim;
    if (approximate) {
        cfg.battery_model = BatteryModelKind::ep;
        cfg.step_minutes = approx_step_minutes(cfg);
        const SimulationResult one_year = simulate(cfg, 1);
        sim = extrapolate_single_year(one_year, cfg, cfg.lifetime_years);
    } else {
        sim = simulate(cfg, cfg.lifetime_years);
    }
    const CashflowSchedule sched = build_cashflows(sim, cfg, scenario.econ);

    SizeRun run;
    run.size_kwh = size_kwh;
    run.n_modules = cfg.battery.n_modules;
    run.lcoe_eur_mwh = lcoe(sched, scenario.econ.discount_rate);
    run.npv_eur = npv(sched, scenario.econ.discount_rate);
    run.irr = irr(sched.cashflow(), &run.irr_multiple);
    run.replacements = static_cast<int>(sim.replacement_years.size());
    run.mean_efficiency = sim.mean_one_way_efficiency;
    for (const AnnualAggregates& y : sim.years) {
        run.fuel_liters += y.fuel_liters;
        run.genset_starts += y.genset_starts;
        run.penalized_mwh += y.penalized_deviation_mwh;
        run.injected_mwh += y.energy_injected_mwh;
        run.unserved_mwh += y.unserved_mwh;
    }
    run.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

}  // namespace

int quantized_modules(double size_kwh, double module_kwh) {
    if (module_kwh <= 0.0 || !std::isfinite(module_kwh)) {
        throw std::invalid_argument("module_kwh must be positive");
    }
    if (size_kwh <= 0.0 || !std::isfinite(size_kwh)) {
        throw std::invalid_argument("size_kwh must be positive");
    }
    return static_cast<int>(std::max<long long>(1, std::llround(size_kwh / module_kwh)));
}

double SizeRun::value(Indicator indicator) const {
    switch (indicator) {
        case Indicator::lcoe: return lcoe_eur_mwh;
        case Indicator::npv: return npv_eur;
        case Indicator::irr: return irr ? *irr : std::nan("");
    }
    return std::nan("");
}

std::vector<SizeRun> sweep_runs(const Scenario& scenario, const SweepOptions& options) {
    const std::vector<double>& sizes = scenario.sizes_kwh;
    if (sizes.empty()) throw std::invalid_argument("sweep needs at least one size");

    std::vector<SizeRun> runs(sizes.size());
    std::vector<std::string> errors(sizes.size());
    const int threads =
        std::max(1, std::min<int>(options.threads, static_cast<int>(sizes.size())));

    if (threads == 1) {
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            try {
                runs[i] = run_one(scenario, sizes[i], options.approximate);
            } catch (const std::exception& e) {
                errors[i] = e.what();
                break;
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        const auto worker = [&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const std::size_t i = next.fetch_add(1);
                if (i >= sizes.size()) return;
                try {
                    runs[i] = run_one(scenario, sizes[i], options.approximate);
                } catch (const std::exception& e) {
                    errors[i] = e.what();
                    failed.store(true, std::memory_order_relaxed);
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (!errors[i].empty()) {
            std::ostringstream msg;
            msg << "sweep failed at size " << sizes[i] << " kWh: " << errors[i];
            throw std::runtime_error(msg.str());
        }
    }
    return runs;
}

IndicatorCurve make_curve(const std::vector<SizeRun>& runs, Indicator indicator) {
    IndicatorCurve curve;
    curve.indicator = indicator;
    curve.maximize = higher_is_better(indicator);
    curve.points.reserve(runs.size());
    for (const SizeRun& r : runs) curve.points.push_back({r.size_kwh, r.value(indicator)});
    curve.optimum = optimum_index(curve.points, indicator);
    return curve;
}

IndicatorCurve sweep(const Scenario& scenario, const SweepOptions& options) {
    return make_curve(sweep_runs(scenario, options), scenario.indicator);
}

std::size_t optimum_index(const std::vector<CurvePoint>& points, Indicator indicator) {
    if (points.empty()) throw std::invalid_argument("cannot locate the optimum of an empty curve");
    const bool maximize = higher_is_better(indicator);
    // NaN (e.g. undefined IRR) never wins; strict comparison keeps the
    // smallest size on ties.
    const auto better = [&](double candidate, double incumbent) {
        if (std::isnan(candidate)) return false;
        if (std::isnan(incumbent)) return true;
        return maximize ? candidate > incumbent : candidate < incumbent;
    };
    std::size_t best = 0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (better(points[i].value, points[best].value)) best = i;
    }
    return best;
}

CurvePoint find_optimum(const IndicatorCurve& curve) {
    return curve.points.at(optimum_index(curve.points, curve.indicator));
}

const std::vector<std::string>& sensitivity_factors() {
    static const std::vector<std::string> factors = {
        "control_strategy", "forecast_quality", "efficiency_precision",
        "ageing",           "model_fidelity",   "time_step",
    };
    return factors;
}

namespace {

struct Variant {
    std::string label;
    Scenario scenario;
};

std::vector<Variant> comparative_variants(const Scenario& base, const std::string& factor,
                                          const std::vector<SizeRun>& baseline_runs) {
    std::vector<Variant> out;
    const auto push = [&](std::string label, auto&& mutate) {
        Variant v{std::move(label), base};
        mutate(v.scenario);
        out.push_back(std::move(v));
    };

    if (factor == "control_strategy") {
        if (base.system.application != Application::microgrid) {
            throw std::invalid_argument(
                "factor control_strategy applies to microgrid scenarios only");
        }
        const DispatchStrategy other = base.system.dispatch.strategy == DispatchStrategy::basic
                                           ? DispatchStrategy::optimized
                                           : DispatchStrategy::basic;
        push(strategy_label(other), [&](Scenario& s) { s.system.dispatch.strategy = other; });
    } else if (factor == "forecast_quality") {
        push("blend_50", [](Scenario& s) { s.system.forecast.blend_weight = 0.5; });
        push("perfect", [](Scenario& s) { s.system.forecast.blend_weight = 1.0; });
    } else if (factor == "efficiency_precision") {
        // The constant is pinned to the duty-weighted mean one-way efficiency
        // observed at the middle of the baseline curve.
        const double probe = baseline_runs[baseline_runs.size() / 2].mean_efficiency;
        push("constant_eta", [&](Scenario& s) {
            s.system.battery_model = BatteryModelKind::ep;
            s.system.battery.efficiency_mode = EfficiencyMode::constant;
            s.system.battery.constant_efficiency = probe;
        });
    } else if (factor == "ageing") {
        push("ageing_off", [](Scenario& s) { s.system.battery.ageing.enabled = false; });
    } else if (factor == "model_fidelity") {
        const BatteryModelKind other = base.system.battery_model == BatteryModelKind::ec
                                           ? BatteryModelKind::ep
                                           : BatteryModelKind::ec;
        push(model_label(other), [&](Scenario& s) {
            s.system.battery_model = other;
            if (other == BatteryModelKind::ec && !s.system.battery.ec) {
                s.system.battery.ec = EcParams{};
            }
        });
    } else if (factor == "time_step") {
        for (int step : {1, 10, 60}) {
            if (step == base.system.step_minutes) continue;
            push("step_" + std::to_string(step) + "min",
                 [step](Scenario& s) { s.system.step_minutes = step; });
        }
    } else {
        std::string valid;
        for (const std::string& f : sensitivity_factors()) {
            if (!valid.empty()) valid += ", ";
            valid += f;
        }
        throw std::invalid_argument("unknown sensitivity factor '" + factor +
                                    "'; valid factors: " + valid);
    }
    return out;
}

std::string baseline_label(const Scenario& base, const std::string& factor) {
    if (factor == "control_strategy") return strategy_label(base.system.dispatch.strategy);
    if (factor == "forecast_quality") return "baseline";
    if (factor == "efficiency_precision") return "variable_eta";
    if (factor == "ageing") return base.system.battery.ageing.enabled ? "ageing_on" : "ageing_off";
    if (factor == "model_fidelity") return model_label(base.system.battery_model);
    if (factor == "time_step") {
        return "step_" + std::to_string(base.system.step_minutes) + "min";
    }
    return "baseline";
}

ScenarioCurve against_baseline(std::string label, std::vector<SizeRun> runs,
                               const ScenarioCurve& baseline, Indicator indicator) {
    ScenarioCurve sc;
    sc.label = std::move(label);
    sc.curve = make_curve(runs, indicator);
    sc.runs = std::move(runs);
    sc.delta_vs_baseline.reserve(sc.curve.points.size());
    for (std::size_t i = 0; i < sc.curve.points.size(); ++i) {
        sc.delta_vs_baseline.push_back(
            rel_delta(sc.curve.points[i].value, baseline.curve.points[i].value));
    }
    sc.optimum_value_variation = rel_delta(sc.curve.best().value, baseline.curve.best().value);
    sc.optimum_size_shift_kwh = sc.curve.best().size_kwh - baseline.curve.best().size_kwh;
    return sc;
}

}  // namespace

SensitivityReport run_sensitivity(const Scenario& scenario, const std::string& factor,
                                  const SweepOptions& options) {
    if (std::find(sensitivity_factors().begin(), sensitivity_factors().end(), factor) ==
        sensitivity_factors().end()) {
        std::string valid;
        for (const std::string& f : sensitivity_factors()) {
            if (!valid.empty()) valid += ", ";
            valid += f;
        }
        throw std::invalid_argument("unknown sensitivity factor '" + factor +
                                    "'; valid factors: " + valid);
    }

    SensitivityReport report;
    report.factor = factor;
    report.indicator = scenario.indicator;
    report.sizes_kwh = scenario.sizes_kwh;

    std::vector<SizeRun> base_runs = sweep_runs(scenario, options);
    ScenarioCurve baseline;
    baseline.label = baseline_label(scenario, factor);
    baseline.curve = make_curve(base_runs, scenario.indicator);
    baseline.delta_vs_baseline.assign(base_runs.size(), 0.0);
    baseline.runs = std::move(base_runs);
    report.scenarios.push_back(baseline);

    for (Variant& v : comparative_variants(scenario, factor, report.scenarios[0].runs)) {
        std::vector<SizeRun> runs = sweep_runs(v.scenario, options);
        report.scenarios.push_back(against_baseline(std::move(v.label), std::move(runs),
                                                    report.scenarios[0], scenario.indicator));
    }
    return report;
}

ApproxReport fast_approximation(const Scenario& scenario, const SweepOptions& options) {
    SweepOptions full = options;
    full.approximate = false;
    SweepOptions fast = options;
    fast.approximate = true;

    ApproxReport report;
    report.baseline = sweep_runs(scenario, full);
    report.approx = sweep_runs(scenario, fast);
    report.baseline_curve = make_curve(report.baseline, scenario.indicator);
    report.approx_curve = make_curve(report.approx, scenario.indicator);

    const auto mean_runtime = [](const std::vector<SizeRun>& runs) {
        double total = 0.0;
        for (const SizeRun& r : runs) total += r.runtime_seconds;
        return total / static_cast<double>(runs.size());
    };
    report.baseline_seconds = mean_runtime(report.baseline);
    report.approx_seconds = mean_runtime(report.approx);
    report.speedup = report.baseline_seconds / std::max(report.approx_seconds, 1e-9);

    report.rel_error.reserve(report.baseline.size());
    double total = 0.0;
    for (std::size_t i = 0; i < report.baseline.size(); ++i) {
        const double err = std::abs(rel_delta(report.approx[i].value(scenario.indicator),
                                              report.baseline[i].value(scenario.indicator)));
        report.rel_error.push_back(err);
        total += err;
    }
    report.mean_rel_error = total / static_cast<double>(report.rel_error.size());
    return report;
}

}  // namespace bess
