// End-to-end acceptance checks. Each criterion prints exactly one PASS or
// FAIL line; the process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bess/components.hpp"
#include "bess/config.hpp"
#include "bess/dispatch.hpp"
#include "bess/economics.hpp"
#include "bess/engine.hpp"
#include "bess/sizing.hpp"
#include "bess/timeseries.hpp"

using namespace bess;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string examples_dir() { return ACCEPT_EXAMPLES_DIR; }
std::string cli_path() { return ACCEPT_CLI_PATH; }

Scenario bundled(const char* name) {
    return load_scenario(examples_dir() + "/" + name);
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

// ---- 1. finance analytics ------------------------------------------------

Outcome check_finance() {
    CashflowSchedule s;
    s.capex = Array::Zero(2);
    s.opex = Array::Zero(2);
    s.income = Array::Zero(2);
    s.energy_mwh = Array::Zero(2);
    s.capex(0) = 1000.0;
    s.opex(1) = 100.0;
    s.energy_mwh(1) = 10.0;
    if (std::abs(lcoe(s, 0.10) - 120.0) > 1e-6) {
        return {false, fmt("lcoe example gave %.9f, want 120", lcoe(s, 0.10))};
    }

    Array one(2);
    one << -100.0, 110.0;
    if (std::abs(npv(one, 0.10)) > 1e-6) return {false, "npv([-100,110], 0.10) != 0"};
    const auto r1 = irr(one);
    if (!r1 || std::abs(*r1 - 0.10) > 1e-6) return {false, "irr([-100,110]) != 0.10"};

    Array two(3);
    two << -100.0, 0.0, 121.0;
    const auto r2 = irr(two);
    if (!r2 || std::abs(*r2 - 0.10) > 1e-6) return {false, "irr([-100,0,121]) != 0.10"};

    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> years(1, 12);
    std::uniform_real_distribution<double> spend(50.0, 500.0);
    std::uniform_real_distribution<double> earn(1.0, 200.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const int n = years(rng);
        Array cf = Array::Zero(n + 1);
        cf(0) = -spend(rng);
        for (int y = 1; y <= n; ++y) cf(y) = earn(rng);
        const auto root = irr(cf);
        if (!root) return {false, "a single-sign-change schedule had no irr"};
        worst = std::max(worst, std::abs(npv(cf, *root)));
    }
    if (worst > 1e-6) return {false, fmt("worst |npv at irr| = %.2e", worst)};
    return {true, fmt("analytic cases exact, worst |npv at irr| = %.1e over 1000 schedules",
                      worst)};
}

// ---- 2. fuel curve ---------------------------------------------------------

Outcome check_fuel_curve() {
    const Genset g{};
    for (const auto& [frac, rate] : g.fuel_points) {
        if (genset_fuel_rate(g, frac) != rate) {
            return {false, fmt("table point %.2f gave %.6f", frac, genset_fuel_rate(g, frac))};
        }
    }
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double frac = 1.10 * i / 1000.0;
        const double rate = genset_fuel_rate(g, frac);
        if (rate < prev) return {false, fmt("rate decreases at load fraction %.4f", frac)};
        prev = rate;
    }
    return {true, "all four table points exact, monotone over 1001 samples"};
}

// ---- 3. minimal capacity ---------------------------------------------------

Outcome check_min_capacity() {
    const double got = min_rated_capacity(0.5, 0.9, 0.3);
    if (std::abs(got - 0.793651) > 1e-6) return {false, fmt("got %.9f", got)};
    return {true, fmt("min_rated_capacity(0.5, 0.9, 0.3) = %.6f", got)};
}

// ---- 4. published cost table optimum ---------------------------------------

Outcome check_published_optimum() {
    const std::vector<double> sizes{111, 222, 333, 444, 555, 666, 777, 888, 999, 1110};
    const std::vector<double> basic{528, 417, 370, 357, 371, 388, 408, 432, 454, 477};
    const std::vector<double> advanced{407, 381, 344, 350, 368, 390, 413, 436, 459, 485};

    auto as_curve = [&](const std::vector<double>& col) {
        std::vector<SizeRun> runs(col.size());
        for (std::size_t i = 0; i < col.size(); ++i) {
            runs[i].size_kwh = sizes[i];
            runs[i].lcoe_eur_mwh = col[i];
        }
        return make_curve(runs, Indicator::lcoe);
    };
    const auto cb = as_curve(basic);
    const auto ca = as_curve(advanced);
    if (cb.best().size_kwh != 444.0 || cb.best().value != 357.0) {
        return {false, fmt("basic column optimum (%g kWh, %g)", cb.best().size_kwh,
                           cb.best().value)};
    }
    if (ca.best().size_kwh != 333.0 || ca.best().value != 344.0) {
        return {false, fmt("advanced column optimum (%g kWh, %g)", ca.best().size_kwh,
                           ca.best().value)};
    }
    const double variation = 100.0 * (ca.best().value - cb.best().value) / cb.best().value;
    if (std::abs(variation - -3.64) > 0.01) return {false, fmt("variation %.4f%%", variation)};
    return {true, fmt("(444, 357) and (333, 344), optimal variation %.2f%%", variation)};
}

// ---- 5. dispatch energy balance --------------------------------------------

Outcome check_energy_balance() {
    double worst = 0.0;
    std::string worst_name;
    auto track = [&](const char* name, const SystemConfig& cfg) {
        const SimulationResult sim = simulate(cfg, 1);
        if (sim.max_balance_residual_kw > worst) {
            worst = sim.max_balance_residual_kw;
            worst_name = name;
        }
    };

    Scenario mg = bundled("microgrid.toml");
    track("basic", mg.system);
    mg.system.dispatch.strategy = DispatchStrategy::optimized;
    track("optimized", mg.system);

    const Scenario inj = bundled("pv_injection.toml");
    track("pv_injection", inj.system);

    if (worst >= 1e-9) {
        return {false, fmt("max residual %.3e kW (", worst) + worst_name + ")"};
    }
    return {true, fmt("max per-step residual %.2e kW across the three strategies", worst)};
}

// ---- 6. day solver optimality ----------------------------------------------

SystemConfig dp_toy_cfg() {
    SystemConfig cfg;
    cfg.application = Application::microgrid;
    cfg.battery.module_kwh = 8.0;
    cfg.battery.n_modules = 2;
    cfg.battery.soc_min = 0.0;
    cfg.battery.soc_max = 1.0;
    cfg.battery.eta_charge = 1.0;
    cfg.battery.eta_discharge = 1.0;
    cfg.battery.ageing.enabled = false;
    cfg.genset = Genset{};
    cfg.genset->rated_kw = 32.0;
    cfg.converter.rating_kva = 1.0e9;
    cfg.dispatch.strategy = DispatchStrategy::optimized;
    cfg.dispatch.n_soc = 2;
    cfg.dispatch.terminal_slack = 1.0;
    return cfg;
}

// Minimum cost over every per-step genset action (off, or on at either soc
// level): a strict superset of the on/off schedules the criterion asks for.
double enumerate_day_cost(const TimeSeries& load, const TimeSeries& pv, double soc0, bool on0,
                          const SystemConfig& cfg) {
    const Genset& g = *cfg.genset;
    const double cap = cfg.battery.rated_kwh();
    const double dt = load.step_hours();
    const double lo = cfg.battery.soc_min;
    const double hi = cfg.battery.soc_max;
    const int n = cfg.dispatch.n_soc;
    const double gen_cap = g.rated_kw * g.max_load_fraction();
    const int T = static_cast<int>(load.size());

    double best = std::numeric_limits<double>::infinity();
    const long total = std::lround(std::pow(3.0, T));
    for (long code = 0; code < total; ++code) {
        long rest = code;
        double soc = soc0;
        bool on = on0;
        double cost = 0.0;
        bool ok = true;
        for (int t = 0; t < T; ++t) {
            const int action = static_cast<int>(rest % 3);
            rest /= 3;
            const double net = load.values[t] - pv.values[t];
            if (action == 0) {
                if (net > 0.0) {
                    const double avail = (soc - lo) * cap / dt;
                    if (net > avail + 1e-9) {
                        ok = false;
                        break;
                    }
                    soc -= net * dt / cap;
                } else {
                    const double room = (hi - soc) * cap / dt;
                    soc += std::min(-net, room) * dt / cap;
                }
                on = false;
            } else {
                const double target = lo + (hi - lo) * (action - 1) / (n - 1);
                double p = net + (target - soc) * cap / dt;
                if (p < 0.0) {
                    if (-p > pv.values[t] + 1e-9) {
                        ok = false;
                        break;
                    }
                    p = 0.0;
                }
                if (p > gen_cap + 1e-9) {
                    ok = false;
                    break;
                }
                cost += genset_fuel_rate(g, p / g.rated_kw, true) * dt * g.fuel_price_per_liter +
                        (on ? 0.0 : g.start_cost);
                soc = target;
                on = true;
            }
        }
        if (ok && cost < best) best = cost;
    }
    return best;
}

Outcome check_day_solver() {
    const SystemConfig cfg = dp_toy_cfg();
    std::mt19937_64 rng(7781);
    std::uniform_int_distribution<int> net_pick(-1, 1);
    std::uniform_int_distribution<int> pv_pick(0, 4);
    const double pv_options[5] = {0.0, 8.0, 16.0, 32.0, 40.0};
    const double swing_kw = 16.0;

    for (int day = 0; day < 100; ++day) {
        TimeSeries load;
        load.start = 0;
        load.step_minutes = 60;
        load.values = Array::Zero(6);
        TimeSeries pv = load;
        for (int t = 0; t < 6; ++t) {
            const double net = net_pick(rng) * swing_kw;
            double producible = pv_options[pv_pick(rng)];
            if (net + producible < 0.0) producible = -net;
            pv.values[t] = producible;
            load.values[t] = net + producible;
        }
        const BatteryState st = initial_state(cfg.battery, 1.0);
        const DayPlan plan = microgrid_optimized_day(load, pv, st, false, cfg);
        const double oracle = enumerate_day_cost(load, pv, st.soc, false, cfg);
        if (plan.planned_cost != oracle) {
            return {false, fmt("day %d: plan %.9f vs enumeration %.9f", day, plan.planned_cost,
                               oracle)};
        }
    }
    return {true, "plan cost equals exhaustive enumeration on all 100 toy days"};
}

// ---- 7. control strategy direction ------------------------------------------

Outcome check_strategy_direction() {
    Scenario sc = bundled("microgrid.toml");
    sc.system.step_minutes = 10;  // plan-vs-actual effects survive, runs stay quick
    sc.system.forecast.blend_weight = 1.0;

    const double fuel_price = sc.econ.fuel_price_per_liter;
    const double start_cost = sc.econ.genset_start_cost;

    std::vector<long> basic_starts, opt_starts;
    std::ostringstream sizes_failed;
    for (const double size : sc.sizes_kwh) {
        sc.system.battery.n_modules = quantized_modules(size, sc.system.battery.module_kwh);

        sc.system.dispatch.strategy = DispatchStrategy::basic;
        const SimulationResult b = simulate(sc.system, 1);
        sc.system.dispatch.strategy = DispatchStrategy::optimized;
        const SimulationResult o = simulate(sc.system, 1);

        const double cb = b.total_cost_fuel_and_starts(fuel_price, start_cost);
        const double co = o.total_cost_fuel_and_starts(fuel_price, start_cost);
        if (co > cb) sizes_failed << ' ' << size;
        basic_starts.push_back(b.total_starts());
        opt_starts.push_back(o.total_starts());
    }
    if (!sizes_failed.str().empty()) {
        return {false, "optimized dearer than basic at kWh sizes:" + sizes_failed.str()};
    }
    for (int i = 0; i < 3; ++i) {
        if (opt_starts[i] >= basic_starts[i]) {
            return {false, fmt("starts not strictly lower at size %.0f kWh", sc.sizes_kwh[i])};
        }
    }
    std::ostringstream detail;
    detail << "cost never higher over " << sc.sizes_kwh.size()
           << " sizes; starts optimized/basic at the three smallest: ";
    for (int i = 0; i < 3; ++i) {
        detail << opt_starts[i] << '/' << basic_starts[i] << (i < 2 ? ", " : "");
    }
    return {true, detail.str()};
}

// ---- 8. optimum curve shape --------------------------------------------------

Outcome check_curve_shape() {
    SweepOptions opts;
    opts.threads = 8;
    opts.approximate = true;
    const Scenario mg = bundled("microgrid.toml");
    const IndicatorCurve curve = sweep(mg, opts);
    if (curve.optimum == 0 || curve.optimum + 1 == curve.points.size()) {
        return {false, fmt("microgrid optimum sits at the grid edge (%g kWh)",
                           curve.best().size_kwh)};
    }

    SweepOptions full;
    full.threads = 8;
    const Scenario inj = bundled("pv_injection.toml");
    const IndicatorCurve npv_curve = sweep(inj, full);
    if (npv_curve.optimum != 0) {
        return {false, fmt("grid-injection optimum %g kWh, want the smallest size",
                           npv_curve.best().size_kwh)};
    }
    return {true, fmt("microgrid interior optimum at %g kWh; injection optimum at the "
                      "smallest admissible %g kWh",
                      curve.best().size_kwh, npv_curve.best().size_kwh)};
}

// ---- 9. model fidelity --------------------------------------------------------

Outcome check_model_fidelity() {
    Scenario sc = bundled("microgrid.toml");
    sc.system.step_minutes = 10;
    sc.system.lifetime_years = 1;

    SweepOptions opts;
    opts.threads = 8;
    sc.system.battery_model = BatteryModelKind::ec;
    const auto ec_runs = sweep_runs(sc, opts);
    sc.system.battery_model = BatteryModelKind::ep;
    const auto ep_runs = sweep_runs(sc, opts);

    double sum = 0.0;
    for (std::size_t i = 0; i < ec_runs.size(); ++i) {
        sum += std::abs(ep_runs[i].lcoe_eur_mwh - ec_runs[i].lcoe_eur_mwh) /
               ec_runs[i].lcoe_eur_mwh;
    }
    const double mean = sum / static_cast<double>(ec_runs.size());
    if (mean > 0.02) return {false, fmt("mean relative deviation %.4f", mean)};
    return {true, fmt("mean relative lcoe deviation %.3f%% across the sweep", 100.0 * mean)};
}

// ---- 10. fast approximation ----------------------------------------------------

Outcome check_fast_approximation() {
    SweepOptions opts;
    opts.threads = 8;
    const ApproxReport rep = fast_approximation(bundled("microgrid.toml"), opts);
    if (rep.baseline_curve.best().size_kwh != rep.approx_curve.best().size_kwh) {
        return {false, fmt("optimum moved: %g kWh full vs %g kWh approximate",
                           rep.baseline_curve.best().size_kwh,
                           rep.approx_curve.best().size_kwh)};
    }
    if (rep.mean_rel_error >= 0.02) {
        return {false, fmt("mean lcoe error %.4f", rep.mean_rel_error)};
    }
    if (rep.speedup < 50.0) return {false, fmt("speedup %.1fx", rep.speedup)};
    return {true, fmt("optimum preserved at %g kWh, mean error %.2f%%, speedup %.0fx",
                      rep.baseline_curve.best().size_kwh, 100.0 * rep.mean_rel_error,
                      rep.speedup)};
}

// ---- 11. forecast quality direction ---------------------------------------------

Outcome check_forecast_direction() {
    Scenario sc = bundled("pv_injection.toml");
    std::vector<double> penalties, npvs;
    for (const double blend : {0.0, 0.5, 1.0}) {
        sc.system.forecast.blend_weight = blend;
        const SimulationResult sim = simulate(sc.system, sc.system.lifetime_years);
        double pen = 0.0;
        for (const auto& y : sim.years) pen += y.penalized_deviation_mwh;
        penalties.push_back(pen);
        npvs.push_back(npv(build_cashflows(sim, sc.system, sc.econ), sc.econ.discount_rate));
    }
    for (int i = 1; i < 3; ++i) {
        if (penalties[i] > penalties[i - 1]) {
            return {false, fmt("penalty energy rose from %.1f to %.1f MWh", penalties[i - 1],
                               penalties[i])};
        }
        if (npvs[i] < npvs[i - 1]) {
            return {false, fmt("npv fell from %.0f to %.0f", npvs[i - 1], npvs[i])};
        }
    }
    return {true, fmt("penalty %.0f / %.0f / %.0f MWh falling, npv rising, over blends 0, "
                      "0.5, 1",
                      penalties[0], penalties[1], penalties[2])};
}

// ---- 12. determinism --------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome check_determinism() {
    const auto base = std::filesystem::temp_directory_path() / "bess_acceptance";
    std::filesystem::remove_all(base);
    const auto serial = base / "serial";
    const auto parallel = base / "parallel";
    const std::string scenario = examples_dir() + "/microgrid.toml";

    const std::string cmd1 = "\"" + cli_path() + "\" sweep \"" + scenario + "\" --approx --out \"" +
                             serial.string() + "\" > /dev/null";
    const std::string cmd2 = "\"" + cli_path() + "\" sweep \"" + scenario +
                             "\" --approx --parallel 8 --out \"" + parallel.string() +
                             "\" > /dev/null";
    if (std::system(cmd1.c_str()) != 0) return {false, "serial sweep exited nonzero"};
    if (std::system(cmd2.c_str()) != 0) return {false, "parallel sweep exited nonzero"};

    const std::string a = slurp(serial / "curve.csv");
    const std::string b = slurp(parallel / "curve.csv");
    if (a.empty() || a != b) return {false, "curve.csv differs between serial and --parallel 8"};
    return {true, fmt("curve.csv byte-identical across thread counts (%.0f bytes)",
                      static_cast<double>(a.size()))};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
        double budget_seconds;
    };
    const std::vector<Criterion> criteria{
        {"finance analytics", check_finance, 1.0},
        {"genset fuel curve", check_fuel_curve, 1.0},
        {"minimal battery capacity", check_min_capacity, 1.0},
        {"published cost table optimum", check_published_optimum, 1.0},
        {"dispatch energy balance", check_energy_balance, 0.0},
        {"day solver optimality", check_day_solver, 10.0},
        {"control strategy direction", check_strategy_direction, 300.0},
        {"optimum curve shape", check_curve_shape, 600.0},
        {"battery model fidelity", check_model_fidelity, 0.0},
        {"fast approximation", check_fast_approximation, 0.0},
        {"forecast quality direction", check_forecast_direction, 0.0},
        {"parallel determinism", check_determinism, 0.0},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        double seconds = 0.0;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            out = criteria[i].run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (criteria[i].budget_seconds > 0.0 && seconds > criteria[i].budget_seconds) {
            out.pass = false;
            out.detail += fmt(" [over %g s budget]", criteria[i].budget_seconds);
        }
        std::printf("%s criterion %2zu, %s: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].name, out.detail.c_str(), seconds);
        std::fflush(stdout);
        if (!out.pass) ++failed;
    }
    if (failed > 0) std::printf("%d of 12 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
