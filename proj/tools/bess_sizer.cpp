#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bess/config.hpp"
#include "bess/report.hpp"
#include "bess/sizing.hpp"

namespace fs = std::filesystem;

namespace {

struct Args {
    std::string config;
    std::string out = "./out";
    std::string sizes;
    std::string range;
    std::string factor;
    int parallel = 0;  // 0: fall back to BESS_SIZER_THREADS, then 1
    bool approx = false;
};

int resolve_threads(int parallel) {
    if (parallel > 0) return parallel;
    if (const char* env = std::getenv("BESS_SIZER_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1 || v > 4096) {
            throw bess::ConfigError(
                std::string("BESS_SIZER_THREADS must be a positive integer, got '") + env + "'");
        }
        return static_cast<int>(v);
    }
    return 1;
}

std::vector<double> parse_size_list(const std::string& text) {
    std::vector<double> sizes;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string part = text.substr(pos, comma - pos);
        char* end = nullptr;
        const double v = std::strtod(part.c_str(), &end);
        if (part.empty() || end != part.c_str() + part.size()) {
            throw std::invalid_argument("--sizes must be a comma list of numbers, got '" + text +
                                        "'");
        }
        sizes.push_back(v);
        pos = comma + 1;
    }
    for (double s : sizes) {
        if (s <= 0.0) throw std::invalid_argument("--sizes values must be positive");
    }
    if (!std::is_sorted(sizes.begin(), sizes.end())) {
        throw std::invalid_argument("--sizes values must be increasing");
    }
    return sizes;
}

void apply_size_overrides(bess::Scenario& scenario, const Args& args) {
    if (!args.sizes.empty() && !args.range.empty()) {
        throw std::invalid_argument("give --sizes or --range, not both");
    }
    if (!args.sizes.empty()) {
        scenario.sizes_kwh = parse_size_list(args.sizes);
    } else if (!args.range.empty()) {
        scenario.sizes_kwh = bess::parse_size_range(args.range);
    }
    if (scenario.sizes_kwh.empty()) {
        throw std::invalid_argument(
            "no sizes to sweep: add a [sizing] section to the config or pass --sizes/--range");
    }
}

std::string indicator_axis(bess::Indicator indicator) {
    switch (indicator) {
        case bess::Indicator::lcoe: return "LCOE (EUR/MWh)";
        case bess::Indicator::npv: return "NPV (EUR)";
        case bess::Indicator::irr: return "IRR (fraction)";
    }
    return "indicator";
}

std::vector<bess::CurvePoint> run_points(const std::vector<bess::SizeRun>& runs,
                                         bess::Indicator indicator) {
    std::vector<bess::CurvePoint> pts;
    pts.reserve(runs.size());
    for (const bess::SizeRun& r : runs) pts.push_back({r.size_kwh, r.value(indicator)});
    return pts;
}

int cmd_simulate(const Args& args) {
    const bess::Scenario scenario = bess::load_scenario(args.config);
    const bess::SimulationResult sim =
        bess::simulate(scenario.system, scenario.system.lifetime_years);
    const bess::CashflowSchedule sched =
        bess::build_cashflows(sim, scenario.system, scenario.econ);

    fs::create_directories(args.out);
    bess::write_annual_csv((fs::path(args.out) / "annual.csv").string(), sim);
    bess::write_cashflows_csv((fs::path(args.out) / "cashflows.csv").string(), sched);
    bess::write_summary_json((fs::path(args.out) / "summary.json").string(), scenario, sim,
                             sched);
    std::cout << "wrote annual.csv, cashflows.csv, summary.json to " << args.out << '\n';
    return 0;
}

int cmd_sweep(const Args& args) {
    bess::Scenario scenario = bess::load_scenario(args.config);
    apply_size_overrides(scenario, args);

    bess::SweepOptions options;
    options.threads = resolve_threads(args.parallel);
    options.approximate = args.approx;
    const std::vector<bess::SizeRun> runs = bess::sweep_runs(scenario, options);
    const bess::IndicatorCurve curve = bess::make_curve(runs, scenario.indicator);

    fs::create_directories(args.out);
    bess::write_curve_csv((fs::path(args.out) / "curve.csv").string(), curve);
    bess::write_optimum_json((fs::path(args.out) / "optimum.json").string(), curve, runs);
    bess::write_curve_svg((fs::path(args.out) / "curve.svg").string(), "BESS size sweep",
                          indicator_axis(curve.indicator),
                          {{bess::indicator_name(curve.indicator), curve.points}});
    std::cout << "optimum: " << curve.best().size_kwh << " kWh at "
              << bess::format_double(curve.best().value) << ' '
              << bess::indicator_name(curve.indicator) << '\n';
    std::cout << "wrote curve.csv, optimum.json, curve.svg to " << args.out << '\n';
    return 0;
}

int cmd_sensitivity(const Args& args) {
    bess::Scenario scenario = bess::load_scenario(args.config);
    apply_size_overrides(scenario, args);

    bess::SweepOptions options;
    options.threads = resolve_threads(args.parallel);
    options.approximate = args.approx;
    const bess::SensitivityReport report =
        bess::run_sensitivity(scenario, args.factor, options);

    fs::create_directories(args.out);
    bess::write_deltas_csv((fs::path(args.out) / "deltas.csv").string(), report);
    bess::write_sensitivity_json((fs::path(args.out) / "sensitivity.json").string(), report);
    std::vector<bess::PlotSeries> series;
    for (const bess::ScenarioCurve& sc : report.scenarios) {
        bess::write_curve_csv((fs::path(args.out) / ("curve_" + sc.label + ".csv")).string(),
                              sc.curve);
        series.push_back({sc.label, sc.curve.points});
    }
    bess::write_curve_svg((fs::path(args.out) / "sensitivity.svg").string(),
                          "Sensitivity: " + report.factor, indicator_axis(report.indicator),
                          series);
    std::cout << "wrote deltas.csv, sensitivity.json, per-scenario curves to " << args.out
              << '\n';
    return 0;
}

int cmd_fastapprox(const Args& args) {
    bess::Scenario scenario = bess::load_scenario(args.config);
    apply_size_overrides(scenario, args);

    bess::SweepOptions options;
    options.threads = resolve_threads(args.parallel);
    const bess::ApproxReport report = bess::fast_approximation(scenario, options);

    fs::create_directories(args.out);
    bess::write_approx_csv((fs::path(args.out) / "approx.csv").string(), report);
    bess::write_approx_json((fs::path(args.out) / "approx.json").string(), report,
                            scenario.indicator);
    bess::write_curve_svg((fs::path(args.out) / "approx.svg").string(),
                          "Fast approximation vs baseline", indicator_axis(scenario.indicator),
                          {{"baseline", run_points(report.baseline, scenario.indicator)},
                           {"approx", run_points(report.approx, scenario.indicator)}});
    std::cout << "mean relative error " << bess::format_double(report.mean_rel_error)
              << ", speedup " << bess::format_double(report.speedup) << "x\n";
    std::cout << "wrote approx.csv, approx.json, approx.svg to " << args.out << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"BESS sizing by techno-economic simulation"};
    app.require_subcommand(1);

    Args args;
    const auto add_common = [&](CLI::App* sub, bool with_sizes) {
        sub->add_option("config", args.config, "scenario config (.toml or .json)")->required();
        sub->add_option("--out", args.out, "output directory (default ./out)");
        if (with_sizes) {
            sub->add_option("--sizes", args.sizes, "comma list of sizes in kWh");
            sub->add_option("--range", args.range, "size range lo:hi:step in kWh");
            sub->add_option("--parallel", args.parallel,
                            "worker threads (default $BESS_SIZER_THREADS or 1)");
        }
    };

    CLI::App* simulate = app.add_subcommand("simulate", "run one configuration");
    add_common(simulate, false);
    CLI::App* sweep = app.add_subcommand("sweep", "sweep sizes and locate the optimum");
    add_common(sweep, true);
    sweep->add_flag("--approx", args.approx,
                    "approximation pipeline: energy/power model, 10-minute steps, one year");
    CLI::App* sensitivity =
        app.add_subcommand("sensitivity", "one-factor-at-a-time scenario comparison");
    add_common(sensitivity, true);
    sensitivity->add_option("--factor", args.factor, "factor to vary")->required();
    sensitivity->add_flag("--approx", args.approx,
                          "run all scenarios through the approximation pipeline");
    CLI::App* fastapprox =
        app.add_subcommand("fastapprox", "compare the approximation pipeline to the baseline");
    add_common(fastapprox, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(args);
        if (sweep->parsed()) return cmd_sweep(args);
        if (sensitivity->parsed()) return cmd_sensitivity(args);
        if (fastapprox->parsed()) return cmd_fastapprox(args);
    } catch (const bess::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
