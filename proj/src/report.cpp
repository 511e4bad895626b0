#include "bess/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace bess {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

void dump_json(const std::string& path, const nlohmann::json& doc) {
    std::ofstream out = open_out(path);
    out << doc.dump(2) << '\n';
}

nlohmann::json json_number(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

nlohmann::json run_to_json(const SizeRun& r) {
    nlohmann::json j{
        {"size_kwh", r.size_kwh},
        {"n_modules", r.n_modules},
        {"lcoe_eur_per_mwh", json_number(r.lcoe_eur_mwh)},
        {"npv_eur", r.npv_eur},
        {"irr", r.irr ? nlohmann::json(*r.irr) : nlohmann::json(nullptr)},
        {"irr_multiple_roots", r.irr_multiple},
        {"replacements", r.replacements},
        {"fuel_liters", r.fuel_liters},
        {"genset_starts", r.genset_starts},
        {"penalized_mwh", r.penalized_mwh},
        {"injected_mwh", r.injected_mwh},
        {"unserved_mwh", r.unserved_mwh},
        {"mean_one_way_efficiency", r.mean_efficiency},
        {"runtime_seconds", r.runtime_seconds},
    };
    return j;
}

std::string value_header(Indicator indicator) {
    switch (indicator) {
        case Indicator::lcoe: return "lcoe_eur_per_mwh";
        case Indicator::npv: return "npv_eur";
        case Indicator::irr: return "irr";
    }
    return "value";
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_annual_csv(const std::string& path, const SimulationResult& sim) {
    std::ofstream out = open_out(path);
    out << "year,energy_delivered_mwh,energy_injected_mwh,peak_window_energy_mwh,"
           "penalized_deviation_mwh,fuel_liters,genset_starts,genset_hours,"
           "pv_curtailed_mwh,battery_throughput_mwh,unserved_mwh\n";
    for (std::size_t y = 0; y < sim.years.size(); ++y) {
        const AnnualAggregates& a = sim.years[y];
        out << y + 1 << ',' << format_double(a.energy_delivered_mwh) << ','
            << format_double(a.energy_injected_mwh) << ','
            << format_double(a.peak_window_energy_mwh) << ','
            << format_double(a.penalized_deviation_mwh) << ',' << format_double(a.fuel_liters)
            << ',' << a.genset_starts << ',' << format_double(a.genset_hours) << ','
            << format_double(a.pv_curtailed_mwh) << ','
            << format_double(a.battery_throughput_mwh) << ',' << format_double(a.unserved_mwh)
            << '\n';
    }
}

void write_cashflows_csv(const std::string& path, const CashflowSchedule& sched) {
    std::ofstream out = open_out(path);
    out << "year,capex,opex,income,energy_mwh,cashflow\n";
    const Array cf = sched.cashflow();
    for (Eigen::Index y = 0; y < sched.capex.size(); ++y) {
        out << y << ',' << format_double(sched.capex[y]) << ',' << format_double(sched.opex[y])
            << ',' << format_double(sched.income[y]) << ',' << format_double(sched.energy_mwh[y])
            << ',' << format_double(cf[y]) << '\n';
    }
}

void write_summary_json(const std::string& path, const Scenario& scenario,
                        const SimulationResult& sim, const CashflowSchedule& sched) {
    bool irr_multiple = false;
    const std::optional<double> rate = irr(sched.cashflow(), &irr_multiple);

    double fuel = 0.0, injected = 0.0, delivered = 0.0, penalized = 0.0, unserved = 0.0;
    long starts = 0;
    for (const AnnualAggregates& a : sim.years) {
        fuel += a.fuel_liters;
        injected += a.energy_injected_mwh;
        delivered += a.energy_delivered_mwh;
        penalized += a.penalized_deviation_mwh;
        unserved += a.unserved_mwh;
        starts += a.genset_starts;
    }

    nlohmann::json doc{
        {"application",
         scenario.system.application == Application::microgrid ? "microgrid" : "pv_injection"},
        {"battery_rated_kwh", scenario.system.battery.rated_kwh()},
        {"n_modules", scenario.system.battery.n_modules},
        {"lifetime_years", scenario.system.lifetime_years},
        {"lcoe_eur_per_mwh", json_number(lcoe(sched, scenario.econ.discount_rate))},
        {"npv_eur", npv(sched, scenario.econ.discount_rate)},
        {"irr", rate ? nlohmann::json(*rate) : nlohmann::json(nullptr)},
        {"irr_multiple_roots", irr_multiple},
        {"replacements", sim.replacement_years.size()},
        {"replacement_years", sim.replacement_years},
        {"final_soh", sim.final_battery.soh},
        {"mean_one_way_efficiency", sim.mean_one_way_efficiency},
        {"max_balance_residual_kw", sim.max_balance_residual_kw},
        {"total_fuel_liters", fuel},
        {"total_genset_starts", starts},
        {"total_injected_mwh", injected},
        {"total_delivered_mwh", delivered},
        {"total_penalized_mwh", penalized},
        {"total_unserved_mwh", unserved},
        {"steps", sim.steps},
        {"runtime_seconds", sim.runtime_seconds},
    };
    dump_json(path, doc);
}

void write_curve_csv(const std::string& path, const IndicatorCurve& curve) {
    std::ofstream out = open_out(path);
    out << "size_kwh," << value_header(curve.indicator) << '\n';
    for (const CurvePoint& p : curve.points) {
        out << format_double(p.size_kwh) << ',' << format_double(p.value) << '\n';
    }
}

void write_optimum_json(const std::string& path, const IndicatorCurve& curve,
                        const std::vector<SizeRun>& runs) {
    nlohmann::json doc{
        {"indicator", indicator_name(curve.indicator)},
        {"sense", curve.maximize ? "maximize" : "minimize"},
        {"size_kwh", curve.best().size_kwh},
        {"value", json_number(curve.best().value)},
    };
    if (curve.optimum < runs.size()) doc["details"] = run_to_json(runs[curve.optimum]);
    dump_json(path, doc);
}

void write_curve_svg(const std::string& path, const std::string& title,
                     const std::string& y_label, const std::vector<PlotSeries>& series) {
    const double width = 800.0, height = 500.0;
    const double ml = 90.0, mr = 30.0, mt = 50.0, mb = 60.0;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    bool first = true;
    for (const PlotSeries& s : series) {
        for (const CurvePoint& p : s.points) {
            if (std::isnan(p.value)) continue;
            if (first) {
                xmin = xmax = p.size_kwh;
                ymin = ymax = p.value;
                first = false;
            } else {
                xmin = std::min(xmin, p.size_kwh);
                xmax = std::max(xmax, p.size_kwh);
                ymin = std::min(ymin, p.value);
                ymax = std::max(ymax, p.value);
            }
        }
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
    const double ypad = (ymax - ymin) * 0.08;
    ymin -= ypad;
    ymax += ypad;

    const auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    const auto sy = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };
    const auto tick_text = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return std::string(buf);
    };
    static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};

    std::ofstream out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << ' ' << height
        << "\" font-family=\"sans-serif\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"18\">"
        << title << "</text>\n";

    const int n_ticks = 5;
    for (int i = 0; i <= n_ticks; ++i) {
        const double fx = xmin + (xmax - xmin) * i / n_ticks;
        const double fy = ymin + (ymax - ymin) * i / n_ticks;
        out << "<line x1=\"" << sx(fx) << "\" y1=\"" << mt << "\" x2=\"" << sx(fx) << "\" y2=\""
            << mt + ph << "\" stroke=\"#dddddd\"/>\n";
        out << "<line x1=\"" << ml << "\" y1=\"" << sy(fy) << "\" x2=\"" << ml + pw << "\" y2=\""
            << sy(fy) << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << sx(fx) << "\" y=\"" << mt + ph + 20
            << "\" text-anchor=\"middle\" font-size=\"12\">" << tick_text(fx) << "</text>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << sy(fy) + 4
            << "\" text-anchor=\"end\" font-size=\"12\">" << tick_text(fy) << "</text>\n";
    }
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 14
        << "\" text-anchor=\"middle\" font-size=\"14\">BESS size (kWh)</text>\n";
    out << "<text x=\"20\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 " << mt + ph / 2
        << ")\">" << y_label << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % 5];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (const CurvePoint& p : series[s].points) {
            if (std::isnan(p.value)) continue;
            out << sx(p.size_kwh) << ',' << sy(p.value) << ' ';
        }
        out << "\"/>\n";
        for (const CurvePoint& p : series[s].points) {
            if (std::isnan(p.value)) continue;
            out << "<circle cx=\"" << sx(p.size_kwh) << "\" cy=\"" << sy(p.value)
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        }
        const double lx = ml + 12, ly = mt + 16 + 18 * static_cast<double>(s);
        out << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 24 << "\" y2=\""
            << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << lx + 30 << "\" y=\"" << ly << "\" font-size=\"12\">"
            << series[s].label << "</text>\n";
    }
    out << "</svg>\n";
}

void write_deltas_csv(const std::string& path, const SensitivityReport& report) {
    std::ofstream out = open_out(path);
    out << "size_kwh";
    for (const ScenarioCurve& sc : report.scenarios) {
        out << ',' << value_header(report.indicator) << '_' << sc.label;
    }
    for (std::size_t s = 1; s < report.scenarios.size(); ++s) {
        out << ",variation_" << report.scenarios[s].label << "_pct";
    }
    out << '\n';
    for (std::size_t i = 0; i < report.sizes_kwh.size(); ++i) {
        out << format_double(report.sizes_kwh[i]);
        for (const ScenarioCurve& sc : report.scenarios) {
            out << ',' << format_double(sc.curve.points[i].value);
        }
        for (std::size_t s = 1; s < report.scenarios.size(); ++s) {
            out << ',' << format_double(report.scenarios[s].delta_vs_baseline[i] * 100.0);
        }
        out << '\n';
    }
}

void write_sensitivity_json(const std::string& path, const SensitivityReport& report) {
    nlohmann::json scenarios = nlohmann::json::array();
    for (const ScenarioCurve& sc : report.scenarios) {
        nlohmann::json values = nlohmann::json::array();
        for (const CurvePoint& p : sc.curve.points) values.push_back(json_number(p.value));
        scenarios.push_back({
            {"label", sc.label},
            {"values", values},
            {"delta_vs_baseline", sc.delta_vs_baseline},
            {"optimum_size_kwh", sc.curve.best().size_kwh},
            {"optimum_value", json_number(sc.curve.best().value)},
            {"optimum_value_variation", sc.optimum_value_variation},
            {"optimum_size_shift_kwh", sc.optimum_size_shift_kwh},
        });
    }
    nlohmann::json doc{
        {"factor", report.factor},
        {"indicator", indicator_name(report.indicator)},
        {"sizes_kwh", report.sizes_kwh},
        {"scenarios", scenarios},
    };
    dump_json(path, doc);
}

void write_approx_json(const std::string& path, const ApproxReport& report, Indicator indicator) {
    nlohmann::json doc{
        {"indicator", indicator_name(indicator)},
        {"baseline_optimum_size_kwh", report.baseline_curve.best().size_kwh},
        {"baseline_optimum_value", json_number(report.baseline_curve.best().value)},
        {"approx_optimum_size_kwh", report.approx_curve.best().size_kwh},
        {"approx_optimum_value", json_number(report.approx_curve.best().value)},
        {"rel_error", report.rel_error},
        {"mean_rel_error", report.mean_rel_error},
        {"baseline_seconds_per_config", report.baseline_seconds},
        {"approx_seconds_per_config", report.approx_seconds},
        {"speedup", report.speedup},
    };
    dump_json(path, doc);
}

void write_approx_csv(const std::string& path, const ApproxReport& report) {
    std::ofstream out = open_out(path);
    const std::string header = value_header(report.baseline_curve.indicator);
    out << "size_kwh," << header << "_baseline," << header << "_approx,rel_error\n";
    for (std::size_t i = 0; i < report.baseline.size(); ++i) {
        out << format_double(report.baseline_curve.points[i].size_kwh) << ','
            << format_double(report.baseline_curve.points[i].value) << ','
            << format_double(report.approx_curve.points[i].value) << ','
            << format_double(report.rel_error[i]) << '\n';
    }
}

}  // namespace bess
