#pragma once

#include <string>
#include <vector>

#include "bess/config.hpp"
#include "bess/economics.hpp"
#include "bess/engine.hpp"
#include "bess/sizing.hpp"

namespace bess {

// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);

struct PlotSeries {
    std::string label;
    std::vector<CurvePoint> points;
};

void write_annual_csv(const std::string& path, const SimulationResult& sim);
void write_cashflows_csv(const std::string& path, const CashflowSchedule& sched);
void write_summary_json(const std::string& path, const Scenario& scenario,
                        const SimulationResult& sim, const CashflowSchedule& sched);

void write_curve_csv(const std::string& path, const IndicatorCurve& curve);
void write_optimum_json(const std::string& path, const IndicatorCurve& curve,
                        const std::vector<SizeRun>& runs);
void write_curve_svg(const std::string& path, const std::string& title,
                     const std::string& y_label, const std::vector<PlotSeries>& series);

void write_deltas_csv(const std::string& path, const SensitivityReport& report);
void write_sensitivity_json(const std::string& path, const SensitivityReport& report);

void write_approx_json(const std::string& path, const ApproxReport& report, Indicator indicator);
void write_approx_csv(const std::string& path, const ApproxReport& report);

}  // namespace bess
