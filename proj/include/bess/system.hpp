#pragma once

#include <optional>
#include <string>

#include "bess/battery.hpp"
#include "bess/components.hpp"
#include "bess/timeseries.hpp"

namespace bess {

enum class Application { microgrid, pv_injection };

enum class DispatchStrategy { basic, optimized, pv_injection };

// How day-ahead forecasts are derived from the actual series. The baseline
// predictor is then blended toward the actual with blend_weight (0 keeps the
// baseline, 1 is a perfect forecast).
enum class ForecastBaseline { perfect, persistence, smoothed };

struct ForecastSpec {
    ForecastBaseline pv = ForecastBaseline::smoothed;
    ForecastBaseline load = ForecastBaseline::persistence;
    double blend_weight = 0.0;
    int smoothing_minutes = 180;
};

struct DispatchConfig {
    DispatchStrategy strategy = DispatchStrategy::basic;

    // basic: genset hysteresis thresholds
    double soc_start = 0.10;
    double soc_stop = 0.30;

    // optimized: daily unit-commitment solver
    int n_soc = 101;
    double terminal_slack = 0.05;  // terminal soc may end this far below initial

    // pv_injection: commitment construction and tolerance band
    int smoothing_minutes = 20;
    double ramp_frac_per_minute = 0.01;  // of installed kWp, per minute
    double peak_start_hour = 19.0;
    double peak_end_hour = 21.0;
    double peak_fraction = 0.20;   // of installed kWp
    double tolerance_frac = 0.05;  // of installed kWp, each side
};

struct SystemConfig {
    Application application = Application::microgrid;
    int step_minutes = 1;
    int lifetime_years = 20;

    BatteryModelKind battery_model = BatteryModelKind::ep;
    BatterySpec battery;
    PvPlant pv;
    std::optional<Genset> genset;
    Converter converter;
    DispatchConfig dispatch;
    ForecastSpec forecast;

    // One year of data at native resolution; the engine resamples to
    // step_minutes. PV is the year-0 producible power of the plant in kW.
    TimeSeries pv_producible;
    TimeSeries load;  // microgrid only

    void validate() const;
};

}  // namespace bess
