#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace bess {

using Array = Eigen::ArrayXd;

/// Minutes since 1970-01-01T00:00, naive local time (no zone, no DST).
using Minute = std::int64_t;

constexpr int kMinutesPerDay = 24 * 60;
constexpr int kDaysPerYear = 365;            // leap days ignored
constexpr int kMinutesPerWeek = 7 * kMinutesPerDay;

Minute parse_timestamp(const std::string& text);   // "YYYY-MM-DDTHH:MM"
std::string format_timestamp(Minute t);
int weekday(Minute t);                             // 0 = Monday .. 6 = Sunday
int minute_of_day(Minute t);

/// Uniformly sampled signal. Values are kW for power series,
/// dimensionless for factor series (e.g. per-unit PV producible).
struct TimeSeries {
    Minute start = 0;
    int step_minutes = 1;
    Array values;

    Eigen::Index size() const { return values.size(); }
    double step_hours() const { return step_minutes / 60.0; }

    /// Sum of p * dt for a power series, in kWh.
    double energy_kwh() const { return values.sum() * step_hours(); }
};

/// Throws std::invalid_argument on violated invariants (empty, non-finite,
/// non-positive step, negative sample when forbidden).
void validate_series(const TimeSeries& s, bool require_nonnegative);

/// Same start, step and length.
bool aligned(const TimeSeries& a, const TimeSeries& b);

/// Two sample-aligned series: a prediction and the realized signal.
struct ForecastPair {
    TimeSeries predicted;
    TimeSeries actual;
};

/// CSV rows are "timestamp,value" with header, timestamps uniformly spaced.
TimeSeries load_csv_series(const std::string& path, int expected_step_minutes,
                           bool require_nonnegative = true);
void save_csv_series(const TimeSeries& s, const std::string& path);

/// Block-mean downsampling. new_step must be an integer multiple of s.step
/// and divide the series length evenly. Preserves total energy exactly.
TimeSeries resample(const TimeSeries& s, int new_step_minutes);

/// Forecast(t) = actual(t - lag); the first lag window repeats the first
/// recorded period at the same position.
TimeSeries persistence_forecast(const TimeSeries& actual,
                                int lag_minutes = 7 * kMinutesPerDay);

/// out[i] = (1-w)*baseline[i] + w*actual[i], w in [0,1].
TimeSeries blend_forecast(const TimeSeries& baseline, const TimeSeries& actual,
                          double w);

/// Centered moving average with window shrinking at the edges.
TimeSeries moving_average(const TimeSeries& s, int window_minutes);

enum class SynthKind { pv_producible, industrial_load };

/// Deterministic synthetic year(s) at 1-minute step starting 2023-01-01T00:00.
/// pv_producible: per-unit clear-sky bell modulated by correlated cloud noise,
/// zero at night. industrial_load: weekly profile in kW, peak scaled to
/// exactly 40 kW.
TimeSeries synth_profiles(std::uint64_t seed, int days, SynthKind kind);

}  // namespace bess
