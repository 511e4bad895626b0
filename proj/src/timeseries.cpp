#include "bess/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace bess {

namespace {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yr + (m <= 2));
}

}  // namespace

Minute parse_timestamp(const std::string& text) {
    int y, mo, d, h, mi;
    char t;
    if (std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d", &y, &mo, &d, &t, &h, &mi) != 6 ||
        (t != 'T' && t != ' ')) {
        throw std::invalid_argument("bad timestamp '" + text +
                                    "' (expected YYYY-MM-DDTHH:MM)");
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59) {
        throw std::invalid_argument("timestamp out of range: '" + text + "'");
    }
    return days_from_civil(y, mo, d) * kMinutesPerDay + h * 60 + mi;
}

std::string format_timestamp(Minute t) {
    std::int64_t day = t / kMinutesPerDay;
    int rem = static_cast<int>(t - day * kMinutesPerDay);
    if (rem < 0) {
        rem += kMinutesPerDay;
        --day;
    }
    int y, mo, d;
    civil_from_days(day, y, mo, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d", y, mo, d, rem / 60,
                  rem % 60);
    return buf;
}

int weekday(Minute t) {
    std::int64_t day = t / kMinutesPerDay;
    if (t < 0 && t % kMinutesPerDay != 0) --day;
    return static_cast<int>(((day % 7) + 10) % 7);  // 1970-01-01 was a Thursday
}

int minute_of_day(Minute t) {
    auto m = t % kMinutesPerDay;
    return static_cast<int>(m < 0 ? m + kMinutesPerDay : m);
}

void validate_series(const TimeSeries& s, bool require_nonnegative) {
    if (s.step_minutes <= 0) throw std::invalid_argument("series step must be > 0");
    if (s.values.size() == 0) throw std::invalid_argument("series is empty");
    if (!s.values.isFinite().all())
        throw std::invalid_argument("series contains non-finite values");
    if (require_nonnegative && (s.values < 0.0).any())
        throw std::invalid_argument("series contains negative values");
}

bool aligned(const TimeSeries& a, const TimeSeries& b) {
    return a.start == b.start && a.step_minutes == b.step_minutes &&
           a.values.size() == b.values.size();
}

TimeSeries load_csv_series(const std::string& path, int expected_step_minutes,
                           bool require_nonnegative) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' is empty");

    std::vector<Minute> stamps;
    std::vector<double> vals;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected 'timestamp,value'");
        }
        stamps.push_back(parse_timestamp(line.substr(0, comma)));
        std::size_t pos = 0;
        const std::string field = line.substr(comma + 1);
        double v = std::stod(field, &pos);
        vals.push_back(v);
    }
    if (vals.empty()) throw std::runtime_error("'" + path + "' has no data rows");

    TimeSeries s;
    s.start = stamps.front();
    s.step_minutes = vals.size() > 1 ? static_cast<int>(stamps[1] - stamps[0])
                                     : expected_step_minutes;
    if (s.step_minutes <= 0)
        throw std::runtime_error("'" + path + "' timestamps not increasing");
    for (std::size_t i = 1; i < stamps.size(); ++i) {
        if (stamps[i] - stamps[i - 1] != s.step_minutes) {
            throw std::runtime_error(path + ": non-uniform spacing at row " +
                                     std::to_string(i + 2));
        }
    }
    if (expected_step_minutes > 0 && s.step_minutes != expected_step_minutes) {
        throw std::runtime_error("'" + path + "': step mismatch (file " +
                                 std::to_string(s.step_minutes) + " min, expected " +
                                 std::to_string(expected_step_minutes) + " min)");
    }
    s.values = Eigen::Map<const Array>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    validate_series(s, require_nonnegative);
    return s;
}

void save_csv_series(const TimeSeries& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "timestamp,value\n";
    char buf[48];
    for (Eigen::Index i = 0; i < s.values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", s.values[i]);
        out << format_timestamp(s.start + i * s.step_minutes) << ',' << buf << '\n';
    }
}

TimeSeries resample(const TimeSeries& s, int new_step_minutes) {
    if (new_step_minutes == s.step_minutes) return s;
    if (new_step_minutes < s.step_minutes || new_step_minutes % s.step_minutes != 0) {
        throw std::invalid_argument(
            "resample: new step must be an integer multiple of the current step "
            "(only downsampling is supported)");
    }
    const Eigen::Index ratio = new_step_minutes / s.step_minutes;
    if (s.values.size() % ratio != 0) {
        throw std::invalid_argument("resample: series length not divisible by ratio");
    }
    const Eigen::Index n = s.values.size() / ratio;
    TimeSeries out;
    out.start = s.start;
    out.step_minutes = new_step_minutes;
    out.values = s.values.reshaped(ratio, n).colwise().mean().transpose();
    return out;
}

TimeSeries persistence_forecast(const TimeSeries& actual, int lag_minutes) {
    const Eigen::Index lag_steps = lag_minutes / actual.step_minutes;
    if (lag_minutes % actual.step_minutes != 0) {
        throw std::invalid_argument("persistence lag must be a multiple of the step");
    }
    if (actual.values.size() < lag_steps) {
        throw std::invalid_argument("series shorter than the persistence lag");
    }
    TimeSeries out = actual;
    out.values.tail(actual.values.size() - lag_steps) =
        actual.values.head(actual.values.size() - lag_steps);
    out.values.head(lag_steps) = actual.values.head(lag_steps);
    return out;
}

TimeSeries blend_forecast(const TimeSeries& baseline, const TimeSeries& actual,
                          double w) {
    if (!aligned(baseline, actual)) {
        throw std::invalid_argument("blend_forecast: inputs not sample-aligned");
    }
    if (w < 0.0 || w > 1.0) {
        throw std::invalid_argument("blend_forecast: weight outside [0,1]");
    }
    TimeSeries out = baseline;
    out.values = (1.0 - w) * baseline.values + w * actual.values;
    return out;
}

TimeSeries moving_average(const TimeSeries& s, int window_minutes) {
    const Eigen::Index half = std::max<Eigen::Index>(
        0, (window_minutes / s.step_minutes) / 2);
    if (half == 0) return s;
    const Eigen::Index n = s.values.size();
    TimeSeries out = s;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, i - half);
        const Eigen::Index hi = std::min(n - 1, i + half);
        out.values[i] = s.values.segment(lo, hi - lo + 1).mean();
    }
    return out;
}

namespace {

constexpr double kTau = 6.283185307179586;

// Season phase: 0 at the June peak, 1 at the December trough.
double winterness(int day) { return 0.5 * (1.0 + std::cos(kTau * (day - 172) / 365.0)); }

}  // namespace

TimeSeries synth_profiles(std::uint64_t seed, int days, SynthKind kind) {
    if (days < 1) throw std::invalid_argument("synth_profiles: days must be >= 1");

    TimeSeries s;
    s.start = parse_timestamp("2023-01-01T00:00");
    s.step_minutes = 1;
    s.values = Array::Zero(static_cast<Eigen::Index>(days) * kMinutesPerDay);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    if (kind == SynthKind::pv_producible) {
        // Daily cloud state follows a bounded AR(1) walk; minute-scale
        // attenuation noise is strongest on broken-sky days.
        double cloud = 0.35;
        double flicker = 0.0;
        const double flicker_rho = std::exp(-1.0 / 25.0);  // ~25 min correlation
        for (int d = 0; d < days; ++d) {
            cloud = std::clamp(0.62 * cloud + 0.38 * (0.38 + 0.42 * gauss(rng)), 0.0, 0.92);
            const double w = winterness(d % 365);
            const double half_day_h = 7.3 - 3.4 * w;               // daylight half-width
            const double amp = 1.0 - 0.38 * w;                     // seasonal peak
            const double sunrise_h = 12.0 - half_day_h;
            const double sunset_h = 12.0 + half_day_h;
            const double broken = 1.0 - std::abs(2.0 * cloud - 1.0);
            for (int m = 0; m < kMinutesPerDay; ++m) {
                flicker = flicker_rho * flicker +
                          std::sqrt(1.0 - flicker_rho * flicker_rho) * gauss(rng);
                const double h = m / 60.0;
                if (h <= sunrise_h || h >= sunset_h) continue;
                const double x = (h - sunrise_h) / (sunset_h - sunrise_h);
                const double clear = amp * std::pow(std::sin(kTau / 2.0 * x), 1.3);
                const double atten =
                    std::clamp(1.0 - cloud - 0.45 * broken * flicker, 0.04, 1.0);
                s.values[static_cast<Eigen::Index>(d) * kMinutesPerDay + m] = clear * atten;
            }
        }
        s.values = s.values.max(0.0).min(1.0);
    } else {
        // Weekly industrial pattern: weekday plateaus, reduced weekend,
        // mild correlated noise, peak scaled to exactly 40 kW.
        double noise = 0.0;
        const double noise_rho = std::exp(-1.0 / 45.0);
        std::vector<double> day_jitter(static_cast<std::size_t>(days));
        for (auto& j : day_jitter) j = 1.0 + 0.05 * gauss(rng);
        for (int d = 0; d < days; ++d) {
            const int dow = weekday(s.start + static_cast<Minute>(d) * kMinutesPerDay);
            const double day_scale = dow < 5 ? 1.0 : (dow == 5 ? 0.62 : 0.45);
            for (int m = 0; m < kMinutesPerDay; ++m) {
                noise = noise_rho * noise +
                        std::sqrt(1.0 - noise_rho * noise_rho) * gauss(rng);
                const double h = m / 60.0;
                double base = 12.0;
                if (h >= 6.0 && h < 8.0) {
                    base = 12.0 + (34.0 - 12.0) * (h - 6.0) / 2.0;
                } else if (h >= 8.0 && h < 12.0) {
                    base = 34.0;
                } else if (h >= 12.0 && h < 13.5) {
                    base = 29.0;
                } else if (h >= 13.5 && h < 17.5) {
                    base = 34.0;
                } else if (h >= 17.5 && h < 21.5) {
                    base = 34.0 - (34.0 - 14.0) * (h - 17.5) / 4.0;
                }
                const double v =
                    (base * day_scale * day_jitter[static_cast<std::size_t>(d)]) *
                    (1.0 + 0.04 * noise);
                s.values[static_cast<Eigen::Index>(d) * kMinutesPerDay + m] =
                    std::max(0.0, v);
            }
        }
        s.values *= 40.0 / s.values.maxCoeff();
    }
    return s;
}

}  // namespace bess
