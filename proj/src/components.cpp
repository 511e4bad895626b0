#include "bess/components.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bess {

double pv_degradation_factor(const PvPlant& plant, int year_index) {
    if (year_index < 0) throw std::invalid_argument("year_index must be >= 0");
    return std::pow(1.0 - plant.annual_degradation, year_index);
}

TimeSeries pv_available(const PvPlant& plant, const TimeSeries& producible,
                        int year_index) {
    TimeSeries out = producible;
    out.values *= pv_degradation_factor(plant, year_index);
    return out;
}

void Genset::validate() const {
    if (rated_kw <= 0.0) throw std::invalid_argument("genset rated_kw must be > 0");
    if (fuel_points.size() < 2)
        throw std::invalid_argument("genset fuel curve needs at least two points");
    for (std::size_t i = 1; i < fuel_points.size(); ++i) {
        if (fuel_points[i].first <= fuel_points[i - 1].first ||
            fuel_points[i].second <= fuel_points[i - 1].second) {
            throw std::invalid_argument(
                "genset fuel curve must be strictly increasing in load and L/h");
        }
    }
}

double genset_fuel_rate(const Genset& g, double load_fraction, bool on) {
    if (!on) return 0.0;
    const auto& pts = g.fuel_points;
    if (load_fraction > pts.back().first + 1e-12) {
        throw std::invalid_argument("genset load fraction above fuel table maximum");
    }
    if (load_fraction < 0.0) throw std::invalid_argument("negative genset load");

    std::size_t seg = 0;  // first segment extrapolates below the lowest point
    while (seg + 2 < pts.size() && load_fraction > pts[seg + 1].first) ++seg;
    const auto [x0, y0] = pts[seg];
    const auto [x1, y1] = pts[seg + 1];
    const double rate = y0 + (y1 - y0) * (load_fraction - x0) / (x1 - x0);
    return std::max(0.0, rate);
}

double converter_clip(double p_requested_kw, const Converter& c, FlowDirection) {
    const double clipped = std::clamp(p_requested_kw, -c.rating_kva, c.rating_kva);
    return clipped * c.efficiency;
}

}  // namespace bess
