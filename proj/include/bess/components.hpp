#pragma once

#include "bess/timeseries.hpp"

#include <utility>
#include <vector>

namespace bess {

struct PvPlant {
    double installed_kwp = 0.0;
    double annual_degradation = 0.005;  // fraction per year, compounded
};

/// (1 - annual_degradation)^year_index
double pv_degradation_factor(const PvPlant& plant, int year_index);

/// Producible scaled by the degradation factor of the given year.
TimeSeries pv_available(const PvPlant& plant, const TimeSeries& producible,
                        int year_index);

struct Genset {
    double rated_kw = 80.0;
    /// (load fraction, liters per hour), strictly increasing in both columns.
    std::vector<std::pair<double, double>> fuel_points = {
        {0.50, 11.5}, {0.75, 16.5}, {1.00, 23.5}, {1.10, 25.5}};
    int min_on_steps = 1;
    int min_off_steps = 1;
    double fuel_price_per_liter = 1.5;
    double start_cost = 15.0;

    double max_load_fraction() const { return fuel_points.back().first; }
    void validate() const;
};

/// Piecewise-linear fuel curve in L/h. Below the lowest table point the first
/// segment is extrapolated and floored at zero; above the highest point the
/// load is out of range. Returns 0 when the genset is off.
double genset_fuel_rate(const Genset& g, double load_fraction, bool on = true);

struct Converter {
    double rating_kva = 200.0;
    double efficiency = 1.0;  // applied in the flow direction
};

enum class FlowDirection { to_grid, from_grid };

/// Magnitude limited to the kVA rating (unity power factor), then scaled by
/// the converter efficiency.
double converter_clip(double p_requested_kw, const Converter& c, FlowDirection dir);

}  // namespace bess
