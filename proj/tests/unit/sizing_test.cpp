#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include "bess/config.hpp"
#include "bess/sizing.hpp"
#include "doctest.h"

using namespace bess;

namespace {

IndicatorCurve curve_from(const std::vector<double>& sizes, const std::vector<double>& values,
                          Indicator ind) {
    std::vector<SizeRun> runs(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        runs[i].size_kwh = sizes[i];
        switch (ind) {
            case Indicator::lcoe: runs[i].lcoe_eur_mwh = values[i]; break;
            case Indicator::npv: runs[i].npv_eur = values[i]; break;
            case Indicator::irr: runs[i].irr = values[i]; break;
        }
    }
    return make_curve(runs, ind);
}

const std::vector<double> kSizes{111, 222, 333, 444, 555, 666, 777, 888, 999, 1110};

Scenario tiny_scenario() {
    const auto path = std::filesystem::temp_directory_path() / "sizing_tiny.toml";
    std::ofstream out(path);
    out << R"(
[simulation]
step_minutes = 60
lifetime_years = 2

[components.pv]
installed_kwp = 50.0

[components.genset]
rated_kw = 40.0

[battery]
module_kwh = 6.5

[sizing]
indicator = "lcoe"
sizes_kwh = [33.0, 65.0, 130.0]
)";
    out.close();
    return load_scenario(path.string());
}

}  // namespace

TEST_CASE("sizes quantize to the nearest whole module") {
    CHECK(quantized_modules(799.5, 6.5) == 123);
    CHECK(quantized_modules(777.0, 6.5) == 120);  // 119.54 rounds up
    CHECK(quantized_modules(111.0, 6.5) == 17);
    CHECK(quantized_modules(1110.0, 6.5) == 171);
    CHECK(quantized_modules(0.1, 6.5) == 1);  // never below one module
    CHECK(quantized_modules(9.75, 6.5) == 2); // half-way rounds away from zero
}

TEST_CASE("optimum picks the published minima of both cost columns") {
    const std::vector<double> basic{528, 417, 370, 357, 371, 388, 408, 432, 454, 477};
    const std::vector<double> advanced{407, 381, 344, 350, 368, 390, 413, 436, 459, 485};

    const auto cb = curve_from(kSizes, basic, Indicator::lcoe);
    CHECK(cb.best().size_kwh == doctest::Approx(444.0));
    CHECK(cb.best().value == doctest::Approx(357.0));

    const auto ca = curve_from(kSizes, advanced, Indicator::lcoe);
    CHECK(ca.best().size_kwh == doctest::Approx(333.0));
    CHECK(ca.best().value == doctest::Approx(344.0));

    const double variation = (ca.best().value - cb.best().value) / cb.best().value;
    CHECK(variation * 100.0 == doctest::Approx(-3.64).epsilon(0.01));
}

TEST_CASE("optimum direction follows the indicator") {
    const std::vector<double> v{10, 30, 20};
    CHECK(curve_from({1, 2, 3}, v, Indicator::lcoe).best().value == doctest::Approx(10));
    CHECK(curve_from({1, 2, 3}, v, Indicator::npv).best().value == doctest::Approx(30));
    CHECK(curve_from({1, 2, 3}, v, Indicator::irr).best().value == doctest::Approx(30));
}

TEST_CASE("ties and missing values resolve conservatively") {
    // Equal scores keep the smallest battery.
    CHECK(curve_from({1, 2, 3}, {5, 5, 5}, Indicator::lcoe).best().size_kwh == doctest::Approx(1));
    CHECK(curve_from({1, 2, 3}, {5, 5, 5}, Indicator::npv).best().size_kwh == doctest::Approx(1));

    // A configuration without an irr can never be the winner.
    std::vector<SizeRun> runs(3);
    for (int i = 0; i < 3; ++i) runs[i].size_kwh = i + 1.0;
    runs[0].irr.reset();
    runs[1].irr = 0.04;
    runs[2].irr = 0.09;
    const auto c = make_curve(runs, Indicator::irr);
    CHECK(c.best().size_kwh == doctest::Approx(3.0));
    CHECK(std::isnan(c.points[0].value));
}

TEST_CASE("optimum index is invariant under affine rescaling") {
    const std::vector<double> v{417, 370, 357, 371, 388};
    const auto base = curve_from({1, 2, 3, 4, 5}, v, Indicator::lcoe);
    std::vector<double> scaled;
    for (double x : v) scaled.push_back(3.5 * x + 100.0);
    const auto moved = curve_from({1, 2, 3, 4, 5}, scaled, Indicator::lcoe);
    CHECK(base.optimum == moved.optimum);
}

TEST_CASE("sweep scores every requested size and is thread-count invariant") {
    const Scenario sc = tiny_scenario();

    SweepOptions serial;
    serial.threads = 1;
    const auto runs1 = sweep_runs(sc, serial);
    REQUIRE(runs1.size() == 3);
    CHECK(runs1[0].n_modules == 5);
    CHECK(runs1[1].n_modules == 10);
    CHECK(runs1[2].n_modules == 20);
    for (const auto& r : runs1) CHECK(r.lcoe_eur_mwh > 0.0);

    SweepOptions wide;
    wide.threads = 8;
    const auto runs8 = sweep_runs(sc, wide);
    REQUIRE(runs8.size() == runs1.size());
    for (std::size_t i = 0; i < runs1.size(); ++i) {
        CHECK(runs8[i].lcoe_eur_mwh == runs1[i].lcoe_eur_mwh);
        CHECK(runs8[i].npv_eur == runs1[i].npv_eur);
        CHECK(runs8[i].fuel_liters == runs1[i].fuel_liters);
        CHECK(runs8[i].genset_starts == runs1[i].genset_starts);
    }

    const auto curve = make_curve(runs1, sc.indicator);
    REQUIRE(curve.points.size() == 3);
    CHECK(curve.points[0].value == doctest::Approx(runs1[0].lcoe_eur_mwh));
}

TEST_CASE("approximate sweeps keep the shape of the full run") {
    Scenario sc = tiny_scenario();
    SweepOptions opts;
    opts.approximate = true;
    const auto runs = sweep_runs(sc, opts);
    REQUIRE(runs.size() == 3);
    for (const auto& r : runs) {
        CHECK(r.lcoe_eur_mwh > 0.0);
        CHECK(std::isfinite(r.npv_eur));
    }
}

TEST_CASE("sensitivity factors are validated before any simulation") {
    const Scenario sc = tiny_scenario();
    CHECK_THROWS_WITH_AS(run_sensitivity(sc, "voltage"), doctest::Contains("control_strategy"),
                         std::invalid_argument);
}

TEST_CASE("size runs expose the score for each indicator") {
    SizeRun r;
    r.lcoe_eur_mwh = 7.0;
    r.npv_eur = -3.0;
    r.irr = 0.12;
    CHECK(r.value(Indicator::lcoe) == doctest::Approx(7.0));
    CHECK(r.value(Indicator::npv) == doctest::Approx(-3.0));
    CHECK(r.value(Indicator::irr) == doctest::Approx(0.12));
    r.irr.reset();
    CHECK(std::isnan(r.value(Indicator::irr)));
}
