#include <cmath>
#include <stdexcept>
#include <vector>

#include "bess/engine.hpp"
#include "doctest.h"

using namespace bess;

namespace {

const TimeSeries& synth_pv() {
    static const TimeSeries s = synth_profiles(11, 365, SynthKind::pv_producible);
    return s;
}

const TimeSeries& synth_load() {
    static const TimeSeries s = synth_profiles(12, 365, SynthKind::industrial_load);
    return s;
}

TimeSeries scaled(const TimeSeries& s, double factor) {
    TimeSeries out = s;
    out.values *= factor;
    return out;
}

TimeSeries constant_year(double kw, int step_minutes = 60) {
    TimeSeries s;
    s.start = 0;
    s.step_minutes = step_minutes;
    s.values = Array::Constant(kDaysPerYear * (kMinutesPerDay / step_minutes), kw);
    return s;
}

SystemConfig micro_cfg(int step_minutes) {
    SystemConfig cfg;
    cfg.application = Application::microgrid;
    cfg.step_minutes = step_minutes;
    cfg.battery.module_kwh = 6.5;
    cfg.battery.n_modules = 2;
    cfg.genset = Genset{};
    cfg.converter.rating_kva = 100.0;
    cfg.pv.installed_kwp = 20.0;
    cfg.pv_producible = scaled(synth_pv(), 20.0);
    cfg.load = synth_load();
    return cfg;
}

}  // namespace

TEST_CASE("a dead-calm year produces empty aggregates") {
    SystemConfig cfg = micro_cfg(60);
    cfg.pv_producible = constant_year(0.0);
    cfg.load = constant_year(0.0);
    const SimulationResult res = simulate(cfg, 1);
    REQUIRE(res.years.size() == 1);
    const AnnualAggregates& y = res.years[0];
    CHECK(y.energy_delivered_mwh == 0.0);
    CHECK(y.fuel_liters == 0.0);
    CHECK(y.genset_starts == 0);
    CHECK(y.unserved_mwh == 0.0);
    CHECK(y.battery_throughput_mwh == 0.0);
    CHECK(y.pv_curtailed_mwh == 0.0);
    CHECK(res.max_balance_residual_kw == 0.0);
    CHECK(res.steps == 8760);
    CHECK(res.final_battery.soh == doctest::Approx(1.0 - 0.015));  // calendar fade only
    CHECK(res.replacement_years.empty());
}

TEST_CASE("identical configurations simulate to identical results") {
    const SystemConfig cfg = micro_cfg(60);
    const SimulationResult a = simulate(cfg, 1);
    const SimulationResult b = simulate(cfg, 1);
    CHECK(a.total_fuel_liters() == b.total_fuel_liters());
    CHECK(a.years[0].energy_delivered_mwh == b.years[0].energy_delivered_mwh);
    CHECK(a.years[0].battery_throughput_mwh == b.years[0].battery_throughput_mwh);
    CHECK(a.final_battery.soc == b.final_battery.soc);
    CHECK(a.max_balance_residual_kw == b.max_balance_residual_kw);
    CHECK(a.steps == b.steps);
}

TEST_CASE("every strategy closes the power balance over a full year") {
    SUBCASE("hysteresis control") {
        const SystemConfig cfg = micro_cfg(10);
        const SimulationResult res = simulate(cfg, 1);
        CHECK(res.max_balance_residual_kw < 1e-9);
        const double load_mwh = resample(cfg.load, 10).energy_kwh() / 1000.0;
        CHECK(res.years[0].energy_delivered_mwh + res.years[0].unserved_mwh ==
              doctest::Approx(load_mwh).epsilon(1e-9));
    }
    SUBCASE("day-plan control") {
        SystemConfig cfg = micro_cfg(60);
        cfg.dispatch.strategy = DispatchStrategy::optimized;
        cfg.dispatch.n_soc = 41;
        const SimulationResult res = simulate(cfg, 1);
        CHECK(res.max_balance_residual_kw < 1e-9);
        CHECK(res.years[0].fuel_liters > 0.0);
    }
    SUBCASE("injection tracking") {
        SystemConfig cfg;
        cfg.application = Application::pv_injection;
        cfg.dispatch.strategy = DispatchStrategy::pv_injection;
        cfg.step_minutes = 10;
        cfg.pv.installed_kwp = 1000.0;
        cfg.converter.rating_kva = 700.0;
        cfg.battery.module_kwh = 6.5;
        cfg.battery.n_modules = 123;
        cfg.pv_producible = scaled(synth_pv(), 1000.0);
        const SimulationResult res = simulate(cfg, 1);
        CHECK(res.max_balance_residual_kw < 1e-9);
        CHECK(res.years[0].energy_injected_mwh > 0.0);
        CHECK(res.years[0].peak_window_energy_mwh > 0.0);
        CHECK(res.years[0].peak_window_energy_mwh < res.years[0].energy_injected_mwh);
    }
}

TEST_CASE("pv degradation shows up across multi-year runs") {
    SystemConfig cfg;
    cfg.application = Application::pv_injection;
    cfg.dispatch.strategy = DispatchStrategy::pv_injection;
    cfg.step_minutes = 30;
    cfg.pv.installed_kwp = 1000.0;
    cfg.pv.annual_degradation = 0.05;
    cfg.converter.rating_kva = 700.0;
    cfg.battery.n_modules = 123;
    cfg.pv_producible = scaled(synth_pv(), 1000.0);
    const SimulationResult res = simulate(cfg, 2);
    REQUIRE(res.years.size() == 2);
    CHECK(res.years[1].energy_injected_mwh < res.years[0].energy_injected_mwh);
}

TEST_CASE("heavy cycling wears the battery through to replacement") {
    SystemConfig cfg = micro_cfg(60);
    cfg.pv_producible = constant_year(0.0);
    cfg.load = constant_year(20.0);
    cfg.battery.ageing.cycle_fade_per_efc = 0.05;
    const SimulationResult res = simulate(cfg, 1);
    REQUIRE_FALSE(res.replacement_years.empty());
    for (int y : res.replacement_years) CHECK(y == 0);
    CHECK(res.final_battery.replacements == static_cast<long>(res.replacement_years.size()));
    CHECK(res.final_battery.soh > kReplacementSoh);
    CHECK(res.final_battery.soh <= 1.0);
}

TEST_CASE("step size does not change the physics of constant signals") {
    SystemConfig fine = micro_cfg(1);
    fine.pv_producible = constant_year(30.0, 1);
    fine.load = constant_year(20.0, 1);
    fine.battery.ageing.enabled = false;  // fade timing is resolution dependent
    SystemConfig coarse = fine;
    coarse.step_minutes = 60;
    const SimulationResult a = simulate(fine, 1);
    const SimulationResult b = simulate(coarse, 1);
    CHECK(a.years[0].energy_delivered_mwh ==
          doctest::Approx(b.years[0].energy_delivered_mwh).epsilon(1e-9));
    CHECK(a.years[0].pv_curtailed_mwh ==
          doctest::Approx(b.years[0].pv_curtailed_mwh).epsilon(1e-9));
    CHECK(a.years[0].battery_throughput_mwh ==
          doctest::Approx(b.years[0].battery_throughput_mwh).epsilon(1e-9));
    CHECK(a.years[0].fuel_liters == 0.0);
    CHECK(b.years[0].fuel_liters == 0.0);
}

TEST_CASE("single-year extrapolation spreads fade into scheduled swaps") {
    SystemConfig cfg = micro_cfg(60);
    cfg.pv.annual_degradation = 0.0;

    SimulationResult one;
    one.years.resize(1);
    one.years[0].energy_injected_mwh = 100.0;
    one.years[0].fuel_liters = 50.0;
    one.years[0].pv_curtailed_mwh = 10.0;
    one.final_battery = initial_state(cfg.battery, 0.5);
    one.final_battery.soh = 0.97;  // 3% fade in year one
    one.steps = 8760;

    SUBCASE("a 3 percent yearly fade swaps the pack in years 10 and 20") {
        const SimulationResult life = extrapolate_single_year(one, cfg, 20);
        REQUIRE(life.years.size() == 20);
        CHECK(life.replacement_years == std::vector<int>{9, 19});
        CHECK(life.years[7].energy_injected_mwh == doctest::Approx(100.0));
        CHECK(life.years[7].fuel_liters == doctest::Approx(50.0));
    }
    SUBCASE("pv-driven energies follow the degradation factor") {
        cfg.pv.annual_degradation = 0.04;
        const SimulationResult life = extrapolate_single_year(one, cfg, 5);
        CHECK(life.years[0].energy_injected_mwh == doctest::Approx(100.0));
        CHECK(life.years[3].energy_injected_mwh ==
              doctest::Approx(100.0 * std::pow(0.96, 3)));
        CHECK(life.years[3].pv_curtailed_mwh == doctest::Approx(10.0 * std::pow(0.96, 3)));
        CHECK(life.years[3].fuel_liters == doctest::Approx(50.0));  // load driven, unscaled
    }
    SUBCASE("no fade means no swaps and an unchanged pack") {
        cfg.battery.ageing.enabled = false;
        one.final_battery.soh = 1.0;
        const SimulationResult life = extrapolate_single_year(one, cfg, 20);
        CHECK(life.replacement_years.empty());
        CHECK(life.final_battery.soh == 1.0);
    }
    SUBCASE("only one-year inputs are accepted") {
        one.years.resize(2);
        CHECK_THROWS_AS(extrapolate_single_year(one, cfg, 20), std::invalid_argument);
    }
}

TEST_CASE("configuration validation rejects inconsistent systems") {
    SystemConfig cfg = micro_cfg(60);
    CHECK_NOTHROW(cfg.validate());

    SUBCASE("step must divide the day") {
        cfg.step_minutes = 7;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("circuit model needs circuit parameters") {
        cfg.battery_model = BatteryModelKind::ec;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg.battery.ec = EcParams{};
        CHECK_NOTHROW(cfg.validate());
    }
    SUBCASE("day-plan control needs a genset") {
        cfg.dispatch.strategy = DispatchStrategy::optimized;
        cfg.genset.reset();
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("application and strategy must agree") {
        cfg.application = Application::pv_injection;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
        cfg.application = Application::microgrid;
        cfg.dispatch.strategy = DispatchStrategy::pv_injection;
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    }
    SUBCASE("series must cover exactly one year") {
        cfg.pv_producible.values = Array::Constant(100, 1.0);
        cfg.pv_producible.step_minutes = 60;
        CHECK_THROWS_AS(simulate(cfg, 1), std::invalid_argument);
    }
}
