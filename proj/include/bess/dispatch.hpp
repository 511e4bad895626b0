#pragma once

#include <cstdint>
#include <vector>

#include "bess/system.hpp"

namespace bess {

struct DispatchDecision {
    double p_genset_kw = 0.0;
    double pv_curtailed_kw = 0.0;
    double p_injected_kw = 0.0;
    double unserved_kw = 0.0;
    bool genset_on = false;
    bool genset_started = false;
    StepResult batt;  // battery step applied during the decision
};

struct MicrogridStepInput {
    double load_kw = 0.0;
    double pv_kw = 0.0;
    bool genset_on = false;
};

// Hysteresis control: genset starts at the low SOC threshold, stops at the
// high one, and while on serves the load and charges the battery.
DispatchDecision microgrid_basic_step(const MicrogridStepInput& in, const BatteryState& batt,
                                      const SystemConfig& cfg, double dt_hours);

// One day of genset commitments from the daily unit-commitment solver.
struct DayPlan {
    std::vector<std::uint8_t> on;    // genset state per step
    std::vector<double> target_soc;  // end-of-step soc the plan aims for
    double planned_cost = 0.0;       // fuel + start cost at the forecast
};

DayPlan microgrid_optimized_day(const TimeSeries& load_fc, const TimeSeries& pv_fc,
                                const BatteryState& batt, bool genset_on,
                                const SystemConfig& cfg);

// Executes one step of a day plan against actual conditions. The plan's
// on/off commitments are kept, the genset modulates within its range, and the
// battery absorbs the residual; *forced_on latches an emergency genset start
// when the soc floor is hit despite the plan.
DispatchDecision microgrid_planned_step(const MicrogridStepInput& in, const DayPlan& plan,
                                        int step_of_day, const BatteryState& batt,
                                        const SystemConfig& cfg, double dt_hours,
                                        bool* forced_on);

struct AnnouncedProfile {
    TimeSeries committed;        // injection commitment for the day, kW
    bool battery_warning = false;  // usable energy below the evening obligation
};

// Builds the day-ahead commitment: smoothed, ramp-limited PV forecast with
// the evening peak-window floor, minus the pre-evening reserve needed to
// charge the battery for that obligation.
AnnouncedProfile pv_injection_announce(const TimeSeries& pv_fc_day, const BatteryState& batt,
                                       const SystemConfig& cfg);

// True when the profile meets its own ramp, peak-floor, converter and
// nonnegativity constraints.
bool announced_profile_valid(const AnnouncedProfile& profile, const SystemConfig& cfg);

// Real-time tracking of the commitment; deviations beyond the tolerance band
// are measured by the caller from p_injected vs committed.
DispatchDecision pv_injection_step(double pv_kw, double committed_kw, const BatteryState& batt,
                                   const SystemConfig& cfg, double dt_hours);

bool in_peak_window(Minute minute_of_day, const DispatchConfig& d);

}  // namespace bess
