#pragma once
// Latest-stop timing, the standby stop arc, and the event-triggered
// replanning monitor.

#include <vector>

#include "mixsim/exit_range.hpp"
#include "mixsim/signal_window.hpp"

namespace mixsim {

// Latest duration (from now) over which a stop cubic can come to rest
// `distance` ahead without reversing and without braking beyond u_min.
//
// When the critical deceleration -2*v0^2/(3*distance) respects u_min the
// answer is 3*distance/v0 (the arc that ends exactly as braking would need to
// exceed the critical rate). Otherwise the stop is brake-limited and the
// latest arc is the one whose initial acceleration equals u_min, the smaller
// positive root of u_min*t^2 + 4*v0*t - 6*distance = 0. Throws
// DegenerateError for v0 <= 0 and InfeasibleError when no arc can stop in
// `distance` at all (v0^2 > 2*|u_min|*distance).
double latest_stop_time(double v0, double distance, double u_min);

// Stop arc from `state` to rest at stop_position at absolute time stop_time,
// followed by a stationary hold. Validates the arc against the bounds; a
// violation means the stop time was not produced by latest_stop_time and is
// reported as an internal error.
Trajectory standby_trajectory(const VehicleState& state, double stop_position,
                              double stop_time, const Bounds& bounds,
                              double hold_until = 0.0);

// Largest amount by which reaction_time * v(t) exceeds the remaining distance
// to rest along a stop arc (zero when the tail never undercuts). Queue stop
// positions back off by this much so the spacing rule holds through the
// creeping tail.
double spacing_shortfall(const CubicSegment& arc, double reaction_time);

// Roll-forward arc for a vehicle at rest whose queue ahead has discharged:
// a rest-to-rest cubic to the vacated stop position, followed by a hold.
// Duration is the shortest that keeps the peak speed at or below peak_speed
// and the end accelerations within bounds. Throws DegenerateError when the
// target is not ahead or the vehicle is moving.
Trajectory advance_trajectory(const VehicleState& state, double stop_position,
                              const Bounds& bounds, double peak_speed,
                              double hold_until = 0.0);

enum class ReplanTrigger { None, ExitStandby, Refine };

struct PlanMonitor {
  bool in_standby = false;
  double stop_time = 0.0;         // absolute; meaningful in standby
  bool window_clipped = false;    // crossing was pushed later by a green start
  double clip_green_begin = 0.0;  // the green start that did the clipping
};

// Evaluated every engine step from the current (on-plan) state.
//  - standby: fires ExitStandby as soon as the unconstrained family reaches
//    some known green window (checked during the stop arc and while holding).
//  - clipped crossing plan: fires Refine once the family's earliest stop-line
//    arrival has drifted past the green start that originally clipped it.
ReplanTrigger replanning_trigger(const PlanMonitor& monitor, const VehicleState& state,
                                 const std::vector<GreenWindow>& windows,
                                 double line_position, double exit_position,
                                 const Bounds& bounds, double horizon_cap = 120.0);

}  // namespace mixsim
