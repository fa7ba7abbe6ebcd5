#pragma once
// Piecewise trajectories built from cubic and constant-acceleration segments.
// Cubic coefficients live in a segment-local time frame (s = t - t_begin) so
// evaluation stays well conditioned at large absolute times.

#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "mixsim/types.hpp"

namespace mixsim {

struct CubicSegment {
  double t_begin = 0.0;
  double t_end = 0.0;
  // position(s) = a s^3 + b s^2 + c s + d, s = t - t_begin
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  double duration() const { return t_end - t_begin; }
  double position(double t) const {
    const double s = t - t_begin;
    return ((a * s + b) * s + c) * s + d;
  }
  double velocity(double t) const {
    const double s = t - t_begin;
    return (3.0 * a * s + 2.0 * b) * s + c;
  }
  double acceleration(double t) const { return 6.0 * a * (t - t_begin) + 2.0 * b; }

  // Exact extrema over [t_begin, t_end]: velocity is quadratic in s,
  // acceleration is linear, so candidates are the endpoints plus the vertex.
  double min_velocity() const;
  double max_velocity() const;
  double min_acceleration() const;
  double max_acceleration() const;
};

struct ConstAccelSegment {
  double t_begin = 0.0;
  double t_end = 0.0;
  double p0 = 0.0, v0 = 0.0, u = 0.0;

  double duration() const { return t_end - t_begin; }
  double position(double t) const {
    const double s = t - t_begin;
    return p0 + (v0 + 0.5 * u * s) * s;
  }
  double velocity(double t) const { return v0 + u * (t - t_begin); }
  double acceleration(double) const { return u; }
};

using Segment = std::variant<CubicSegment, ConstAccelSegment>;

double segment_begin(const Segment& s);
double segment_end(const Segment& s);
double segment_position(const Segment& s, double t);
double segment_velocity(const Segment& s, double t);
double segment_acceleration(const Segment& s, double t);

// A committed motion plan: contiguous segments, position/velocity continuous
// at junctions (1e-6 tolerance, checked at construction). Landmark fields
// record where the plan meets the stop line and the zone exit, when it does.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<Segment> segments);

  bool empty() const { return segments_.empty(); }
  const std::vector<Segment>& segments() const { return segments_; }
  double start_time() const;
  double end_time() const;
  VehicleState initial_state() const;
  VehicleState final_state() const;

  std::optional<double> cross_time;  // stop-line arrival
  std::optional<double> exit_time;   // zone-exit arrival

 private:
  std::vector<Segment> segments_;
};

// State at t in [start, end]; at a junction the later segment wins.
// Throws QueryError outside the validity interval.
VehicleState eval(const Trajectory& traj, double t);

// Like eval, but clamps before the start and extends with constant velocity
// past the end. Used to read committed plans outside their formal span.
VehicleState eval_extended(const Trajectory& traj, double t);

// Earliest t with position(t) == p_target, by bracketed bisection to 1e-9 s.
// Throws NoCrossingError when the trajectory never reaches the target (or
// starts beyond it by more than the bracket tolerance).
double crossing_time(const Trajectory& traj, double p_target);

// 0.5 * integral of acceleration^2 over [t0, t1] clipped to the trajectory
// span (closed form per segment).
double control_effort(const Trajectory& traj, double t0, double t1);
double control_effort(const Trajectory& traj);

// Uniformly sampled motion profile (10 ms grid) with linear interpolation,
// used for predicted human-driver motion.
struct SampledProfile {
  double t_begin = 0.0;
  double step = 0.01;
  std::vector<double> position;
  std::vector<double> velocity;

  double t_end() const {
    return position.empty() ? t_begin : t_begin + step * double(position.size() - 1);
  }
  double position_at(double t) const;
  double velocity_at(double t) const;
};

// Read-only view of a predecessor's motion over absolute time. Before the
// source's span the entry state is held; past it the final state extends at
// constant velocity (the vehicle drives off downstream).
class LeadProfile {
 public:
  LeadProfile() = default;
  static LeadProfile from_trajectory(std::shared_ptr<const Trajectory> traj);
  static LeadProfile from_profile(std::shared_ptr<const SampledProfile> profile);

  bool valid() const { return traj_ != nullptr || series_ != nullptr; }
  double position(double t) const;
  double velocity(double t) const;
  double span_begin() const;
  double span_end() const;

 private:
  std::shared_ptr<const Trajectory> traj_;
  std::shared_ptr<const SampledProfile> series_;
};

// Pointwise spacing rule on a grid over [t0, t1]: the leader must stay at
// least reaction_time * follower_speed + clearance ahead. The grid includes
// both endpoints. `margin` absorbs roundoff.
bool spacing_ok(const Trajectory& self, const LeadProfile& lead, double reaction_time,
                double clearance, double t0, double t1, double grid_step,
                double margin = 1e-6);

}  // namespace mixsim
