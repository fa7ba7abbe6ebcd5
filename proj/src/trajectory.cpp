#include "mixsim/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace mixsim {

namespace {

constexpr double kJunctionTol = 1e-6;

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

}  // namespace

double CubicSegment::min_velocity() const {
  double lo = std::min(velocity(t_begin), velocity(t_end));
  if (a != 0.0) {
    const double s_vertex = -b / (3.0 * a);
    if (s_vertex > 0.0 && s_vertex < duration()) lo = std::min(lo, velocity(t_begin + s_vertex));
  }
  return lo;
}

double CubicSegment::max_velocity() const {
  double hi = std::max(velocity(t_begin), velocity(t_end));
  if (a != 0.0) {
    const double s_vertex = -b / (3.0 * a);
    if (s_vertex > 0.0 && s_vertex < duration()) hi = std::max(hi, velocity(t_begin + s_vertex));
  }
  return hi;
}

double CubicSegment::min_acceleration() const {
  return std::min(acceleration(t_begin), acceleration(t_end));
}

double CubicSegment::max_acceleration() const {
  return std::max(acceleration(t_begin), acceleration(t_end));
}

double segment_begin(const Segment& s) {
  return std::visit([](const auto& seg) { return seg.t_begin; }, s);
}

double segment_end(const Segment& s) {
  return std::visit([](const auto& seg) { return seg.t_end; }, s);
}

double segment_position(const Segment& s, double t) {
  return std::visit([t](const auto& seg) { return seg.position(t); }, s);
}

double segment_velocity(const Segment& s, double t) {
  return std::visit([t](const auto& seg) { return seg.velocity(t); }, s);
}

double segment_acceleration(const Segment& s, double t) {
  return std::visit([t](const auto& seg) { return seg.acceleration(t); }, s);
}

Trajectory::Trajectory(std::vector<Segment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw Error("trajectory: no segments");
  for (size_t i = 0; i < segments_.size(); ++i) {
    const double b = segment_begin(segments_[i]);
    const double e = segment_end(segments_[i]);
    if (!(e > b)) throw Error("trajectory: segment with non-positive duration");
    if (i > 0) {
      const double prev_end = segment_end(segments_[i - 1]);
      if (std::abs(b - prev_end) > kJunctionTol)
        throw Error("trajectory: segments not contiguous");
      const double dp = segment_position(segments_[i], b) - segment_position(segments_[i - 1], prev_end);
      const double dv = segment_velocity(segments_[i], b) - segment_velocity(segments_[i - 1], prev_end);
      if (std::abs(dp) > kJunctionTol || std::abs(dv) > kJunctionTol)
        throw Error("trajectory: discontinuous junction");
    }
  }
}

double Trajectory::start_time() const {
  if (segments_.empty()) throw Error("trajectory: empty");
  return segment_begin(segments_.front());
}

double Trajectory::end_time() const {
  if (segments_.empty()) throw Error("trajectory: empty");
  return segment_end(segments_.back());
}

VehicleState Trajectory::initial_state() const { return eval(*this, start_time()); }

VehicleState Trajectory::final_state() const { return eval(*this, end_time()); }

VehicleState eval(const Trajectory& traj, double t) {
  const auto& segs = traj.segments();
  if (segs.empty()) throw QueryError("eval: empty trajectory");
  if (t < traj.start_time() - kJunctionTol || t > traj.end_time() + kJunctionTol)
    throw QueryError("eval: time outside trajectory span");
  // Later segment wins at a junction: find the last segment starting at or
  // before t.
  size_t lo = 0, hi = segs.size();
  while (hi - lo > 1) {
    const size_t mid = (lo + hi) / 2;
    if (segment_begin(segs[mid]) <= t)
      lo = mid;
    else
      hi = mid;
  }
  const Segment& seg = segs[lo];
  const double tc = clamp(t, segment_begin(seg), segment_end(seg));
  return VehicleState{segment_position(seg, tc), segment_velocity(seg, tc),
                      segment_acceleration(seg, tc), t};
}

VehicleState eval_extended(const Trajectory& traj, double t) {
  if (traj.empty()) throw QueryError("eval_extended: empty trajectory");
  const double t0 = traj.start_time();
  const double t1 = traj.end_time();
  if (t < t0) {
    VehicleState s = traj.initial_state();
    s.time = t;
    s.velocity = 0.0;  // held at the entry state before it exists
    s.acceleration = 0.0;
    return s;
  }
  if (t > t1) {
    VehicleState s = traj.final_state();
    s.position += s.velocity * (t - t1);
    s.acceleration = 0.0;
    s.time = t;
    return s;
  }
  return eval(traj, t);
}

double crossing_time(const Trajectory& traj, double p_target) {
  const auto& segs = traj.segments();
  if (segs.empty()) throw NoCrossingError("crossing_time: empty trajectory");
  const double p_start = segment_position(segs.front(), segment_begin(segs.front()));
  if (p_target < p_start - 1e-9)
    throw NoCrossingError("crossing_time: target behind the trajectory start");
  if (p_target <= p_start + 1e-12) return traj.start_time();

  for (const Segment& seg : segs) {
    const double tb = segment_begin(seg);
    const double te = segment_end(seg);
    if (segment_position(seg, te) < p_target) continue;
    // First segment whose end reaches the target; bisect inside it. Position
    // is nondecreasing for valid plans, so the bracket is sound.
    double lo = tb, hi = te;
    if (segment_position(seg, lo) >= p_target) return lo;
    while (hi - lo > 1e-9) {
      const double mid = 0.5 * (lo + hi);
      if (segment_position(seg, mid) >= p_target)
        hi = mid;
      else
        lo = mid;
    }
    return hi;
  }
  throw NoCrossingError("crossing_time: target never reached");
}

namespace {

// 0.5 * integral of u(t)^2 over the local interval [s0, s1] of one segment.
double effort_cubic(const CubicSegment& seg, double s0, double s1) {
  // u(s) = 6 a s + 2 b; integral of u^2/2 = 6 a^2 s^3 + 6 a b s^2 + 2 b^2 s
  auto F = [&](double s) {
    return 6.0 * seg.a * seg.a * s * s * s + 6.0 * seg.a * seg.b * s * s +
           2.0 * seg.b * seg.b * s;
  };
  return F(s1) - F(s0);
}

}  // namespace

double control_effort(const Trajectory& traj, double t0, double t1) {
  if (traj.empty()) return 0.0;
  double total = 0.0;
  for (const Segment& seg : traj.segments()) {
    const double b = std::max(segment_begin(seg), t0);
    const double e = std::min(segment_end(seg), t1);
    if (e <= b) continue;
    if (const auto* cub = std::get_if<CubicSegment>(&seg)) {
      total += effort_cubic(*cub, b - cub->t_begin, e - cub->t_begin);
    } else {
      const auto& ca = std::get<ConstAccelSegment>(seg);
      total += 0.5 * ca.u * ca.u * (e - b);
    }
  }
  return total;
}

double control_effort(const Trajectory& traj) {
  return control_effort(traj, traj.start_time(), traj.end_time());
}

double SampledProfile::position_at(double t) const {
  if (position.empty()) throw QueryError("sampled profile: empty");
  if (t <= t_begin) return position.front();
  const double te = t_end();
  if (t >= te) return position.back() + velocity.back() * (t - te);
  const double x = (t - t_begin) / step;
  const size_t i = std::min(size_t(x), position.size() - 2);
  const double frac = x - double(i);
  return position[i] + (position[i + 1] - position[i]) * frac;
}

double SampledProfile::velocity_at(double t) const {
  if (velocity.empty()) throw QueryError("sampled profile: empty");
  if (t <= t_begin) return velocity.front();
  const double te = t_end();
  if (t >= te) return velocity.back();
  const double x = (t - t_begin) / step;
  const size_t i = std::min(size_t(x), velocity.size() - 2);
  const double frac = x - double(i);
  return velocity[i] + (velocity[i + 1] - velocity[i]) * frac;
}

LeadProfile LeadProfile::from_trajectory(std::shared_ptr<const Trajectory> traj) {
  LeadProfile p;
  p.traj_ = std::move(traj);
  return p;
}

LeadProfile LeadProfile::from_profile(std::shared_ptr<const SampledProfile> profile) {
  LeadProfile p;
  p.series_ = std::move(profile);
  return p;
}

double LeadProfile::position(double t) const {
  if (traj_) return eval_extended(*traj_, t).position;
  if (series_) return series_->position_at(t);
  throw QueryError("lead profile: empty");
}

double LeadProfile::velocity(double t) const {
  if (traj_) return eval_extended(*traj_, t).velocity;
  if (series_) return series_->velocity_at(t);
  throw QueryError("lead profile: empty");
}

double LeadProfile::span_begin() const {
  if (traj_) return traj_->start_time();
  if (series_) return series_->t_begin;
  throw QueryError("lead profile: empty");
}

double LeadProfile::span_end() const {
  if (traj_) return traj_->end_time();
  if (series_) return series_->t_end();
  throw QueryError("lead profile: empty");
}

bool spacing_ok(const Trajectory& self, const LeadProfile& lead, double reaction_time,
                double clearance, double t0, double t1, double grid_step, double margin) {
  if (!lead.valid() || t1 <= t0) return true;
  // Cheap sufficient condition: even if the whole span were driven at the
  // follower's largest plan speed toward a parked leader, the gap holds.
  const double p_self_max = eval_extended(self, t1).position;
  const double lead_floor = std::min(lead.position(t0), lead.position(t1));
  double v_plan_max = 0.0;
  for (const Segment& seg : self.segments()) {
    if (const auto* cub = std::get_if<CubicSegment>(&seg))
      v_plan_max = std::max(v_plan_max, cub->max_velocity());
    else {
      const auto& ca = std::get<ConstAccelSegment>(seg);
      v_plan_max = std::max(v_plan_max, std::max(ca.velocity(ca.t_begin), ca.velocity(ca.t_end)));
    }
  }
  if (lead_floor - p_self_max >= reaction_time * v_plan_max + clearance) return true;

  const int n = std::max(1, int(std::ceil((t1 - t0) / grid_step)));
  for (int i = 0; i <= n; ++i) {
    const double t = (i == n) ? t1 : t0 + grid_step * double(i);
    const VehicleState s = eval_extended(self, t);
    const double need = reaction_time * s.velocity + clearance;
    if (lead.position(t) - s.position < need - margin) return false;
  }
  return true;
}

}  // namespace mixsim
