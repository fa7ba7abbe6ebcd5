#include "mixsim/signal_control.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mixsim {

PhaseTopology PhaseTopology::standard_cross() {
  // Approaches N, E, S, W in order; per approach the lanes are
  // [left, through, right] and the lights are [left, through+right].
  PhaseTopology topo;
  topo.paths = 12;
  topo.lights = 8;
  topo.light_of_path.resize(12);
  for (int a = 0; a < 4; ++a) {
    topo.light_of_path[3 * a + 0] = 2 * a + 0;  // left lane
    topo.light_of_path[3 * a + 1] = 2 * a + 1;  // through lane
    topo.light_of_path[3 * a + 2] = 2 * a + 1;  // right lane shares
  }
  // N=0, E=1, S=2, W=3. Opposing pairs move together.
  topo.lights_of_phase[0] = {1, 5};  // N/S through+right
  topo.lights_of_phase[1] = {0, 4};  // N/S left
  topo.lights_of_phase[2] = {3, 7};  // E/W through+right
  topo.lights_of_phase[3] = {2, 6};  // E/W left
  topo.validate();
  return topo;
}

void PhaseTopology::validate() const {
  if (paths <= 0 || lights <= 0) throw ConfigError("topology: empty");
  if (static_cast<int>(light_of_path.size()) != paths)
    throw ConfigError("topology: light_of_path size mismatch");
  for (int l : light_of_path)
    if (l < 0 || l >= lights) throw ConfigError("topology: path maps to unknown light");
  std::vector<int> seen(lights, 0);
  for (const auto& ph : lights_of_phase)
    for (int l : ph) {
      if (l < 0 || l >= lights) throw ConfigError("topology: phase lists unknown light");
      ++seen[l];
    }
  for (int l = 0; l < lights; ++l)
    if (seen[l] != 1) throw ConfigError("topology: light " + std::to_string(l) +
                                        " must belong to exactly one phase");
}

int PhaseTopology::phase_of_light(int light) const {
  for (int p = 0; p < kPhases; ++p)
    for (int l : lights_of_phase[p])
      if (l == light) return p;
  throw QueryError("phase_of_light: unknown light");
}

std::vector<int> PhaseTopology::paths_of_phase(int phase) const {
  if (phase < 0 || phase >= kPhases) throw QueryError("paths_of_phase: bad phase");
  std::vector<int> out;
  for (int path = 0; path < paths; ++path) {
    int light = light_of_path[path];
    const auto& ph = lights_of_phase[phase];
    if (std::find(ph.begin(), ph.end(), light) != ph.end()) out.push_back(path);
  }
  return out;
}

double PhasePlan::cycle_length() const {
  return std::accumulate(durations.begin(), durations.end(), 0.0);
}

double PhasePlan::slot_begin(int slot) const {
  if (slot < 0 || slot > kPhases) throw QueryError("slot_begin: bad slot");
  double t = begin;
  for (int s = 0; s < slot; ++s) t += durations[s];
  return t;
}

void PhasePlan::validate(double t_cycle, double t_min) const {
  std::array<int, kPhases> seen{};
  for (int p : order) {
    if (p < 0 || p >= kPhases) throw ConfigError("phase plan: bad phase index");
    ++seen[p];
  }
  for (int c : seen)
    if (c != 1) throw ConfigError("phase plan: order must be a permutation");
  for (double d : durations)
    if (d < t_min - 1e-9) throw ConfigError("phase plan: slot below minimum duration");
  if (std::abs(cycle_length() - t_cycle) > 1e-6)
    throw ConfigError("phase plan: durations do not sum to the cycle length");
}

Eigen::Vector4d phase_pressure(const std::vector<double>& per_path_counts,
                               const PhaseTopology& topology) {
  if (static_cast<int>(per_path_counts.size()) != topology.paths)
    throw QueryError("phase_pressure: count vector size mismatch");
  Eigen::Vector4d pressure = Eigen::Vector4d::Zero();
  for (int path = 0; path < topology.paths; ++path) {
    int phase = topology.phase_of_light(topology.light_of_path[path]);
    pressure[phase] += per_path_counts[path];
  }
  return pressure;
}

PhasePlan next_cycle_plan(const Eigen::Vector4d& pressure, double t_cycle, double t_min,
                          double cycle_begin, double visible_from) {
  if (!(t_cycle > 4.0 * t_min))
    throw ConfigError("cycle length must exceed four times the minimum phase duration");
  for (int p = 0; p < kPhases; ++p)
    if (pressure[p] < 0.0) throw QueryError("negative phase pressure");

  PhasePlan plan;
  plan.begin = cycle_begin;
  plan.visible_from = visible_from;

  std::array<int, kPhases> idx{0, 1, 2, 3};
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return pressure[a] > pressure[b]; });
  plan.order = idx;

  double total = pressure.sum();
  double slack = t_cycle - kPhases * t_min;
  for (int s = 0; s < kPhases; ++s) {
    double share = total > 0.0 ? pressure[plan.order[s]] / total : 1.0 / kPhases;
    plan.durations[s] = t_min + share * slack;
  }
  // Kill the accumulated rounding drift so cycles abut exactly.
  double err = t_cycle - plan.cycle_length();
  plan.durations[kPhases - 1] += err;
  plan.validate(t_cycle, t_min);
  return plan;
}

ScheduleBook::ScheduleBook(PhaseTopology topology, SignalPolicy policy, double t_cycle,
                           double t_min, double t_update, PhasePlan first_cycle)
    : topology_(std::move(topology)),
      policy_(policy),
      t_cycle_(t_cycle),
      t_min_(t_min),
      t_update_(t_update) {
  topology_.validate();
  if (!(t_cycle_ > 4.0 * t_min_))
    throw ConfigError("cycle length must exceed four times the minimum phase duration");
  if (t_update_ <= 0.0 || t_update_ >= t_cycle_)
    throw ConfigError("broadcast offset must fall inside the cycle");
  first_cycle.validate(t_cycle_, t_min_);
  if (first_cycle.begin > 0.0) {
    // Preamble copy so light-state queries resolve from time zero even when
    // the first configured cycle starts later.
    PhasePlan pre = first_cycle;
    pre.begin = first_cycle.begin - t_cycle_;
    pre.visible_from = pre.begin;
    cycles_.push_back(pre);
  }
  cycles_.push_back(first_cycle);
  version_ = 1;
}

void ScheduleBook::ensure_coverage(double until) {
  if (policy_ != SignalPolicy::Fixed) return;
  while (cycles_.back().end() < until) {
    PhasePlan next = cycles_.back();
    next.begin = cycles_.back().end();
    next.visible_from = cycles_.front().visible_from;
    cycles_.push_back(next);
    ++version_;
  }
}

bool ScheduleBook::needs_broadcast(double t) const {
  if (policy_ != SignalPolicy::Adaptive) return false;
  const PhasePlan& last = cycles_.back();
  return t >= last.begin + t_update_ - 1e-9;
}

void ScheduleBook::broadcast(const Eigen::Vector4d& pressure, double t) {
  if (policy_ != SignalPolicy::Adaptive)
    throw QueryError("broadcast: schedule is not adaptive");
  if (!needs_broadcast(t)) throw QueryError("broadcast: too early for this cycle");
  const PhasePlan& last = cycles_.back();
  cycles_.push_back(next_cycle_plan(pressure, t_cycle_, t_min_, last.end(), t));
  ++version_;
}

const PhasePlan& ScheduleBook::cycle_at(double t) const {
  for (const auto& c : cycles_)
    if (t >= c.begin - 1e-9 && t < c.end() - 1e-9) return c;
  if (!cycles_.empty() && std::abs(t - cycles_.back().end()) <= 1e-9) return cycles_.back();
  throw QueryError("cycle_at: time outside committed schedule");
}

int ScheduleBook::active_phase(double t) const {
  const PhasePlan& c = cycle_at(t);
  double s = c.begin;
  for (int slot = 0; slot < kPhases; ++slot) {
    double e = s + c.durations[slot];
    if (t < e - 1e-9 || slot == kPhases - 1) return c.order[slot];
    s = e;
  }
  return c.order[kPhases - 1];
}

bool ScheduleBook::is_green(int light, double t) const {
  int phase = topology_.phase_of_light(light);
  return active_phase(t) == phase;
}

std::vector<GreenWindow> ScheduleBook::green_windows(int path, double t_now,
                                                     double horizon) const {
  if (path < 0 || path >= topology_.paths) throw QueryError("green_windows: bad path");
  int light = topology_.light_of_path[path];
  int phase = topology_.phase_of_light(light);
  double limit = t_now + horizon;

  std::vector<GreenWindow> out;
  for (const auto& c : cycles_) {
    if (c.visible_from > t_now + 1e-9) continue;
    double s = c.begin;
    for (int slot = 0; slot < kPhases; ++slot) {
      double e = s + c.durations[slot];
      if (c.order[slot] == phase && e > t_now && s < limit) {
        if (!out.empty() && std::abs(out.back().end - s) <= 1e-9)
          out.back().end = e;  // same phase abutting across a cycle boundary
        else
          out.push_back({s, e});
      }
      s = e;
    }
  }
  return out;
}

}  // namespace mixsim
