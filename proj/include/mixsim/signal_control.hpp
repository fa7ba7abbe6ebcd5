#pragma once
// Intersection topology, per-cycle phase plans, the queue-pressure timing
// policy, and the append-only schedule that vehicles query for green windows.

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "mixsim/types.hpp"

namespace mixsim {

constexpr int kPhases = 4;

// Paths are approach lanes through the junction; each is governed by exactly
// one light, and each light belongs to exactly one of four conflict-free
// phases.
struct PhaseTopology {
  int paths = 0;
  int lights = 0;
  std::vector<int> light_of_path;
  std::array<std::vector<int>, kPhases> lights_of_phase;

  // Four approaches, three lanes each (left / through / right); through and
  // right share a light. Opposing through+right pairs and opposing left
  // pairs form the four phases.
  static PhaseTopology standard_cross();

  void validate() const;
  int phase_of_light(int light) const;
  std::vector<int> paths_of_phase(int phase) const;
};

// One signal cycle: slot s runs phase order[s] for durations[s] seconds.
struct PhasePlan {
  double begin = 0.0;
  std::array<int, kPhases> order{0, 1, 2, 3};
  std::array<double, kPhases> durations{};
  double visible_from = 0.0;  // when vehicles learn of this plan

  double cycle_length() const;
  double end() const { return begin + cycle_length(); }
  double slot_begin(int slot) const;
  void validate(double t_cycle, double t_min) const;
};

// Queue pressure per phase: standing or soon-standing vehicles per path,
// summed over the paths of each phase's lights.
Eigen::Vector4d phase_pressure(const std::vector<double>& per_path_counts,
                               const PhaseTopology& topology);

// Longest queues go first and get proportionally more of the slack above the
// per-phase floor; zero total pressure splits evenly; ties keep ascending
// phase order. Requires t_cycle > 4 * t_min.
PhasePlan next_cycle_plan(const Eigen::Vector4d& pressure, double t_cycle, double t_min,
                          double cycle_begin, double visible_from);

enum class SignalPolicy { Fixed, Adaptive };

inline const char* to_string(SignalPolicy p) {
  return p == SignalPolicy::Fixed ? "fixed" : "adaptive";
}

// Committed cycles, append-only: a published plan is never edited, so green
// windows already handed to vehicles stay valid. Fixed policy repeats the
// first cycle and is fully visible ahead; the adaptive policy computes each
// next cycle from pressures mid-cycle (the broadcast) and reveals it then.
class ScheduleBook {
 public:
  ScheduleBook() = default;
  ScheduleBook(PhaseTopology topology, SignalPolicy policy, double t_cycle, double t_min,
               double t_update, PhasePlan first_cycle);

  const PhaseTopology& topology() const { return topology_; }
  SignalPolicy policy() const { return policy_; }
  double t_cycle() const { return t_cycle_; }
  double t_min() const { return t_min_; }
  double t_update() const { return t_update_; }
  double origin() const { return cycles_.front().begin; }
  const std::vector<PhasePlan>& cycles() const { return cycles_; }
  uint64_t version() const { return version_; }  // bumps on every append

  // Engine driving. ensure_coverage appends fixed-policy cycles through
  // `until`; needs_broadcast fires once per adaptive cycle at begin+t_update.
  void ensure_coverage(double until);
  bool needs_broadcast(double t) const;
  void broadcast(const Eigen::Vector4d& pressure, double t);

  // Physical light state; t must lie within committed cycles.
  bool is_green(int light, double t) const;
  int active_phase(double t) const;
  const PhasePlan& cycle_at(double t) const;

  // Green windows of the path's light with begin < t_now+horizon and
  // end > t_now, restricted to plans visible at t_now; adjacent windows that
  // touch across a cycle boundary merge.
  std::vector<GreenWindow> green_windows(int path, double t_now, double horizon) const;

 private:
  PhaseTopology topology_;
  SignalPolicy policy_ = SignalPolicy::Fixed;
  double t_cycle_ = 40.0;
  double t_min_ = 3.0;
  double t_update_ = 20.0;
  std::vector<PhasePlan> cycles_;
  uint64_t version_ = 0;
};

}  // namespace mixsim
