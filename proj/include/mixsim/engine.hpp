#pragma once
// The deterministic fixed-step simulation engine: arrivals, per-vehicle
// planning and car-following plants, adaptive signal broadcasts, hard safety
// assertions, metrics, and trace recording.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "mixsim/idm.hpp"
#include "mixsim/planner.hpp"
#include "mixsim/scenario.hpp"
#include "mixsim/signal_control.hpp"
#include "mixsim/trace.hpp"

namespace mixsim {

struct Arrival {
  double time = 0.0;
  int path = 0;
  VehicleClass cls = VehicleClass::Cav;
  double speed = 0.0;
};

struct VehicleRuntime {
  VehicleInfo info;
  int leader_id = -1;  // immediate predecessor at entry; fixed (no overtaking)
  Mode mode = Mode::Idm;
  VehicleState state;
  bool in_zone = false;
  bool crossed = false;
  bool exited = false;
  double cross_time = 0.0;
  double exit_time = 0.0;
  double energy = 0.0;
  double energy_accounted_until = 0.0;
  int stops = 0;
  bool was_moving = true;

  // Committed motion: CAVs carry a plan, HDVs a forward prediction. Either
  // way `profile_version` bumps whenever the committed profile changes so
  // followers can revalidate against it.
  std::shared_ptr<const Trajectory> plan;
  PlanMonitor monitor;
  double next_standby_attempt = 0.0;
  HdvPrediction prediction;
  std::shared_ptr<const SampledProfile> profile;
  std::uint64_t profile_version = 0;

  std::uint64_t seen_leader_version = 0;
  std::uint64_t seen_schedule_version = 0;
};

class Engine {
 public:
  explicit Engine(const ScenarioConfig& cfg, bool record_trace = true);

  void run();
  void step();
  bool finished() const;
  double time() const { return step_count_ * cfg_.step; }

  const ScenarioConfig& config() const { return cfg_; }
  const ScheduleBook& schedule() const { return schedule_; }
  const std::vector<VehicleRuntime>& vehicles() const { return vehicles_; }
  const std::vector<TraceRecord>& trace() const { return trace_; }
  MetricsReport metrics() const;
  int replan_failures() const { return replan_failures_; }

 private:
  void generate_arrivals();
  void process_broadcast(double t);
  void spawn_arrivals(double t);
  bool try_spawn(const Arrival& a, int id, double t);
  void update_cav(VehicleRuntime& veh, double t);
  void update_hdv(VehicleRuntime& veh, double t);
  void handle_landmarks(VehicleRuntime& veh, const VehicleState& before, double t_next);
  void assert_spacing(double t);
  void sample_trace(double t);
  void emit_event(const VehicleRuntime& veh, const VehicleState& at, const char* event);

  const std::vector<GreenWindow>& known_windows(int path, double t);
  PlanningContext make_context(const VehicleRuntime& veh, double t);
  std::optional<LeadProfile> lead_profile(const VehicleRuntime& veh) const;
  void commit_plan(VehicleRuntime& veh, Trajectory traj, Mode mode, bool clipped,
                   double clip_begin, double t);
  void commit_cascade(VehicleRuntime& veh, CascadeResult&& res, double t);
  void commit_standby(VehicleRuntime& veh, double t);
  void try_queue_advance(VehicleRuntime& veh, const VehicleState& state, double target,
                         double t);
  void account_energy(VehicleRuntime& veh, double upto);
  double queue_stop_target(const VehicleRuntime& veh) const;
  std::vector<double> path_pressure_counts(double stop_cutoff) const;
  void replan(VehicleRuntime& veh, double t);
  void record_metrics_row(const VehicleRuntime& veh);

  ScenarioConfig cfg_;
  Bounds bounds_;
  IdmParams idm_;
  WallRule wall_rule_;
  double line_ = 280.0;
  bool record_trace_ = true;

  ScheduleBook schedule_;
  std::vector<Arrival> arrivals_;             // global, time-ordered, ids by index
  std::vector<std::vector<int>> pending_;     // per path: arrival indices not yet admitted
  std::vector<std::vector<int>> zone_;        // per path: in-zone vehicle ids, front first
  std::vector<VehicleRuntime> vehicles_;
  std::mt19937_64 noise_rng_;

  std::vector<std::vector<GreenWindow>> window_cache_;
  std::vector<std::int64_t> window_cache_stamp_;

  std::vector<TraceRecord> trace_;
  std::vector<double> last_row_time_;

  std::int64_t step_count_ = 0;
  int admitted_ = 0;
  int exited_count_ = 0;
  int replan_failures_ = 0;
  bool done_ = false;
};

// Convenience drivers. run_scenario skips trace recording; run_scenario_dir
// records and writes the full output directory.
MetricsReport run_scenario(const ScenarioConfig& cfg);
MetricsReport run_scenario_dir(const ScenarioConfig& cfg, const std::string& out_dir);

}  // namespace mixsim
