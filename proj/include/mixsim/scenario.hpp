#pragma once
// Flat key=value scenario configuration: parsing, validation, defaults, and
// canonical rendering (the file written next to every run's outputs).

#include <cstdint>
#include <string>
#include <vector>

#include "mixsim/signal_control.hpp"
#include "mixsim/types.hpp"

namespace mixsim {

struct ScriptedArrival {
  double time = 0.0;
  int path = 0;
  VehicleClass cls = VehicleClass::Cav;
  double speed = 0.0;
};

struct ScenarioConfig {
  // geometry
  double zone_length = 300.0;
  double light_offset = 20.0;

  // kinematic bounds and safety
  double v_max = 20.0;
  double v_min = 0.0;
  double u_max = 5.0;
  double u_min = -5.0;
  double reaction_time = 0.5;
  double gamma_cav = 2.0;
  double gamma_hdv = 3.0;

  // car-following model
  double idm_v_des = 15.0;
  double idm_delta = 4.0;
  double idm_headway = 1.5;
  double idm_b_cmf = 2.0;

  // signal
  std::string policy = "adaptive";
  double t_cycle = 40.0;
  double t_min = 3.0;
  double t_update = -1.0;  // negative means t_cycle/2
  double cycle_origin = 0.0;
  std::string first_cycle_order = "0,1,2,3";

  // traffic load
  int vehicle_count = 200;
  double penetration = 0.7;
  double arrival_rate = 0.10;  // per lane per second; left lanes run at twice
                               // this so every signal head sees the same flow
  double entry_speed_min = 10.0;
  double entry_speed_max = 15.0;
  std::uint64_t seed = 1;
  std::string scripted_arrivals;  // "t:path:class:speed;..." overrides the random process

  // engine and planner
  double step = 0.01;
  double trace_step = 0.1;
  double horizon = 600.0;
  double search_dt = 0.1;
  double horizon_cap = 120.0;
  double grid_step = 0.01;
  double deviation_threshold = 2.0;
  double hdv_noise_sigma = 0.0;

  // derived views
  double line_position() const { return zone_length - light_offset; }
  double resolved_t_update() const { return t_update < 0.0 ? t_cycle / 2.0 : t_update; }
  Bounds bounds() const { return Bounds{v_min, v_max, u_min, u_max, reaction_time}; }
  IdmParams idm(double standstill) const {
    return IdmParams{idm_v_des, u_max, idm_delta, standstill, idm_headway, idm_b_cmf};
  }
  SignalPolicy signal_policy() const;
  std::array<int, kPhases> parsed_first_cycle_order() const;
  std::vector<ScriptedArrival> parsed_scripted_arrivals() const;

  void validate() const;
};

// Accepts "key = value" lines, blank lines, and # comments. Unknown keys and
// malformed values raise ConfigError naming the key.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

// Every key in fixed order, numbers in shortest round-trip form. Parsing the
// rendered text reproduces the config exactly.
std::string render_config(const ScenarioConfig& cfg);

}  // namespace mixsim
