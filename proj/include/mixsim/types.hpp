#pragma once
// Shared value types and the error hierarchy.

#include <stdexcept>
#include <string>

namespace mixsim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad or inconsistent configuration input.
struct ConfigError : Error { using Error::Error; };
// Query outside a trajectory's validity interval.
struct QueryError : Error { using Error::Error; };
// Position target never reached by a trajectory.
struct NoCrossingError : Error { using Error::Error; };
// Zero-length horizon, zero-speed stop request and similar degenerate asks.
struct DegenerateError : Error { using Error::Error; };
// No trajectory in the family satisfies the constraints.
struct InfeasibleError : Error { using Error::Error; };
// Car-following query with non-positive gap.
struct CollisionError : Error { using Error::Error; };
// A hard runtime invariant (spacing, signal legality) failed mid-run.
struct SafetyBreachError : Error { using Error::Error; };
// File I/O or parse failure on traces, metrics or schedules.
struct IoError : Error { using Error::Error; };

enum class VehicleClass { Cav, Hdv };

inline const char* to_string(VehicleClass c) {
  return c == VehicleClass::Cav ? "cav" : "hdv";
}

enum class Mode { Unconstrained, Constrained, Standby, Idm };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Unconstrained: return "unconstrained";
    case Mode::Constrained: return "constrained";
    case Mode::Standby: return "standby";
    case Mode::Idm: return "idm";
  }
  return "?";
}

// Kinematic state along a path. Positions are meters from the control-zone
// entry of that path; time is absolute simulation time.
struct VehicleState {
  double position = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
  double time = 0.0;
};

// Speed/control limits plus the reaction time used by the spacing rule.
struct Bounds {
  double v_min = 0.0;
  double v_max = 20.0;
  double u_min = -5.0;
  double u_max = 5.0;
  double reaction_time = 0.5;

  bool speed_ok(double v, double margin = 0.0) const {
    return v >= v_min - margin && v <= v_max + margin;
  }
  bool accel_ok(double u, double margin = 0.0) const {
    return u >= u_min - margin && u <= u_max + margin;
  }
  void validate() const {
    if (!(v_min < v_max)) throw ConfigError("bounds: v_min must be below v_max");
    if (!(u_min < 0.0)) throw ConfigError("bounds: u_min must be negative");
    if (!(u_max > 0.0)) throw ConfigError("bounds: u_max must be positive");
    if (!(reaction_time >= 0.0)) throw ConfigError("bounds: reaction_time must be non-negative");
  }
};

// Car-following parameters for human-driven vehicles.
struct IdmParams {
  double v_des = 15.0;
  double u_max = 5.0;
  double delta = 4.0;
  double standstill = 3.0;  // desired gap at rest
  double headway = 1.5;     // desired time headway
  double b_cmf = 2.0;       // comfortable deceleration magnitude

  void validate() const {
    if (!(v_des > 0.0)) throw ConfigError("idm: v_des must be positive");
    if (!(u_max > 0.0)) throw ConfigError("idm: u_max must be positive");
    if (!(delta >= 1.0)) throw ConfigError("idm: delta must be at least 1");
    if (!(standstill > 0.0)) throw ConfigError("idm: standstill must be positive");
    if (!(headway >= 0.0)) throw ConfigError("idm: headway must be non-negative");
    if (!(b_cmf > 0.0)) throw ConfigError("idm: b_cmf must be positive");
  }
};

// Immutable identity of a vehicle in a run.
struct VehicleInfo {
  int id = -1;
  VehicleClass cls = VehicleClass::Cav;
  int path = 0;
  double entry_time = 0.0;
  double entry_speed = 0.0;
  double standstill = 2.0;  // clearance this vehicle keeps behind its leader
};

// One green interval of a traffic light, absolute times.
struct GreenWindow {
  double begin = 0.0;
  double end = 0.0;

  bool contains(double t, double tol = 0.0) const {
    return t >= begin - tol && t <= end + tol;
  }
  double length() const { return end - begin; }
};

}  // namespace mixsim
