#pragma once
// Run outputs: trajectory trace rows, per-vehicle metrics, aggregate report,
// and the writers/readers for the run directory. All formats are fixed so
// identical runs produce byte-identical files.

#include <string>
#include <vector>

#include "mixsim/scenario.hpp"
#include "mixsim/signal_control.hpp"
#include "mixsim/types.hpp"

namespace mixsim {

// One sampled row of a run trace. Sample rows land on trace_step multiples
// with an empty event; "entry" and "exit" rows mark the exact instants.
struct TraceRecord {
  double time = 0.0;
  int vehicle = -1;
  VehicleClass cls = VehicleClass::Cav;
  int path = 0;
  double position = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
  Mode mode = Mode::Idm;
  int active_phase = 0;
  bool own_light_green = false;
  std::string event;
};

inline constexpr const char* kTraceHeader =
    "time,vehicle,class,path,position,velocity,acceleration,mode,active_phase,own_light,event";
inline constexpr const char* kVehiclesHeader =
    "vehicle,class,path,entry_time,exit_time,travel_time,energy,stops";

struct VehicleMetrics {
  int id = -1;
  VehicleClass cls = VehicleClass::Cav;
  int path = 0;
  double entry_time = 0.0;
  double exit_time = 0.0;   // NaN while still in the zone
  double travel_time = 0.0; // exit_time - entry_time
  double energy = 0.0;      // half the integral of squared acceleration
  int stops = 0;

  bool exited() const;
};

struct ClassAggregate {
  int count = 0;
  double mean_travel_time = 0.0;
  double mean_energy = 0.0;
  double mean_stops = 0.0;
};

// Aggregates cover exited vehicles only and equal the plain mean of the
// per-vehicle rows.
struct MetricsReport {
  std::vector<VehicleMetrics> vehicles;
  int spawned = 0;
  bool complete = false;  // all spawned vehicles exited before the horizon

  ClassAggregate aggregate_all;
  ClassAggregate aggregate_cav;
  ClassAggregate aggregate_hdv;

  void recompute_aggregates();
};

// Writers. write_run_outputs lays out traces.csv, vehicles.csv, metrics.json,
// schedule.csv and config_resolved.cfg under out_dir, creating it if needed.
void write_run_outputs(const std::string& out_dir, const ScenarioConfig& cfg,
                       const std::vector<TraceRecord>& trace, const MetricsReport& metrics,
                       const ScheduleBook& schedule);

std::string render_trace_row(const TraceRecord& r);
std::string render_metrics(const MetricsReport& m);

// Readers for the checker and tests.
std::vector<TraceRecord> read_trace(const std::string& path);
std::vector<VehicleMetrics> read_vehicles(const std::string& path);
MetricsReport read_metrics(const std::string& path);

}  // namespace mixsim
