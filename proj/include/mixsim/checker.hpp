#pragma once
// Post-hoc invariant checking over an emitted run directory: spacing rule,
// signal legality at the stop line, overtaking, mode sanity, and the
// metrics/vehicle-table round trip.

#include <string>
#include <vector>

namespace mixsim {

struct CheckReport {
  int spacing_violations = 0;
  int red_crossings = 0;
  int order_violations = 0;
  int mode_violations = 0;
  bool metrics_consistent = true;
  int rows_checked = 0;
  std::vector<std::string> details;  // first few findings, human readable

  bool ok() const {
    return spacing_violations == 0 && red_crossings == 0 && order_violations == 0 &&
           mode_violations == 0 && metrics_consistent;
  }
};

// Expects the file layout of write_run_outputs. Throws IoError when files are
// missing or malformed.
CheckReport check_run_dir(const std::string& dir);

std::string render_report(const CheckReport& report);

}  // namespace mixsim
