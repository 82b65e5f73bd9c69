#pragma once

#include <optional>
#include <string>

#include "cli/config.hpp"
#include "cli/report.hpp"
#include "cli/verify.hpp"

namespace rsb::cli {

/// A CSV table: header row, then one row per grid point; numbers in their
/// shortest round-trip form.
struct Series {
  std::string header;
  std::vector<std::string> rows;
  std::string text() const;
};

struct RunOutput {
  Report report;
  std::optional<Series> series;
  /// Per-criterion timings of verify-all; not part of the report.
  std::vector<CriterionResult> criteria;
};

/// Dispatches to the module operation named by the config. Expects a
/// validated config; module precondition failures surface as
/// std::invalid_argument.
RunOutput run(const RunConfig& config, const Progress& progress = {});

/// The series of a run, for commands that produce one.
std::optional<Series> emit_series(const RunConfig& config);

enum ExitStatus { kExitPass = 0, kExitFail = 1, kExitUsage = 2 };

}  // namespace rsb::cli
