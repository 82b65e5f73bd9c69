#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rsb/estimate.hpp"

namespace rsb::cli {

inline constexpr int kSchemaVersion = 1;

/// I/O failure while writing outputs; maps to exit status 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReportRecord {
  int criterion = 0;  ///< acceptance criterion, 0 outside verify-all
  CheckRecord check;
};

struct Report {
  std::string command;
  std::string check;
  std::vector<ReportRecord> records;
  /// Command-specific numbers.
  nlohmann::ordered_json results = nlohmann::ordered_json::object();
  /// serialize_config() text of the run; hashed into the provenance block.
  std::string config_text;
  std::uint64_t seed = 0;

  /// True iff every record passes.
  bool pass() const;
  void add(CheckRecord check, int criterion = 0);
};

std::uint64_t fnv1a64(std::string_view text);

std::string library_version();

/// UTC, ISO 8601 with seconds.
std::string utc_timestamp();

nlohmann::ordered_json record_json(const ReportRecord& r);

/// Everything but `timestamp` is a pure function of the configuration.
nlohmann::ordered_json to_json(const Report& report,
                               const std::string& timestamp);

/// The report without its timestamp: the part covered by the determinism
/// contract.
std::string numeric_content(const nlohmann::ordered_json& report);

struct OutputFile {
  std::string path;
  std::string text;
};

/// Writes every file to a temporary sibling first and renames only after all
/// writes succeeded, so a failed run leaves no partial outputs. Throws IoError.
void write_files_atomic(const std::vector<OutputFile>& files);

}  // namespace rsb::cli
