#include "cli/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#ifndef RSB_VERSION
#define RSB_VERSION "0.0.0"
#endif

namespace rsb::cli {

bool Report::pass() const {
  for (const auto& r : records) {
    if (!r.check.pass) return false;
  }
  return true;
}

void Report::add(CheckRecord check, int criterion) {
  records.push_back({criterion, std::move(check)});
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string library_version() { return RSB_VERSION; }

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::ordered_json record_json(const ReportRecord& r) {
  nlohmann::ordered_json j;
  j["name"] = r.check.name;
  if (r.criterion > 0) j["criterion"] = r.criterion;
  j["lhs"] = r.check.lhs;
  j["lhs_se"] = r.check.lhs_se;
  j["rhs"] = r.check.rhs;
  j["rhs_se"] = r.check.rhs_se;
  j["allowance"] = r.check.allowance;
  j["tolerance"] = r.check.tolerance;
  j["one_sided"] = r.check.one_sided;
  j["pass"] = r.check.pass;
  return j;
}

nlohmann::ordered_json to_json(const Report& report,
                               const std::string& timestamp) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = report.command;
  j["check"] = report.check;
  j["pass"] = report.pass();
  auto records = nlohmann::ordered_json::array();
  for (const auto& r : report.records) records.push_back(record_json(r));
  j["records"] = std::move(records);
  j["results"] = report.results;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a64(report.config_text)));
  j["provenance"] = {{"config_hash", hash},
                     {"seed", report.seed},
                     {"version", library_version()}};
  j["timestamp"] = timestamp;
  return j;
}

std::string numeric_content(const nlohmann::ordered_json& report) {
  nlohmann::ordered_json copy = report;
  copy.erase("timestamp");
  return copy.dump();
}

void write_files_atomic(const std::vector<OutputFile>& files) {
  std::vector<std::string> temps;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& t : temps) std::filesystem::remove(t, ec);
  };
  for (const auto& f : files) {
    const std::string tmp = f.path + ".tmp";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      cleanup();
      throw IoError("cannot open '" + tmp + "' for writing");
    }
    temps.push_back(tmp);
    out << f.text;
    out.flush();
    if (!out) {
      cleanup();
      throw IoError("write to '" + tmp + "' failed");
    }
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::error_code ec;
    std::filesystem::rename(temps[i], files[i].path, ec);
    if (ec) {
      cleanup();
      throw IoError("cannot move output into place at '" + files[i].path + "'");
    }
  }
}

}  // namespace rsb::cli
