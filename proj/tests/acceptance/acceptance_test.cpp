// Runs the desk acceptance matrix and prints one verdict line per criterion.
// A criterion passes only if every record passes and it finishes within its
// runtime limit. Criterion 12 reruns criteria 1-11 at full desk size with a
// different worker count and requires byte-identical records.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "cli/verify.hpp"
#include "rsb/parallel.hpp"

namespace {

constexpr std::uint64_t kSeed = 1;
constexpr double kMultiplier = 3.0;

bool report(int id, const std::string& title, bool records_pass, double seconds,
            double limit) {
  const bool pass = records_pass && seconds <= limit;
  std::printf("criterion %2d %s  %s (%.1f s / limit %.0f s)%s\n", id, pass ? "PASS" : "FAIL",
              title.c_str(), seconds, limit,
              records_pass ? "" : "  [record check failed]");
  std::fflush(stdout);
  return pass;
}

}  // namespace

int main() {
  using rsb::cli::CriterionResult;
  std::vector<int> ids;
  for (int id = 1; id <= 11; ++id) ids.push_back(id);

  bool all = true;
  double limit_total = 0.0;
  const auto verdict = [&](const CriterionResult& r) {
    limit_total += r.limit_seconds;
    if (!r.pass()) {
      for (const auto& rec : r.records) {
        if (!rec.pass) {
          std::printf("    failed %s: lhs %.10g (se %.3g) rhs %.10g (se %.3g) tolerance %.3g\n",
                      rec.name.c_str(), rec.lhs, rec.lhs_se, rec.rhs, rec.rhs_se,
                      rec.tolerance);
        }
      }
    }
    all &= report(r.id, r.title, r.pass(), r.seconds, r.limit_seconds);
  };

  // First pass at the default worker count; the rerun uses a different one.
  const std::size_t workers = rsb::worker_count();
  const std::size_t other = workers == 1 ? 3 : 1;
  const auto first = rsb::cli::run_verify_all("desk", kSeed, kMultiplier, verdict, ids);

  const auto start = std::chrono::steady_clock::now();
  rsb::set_worker_count(other);
  const auto second = rsb::cli::run_verify_all("desk", kSeed, kMultiplier, {}, ids);
  rsb::set_worker_count(0);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string a = rsb::cli::fingerprint(first);
  const bool identical = !a.empty() && a == rsb::cli::fingerprint(second);
  const std::string title = "determinism across worker counts (" + std::to_string(workers) +
                            " vs " + std::to_string(other) + " workers)";
  all &= report(12, title, identical, seconds, limit_total);

  std::printf("%s\n", all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return all ? 0 : 1;
}
