#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rsb/estimate.hpp"

namespace rsb::cli {

// The acceptance matrix behind `verify-all`. The desk preset runs every
// criterion at full size; smoke runs the same checks at reduced sizes.

struct Criterion {
  int id = 0;
  std::string title;
  double limit_seconds = 0.0;
  std::function<std::vector<CheckRecord>(std::uint64_t seed, double multiplier)>
      run;
};

std::vector<Criterion> acceptance_matrix(const std::string& preset);

struct CriterionResult {
  int id = 0;
  std::string title;
  double limit_seconds = 0.0;
  double seconds = 0.0;
  std::vector<CheckRecord> records;
  bool pass() const;
};

/// Seed of criterion `id` below the master seed.
std::uint64_t criterion_seed(std::uint64_t seed, int id);

using Progress = std::function<void(const CriterionResult&)>;

/// Runs the matrix in criterion order. `only` restricts to the listed ids.
std::vector<CriterionResult> run_verify_all(const std::string& preset,
                                            std::uint64_t seed,
                                            double multiplier,
                                            const Progress& progress = {},
                                            const std::vector<int>& only = {});

/// Records rendered with full precision, one per line; equal strings mean
/// bit-identical numbers.
std::string fingerprint(const std::vector<CriterionResult>& results);

}  // namespace rsb::cli
