#include "rsb/estimate.hpp"

#include <cmath>
#include <stdexcept>

namespace rsb {

Estimate summarize(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("summarize: need at least 2 samples");
  double sum = 0.0;
  for (double x : samples) sum += x;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return {mean, sd / std::sqrt(static_cast<double>(n)), n};
}

Estimate exact(double value) { return {value, 0.0, 0}; }

namespace {

CheckRecord make_record(std::string name, const Estimate& lhs,
                        const Estimate& rhs, double multiplier,
                        double allowance, bool one_sided) {
  CheckRecord rec;
  rec.name = std::move(name);
  rec.lhs = lhs.mean;
  rec.lhs_se = lhs.std_error;
  rec.rhs = rhs.mean;
  rec.rhs_se = rhs.std_error;
  rec.allowance = allowance;
  rec.one_sided = one_sided;
  rec.tolerance =
      multiplier * std::hypot(lhs.std_error, rhs.std_error) + allowance;
  const double gap = one_sided ? lhs.mean - rhs.mean
                               : std::abs(lhs.mean - rhs.mean);
  rec.pass = std::isfinite(gap) && std::isfinite(rec.tolerance) &&
             gap <= rec.tolerance;
  return rec;
}

}  // namespace

CheckRecord check_equal(std::string name, const Estimate& lhs,
                        const Estimate& rhs, double multiplier,
                        double allowance) {
  return make_record(std::move(name), lhs, rhs, multiplier, allowance, false);
}

CheckRecord check_at_most(std::string name, const Estimate& lhs,
                          const Estimate& rhs, double multiplier,
                          double allowance) {
  return make_record(std::move(name), lhs, rhs, multiplier, allowance, true);
}

}  // namespace rsb
