#include "rsb/functionals.hpp"

#include <cmath>
#include <sstream>

namespace rsb {

PathFunctional PathFunctional::constant(double c) {
  PathFunctional f;
  f.kind_ = PathKind::kConstant;
  f.c0_ = c;
  return f;
}

PathFunctional PathFunctional::linear(std::vector<double> coeffs, double c0) {
  PathFunctional f;
  f.kind_ = PathKind::kLinear;
  f.coeffs_ = std::move(coeffs);
  f.c0_ = c0;
  return f;
}

PathFunctional PathFunctional::quadratic(std::vector<double> coeffs,
                                         double curvature, double c0) {
  PathFunctional f;
  f.kind_ = PathKind::kQuadratic;
  f.coeffs_ = std::move(coeffs);
  f.curvature_ = curvature;
  f.c0_ = c0;
  return f;
}

PathFunctional PathFunctional::log_cosh(double shift) {
  PathFunctional f;
  f.kind_ = PathKind::kLogCosh;
  f.shift_ = shift;
  return f;
}

double PathFunctional::operator()(std::span<const double> marks) const {
  switch (kind_) {
    case PathKind::kConstant:
      return c0_;
    case PathKind::kLinear:
    case PathKind::kQuadratic: {
      double lin = c0_;
      double total = 0.0;
      for (std::size_t l = 0; l < marks.size(); ++l) {
        if (l < coeffs_.size()) lin += coeffs_[l] * marks[l];
        total += marks[l];
      }
      return kind_ == PathKind::kLinear ? lin
                                         : lin + curvature_ * total * total;
    }
    case PathKind::kLogCosh: {
      double total = shift_;
      for (double z : marks) total += z;
      return log_2cosh(total);
    }
  }
  return 0.0;
}

std::string PathFunctional::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case PathKind::kConstant:
      out << "constant(" << c0_ << ")";
      break;
    case PathKind::kLinear:
    case PathKind::kQuadratic:
      out << (kind_ == PathKind::kLinear ? "linear(" : "quadratic(");
      for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        out << (i ? "," : "") << coeffs_[i];
      }
      if (kind_ == PathKind::kQuadratic) out << "; curvature=" << curvature_;
      out << ")";
      break;
    case PathKind::kLogCosh:
      out << "log_cosh(shift=" << shift_ << ")";
      break;
  }
  return out.str();
}

PairFunctional PairFunctional::product(PathFunctional y) {
  PairFunctional f;
  f.kind_ = PairKind::kProduct;
  f.y_ = std::move(y);
  return f;
}

PairFunctional PairFunctional::level_mark_product(std::vector<double> weights) {
  PairFunctional f;
  f.kind_ = PairKind::kLevelMarkProduct;
  f.weights_ = std::move(weights);
  return f;
}

double PairFunctional::operator()(std::span<const double> a,
                                  std::span<const double> b) const {
  double s = 0.0;
  for (std::size_t j = 0; j < term_count(); ++j) s += left(j, a) * right(j, b);
  return s;
}

std::size_t PairFunctional::term_count() const {
  return kind_ == PairKind::kProduct ? 1 : weights_.size();
}

double PairFunctional::left(std::size_t term,
                            std::span<const double> marks) const {
  if (kind_ == PairKind::kProduct) return y_(marks);
  return term < marks.size() ? weights_[term] * marks[term] : 0.0;
}

double PairFunctional::right(std::size_t term,
                             std::span<const double> marks) const {
  if (kind_ == PairKind::kProduct) return y_(marks);
  return term < marks.size() ? marks[term] : 0.0;
}

std::string PairFunctional::describe() const {
  if (kind_ == PairKind::kProduct) return "product(" + y_.describe() + ")";
  std::ostringstream out;
  out << "level_mark_product(";
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    out << (i ? "," : "") << weights_[i];
  }
  out << ")";
  return out.str();
}

}  // namespace rsb
