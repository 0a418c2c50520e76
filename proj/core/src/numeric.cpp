#include "whiteout/numeric.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <algorithm>
#include <cmath>

namespace whiteout {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParameterOutOfRange: return "parameter-out-of-range";
    case ErrorKind::NotPsdDominating: return "not-psd-dominating";
    case ErrorKind::InsufficientDof: return "insufficient-degrees-of-freedom";
    case ErrorKind::SingularMatrix: return "singular-matrix";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::TieOrZero: return "tie-or-zero";
    case ErrorKind::Inapplicable: return "inapplicable";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double two_sided_t_pvalue(double t, double dof) {
  double a = std::abs(t);
  if (!(dof > 0) || std::isinf(dof)) return std::min(1.0, 2.0 * normal_sf(a));
  boost::math::students_t dist(dof);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, a)));
}

}  // namespace whiteout
