#include "whiteout/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "whiteout/error.hpp"
#include "whiteout/numeric.hpp"
#include "whiteout/parallel.hpp"

namespace whiteout {

DeltaLowerBounds delta_order_lower_bounds(const EigenDecomposition& decomp, int top_l,
                                          int threads) {
  const Eigen::Index d = decomp.values.size();
  const Eigen::Index l = top_l <= 0 ? d : std::min<Eigen::Index>(top_l, d);
  std::vector<VectorXd> per(l);
  parallel_for(l, threads, [&](std::size_t i) {
    VectorXd sq = decomp.vectors.col(i).cwiseAbs2();
    std::sort(sq.data(), sq.data() + d);
    double lam = std::max(decomp.values(i), 0.0);
    VectorXd cum(d);
    double acc = 0;
    for (Eigen::Index k = 0; k < d; ++k) {
      acc += sq(k);
      cum(k) = lam * acc;
    }
    per[i] = std::move(cum);
  });
  DeltaLowerBounds out{VectorXd::Zero(d)};
  for (const auto& v : per) out.b = out.b.cwiseMax(v);
  return out;
}

DeltaLowerBounds mcc_lower_bounds(long d, double rho) {
  require(d >= 1 && rho > -1.0 / std::max(1L, d - 1) && rho < 1, ErrorKind::ParameterOutOfRange,
          "mcc_lower_bounds: bad (d, rho)");
  const double lam = 1.0 + rho * (d - 1);
  DeltaLowerBounds out{VectorXd(d)};
  for (long k = 1; k <= d; ++k) out.b(k - 1) = lam * k / d;
  return out;
}

double default_delta(double alpha) { return std::sqrt(alpha) - alpha; }

BoundConstants bound_constants(double alpha, double delta) {
  require(alpha > 0 && alpha < 1, ErrorKind::ParameterOutOfRange, "alpha must be in (0, 1)");
  require(delta > 0 && delta < 1 - alpha, ErrorKind::ParameterOutOfRange,
          "delta must be in (0, 1 - alpha)");
  BoundConstants c;
  c.alpha = alpha;
  c.delta = delta;
  c.p = alpha / (1 + alpha);
  c.q_delta = (alpha + delta) / (1 + alpha + delta);
  c.lambda_star = c.p + (c.q_delta - c.p) / 4;
  const double ls = c.lambda_star, q = c.q_delta, p = c.p;
  c.c_h = -(ls * std::log(q / ls) + (1 - ls) * std::log((1 - q) / (1 - ls)));
  c.c1 = (std::max(1.0, 4 * alpha * (1 + alpha + delta) / delta) + 1) / (1 + alpha);
  const double lead = std::exp(1.0) / (4 * std::sqrt(M_PI)) * std::sqrt(1 + alpha) * q /
                      std::sqrt(p * (1 - p)) * std::pow(c.c_h, -1.5);
  const double cap = std::min(2 * (q - p) / (p * (1 - q)), 1.0);
  c.c2 = (lead * cap + 2) / (1 + alpha);
  return c;
}

double c3_constant(double alpha) {
  require(alpha > 0 && alpha < 1, ErrorKind::ParameterOutOfRange, "alpha must be in (0, 1)");
  const double rc = std::sqrt(-0.5 * std::log(alpha));
  auto f = [rc](double t) {
    double s = std::sqrt(2 + 2 * t);
    return normal_cdf(-(2 + t) * rc / s) + normal_sf(t * rc / s);
  };
  double upper = 1;
  while (f(upper) >= 1e-12) upper *= 2;
  return adaptive_simpson(f, 0.0, upper, 1e-9);
}

BoundConstants starred_constants(double alpha, std::optional<double> delta) {
  BoundConstants c = bound_constants(alpha, delta.value_or(default_delta(alpha)));
  c.c3 = c3_constant(alpha);
  c.c1_star_k = (2 + c.c3) * c.c1;
  c.c2_star_k = c.c2;
  c.c1_star_1 = (1 + c.c3) * c.c1;
  c.c2_star_1 = c.c1 + c.c2;
  return c;
}

std::string to_string(BoundMode m) {
  switch (m) {
    case BoundMode::Thm1Lk: return "thm1-lk";
    case BoundMode::Thm1L1: return "thm1-l1";
    case BoundMode::Thm2Lk: return "thm2-lk";
    case BoundMode::Thm2L1: return "thm2-l1";
  }
  return "?";
}

namespace {

// Smallest k in 1..d with 2 beta_sq(k) / (sigma2 b(k)) < -log(alpha)/2.
long scan_condition(long d, const std::function<double(long)>& beta_sq,
                    const std::function<double(long)>& b, double sigma2, double alpha) {
  const double thr = -0.5 * std::log(alpha);
  for (long k = 1; k <= d; ++k) {
    double num = 2 * beta_sq(k);
    double den = sigma2 * b(k);
    double lhs = num == 0 ? 0.0 : den <= 0 ? std::numeric_limits<double>::infinity() : num / den;
    if (lhs < thr) return k;
  }
  return d + 1;
}

BoundReport finish(long k, long d, BoundMode mode, bool use_first, double alpha, double sigma2,
                   double pi1, const std::optional<BoundConstants>& consts) {
  BoundConstants c = consts ? *consts : starred_constants(alpha);
  BoundReport r;
  r.k = k;
  r.mode = mode;
  r.alpha = alpha;
  r.sigma2 = sigma2;
  r.pi1 = pi1;
  r.slope = use_first ? c.c1_star_1 : c.c1_star_k;
  r.intercept = use_first ? c.c2_star_1 : c.c2_star_k;
  r.ceiling = k > d ? std::numeric_limits<double>::infinity() : r.slope * k + r.intercept;
  return r;
}

VectorXd sorted_desc(const VectorXd& v) {
  VectorXd s = v;
  std::sort(s.data(), s.data() + s.size(), std::greater<double>());
  return s;
}

}  // namespace

BoundReport theorem_main_bound(const VectorXd& beta_sq, double sigma2, const DeltaLowerBounds& b,
                               double alpha, bool use_first,
                               const std::optional<BoundConstants>& consts) {
  require(beta_sq.size() == b.size(), ErrorKind::Dimension, "beta and b lengths differ");
  require(sigma2 > 0, ErrorKind::ParameterOutOfRange, "sigma2 must be > 0");
  VectorXd s = sorted_desc(beta_sq);
  const long d = s.size();
  long k = scan_condition(
      d, [&](long k) { return use_first ? s(0) : s(k - 1); }, [&](long k) { return b.at(k); },
      sigma2, alpha);
  return finish(k, d, use_first ? BoundMode::Thm1L1 : BoundMode::Thm1Lk, use_first, alpha, sigma2,
                1.0, consts);
}

BoundReport theorem_random_bound(const VectorXd& beta_sq, double sigma2,
                                 const DeltaLowerBounds& b, double alpha, double pi1,
                                 bool use_first, const std::optional<BoundConstants>& consts) {
  require(beta_sq.size() == b.size(), ErrorKind::Dimension, "beta and b lengths differ");
  require(pi1 > 0 && pi1 <= 1, ErrorKind::ParameterOutOfRange, "pi1 must be in (0, 1]");
  require(sigma2 > 0, ErrorKind::ParameterOutOfRange, "sigma2 must be > 0");
  VectorXd s = sorted_desc(beta_sq);
  const long d = s.size();
  auto stretched = [&](long k) {
    // Small slack so that k / (d1/d) lands on the exact integer.
    long idx = static_cast<long>(std::floor(k / pi1 + 1e-9));
    return std::clamp(idx, 1L, d);
  };
  long k = scan_condition(
      d, [&](long k) { return use_first ? s(0) : s(k - 1); },
      [&](long k) { return b.at(stretched(k)); }, sigma2, alpha);
  return finish(k, d, use_first ? BoundMode::Thm2L1 : BoundMode::Thm2Lk, use_first, alpha, sigma2,
                pi1, consts);
}

BoundReport theorem_main_bound_const(double beta0_sq, double sigma2, const DeltaLowerBounds& b,
                                     double alpha, bool use_first) {
  require(sigma2 > 0, ErrorKind::ParameterOutOfRange, "sigma2 must be > 0");
  const long d = b.size();
  long k = scan_condition(
      d, [&](long) { return beta0_sq; }, [&](long k) { return b.at(k); }, sigma2, alpha);
  return finish(k, d, use_first ? BoundMode::Thm1L1 : BoundMode::Thm1Lk, use_first, alpha, sigma2,
                1.0, std::nullopt);
}

double mcc_closed_form(long d, double rho) {
  require(d >= 2 && rho > 0 && rho < 1, ErrorKind::ParameterOutOfRange,
          "mcc_closed_form needs d >= 2 and rho in (0, 1)");
  return 13 * std::log(static_cast<double>(d)) / rho + 42;
}

double snr_threshold(double delta_jj, double alpha) {
  require(delta_jj > 0, ErrorKind::ParameterOutOfRange, "Delta_jj must be > 0");
  require(alpha > 0 && alpha < 1, ErrorKind::ParameterOutOfRange, "alpha must be in (0, 1)");
  return std::sqrt(-delta_jj * std::log(alpha) / 2);
}

DeltaDiagnostic delta_diagnostic(const VectorXd& delta, double alpha,
                                 const std::vector<double>& thresholds) {
  DeltaDiagnostic out;
  out.thresholds = thresholds;
  for (double t : thresholds)
    out.counts_below.push_back(static_cast<int>((delta.array() < t).count()));
  out.snr.resize(delta.size());
  for (Eigen::Index j = 0; j < delta.size(); ++j) out.snr(j) = snr_threshold(delta(j), alpha);
  return out;
}

}  // namespace whiteout
