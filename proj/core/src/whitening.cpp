#include "whiteout/whitening.hpp"

#include <algorithm>
#include <cmath>

#include "whiteout/error.hpp"
#include "whiteout/io.hpp"

namespace whiteout {

WhiteningPlan validate_delta(const CovarianceMatrix& sigma, const VectorXd& delta,
                             double rank_tol) {
  const int d = sigma.dim();
  require(delta.size() == d, ErrorKind::Dimension, "Delta has wrong dimension");
  require(delta.allFinite() && (delta.array() > 0).all(), ErrorKind::ParameterOutOfRange,
          "Delta entries must be finite and positive");
  const double lmax = sigma.lambda_max();

  MatrixXd gap = -sigma.matrix();
  gap.diagonal() += delta;
  auto eg = eigendecompose(gap);
  double gmin = eg.values(d - 1);
  require(gmin >= -1e-8 * lmax, ErrorKind::NotPsdDominating,
          "Delta - Sigma has eigenvalue " + format_double(gmin) + " < 0");

  WhiteningPlan plan{sigma, delta, {}, nullptr, {}, 0, rank_tol};
  int r = 0;
  while (r < d && eg.values(r) > rank_tol * lmax) ++r;
  plan.rank = r;
  plan.factor = eg.vectors.leftCols(r) * eg.values.head(r).cwiseSqrt().asDiagonal();

  const auto& es = sigma.eigen();
  require(sigma.lambda_min() > 1e-12 * lmax, ErrorKind::SingularMatrix,
          "Sigma is singular; the whitening split needs Sigma^{-1}");
  plan.sigma_inv = es.vectors * es.values.cwiseInverse().asDiagonal() * es.vectors.transpose();
  MatrixXd a = plan.sigma_inv;
  a.diagonal() -= delta.cwiseInverse();
  plan.a = std::make_shared<const MatrixXd>(0.5 * (a + a.transpose()));
  return plan;
}

VectorXd make_equi_delta(const CovarianceMatrix& sigma, double inflation) {
  require(inflation >= 1.0, ErrorKind::ParameterOutOfRange, "inflation must be >= 1");
  VectorXd diag = sigma.diagonal();
  double lam;
  if (((diag.array() - 1.0).abs() < 1e-12).all()) {
    lam = sigma.lambda_max();
  } else {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(to_correlation(sigma.matrix()),
                                               Eigen::EigenvaluesOnly);
    lam = es.eigenvalues().maxCoeff();
  }
  return inflation * lam * diag;
}

WhitenedSplit split_from_omega(const VectorXd& beta_hat, const WhiteningPlan& plan,
                               VectorXd omega) {
  require(beta_hat.size() == plan.dim(), ErrorKind::Dimension, "beta_hat has wrong dimension");
  WhitenedSplit s;
  s.beta_tilde = beta_hat + omega;
  s.xi = plan.sigma_inv * beta_hat - s.beta_tilde.cwiseQuotient(plan.delta);
  s.omega = std::move(omega);
  s.a = plan.a;
  return s;
}

WhitenedSplit whiten_known_sigma(const VectorXd& beta_hat, const WhiteningPlan& plan,
                                 double sigma2, Stream& rng) {
  require(sigma2 > 0, ErrorKind::ParameterOutOfRange, "sigma2 must be > 0");
  VectorXd z(plan.rank);
  rng.normal_fill(z.data(), plan.rank);
  VectorXd omega = plan.rank > 0 ? VectorXd(std::sqrt(sigma2) * (plan.factor * z))
                                 : VectorXd(VectorXd::Zero(plan.dim()));
  return split_from_omega(beta_hat, plan, std::move(omega));
}

CarvedNoise carve_noise(double sigma_hat2, int n, const WhiteningPlan& plan, Stream& rng) {
  const int d = plan.dim();
  const int r = plan.rank;
  require(sigma_hat2 > 0, ErrorKind::ParameterOutOfRange, "sigma_hat^2 must be > 0");
  require(n >= d + r, ErrorKind::InsufficientDof,
          "carving needs n >= d + r (n=" + std::to_string(n) + ", d=" + std::to_string(d) +
              ", r=" + std::to_string(r) + ")");
  CarvedNoise out;
  out.rank_r = r;
  if (r == 0) {
    out.omega = VectorXd::Zero(d);
    out.sigma_tilde_sq = sigma_hat2;
    return out;
  }
  VectorXd w(r);
  rng.normal_fill(w.data(), r);
  const int rest = n - d - r;
  out.v = rest == 0 ? 1.0 : rng.beta(0.5 * r, 0.5 * rest);
  double scale = std::sqrt((n - d) * out.v * sigma_hat2 / w.squaredNorm());
  out.omega = scale * (plan.factor * w);
  if (rest > 0) out.sigma_tilde_sq = (n - d) * (1.0 - out.v) * sigma_hat2 / rest;
  return out;
}

LogOddsProfile log_odds(const VectorXd& beta, const VectorXd& beta_tilde, const VectorXd& delta,
                        double sigma2) {
  require(beta.size() == beta_tilde.size() && beta.size() == delta.size(), ErrorKind::Dimension,
          "log_odds: dimension mismatch");
  require(sigma2 > 0, ErrorKind::ParameterOutOfRange, "sigma2 must be > 0");
  LogOddsProfile p;
  VectorXd denom = sigma2 * delta;
  p.eta = 2.0 * beta_tilde.cwiseAbs().cwiseProduct(beta.cwiseAbs()).cwiseQuotient(denom);
  p.mu = 2.0 * beta.cwiseAbs2().cwiseQuotient(denom);
  return p;
}

double reconstruction_error(const VectorXd& beta_hat, const WhitenedSplit& split,
                            const WhiteningPlan& plan) {
  VectorXd back = plan.sigma.matrix() * (split.xi + split.beta_tilde.cwiseQuotient(plan.delta));
  double scale = std::max(1.0, beta_hat.cwiseAbs().maxCoeff());
  return (back - beta_hat).cwiseAbs().maxCoeff() / scale;
}

}  // namespace whiteout
