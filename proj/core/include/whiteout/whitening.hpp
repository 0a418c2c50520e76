#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>

#include "whiteout/covmodel.hpp"
#include "whiteout/rng.hpp"

namespace whiteout {

inline constexpr double kDefaultRankTol = 1e-10;

// A validated diagonal whitening matrix together with everything the
// pipeline reuses across replicates: Sigma^{-1}, A = Sigma^{-1} - Delta^{-1},
// and a d x r factor M with M M^T = Delta - Sigma.
struct WhiteningPlan {
  CovarianceMatrix sigma;
  VectorXd delta;
  MatrixXd sigma_inv;
  std::shared_ptr<const MatrixXd> a;
  MatrixXd factor;
  int rank = 0;
  double rank_tol = kDefaultRankTol;

  int dim() const { return static_cast<int>(delta.size()); }
};

WhiteningPlan validate_delta(const CovarianceMatrix& sigma, const VectorXd& delta,
                             double rank_tol = kDefaultRankTol);

// lambda_max of the correlation matrix times diag(Sigma), times inflation.
// Inflation > 1 keeps A nonsingular, which the pseudo-design needs.
VectorXd make_equi_delta(const CovarianceMatrix& sigma, double inflation = 1.0);

struct WhitenedSplit {
  VectorXd beta_tilde;
  VectorXd xi;
  VectorXd omega;
  std::shared_ptr<const MatrixXd> a;
};

// Builds beta_tilde and xi from a given omega.
WhitenedSplit split_from_omega(const VectorXd& beta_hat, const WhiteningPlan& plan,
                               VectorXd omega);

WhitenedSplit whiten_known_sigma(const VectorXd& beta_hat, const WhiteningPlan& plan,
                                 double sigma2, Stream& rng);

struct CarvedNoise {
  VectorXd omega;
  std::optional<double> sigma_tilde_sq;
  int rank_r = 0;
  double v = 0.0;
};

// Noise when sigma^2 is unknown: spends part of the residual chi-square.
CarvedNoise carve_noise(double sigma_hat2, int n, const WhiteningPlan& plan, Stream& rng);

struct LogOddsProfile {
  VectorXd eta;
  VectorXd mu;
};

LogOddsProfile log_odds(const VectorXd& beta, const VectorXd& beta_tilde, const VectorXd& delta,
                        double sigma2);

// Largest residual of beta_hat = Sigma (xi + Delta^{-1} beta_tilde), relative
// to max|beta_hat| (or absolute when beta_hat is 0).
double reconstruction_error(const VectorXd& beta_hat, const WhitenedSplit& split,
                            const WhiteningPlan& plan);

}  // namespace whiteout
