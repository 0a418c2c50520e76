#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "whiteout/seqstep.hpp"
#include "whiteout/whitening.hpp"

namespace whiteout {

struct OrderingDecision {
  std::vector<int> order;  // position -> hypothesis index
  std::vector<int> psi;    // per hypothesis, +1 or -1
};

struct WStatistics {
  VectorXd w;
  VectorXd w_star;
  VectorXd w_plus;   // entry level of the original column
  VectorXd w_minus;  // entry level of the knockoff column
};

struct PseudoDesign {
  MatrixXd x_star;
  MatrixXd x_knock_star;  // empty for the noise variant
  VectorXd y_star;
};

// Descending eta, ties by ascending index.
OrderingDecision ordering_from_eta(const VectorXd& beta, const VectorXd& eta);

OrderingDecision oracle_ordering(const VectorXd& beta, const WhitenedSplit& split,
                                 const VectorXd& delta, double sigma2);

PseudoDesign build_pseudo_design(const WhitenedSplit& split, const WhiteningPlan& plan);

// Variant for handing the problem to an external knockoff package; needs
// full-rank noise omega_star ~ N(0, sigma^2 I).
PseudoDesign build_noise_pseudo_design(const VectorXd& beta_hat, const CovarianceMatrix& sigma,
                                       const VectorXd& omega_star, int rank_r);

struct LassoConfig {
  int grid_points = 50;
  double min_ratio = 1e-3;
  double tol = 1e-7;
  int max_sweeps = 10000;
};

std::vector<double> lasso_grid(double lambda_max, const LassoConfig& cfg = {});

// Entry level per column from covariance-mode coordinate descent with warm
// starts. gram = X^T X / rows, corr = X^T y / rows.
VectorXd lasso_entry_levels(const MatrixXd& gram, const VectorXd& corr,
                            const std::vector<double>& grid, const LassoConfig& cfg = {});

VectorXd lasso_entry_path(const MatrixXd& design, const VectorXd& response,
                          const std::vector<double>& grid, const LassoConfig& cfg = {});

// W_j = max(Z_j, Zt_j) * sgn(Z_j - Zt_j); psi_j = sgn(W_j) sgn(beta_tilde_j).
std::pair<WStatistics, OrderingDecision> signed_max_ordering(const VectorXd& z,
                                                            const VectorXd& z_knock,
                                                            const VectorXd& beta_tilde);

std::pair<WStatistics, OrderingDecision> lasso_signed_max_ordering(const PseudoDesign& pd,
                                                                  const LassoConfig& cfg = {});

// Same statistic computed from (Sigma^{-1}, Delta) and the split directly.
// The pseudo-design Gram and cross products have closed forms, so the 2d x 2d
// design never needs to be materialized.
std::pair<WStatistics, OrderingDecision> lasso_signed_max_fast(const WhitenedSplit& split,
                                                              const WhiteningPlan& plan,
                                                              const LassoConfig& cfg = {});

BinaryPValueSeq binary_pvalues(const OrderingDecision& ordering, const VectorXd& beta_tilde);

struct KnownSigma {
  double sigma2;
};
struct CarveSigma {
  double sigma_hat2;
  int n;
};
using NoiseModel = std::variant<KnownSigma, CarveSigma>;

struct OracleStrategy {
  VectorXd beta;
};
struct LassoStrategy {
  LassoConfig cfg;
};
// User statistic: returns (Z, Z_knock) for the pseudo-design.
struct UserStrategy {
  std::function<std::pair<VectorXd, VectorXd>(const PseudoDesign&)> w_plus;
};
using Strategy = std::variant<OracleStrategy, LassoStrategy, UserStrategy>;

struct FilterResult {
  std::vector<int> rejections;
  std::vector<int> directions;  // psi for each rejection
  SeqStepResult seqstep;
  BinaryPValueSeq pvalues;
  OrderingDecision ordering;
  std::optional<WStatistics> w;
  std::optional<LogOddsProfile> eta;
  WhitenedSplit split;
  std::optional<double> sigma_tilde_sq;
  int rank_r = 0;
};

FilterResult run_whitening_filter(const VectorXd& beta_hat, const WhiteningPlan& plan,
                                  const NoiseModel& noise, const Strategy& strategy, double alpha,
                                  Stream& rng);

// Gram identity residuals, max-abs.
struct PseudoDesignCheck {
  double gram_x;
  double gram_knock;
  double cross;
};
PseudoDesignCheck check_pseudo_design(const PseudoDesign& pd, const WhiteningPlan& plan);

}  // namespace whiteout
