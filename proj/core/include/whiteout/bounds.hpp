#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "whiteout/covmodel.hpp"

namespace whiteout {

// b_k: lower bound on the k-th smallest diagonal entry of any valid Delta.
struct DeltaLowerBounds {
  VectorXd b;
  int size() const { return static_cast<int>(b.size()); }
  double at(long k) const { return b(k - 1); }  // 1-based
};

// top_l <= 0 uses every eigenvector.
DeltaLowerBounds delta_order_lower_bounds(const EigenDecomposition& decomp, int top_l = 50,
                                          int threads = 1);

// Closed form for the normalized MCC matrix: b_k = lambda_1 k / d.
DeltaLowerBounds mcc_lower_bounds(long d, double rho);

struct BoundConstants {
  double alpha = 0;
  double delta = 0;
  double p = 0;
  double q_delta = 0;
  double lambda_star = 0;
  double c_h = 0;
  double c1 = 0;
  double c2 = 0;
  double c3 = 0;
  double c1_star_k = 0;  // l = k
  double c2_star_k = 0;
  double c1_star_1 = 0;  // l = 1
  double c2_star_1 = 0;
};

BoundConstants bound_constants(double alpha, double delta);
double c3_constant(double alpha);
double default_delta(double alpha);  // sqrt(alpha) - alpha

// bound_constants plus c3 and the starred constants.
BoundConstants starred_constants(double alpha, std::optional<double> delta = std::nullopt);

enum class BoundMode { Thm1Lk, Thm1L1, Thm2Lk, Thm2L1 };
std::string to_string(BoundMode m);

struct BoundReport {
  long k = 0;  // d + 1 when no k qualifies
  double ceiling = 0;  // +inf when no k qualifies
  BoundMode mode = BoundMode::Thm1L1;
  double slope = 0;
  double intercept = 0;
  double alpha = 0;
  double sigma2 = 0;
  double pi1 = 1;
};

// Squared coefficients may be supplied in any order; they are sorted here.
// use_first replaces beta_(k)^2 with beta_(1)^2 in the condition.
BoundReport theorem_main_bound(const VectorXd& beta_sq, double sigma2, const DeltaLowerBounds& b,
                               double alpha, bool use_first,
                               const std::optional<BoundConstants>& consts = std::nullopt);

BoundReport theorem_random_bound(const VectorXd& beta_sq, double sigma2,
                                 const DeltaLowerBounds& b, double alpha, double pi1,
                                 bool use_first,
                                 const std::optional<BoundConstants>& consts = std::nullopt);

// Same scan for a constant signal beta0^2 on every coordinate, with b given
// implicitly; avoids materializing d-long vectors for huge d.
BoundReport theorem_main_bound_const(double beta0_sq, double sigma2, const DeltaLowerBounds& b,
                                     double alpha, bool use_first);

// 13 log d / rho + 42, the rounded closed form at alpha = 0.05.
double mcc_closed_form(long d, double rho);

double snr_threshold(double delta_jj, double alpha);

struct DeltaDiagnostic {
  std::vector<double> thresholds;
  std::vector<int> counts_below;
  VectorXd snr;  // per variable
};

DeltaDiagnostic delta_diagnostic(const VectorXd& delta, double alpha,
                                 const std::vector<double>& thresholds);

}  // namespace whiteout
