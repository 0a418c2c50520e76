#pragma once

#include <Eigen/Dense>

#include "whiteout/filter.hpp"

namespace whiteout {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct KnockoffPair {
  MatrixXd x;
  MatrixXd x_tilde;
  VectorXd d;  // diagonal of D
};

KnockoffPair construct_knockoff_matrix(const MatrixXd& x, const VectorXd& d);

struct KnockoffPairCheck {
  double gram_tilde;  // |Xt^T Xt - G|_max / |G|_max
  double cross;       // |X^T Xt - (G - D)|_max / |G|_max
};
KnockoffPairCheck check_knockoff_pair(const KnockoffPair& pair);

struct CoupledSplit {
  VectorXd omega;
  VectorXd beta_tilde;
  VectorXd xi;
  VectorXd beta_hat;
};

// Whitening quantities implied by (X, Xt, y), with Delta = 2 D^{-1}.
CoupledSplit couple_omega(const KnockoffPair& pair, const VectorXd& y);

VectorXd wstar(const VectorXd& w, const KnockoffPair& pair, const VectorXd& y);

// W_[j] = (d + 1 - j) psi_[j] sgn(beta_tilde_[j]). A zero beta_tilde gets a
// negative W, matching the conservative p = 1.
VectorXd whitening_to_w(const OrderingDecision& ordering, const VectorXd& beta_tilde);

// Ordering by descending |W| with psi = sgn(W*). Requires distinct nonzero |W|.
OrderingDecision w_to_whitening(const VectorXd& w, const VectorXd& w_star);

}  // namespace whiteout
