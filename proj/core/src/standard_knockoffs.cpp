#include "whiteout/standard_knockoffs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "whiteout/error.hpp"
#include "whiteout/io.hpp"

namespace whiteout {

KnockoffPair construct_knockoff_matrix(const MatrixXd& x, const VectorXd& d) {
  const Eigen::Index n = x.rows(), p = x.cols();
  require(n >= 2 * p, ErrorKind::Dimension, "knockoff matrix needs n >= 2d");
  require(d.size() == p, ErrorKind::Dimension, "D has wrong dimension");
  require((d.array() >= 0).all(), ErrorKind::ParameterOutOfRange, "D entries must be >= 0");

  MatrixXd g = x.transpose() * x;
  Eigen::LLT<MatrixXd> gl(g);
  require(gl.info() == Eigen::Success, ErrorKind::SingularMatrix, "X is not full column rank");
  MatrixXd ginv_d = gl.solve(MatrixXd(d.asDiagonal()));
  MatrixXd m = 2.0 * MatrixXd(d.asDiagonal()) - d.asDiagonal() * ginv_d;
  m = 0.5 * (m + m.transpose());

  const double tr = std::max(m.trace(), 0.0);
  MatrixXd c = MatrixXd::Zero(p, p);
  if (m.cwiseAbs().maxCoeff() > 0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
    double mmin = es.eigenvalues()(0);
    require(mmin >= -1e-10 * std::max(tr, g.trace()), ErrorKind::NotPsdDominating,
            "2D - D G^{-1} D has eigenvalue " + format_double(mmin) + "; D exceeds 2 X^T X");
    bool ok = false;
    for (double jitter : {0.0, 1e-12 * tr, 1e-10 * tr}) {
      MatrixXd mj = m;
      mj.diagonal().array() += jitter;
      Eigen::LLT<MatrixXd> ml(mj);
      if (ml.info() == Eigen::Success) {
        c = ml.matrixU();
        ok = true;
        break;
      }
    }
    require(ok, ErrorKind::Numerical, "Cholesky of 2D - D G^{-1} D failed after jitter");
  }

  // First p columns of the orthogonal complement of col(X).
  Eigen::HouseholderQR<MatrixXd> qr(x);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(n, 2 * p);
  MatrixXd u = q.rightCols(p);

  KnockoffPair pair;
  pair.x = x;
  pair.x_tilde = x - x * ginv_d + u * c;
  pair.d = d;
  return pair;
}

KnockoffPairCheck check_knockoff_pair(const KnockoffPair& pair) {
  MatrixXd g = pair.x.transpose() * pair.x;
  double scale = g.cwiseAbs().maxCoeff();
  MatrixXd gd = g;
  gd.diagonal() -= pair.d;
  KnockoffPairCheck c;
  c.gram_tilde = (pair.x_tilde.transpose() * pair.x_tilde - g).cwiseAbs().maxCoeff() / scale;
  c.cross = (pair.x.transpose() * pair.x_tilde - gd).cwiseAbs().maxCoeff() / scale;
  return c;
}

CoupledSplit couple_omega(const KnockoffPair& pair, const VectorXd& y) {
  require((pair.d.array() > 0).all(), ErrorKind::SingularMatrix,
          "coupling needs every D_jj > 0 (D_jj = 0 means Delta_jj = infinity)");
  require(y.size() == pair.x.rows(), ErrorKind::Dimension, "y has wrong length");
  CoupledSplit s;
  VectorXd xty = pair.x.transpose() * y;
  VectorXd xkty = pair.x_tilde.transpose() * y;
  s.beta_hat = (pair.x.transpose() * pair.x).llt().solve(xty);
  s.beta_tilde = (xty - xkty).cwiseQuotient(pair.d);
  s.xi = 0.5 * (xty + xkty);
  s.omega = s.beta_tilde - s.beta_hat;
  return s;
}

VectorXd wstar(const VectorXd& w, const KnockoffPair& pair, const VectorXd& y) {
  VectorXd diff = (pair.x - pair.x_tilde).transpose() * y;
  VectorXd out(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j)
    out(j) = diff(j) > 0 ? w(j) : diff(j) < 0 ? -w(j) : 0.0;
  return out;
}

VectorXd whitening_to_w(const OrderingDecision& ordering, const VectorXd& beta_tilde) {
  const Eigen::Index d = beta_tilde.size();
  require(static_cast<Eigen::Index>(ordering.order.size()) == d, ErrorKind::Dimension,
          "ordering has wrong length");
  VectorXd w(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    int j = ordering.order[i];
    double bt = beta_tilde(j);
    int s = bt > 0 ? 1 : bt < 0 ? -1 : 0;
    w(j) = static_cast<double>(d - i) * (s == ordering.psi[j] ? 1.0 : -1.0);
  }
  return w;
}

OrderingDecision w_to_whitening(const VectorXd& w, const VectorXd& w_star) {
  const Eigen::Index d = w.size();
  require(w_star.size() == d, ErrorKind::Dimension, "W* has wrong length");
  OrderingDecision od;
  od.order.resize(d);
  std::iota(od.order.begin(), od.order.end(), 0);
  std::stable_sort(od.order.begin(), od.order.end(),
                   [&](int a, int b) { return std::abs(w(a)) > std::abs(w(b)); });
  for (Eigen::Index i = 0; i < d; ++i) {
    double a = std::abs(w(od.order[i]));
    require(a > 0, ErrorKind::TieOrZero, "W has a zero entry");
    if (i > 0)
      require(a < std::abs(w(od.order[i - 1])), ErrorKind::TieOrZero, "|W| has ties");
  }
  od.psi.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) od.psi[j] = w_star(j) > 0 ? 1 : -1;
  return od;
}

}  // namespace whiteout
