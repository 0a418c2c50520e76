#include <gtest/gtest.h>

#include <cmath>

#include "whiteout/error.hpp"
#include "whiteout/standard_knockoffs.hpp"

using namespace whiteout;

namespace {

MatrixXd unit_columns(int n, int d, Stream& rng) {
  MatrixXd x(n, d);
  rng.normal_fill(x.data(), x.size());
  x.colwise().normalize();
  return x;
}

// D_jj drawn in (0, 2 lambda_min(G)], a valid choice.
VectorXd random_d(const MatrixXd& x, Stream& rng) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(x.transpose() * x, Eigen::EigenvaluesOnly);
  double cap = 2 * es.eigenvalues()(0);
  VectorXd d(x.cols());
  for (Eigen::Index j = 0; j < d.size(); ++j) d(j) = cap * (0.1 + 0.9 * rng.uniform());
  return d;
}

double col_cov(const VectorXd& a, const VectorXd& b, double* se) {
  const double m = static_cast<double>(a.size());
  VectorXd ca = a.array() - a.mean();
  VectorXd cb = b.array() - b.mean();
  VectorXd prod = ca.cwiseProduct(cb);
  double c = prod.mean();
  *se = std::sqrt((prod.array() - c).square().sum() / (m - 1) / m);
  return c;
}

}  // namespace

TEST(Knockoffs, ZeroD) {
  Stream rng(51);
  MatrixXd x = unit_columns(10, 4, rng);
  auto pair = construct_knockoff_matrix(x, VectorXd::Zero(4));
  EXPECT_EQ(pair.x_tilde, x);
}

TEST(Knockoffs, OrthonormalX) {
  MatrixXd x = MatrixXd::Identity(8, 3);
  auto pair = construct_knockoff_matrix(x, VectorXd::Ones(3));
  EXPECT_LT((pair.x_tilde.transpose() * x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((pair.x_tilde.transpose() * pair.x_tilde - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(Knockoffs, RandomInvariants) {
  Stream rng(52);
  for (int t = 0; t < 20; ++t) {
    MatrixXd x = unit_columns(60, 20, rng);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(x.transpose() * x, Eigen::EigenvaluesOnly);
    VectorXd d = VectorXd::Constant(20, 2 * es.eigenvalues()(0) * 0.9);
    auto c = check_knockoff_pair(construct_knockoff_matrix(x, d));
    EXPECT_LT(c.gram_tilde, 1e-8);
    EXPECT_LT(c.cross, 1e-8);
  }
}

TEST(Knockoffs, Boundary) {
  // Equicorrelated boundary D = 2 lambda_min(G) I makes 2D - D G^{-1} D singular.
  Stream rng(53);
  MatrixXd x = unit_columns(30, 10, rng);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(x.transpose() * x, Eigen::EigenvaluesOnly);
  VectorXd d = VectorXd::Constant(10, 2 * es.eigenvalues()(0));
  auto c = check_knockoff_pair(construct_knockoff_matrix(x, d));
  EXPECT_LT(c.gram_tilde, 1e-8);
  EXPECT_LT(c.cross, 1e-8);
}

TEST(Knockoffs, Errors) {
  Stream rng(54);
  MatrixXd x = unit_columns(7, 4, rng);
  EXPECT_THROW(construct_knockoff_matrix(x, VectorXd::Ones(4)), WhiteoutError);
  MatrixXd y = unit_columns(20, 4, rng);
  try {
    construct_knockoff_matrix(y, VectorXd::Constant(4, 10.0));
    FAIL();
  } catch (const WhiteoutError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotPsdDominating);
  }
  auto pair = construct_knockoff_matrix(y, VectorXd::Zero(4));
  EXPECT_THROW(couple_omega(pair, VectorXd::Ones(20)), WhiteoutError);
}

TEST(Knockoffs, CouplingIdentities) {
  Stream rng(55);
  for (int t = 0; t < 30; ++t) {
    int d = 2 + t % 10, n = 2 * d + 5;
    MatrixXd x = unit_columns(n, d, rng);
    auto pair = construct_knockoff_matrix(x, random_d(x, rng));
    VectorXd y(n);
    rng.normal_fill(y.data(), n);
    auto s = couple_omega(pair, y);
    MatrixXd g = x.transpose() * x;
    VectorXd delta = 2 * pair.d.cwiseInverse();
    VectorXd expect = g * s.beta_hat - s.beta_tilde.cwiseQuotient(delta);
    EXPECT_LT((s.xi - expect).cwiseAbs().maxCoeff(), 1e-8);
    // Sigma = G^{-1} and Delta = 2 D^{-1} form a valid plan.
    CovarianceMatrix sigma(g.inverse());
    auto plan = validate_delta(sigma, delta);
    auto split = split_from_omega(s.beta_hat, plan, s.omega);
    EXPECT_LT((split.xi - s.xi).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT(reconstruction_error(s.beta_hat, split, plan), 1e-8);
  }
}

TEST(Knockoffs, KnockoffDistributionMoments) {
  const int n = 12, d = 3, m = 100000;
  Stream rng(56);
  MatrixXd x = unit_columns(n, d, rng);
  auto pair = construct_knockoff_matrix(x, random_d(x, rng));
  MatrixXd g = x.transpose() * x;
  MatrixXd a = g;
  a.diagonal() -= 0.5 * pair.d;
  VectorXd beta(d);
  beta << 1, -2, 0.5;
  MatrixXd sum_t = pair.x + pair.x_tilde, diff_t = pair.x - pair.x_tilde;
  MatrixXd s(m, d), f(m, d), om(m, d), bh(m, d);
  VectorXd mean = x * beta;
  for (int i = 0; i < m; ++i) {
    VectorXd y(n);
    rng.normal_fill(y.data(), n);
    y += mean;
    s.row(i) = sum_t.transpose() * y;
    f.row(i) = diff_t.transpose() * y;
    auto c = couple_omega(pair, y);
    om.row(i) = c.omega;
    bh.row(i) = c.beta_hat;
  }
  VectorXd ms = 2 * a * beta, mf = pair.d.cwiseProduct(beta);
  for (int j = 0; j < d; ++j) {
    double se;
    double vs = col_cov(s.col(j), s.col(j), &se);
    EXPECT_LT(std::abs(s.col(j).mean() - ms(j)), 4 * std::sqrt(vs / m));
    double vf = col_cov(f.col(j), f.col(j), &se);
    EXPECT_LT(std::abs(f.col(j).mean() - mf(j)), 4 * std::sqrt(vf / m));
    for (int k = 0; k < d; ++k) {
      double c = col_cov(s.col(j), s.col(k), &se);
      EXPECT_LT(std::abs(c - 4 * a(j, k)), 4 * se);
      c = col_cov(f.col(j), f.col(k), &se);
      EXPECT_LT(std::abs(c - (j == k ? 2 * pair.d(j) : 0.0)), 4 * se);
      c = col_cov(s.col(j), f.col(k), &se);
      EXPECT_LT(std::abs(c), 4 * se);
      c = col_cov(om.col(j), bh.col(k), &se);
      EXPECT_LT(std::abs(c), 4 * se);
    }
  }
}

TEST(Knockoffs, WStarBasics) {
  MatrixXd x = MatrixXd::Identity(6, 2);
  auto pair = construct_knockoff_matrix(x, VectorXd::Ones(2));
  VectorXd y = VectorXd::Zero(6);
  y(0) = 1;
  y(1) = -1;
  VectorXd w(2);
  w << 2, 0;
  VectorXd ws = wstar(w, pair, y);
  EXPECT_EQ(ws(0), 2);
  EXPECT_EQ(ws(1), 0);
}

TEST(Knockoffs, WStarUnorderedPair) {
  // W from signed max of lasso entry levels on [X Xt]: swapping any subset of
  // pairs leaves W* unchanged.
  Stream rng(57);
  const int n = 40, d = 8;
  MatrixXd x = unit_columns(n, d, rng);
  auto pair = construct_knockoff_matrix(x, random_d(x, rng));
  VectorXd y = x.leftCols(2) * VectorXd::Constant(2, 3.0);
  VectorXd noise(n);
  rng.normal_fill(noise.data(), n);
  y += noise;
  auto stat = [&](const KnockoffPair& p) {
    MatrixXd full(n, 2 * d);
    full << p.x, p.x_tilde;
    VectorXd e = lasso_entry_path(full, y, {});
    VectorXd bt = (p.x - p.x_tilde).transpose() * y;
    return wstar(signed_max_ordering(e.head(d), e.tail(d), bt).first.w, p, y);
  };
  VectorXd base = stat(pair);
  for (int t = 0; t < 20; ++t) {
    KnockoffPair sw = pair;
    for (int j = 0; j < d; ++j)
      if (rng.bernoulli(0.5)) sw.x.col(j).swap(sw.x_tilde.col(j));
    EXPECT_LT((stat(sw) - base).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Knockoffs, WhiteningToW) {
  OrderingDecision od{{0, 1, 2}, {1, 1, 1}};
  VectorXd bt(3);
  bt << 1, -1, 1;
  VectorXd w = whitening_to_w(od, bt);
  EXPECT_EQ(w, (VectorXd(3) << 3, -2, 1).finished());
  bt << 1, 1, 1;
  w = whitening_to_w(od, bt);
  EXPECT_TRUE((w.array() > 0).all());
  EXPECT_EQ(knockoff_plus_threshold(w, 0.5).rejections.size(), 3u);
}

TEST(Knockoffs, WToWhitening) {
  VectorXd w(3), bt(3);
  w << 3, -2, 1;
  bt << 1, -1, 1;
  VectorXd ws = w.cwiseProduct(bt.cwiseSign());
  EXPECT_EQ(ws, (VectorXd(3) << 3, 2, 1).finished());
  auto od = w_to_whitening(w, ws);
  EXPECT_EQ(od.order, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(od.psi, (std::vector<int>{1, 1, 1}));

  auto one = w_to_whitening(VectorXd::Ones(1), -VectorXd::Ones(1));
  EXPECT_EQ(one.psi, (std::vector<int>{-1}));

  VectorXd tie(2);
  tie << 2, -2;
  EXPECT_THROW(w_to_whitening(tie, tie), WhiteoutError);
  EXPECT_THROW(w_to_whitening(VectorXd::Zero(2), VectorXd::Zero(2)), WhiteoutError);
}

TEST(Knockoffs, RoundTrip) {
  Stream rng(58);
  for (int t = 0; t < 100; ++t) {
    const int d = 1 + t % 15;
    OrderingDecision od;
    od.order.resize(d);
    for (int j = 0; j < d; ++j) od.order[j] = j;
    shuffle(od.order, rng);
    VectorXd bt(d);
    rng.normal_fill(bt.data(), d);
    for (int j = 0; j < d; ++j) od.psi.push_back(rng.bernoulli(0.5) ? 1 : -1);
    VectorXd w = whitening_to_w(od, bt);
    auto back = w_to_whitening(w, w.cwiseProduct(bt.cwiseSign()));
    EXPECT_EQ(back.order, od.order);
    EXPECT_EQ(back.psi, od.psi);
  }
}

TEST(Knockoffs, EquivalenceOnRandomSequences) {
  Stream rng(59);
  for (int t = 0; t < 200; ++t) {
    const int d = 1 + t % 40;
    OrderingDecision od;
    od.order.resize(d);
    for (int j = 0; j < d; ++j) od.order[j] = j;
    shuffle(od.order, rng);
    VectorXd bt(d);
    rng.normal_fill(bt.data(), d);
    double q = rng.uniform();
    for (int j = 0; j < d; ++j) {
      int s = bt(j) > 0 ? 1 : -1;
      od.psi.push_back(rng.bernoulli(q) ? s : -s);
    }
    VectorXd w = whitening_to_w(od, bt);
    for (double alpha : {0.05, 0.1, 0.2}) {
      auto seq = run_seqstep(binary_pvalues(od, bt), alpha).rejections;
      std::sort(seq.begin(), seq.end());
      EXPECT_EQ(knockoff_plus_threshold(w, alpha).rejections, seq);
    }
  }
}
