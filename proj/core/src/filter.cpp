#include "whiteout/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "whiteout/error.hpp"

namespace whiteout {

namespace {

int sign_or_minus(double x) { return x > 0 ? 1 : -1; }

std::vector<int> order_by_descending(const VectorXd& key) {
  std::vector<int> order(key.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) > key(b); });
  return order;
}

struct SymRoots {
  MatrixXd root;
  MatrixXd inv_root;
};

SymRoots sym_roots(const MatrixXd& m, const char* what) {
  auto e = eigendecompose(m);
  double lmax = e.values(0);
  double lmin = e.values(e.values.size() - 1);
  require(lmax > 0 && lmin > 1e-10 * lmax, ErrorKind::SingularMatrix,
          std::string(what) + " is singular; inflate Delta slightly");
  VectorXd s = e.values.cwiseSqrt();
  return {e.vectors * s.asDiagonal() * e.vectors.transpose(),
          e.vectors * s.cwiseInverse().asDiagonal() * e.vectors.transpose()};
}

}  // namespace

OrderingDecision ordering_from_eta(const VectorXd& beta, const VectorXd& eta) {
  OrderingDecision od;
  od.order = order_by_descending(eta);
  od.psi.resize(beta.size());
  for (Eigen::Index j = 0; j < beta.size(); ++j) od.psi[j] = beta(j) < 0 ? -1 : 1;
  return od;
}

OrderingDecision oracle_ordering(const VectorXd& beta, const WhitenedSplit& split,
                                 const VectorXd& delta, double sigma2) {
  return ordering_from_eta(beta, log_odds(beta, split.beta_tilde, delta, sigma2).eta);
}

PseudoDesign build_pseudo_design(const WhitenedSplit& split, const WhiteningPlan& plan) {
  const int d = plan.dim();
  auto roots = sym_roots(*plan.a, "A = Sigma^{-1} - Delta^{-1}");
  VectorXd dinv_sqrt = plan.delta.cwiseSqrt().cwiseInverse();
  PseudoDesign pd;
  pd.x_star.resize(2 * d, d);
  pd.x_star.topRows(d) = roots.root;
  pd.x_star.bottomRows(d) = dinv_sqrt.asDiagonal();
  pd.x_knock_star.resize(2 * d, d);
  pd.x_knock_star.topRows(d) = roots.root;
  pd.x_knock_star.bottomRows(d) = -MatrixXd(dinv_sqrt.asDiagonal());
  pd.y_star.resize(2 * d);
  pd.y_star.head(d) = roots.inv_root * split.xi;
  pd.y_star.tail(d) = dinv_sqrt.cwiseProduct(split.beta_tilde);
  return pd;
}

PseudoDesign build_noise_pseudo_design(const VectorXd& beta_hat, const CovarianceMatrix& sigma,
                                       const VectorXd& omega_star, int rank_r) {
  const int d = sigma.dim();
  require(rank_r == d, ErrorKind::SingularMatrix,
          "noise pseudo-design needs full-rank noise (r = d)");
  require(beta_hat.size() == d && omega_star.size() == d, ErrorKind::Dimension,
          "noise pseudo-design: dimension mismatch");
  const auto& e = sigma.eigen();
  MatrixXd inv_root =
      e.vectors * e.values.cwiseSqrt().cwiseInverse().asDiagonal() * e.vectors.transpose();
  PseudoDesign pd;
  pd.x_star = MatrixXd::Zero(2 * d, d);
  pd.x_star.topRows(d) = inv_root;
  pd.y_star.resize(2 * d);
  pd.y_star.head(d) = inv_root * beta_hat;
  pd.y_star.tail(d) = omega_star;
  return pd;
}

std::vector<double> lasso_grid(double lambda_max, const LassoConfig& cfg) {
  require(cfg.grid_points >= 2, ErrorKind::ParameterOutOfRange, "lasso grid needs >= 2 points");
  std::vector<double> grid;
  if (!(lambda_max > 0)) return grid;
  double step = std::log(cfg.min_ratio) / (cfg.grid_points - 1);
  for (int i = 0; i < cfg.grid_points; ++i) grid.push_back(lambda_max * std::exp(step * i));
  return grid;
}

VectorXd lasso_entry_levels(const MatrixXd& gram, const VectorXd& corr,
                            const std::vector<double>& grid, const LassoConfig& cfg) {
  const Eigen::Index p = gram.rows();
  require(gram.cols() == p && corr.size() == p, ErrorKind::Dimension, "lasso: dimension mismatch");
  for (std::size_t i = 1; i < grid.size(); ++i)
    require(grid[i] < grid[i - 1], ErrorKind::ParameterOutOfRange, "lasso grid must descend");

  VectorXd b = VectorXd::Zero(p);
  VectorXd g = corr;  // corr - gram * b
  VectorXd entry = VectorXd::Zero(p);
  // Stop on the largest objective decrease of a sweep, relative to the
  // decrease available at b = 0. Coefficient steps alone stall when the Gram
  // has a flat direction.
  double scale = 0;
  for (Eigen::Index j = 0; j < p; ++j)
    if (gram(j, j) > 0) scale = std::max(scale, corr(j) * corr(j) / gram(j, j));
  const double stop = cfg.tol * scale;
  // One coordinate update; returns the objective decrease proxy gjj * step^2.
  auto update = [&](Eigen::Index j, double lam) {
    double gjj = gram(j, j);
    if (gjj <= 0) return 0.0;
    double z = g(j) + gjj * b(j);
    double nb = z > lam ? (z - lam) / gjj : z < -lam ? (z + lam) / gjj : 0.0;
    double step = nb - b(j);
    if (step == 0) return 0.0;
    g.noalias() -= step * gram.col(j);
    b(j) = nb;
    return gjj * step * step;
  };
  std::vector<Eigen::Index> active;
  int sweeps = 0;
  auto count_sweep = [&] {
    if (++sweeps > cfg.max_sweeps)
      fail(ErrorKind::Numerical, "lasso coordinate descent hit the sweep cap");
  };
  for (double lam : grid) {
    sweeps = 0;
    // Full sweeps find the active set; inner sweeps converge on it.
    for (;;) {
      count_sweep();
      double biggest = 0;
      for (Eigen::Index j = 0; j < p; ++j) biggest = std::max(biggest, update(j, lam));
      if (biggest <= stop) break;
      active.clear();
      for (Eigen::Index j = 0; j < p; ++j)
        if (b(j) != 0) active.push_back(j);
      for (;;) {
        count_sweep();
        double inner = 0;
        for (Eigen::Index j : active) inner = std::max(inner, update(j, lam));
        if (inner <= stop) break;
      }
    }
    for (Eigen::Index j = 0; j < p; ++j)
      if (b(j) != 0 && entry(j) == 0) entry(j) = lam;
  }
  return entry;
}

VectorXd lasso_entry_path(const MatrixXd& design, const VectorXd& response,
                          const std::vector<double>& grid, const LassoConfig& cfg) {
  const double rows = static_cast<double>(design.rows());
  VectorXd corr = design.transpose() * response / rows;
  MatrixXd gram = design.transpose() * design / rows;
  if (!grid.empty()) return lasso_entry_levels(gram, corr, grid, cfg);
  double lmax = corr.cwiseAbs().maxCoeff();
  return lasso_entry_levels(gram, corr, lasso_grid(lmax, cfg), cfg);
}

std::pair<WStatistics, OrderingDecision> signed_max_ordering(const VectorXd& z,
                                                            const VectorXd& z_knock,
                                                            const VectorXd& beta_tilde) {
  const Eigen::Index d = z.size();
  WStatistics ws;
  ws.w_plus = z;
  ws.w_minus = z_knock;
  ws.w.resize(d);
  ws.w_star.resize(d);
  OrderingDecision od;
  od.psi.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double diff = z(j) - z_knock(j);
    double m = std::max(z(j), z_knock(j));
    ws.w(j) = diff > 0 ? m : diff < 0 ? -m : 0.0;
    int s = sign_or_minus(beta_tilde(j));
    ws.w_star(j) = ws.w(j) * s;
    od.psi[j] = ws.w(j) == 0 ? 1 : (ws.w(j) > 0 ? 1 : -1) * s;
  }
  od.order = order_by_descending(ws.w.cwiseAbs());
  return {ws, od};
}

std::pair<WStatistics, OrderingDecision> lasso_signed_max_ordering(const PseudoDesign& pd,
                                                                  const LassoConfig& cfg) {
  require(pd.x_knock_star.size() > 0, ErrorKind::Inapplicable,
          "pseudo-design has no knockoff block");
  const Eigen::Index d = pd.x_star.cols();
  MatrixXd full(pd.x_star.rows(), 2 * d);
  full << pd.x_star, pd.x_knock_star;
  VectorXd entry = lasso_entry_path(full, pd.y_star, {}, cfg);
  // sgn(beta_tilde) is the sign of the second block of y*.
  return signed_max_ordering(entry.head(d), entry.tail(d), pd.y_star.tail(d));
}

std::pair<WStatistics, OrderingDecision> lasso_signed_max_fast(const WhitenedSplit& split,
                                                              const WhiteningPlan& plan,
                                                              const LassoConfig& cfg) {
  const int d = plan.dim();
  const double rows = 2.0 * d;
  VectorXd dinv = plan.delta.cwiseInverse();
  MatrixXd gram(2 * d, 2 * d);
  MatrixXd cross = plan.sigma_inv;
  cross.diagonal() -= 2.0 * dinv;
  gram << plan.sigma_inv, cross, cross, plan.sigma_inv;
  gram /= rows;
  VectorXd scaled = split.beta_tilde.cwiseProduct(dinv);
  VectorXd corr(2 * d);
  corr << split.xi + scaled, split.xi - scaled;
  corr /= rows;
  VectorXd entry =
      lasso_entry_levels(gram, corr, lasso_grid(corr.cwiseAbs().maxCoeff(), cfg), cfg);
  return signed_max_ordering(entry.head(d), entry.tail(d), split.beta_tilde);
}

BinaryPValueSeq binary_pvalues(const OrderingDecision& ordering, const VectorXd& beta_tilde) {
  BinaryPValueSeq seq;
  for (int j : ordering.order) {
    double bt = beta_tilde(j);
    int s = bt > 0 ? 1 : bt < 0 ? -1 : 0;
    seq.index.push_back(j);
    seq.p.push_back(s == ordering.psi[j] ? 0.5 : 1.0);
  }
  return seq;
}

FilterResult run_whitening_filter(const VectorXd& beta_hat, const WhiteningPlan& plan,
                                  const NoiseModel& noise, const Strategy& strategy, double alpha,
                                  Stream& rng) {
  require(alpha > 0 && alpha < 1, ErrorKind::ParameterOutOfRange, "alpha must be in (0, 1)");
  FilterResult res;
  double scale2;
  if (const auto* k = std::get_if<KnownSigma>(&noise)) {
    scale2 = k->sigma2;
    res.split = whiten_known_sigma(beta_hat, plan, k->sigma2, rng);
  } else {
    const auto& c = std::get<CarveSigma>(noise);
    auto carved = carve_noise(c.sigma_hat2, c.n, plan, rng);
    scale2 = c.sigma_hat2;
    res.sigma_tilde_sq = carved.sigma_tilde_sq;
    res.split = split_from_omega(beta_hat, plan, std::move(carved.omega));
  }
  res.rank_r = plan.rank;

  if (const auto* o = std::get_if<OracleStrategy>(&strategy)) {
    require(o->beta.size() == plan.dim(), ErrorKind::Dimension, "oracle beta has wrong dimension");
    // The ordering is invariant to the common variance scale, so sigma_hat^2
    // may stand in for sigma^2 when carving.
    res.eta = log_odds(o->beta, res.split.beta_tilde, plan.delta, scale2);
    res.ordering = ordering_from_eta(o->beta, res.eta->eta);
  } else if (const auto* l = std::get_if<LassoStrategy>(&strategy)) {
    auto [ws, od] = lasso_signed_max_fast(res.split, plan, l->cfg);
    res.w = std::move(ws);
    res.ordering = std::move(od);
  } else {
    const auto& u = std::get<UserStrategy>(strategy);
    auto pd = build_pseudo_design(res.split, plan);
    auto [z, zk] = u.w_plus(pd);
    auto [ws, od] = signed_max_ordering(z, zk, res.split.beta_tilde);
    res.w = std::move(ws);
    res.ordering = std::move(od);
  }

  res.pvalues = binary_pvalues(res.ordering, res.split.beta_tilde);
  res.seqstep = run_seqstep(res.pvalues, alpha);
  res.rejections = res.seqstep.rejections;
  for (int j : res.rejections) res.directions.push_back(res.ordering.psi[j]);
  return res;
}

PseudoDesignCheck check_pseudo_design(const PseudoDesign& pd, const WhiteningPlan& plan) {
  const MatrixXd& s = plan.sigma_inv;
  double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  PseudoDesignCheck c{};
  c.gram_x = (pd.x_star.transpose() * pd.x_star - s).cwiseAbs().maxCoeff() / scale;
  if (pd.x_knock_star.size() > 0) {
    MatrixXd cross = s;
    cross.diagonal() -= 2.0 * plan.delta.cwiseInverse();
    c.gram_knock = (pd.x_knock_star.transpose() * pd.x_knock_star - s).cwiseAbs().maxCoeff() / scale;
    c.cross = (pd.x_star.transpose() * pd.x_knock_star - cross).cwiseAbs().maxCoeff() / scale;
  }
  return c;
}

}  // namespace whiteout
