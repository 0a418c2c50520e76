#include "whiteout/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "whiteout/error.hpp"
#include "whiteout/numeric.hpp"
#include "whiteout/parallel.hpp"

namespace whiteout {

Estimate summarize(const std::vector<double>& xs) {
  Estimate e;
  std::size_t n = 0;
  double sum = 0;
  for (double x : xs)
    if (!std::isnan(x)) {
      sum += x;
      ++n;
    }
  if (n == 0) return {std::numeric_limits<double>::quiet_NaN(), 0};
  e.mean = sum / n;
  if (n > 1) {
    double ss = 0;
    for (double x : xs)
      if (!std::isnan(x)) ss += (x - e.mean) * (x - e.mean);
    e.mcse = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
  }
  return e;
}

namespace {

// eta ~ |N(mu, 2 mu)|, then p = 1/2 with logit eta; ordered by descending eta.
// Returns (rejections, true rejections).
T3Draw knockoff_star_draw(const VectorXd& mu, const std::vector<char>& non_null, double alpha,
                          Stream& rng) {
  const Eigen::Index d = mu.size();
  VectorXd eta(d);
  std::vector<char> half(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (std::isinf(mu(j))) {
      eta(j) = std::numeric_limits<double>::infinity();
      half[j] = 1;
      continue;
    }
    double z = rng.normal();
    eta(j) = std::abs(mu(j) + std::sqrt(2 * mu(j)) * z);
    half[j] = rng.uniform() < 1.0 / (1.0 + std::exp(-eta(j)));
  }
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eta(a) > eta(b); });

  long ones = 0, halves = 0;
  Eigen::Index k_hat = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (half[order[i]])
      ++halves;
    else
      ++ones;
    if (halves > 0 && static_cast<double>(1 + ones) / halves <= alpha) k_hat = i + 1;
  }
  T3Draw out{0, 0};
  for (Eigen::Index i = 0; i < k_hat; ++i) {
    int j = order[i];
    if (half[j]) {
      ++out.rejections;
      if (non_null[j]) ++out.true_rejections;
    }
  }
  return out;
}

}  // namespace

T3Draw t3_replicate(const DeltaLowerBounds& b, const VectorXd& beta_sq, double sigma2,
                    double alpha, Stream& rng) {
  const int d = b.size();
  require(beta_sq.size() == d, ErrorKind::Dimension, "t3: beta and b lengths differ");
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  shuffle(perm, rng);
  VectorXd mu(d);
  std::vector<char> non_null(d);
  for (int j = 0; j < d; ++j) {
    double bsq = beta_sq(perm[j]);
    non_null[j] = bsq != 0;
    if (bsq == 0)
      mu(j) = 0;
    else if (b.b(j) <= 0)
      mu(j) = std::numeric_limits<double>::infinity();
    else
      mu(j) = 2 * bsq / (sigma2 * b.b(j));
  }
  return knockoff_star_draw(mu, non_null, alpha, rng);
}

T3Result t3_knockoff_star(const DeltaLowerBounds& b, const VectorXd& beta_sq, double sigma2,
                          double alpha, int replicates, std::uint64_t seed, int threads) {
  require(replicates >= 1, ErrorKind::ParameterOutOfRange, "replicates must be >= 1");
  require(sigma2 > 0, ErrorKind::ParameterOutOfRange, "sigma2 must be > 0");
  require(alpha > 0 && alpha < 1, ErrorKind::ParameterOutOfRange, "alpha must be in (0, 1)");
  const long d1 = (beta_sq.array() != 0).count();
  require(d1 >= 1, ErrorKind::ParameterOutOfRange, "t3 needs at least one non-null");
  std::vector<T3Draw> draws(replicates);
  Stream root(seed);
  parallel_for(replicates, resolve_threads(threads), [&](std::size_t m) {
    Stream rng = root.substream({m});
    draws[m] = t3_replicate(b, beta_sq, sigma2, alpha, rng);
  });
  T3Result res;
  std::vector<double> tpp, rej;
  for (const auto& dr : draws) {
    tpp.push_back(static_cast<double>(dr.true_rejections) / d1);
    rej.push_back(dr.rejections);
    res.rejection_counts.push_back(dr.rejections);
  }
  res.tpr = summarize(tpp);
  res.rejections = summarize(rej);
  return res;
}

long eta_walk_once(long k, long d, double alpha, double q, Stream& rng) {
  // Between consecutive p = 1 entries FDP-hat only falls, so the largest
  // qualifying index is always the end of some run of halves.
  long pos = k - 1, halves = k - 1, ones = 0, best = 0;
  for (;;) {
    long run = std::min<long>(rng.geometric(q), d - pos);
    halves += run;
    pos += run;
    if (halves > 0 && static_cast<double>(1 + ones) / halves <= alpha) best = halves;
    if (pos >= d) break;
    ++ones;
    ++pos;
    if (pos >= d) break;
  }
  return best;
}

Estimate simulate_eta_walk_bound(long k, long d, double alpha, double delta, int replicates,
                                 std::uint64_t seed, int threads) {
  require(k >= 1 && k <= d, ErrorKind::ParameterOutOfRange, "walk needs 1 <= k <= d");
  require(alpha > 0 && alpha < 1 && delta > 0 && alpha + delta < 1,
          ErrorKind::ParameterOutOfRange, "walk needs alpha, delta > 0 with alpha + delta < 1");
  const double q = (alpha + delta) / (1 + alpha + delta);
  std::vector<double> r(replicates);
  Stream root(seed);
  parallel_for(replicates, resolve_threads(threads), [&](std::size_t m) {
    Stream rng = root.substream({m});
    r[m] = static_cast<double>(eta_walk_once(k, d, alpha, q, rng));
  });
  return summarize(r);
}

double eta_walk_exact(long k, long d, double alpha, double delta) {
  const long tail = d - k + 1;
  require(k >= 1 && tail >= 0 && tail <= 20, ErrorKind::ParameterOutOfRange,
          "exact walk enumeration limited to 20 free steps");
  const double q = (alpha + delta) / (1 + alpha + delta);
  double expect = 0;
  for (long mask = 0; mask < (1L << tail); ++mask) {
    BinaryPValueSeq seq;
    double prob = 1;
    for (long i = 0; i < d; ++i) {
      bool one = false;
      if (i >= k - 1) {
        one = (mask >> (i - (k - 1))) & 1;
        prob *= one ? q : 1 - q;
      }
      seq.index.push_back(static_cast<int>(i));
      seq.p.push_back(one ? 1.0 : 0.5);
    }
    expect += prob * run_seqstep(seq, alpha).rejection_count();
  }
  return expect;
}

Histogram simulate_knockoff_star_rejections(const VectorXd& mu, double alpha, int replicates,
                                            std::uint64_t seed, int threads) {
  require((mu.array() >= 0).all(), ErrorKind::ParameterOutOfRange, "mu must be >= 0");
  std::vector<char> non_null(mu.size());
  for (Eigen::Index j = 0; j < mu.size(); ++j) non_null[j] = mu(j) > 0;
  std::vector<int> counts(replicates);
  Stream root(seed);
  parallel_for(replicates, resolve_threads(threads), [&](std::size_t m) {
    Stream rng = root.substream({m});
    counts[m] = knockoff_star_draw(mu, non_null, alpha, rng).rejections;
  });
  Histogram h;
  int top = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  h.counts.assign(top + 1, 0);
  std::vector<double> xs;
  for (int c : counts) {
    ++h.counts[c];
    xs.push_back(c);
  }
  h.mean = summarize(xs);
  return h;
}

std::vector<int> bh_procedure(const VectorXd& pvals, double alpha) {
  const Eigen::Index d = pvals.size();
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return pvals(a) < pvals(b); });
  Eigen::Index i_max = 0;
  for (Eigen::Index i = 1; i <= d; ++i)
    if (pvals(order[i - 1]) <= i * alpha / d) i_max = i;
  std::vector<int> rej(order.begin(), order.begin() + i_max);
  std::sort(rej.begin(), rej.end());
  return rej;
}

std::vector<int> bonferroni(const VectorXd& pvals, double alpha) {
  std::vector<int> rej;
  const double cut = alpha / pvals.size();
  for (Eigen::Index j = 0; j < pvals.size(); ++j)
    if (pvals(j) <= cut) rej.push_back(static_cast<int>(j));
  return rej;
}

VectorXd ols_t_pvalues(const VectorXd& beta_hat, const CovarianceMatrix& sigma, double sigma_hat2,
                       double dof) {
  require(beta_hat.size() == sigma.dim(), ErrorKind::Dimension, "beta_hat has wrong dimension");
  require(sigma_hat2 > 0, ErrorKind::ParameterOutOfRange, "sigma_hat^2 must be > 0");
  VectorXd p(beta_hat.size());
  VectorXd diag = sigma.diagonal();
  for (Eigen::Index j = 0; j < p.size(); ++j)
    p(j) = two_sided_t_pvalue(beta_hat(j) / std::sqrt(sigma_hat2 * diag(j)), dof);
  return p;
}

Score fdr_tpr_score(const std::vector<int>& rejections, const std::vector<int>& support) {
  std::vector<int> s(support);
  std::sort(s.begin(), s.end());
  long v = 0;
  for (int j : rejections)
    if (!std::binary_search(s.begin(), s.end(), j)) ++v;
  const long r = static_cast<long>(rejections.size());
  Score sc;
  sc.v = static_cast<int>(v);
  sc.fdp = static_cast<double>(v) / std::max(r, 1L);
  sc.tpp = s.empty() ? std::numeric_limits<double>::quiet_NaN()
                     : static_cast<double>(r - v) / static_cast<double>(s.size());
  return sc;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::OracleKnockoffStar: return "oracle-knockoff*";
    case Method::LassoKnockoff: return "lasso-knockoff";
    case Method::T3KnockoffStar: return "t3-knockoff*";
    case Method::Bh: return "bh";
    case Method::Bonferroni: return "bonferroni";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  for (Method m : {Method::OracleKnockoffStar, Method::LassoKnockoff, Method::T3KnockoffStar,
                   Method::Bh, Method::Bonferroni})
    if (to_string(m) == s) return m;
  if (s == "oracle") return Method::OracleKnockoffStar;
  if (s == "lasso") return Method::LassoKnockoff;
  if (s == "t3") return Method::T3KnockoffStar;
  fail(ErrorKind::ParameterOutOfRange, "unknown method: " + s);
}

const MethodSummary& PowerSummary::get(Method m, double alpha) const {
  for (const auto& r : rows)
    if (r.method == m && r.alpha == alpha) return r;
  fail(ErrorKind::ParameterOutOfRange, "no summary for " + to_string(m));
}

namespace {

struct ReplicateData {
  CovarianceMatrix sigma;
  VectorXd beta;
  VectorXd beta_hat;
  double sigma_hat2;
  double dof;  // <= 0: sigma known
};

VectorXd gaussian_draw(const CovarianceMatrix& sigma, double sigma2, Stream& rng) {
  const auto& e = sigma.eigen();
  VectorXd z(sigma.dim());
  rng.normal_fill(z.data(), z.size());
  return std::sqrt(sigma2) * (e.vectors * e.values.cwiseMax(0.0).cwiseSqrt().cwiseProduct(z));
}

std::vector<int> support_of(const VectorXd& beta) {
  std::vector<int> s;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (beta(j) != 0) s.push_back(static_cast<int>(j));
  return s;
}

}  // namespace

PowerSummary run_scenario(const MonteCarloConfig& config) {
  const ScenarioSpec& spec = config.scenario;
  spec.validate();
  require(config.replicates >= 1, ErrorKind::ParameterOutOfRange, "replicates must be >= 1");
  for (double a : config.alphas)
    require(a > 0 && a < 1, ErrorKind::ParameterOutOfRange, "alpha must be in (0, 1)");

  const Stream root(spec.seed);
  Stream scenario_rng = root.substream({0});
  const ScenarioInstance base = build_scenario(spec, scenario_rng);
  // Design-gram scenarios redraw X every replicate, like the data itself.
  const bool redraw = spec.family == Family::DesignGram;
  std::optional<CovarianceMatrix> row_cov;
  if (redraw) row_cov = design_row_covariance(spec);
  const int d = spec.d;

  auto has = [&](Method m) {
    return std::find(config.methods.begin(), config.methods.end(), m) != config.methods.end();
  };
  const bool need_plan = has(Method::OracleKnockoffStar) || has(Method::LassoKnockoff);
  const bool need_b = has(Method::T3KnockoffStar);

  // Fixed-covariance families share one plan and one b sequence.
  std::optional<WhiteningPlan> fixed_plan;
  std::optional<DeltaLowerBounds> fixed_b;
  if (!redraw) {
    if (need_plan)
      fixed_plan = validate_delta(base.sigma, make_equi_delta(base.sigma, config.delta_inflation));
    if (need_b) fixed_b = delta_order_lower_bounds(base.sigma.eigen(), config.top_l);
  }

  const std::size_t per_rep = config.methods.size() * config.alphas.size();
  std::vector<ReplicateRecord> records(config.replicates * per_rep);

  parallel_for(config.replicates, resolve_threads(config.threads), [&](std::size_t r) {
    Stream rs = root.substream({1, r});
    Stream design_rng = rs.substream({0});
    Stream beta_rng = rs.substream({1});
    Stream data_rng = rs.substream({2});
    // Knockoff methods share this stream, so they see the same whitening noise.
    const Stream noise_rng = rs.substream({3});
    Stream t3_rng = rs.substream({4});

    ReplicateData rd{base.sigma, draw_beta(spec, beta_rng), {}, spec.sigma2, -1};
    MatrixXd x;
    if (redraw) {
      auto dg = make_design_gram(spec.n, *row_cov, design_rng);
      rd.sigma = dg.sigma;
      x = std::move(dg.x);
    }
    if (redraw) {
      VectorXd eps(spec.n);
      data_rng.normal_fill(eps.data(), spec.n);
      VectorXd y = x * rd.beta + std::sqrt(spec.sigma2) * eps;
      rd.beta_hat = rd.sigma.matrix() * (x.transpose() * y);
      rd.sigma_hat2 = (y - x * rd.beta_hat).squaredNorm() / (spec.n - d);
      rd.dof = spec.n - d;
    } else {
      rd.beta_hat = rd.beta + gaussian_draw(rd.sigma, spec.sigma2, data_rng);
    }
    const std::vector<int> support = support_of(rd.beta);

    std::optional<WhiteningPlan> plan = fixed_plan;
    if (need_plan && !plan)
      plan = validate_delta(rd.sigma, make_equi_delta(rd.sigma, config.delta_inflation));

    std::optional<WhitenedSplit> split;
    if (need_plan) {
      Stream nr = noise_rng;
      if (redraw) {
        auto carved = carve_noise(rd.sigma_hat2, spec.n, *plan, nr);
        split = split_from_omega(rd.beta_hat, *plan, std::move(carved.omega));
      } else {
        split = whiten_known_sigma(rd.beta_hat, *plan, spec.sigma2, nr);
      }
    }

    std::size_t slot = r * per_rep;
    for (Method m : config.methods) {
      std::optional<BinaryPValueSeq> seq;
      std::optional<VectorXd> pvals;
      if (m == Method::OracleKnockoffStar) {
        auto od = oracle_ordering(rd.beta, *split, plan->delta, spec.sigma2);
        seq = binary_pvalues(od, split->beta_tilde);
      } else if (m == Method::LassoKnockoff) {
        auto [ws, od] = lasso_signed_max_fast(*split, *plan);
        seq = binary_pvalues(od, split->beta_tilde);
      } else if (m == Method::Bh || m == Method::Bonferroni) {
        pvals = ols_t_pvalues(rd.beta_hat, rd.sigma, rd.sigma_hat2, rd.dof);
      }
      std::optional<DeltaLowerBounds> b = fixed_b;
      if (m == Method::T3KnockoffStar && !b)
        b = delta_order_lower_bounds(rd.sigma.eigen(), config.top_l);

      for (std::size_t ai = 0; ai < config.alphas.size(); ++ai) {
        const double alpha = config.alphas[ai];
        ReplicateRecord rec{static_cast<int>(r), m, alpha, 0, 0, 0, 0};
        std::vector<int> rej;
        if (seq) {
          rej = run_seqstep(*seq, alpha).rejections;
        } else if (m == Method::Bh) {
          rej = bh_procedure(*pvals, alpha);
        } else if (m == Method::Bonferroni) {
          rej = bonferroni(*pvals, alpha);
        }
        if (m == Method::T3KnockoffStar) {
          // Scored on its own permuted support; one draw per replicate.
          Stream tr = t3_rng.substream({ai});
          auto dr = t3_replicate(*b, rd.beta.cwiseAbs2(), spec.sigma2, alpha, tr);
          rec.r = dr.rejections;
          rec.v = dr.rejections - dr.true_rejections;
          rec.fdp = static_cast<double>(rec.v) / std::max(rec.r, 1);
          rec.tpp = support.empty() ? std::numeric_limits<double>::quiet_NaN()
                                    : static_cast<double>(dr.true_rejections) / support.size();
        } else {
          Score sc = fdr_tpr_score(rej, support);
          rec.r = static_cast<int>(rej.size());
          rec.v = sc.v;
          rec.fdp = sc.fdp;
          rec.tpp = sc.tpp;
        }
        records[slot++] = rec;
      }
    }
  });

  PowerSummary out;
  out.d = d;
  out.d1 = spec.non_null_count();
  out.lambda_max = base.sigma.lambda_max();
  for (Method m : config.methods)
    for (double alpha : config.alphas) {
      std::vector<double> fdp, tpp, rr;
      for (const auto& rec : records)
        if (rec.method == m && rec.alpha == alpha) {
          fdp.push_back(rec.fdp);
          tpp.push_back(rec.tpp);
          rr.push_back(rec.r);
        }
      out.rows.push_back({m, alpha, summarize(fdp), summarize(tpp), summarize(rr)});
    }
  out.records = std::move(records);
  return out;
}

}  // namespace whiteout
