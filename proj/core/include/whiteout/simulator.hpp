#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "whiteout/bounds.hpp"
#include "whiteout/covmodel.hpp"
#include "whiteout/filter.hpp"
#include "whiteout/rng.hpp"

namespace whiteout {

struct Estimate {
  double mean = 0;
  double mcse = 0;
};

Estimate summarize(const std::vector<double>& xs);

struct T3Result {
  Estimate tpr;
  Estimate rejections;
  std::vector<int> rejection_counts;
};

// Algorithm for the best TPR reachable when the analyst knows only the order
// statistics of beta^2. beta_sq holds those order statistics (any order);
// d1 is the number of nonzero entries.
T3Result t3_knockoff_star(const DeltaLowerBounds& b, const VectorXd& beta_sq, double sigma2,
                          double alpha, int replicates, std::uint64_t seed, int threads = 1);

// One replicate; exposed so run_scenario can share the code.
struct T3Draw {
  int rejections;
  int true_rejections;
};
T3Draw t3_replicate(const DeltaLowerBounds& b, const VectorXd& beta_sq, double sigma2,
                    double alpha, Stream& rng);

// First k-1 p-values are 1/2; after that each is 1 with probability
// q = (alpha + delta) / (1 + alpha + delta), independently.
Estimate simulate_eta_walk_bound(long k, long d, double alpha, double delta, int replicates,
                                 std::uint64_t seed, int threads = 1);

// Single walk; returns the rejection count.
long eta_walk_once(long k, long d, double alpha, double q, Stream& rng);

// Exact expectation by enumerating all 2^(d-k+1) tails. d <= 20.
double eta_walk_exact(long k, long d, double alpha, double delta);

struct Histogram {
  std::vector<int> counts;  // counts[r] = replicates with r rejections
  Estimate mean;
};

Histogram simulate_knockoff_star_rejections(const VectorXd& mu, double alpha, int replicates,
                                            std::uint64_t seed, int threads = 1);

std::vector<int> bh_procedure(const VectorXd& pvals, double alpha);
std::vector<int> bonferroni(const VectorXd& pvals, double alpha);

// dof <= 0 means sigma known: Gaussian p-values.
VectorXd ols_t_pvalues(const VectorXd& beta_hat, const CovarianceMatrix& sigma, double sigma_hat2,
                       double dof);

struct Score {
  int v;  // false discoveries
  double fdp;
  double tpp;  // NaN when the support is empty
};
Score fdr_tpr_score(const std::vector<int>& rejections, const std::vector<int>& support);

enum class Method { OracleKnockoffStar, LassoKnockoff, T3KnockoffStar, Bh, Bonferroni };
std::string to_string(Method m);
Method parse_method(const std::string& s);

struct MonteCarloConfig {
  ScenarioSpec scenario;
  int replicates = 100;
  std::vector<double> alphas{0.1, 0.2};
  std::vector<Method> methods{Method::OracleKnockoffStar, Method::Bh, Method::Bonferroni};
  double delta_inflation = 1.0;
  int top_l = 50;
  int threads = 0;
};

struct MethodSummary {
  Method method;
  double alpha;
  Estimate fdr;
  Estimate tpr;
  Estimate rejections;
};

struct ReplicateRecord {
  int replicate;
  Method method;
  double alpha;
  int r;
  int v;
  double fdp;
  double tpp;
};

struct PowerSummary {
  std::vector<MethodSummary> rows;
  std::vector<ReplicateRecord> records;
  int d = 0;
  int d1 = 0;
  double lambda_max = 0;

  const MethodSummary& get(Method m, double alpha) const;
};

PowerSummary run_scenario(const MonteCarloConfig& config);

}  // namespace whiteout
