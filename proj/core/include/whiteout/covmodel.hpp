#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "whiteout/rng.hpp"

namespace whiteout {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Eigenvalues descending; each eigenvector is signed so that its
// largest-magnitude entry is positive.
struct EigenDecomposition {
  VectorXd values;
  MatrixXd vectors;  // columns
};

EigenDecomposition eigendecompose(const MatrixXd& m);

// Immutable symmetric PSD matrix with its eigendecomposition cached.
// Copies share storage.
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(MatrixXd entries);

  int dim() const { return static_cast<int>(impl_->entries.rows()); }
  const MatrixXd& matrix() const { return impl_->entries; }
  const EigenDecomposition& eigen() const { return impl_->eig; }
  double lambda_max() const { return impl_->eig.values(0); }
  double lambda_min() const { return impl_->eig.values(dim() - 1); }
  VectorXd diagonal() const { return impl_->entries.diagonal(); }

 private:
  struct Impl {
    MatrixXd entries;
    EigenDecomposition eig;
  };
  std::shared_ptr<const Impl> impl_;
};

CovarianceMatrix make_equicorrelated(int d, double rho);
CovarianceMatrix make_mcc(int d, int m, int m0);

// K = I + lambda * sum_l u_l u_l^T with u_l uniform on the sphere, scaled to
// unit diagonal. With invert set the construction is K^{-1}, then inverted.
CovarianceMatrix make_factor(int d, int k, double lambda, bool invert, Stream& rng);

// The sampled factor directions, exposed for tests (draw order matches make_factor).
std::vector<VectorXd> sample_sphere_directions(int d, int k, Stream& rng);

// D^{-1/2} M D^{-1/2}, symmetrized.
MatrixXd to_correlation(const MatrixXd& m);

struct DesignGram {
  MatrixXd x;  // n x d, unit-norm columns
  CovarianceMatrix sigma;  // (X^T X)^{-1}
};

// Rows i.i.d. N(0, K), columns normalized. Retries once on a rank-deficient draw.
DesignGram make_design_gram(int n, const CovarianceMatrix& k, Stream& rng);

// Fraction of leading-eigenvector entries with |u_1j| <= c / sqrt(d).
double leading_eigvec_cdf(const EigenDecomposition& decomp, double c);

enum class Family { Equicorrelated, Mcc, Factor, InverseFactor, DesignGram, Identity, UserFile };

enum class Support { UniformRandom, Fixed };

// Row covariance K of the random design in design-gram scenarios.
enum class DesignCov { Identity, Equicorrelated, InverseEquicorrelated };
DesignCov parse_design_cov(const std::string& s);
std::string to_string(DesignCov c);

struct ScenarioSpec {
  Family family = Family::Identity;
  int d = 10;
  double rho = 0.0;
  int m = 1;
  int m0 = 1;
  int k = 1;
  double lambda = 0.0;
  int n = 0;
  DesignCov design_cov = DesignCov::Identity;
  std::string cov_path;  // Family::UserFile

  int d1 = 0;
  double pi1 = 0.0;  // used when d1 == 0
  double beta0 = 0.0;
  Support support = Support::UniformRandom;
  std::vector<int> support_indices;  // 0-based, Support::Fixed
  double sigma2 = 1.0;
  std::uint64_t seed = 0;

  int non_null_count() const;
  void validate() const;
};

Family parse_family(const std::string& s);
std::string to_string(Family f);

// Draw order from the scenario stream: factor directions, then design rows.
struct ScenarioInstance {
  CovarianceMatrix sigma;
  MatrixXd x;  // only for Family::DesignGram
};

// Row covariance K for design-gram scenarios.
CovarianceMatrix design_row_covariance(const ScenarioSpec& spec);

ScenarioInstance build_scenario(const ScenarioSpec& spec, Stream& rng);

// Coefficient vector with beta0 on the support. Draws the support last.
VectorXd draw_beta(const ScenarioSpec& spec, Stream& rng);

}  // namespace whiteout
