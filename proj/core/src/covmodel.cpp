#include "whiteout/covmodel.hpp"

#include <algorithm>
#include <cmath>

#include "whiteout/error.hpp"
#include "whiteout/io.hpp"

namespace whiteout {

EigenDecomposition eigendecompose(const MatrixXd& m) {
  require(m.rows() == m.cols(), ErrorKind::Dimension, "eigendecompose: matrix not square");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
  if (es.info() != Eigen::Success) fail(ErrorKind::Numerical, "eigensolver did not converge");
  const Eigen::Index d = m.rows();
  EigenDecomposition out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::Index imax;
    out.vectors.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.vectors(imax, j) < 0) out.vectors.col(j) *= -1.0;
  }
  return out;
}

CovarianceMatrix::CovarianceMatrix(MatrixXd entries) {
  require(entries.rows() == entries.cols() && entries.rows() >= 1, ErrorKind::Dimension,
          "covariance matrix must be square and non-empty");
  require(entries.allFinite(), ErrorKind::ParameterOutOfRange, "covariance has non-finite entries");
  double scale = entries.cwiseAbs().maxCoeff();
  double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-10 * scale, ErrorKind::ParameterOutOfRange, "covariance is not symmetric");
  // Clean up rounding-level asymmetry so downstream solvers see exact symmetry.
  MatrixXd sym = 0.5 * (entries + entries.transpose());
  auto eig = eigendecompose(sym);
  double lmax = eig.values(0);
  double lmin = eig.values(eig.values.size() - 1);
  require(lmax > 0 && lmin >= -1e-8 * lmax, ErrorKind::ParameterOutOfRange,
          "covariance is not positive semidefinite (min eigenvalue " + format_double(lmin) + ")");
  impl_ = std::make_shared<const Impl>(Impl{std::move(sym), std::move(eig)});
}

CovarianceMatrix make_equicorrelated(int d, double rho) {
  require(d >= 1, ErrorKind::ParameterOutOfRange, "d must be >= 1");
  double lo = d > 1 ? -1.0 / (d - 1) : -1.0;
  require(rho > lo && rho < 1.0, ErrorKind::ParameterOutOfRange,
          "rho outside (-1/(d-1), 1): not PSD");
  MatrixXd m = MatrixXd::Constant(d, d, rho);
  m.diagonal().setOnes();
  return CovarianceMatrix(std::move(m));
}

CovarianceMatrix make_mcc(int d, int m, int m0) {
  require(d >= 1 && m >= 1 && m0 >= 1, ErrorKind::ParameterOutOfRange, "mcc needs d, m, m0 >= 1");
  return make_equicorrelated(d, static_cast<double>(m) / (m0 + m));
}

MatrixXd to_correlation(const MatrixXd& m) {
  VectorXd s = m.diagonal().cwiseSqrt().cwiseInverse();
  MatrixXd r = s.asDiagonal() * m * s.asDiagonal();
  r = 0.5 * (r + r.transpose());
  r.diagonal().setOnes();
  return r;
}

std::vector<VectorXd> sample_sphere_directions(int d, int k, Stream& rng) {
  std::vector<VectorXd> us;
  for (int l = 0; l < k; ++l) {
    VectorXd u(d);
    rng.normal_fill(u.data(), d);
    us.push_back(u / u.norm());
  }
  return us;
}

CovarianceMatrix make_factor(int d, int k, double lambda, bool invert, Stream& rng) {
  require(d >= 1 && k >= 1, ErrorKind::ParameterOutOfRange, "factor model needs d, k >= 1");
  require(lambda >= 0, ErrorKind::ParameterOutOfRange, "factor strength must be >= 0");
  MatrixXd kmat = MatrixXd::Identity(d, d);
  for (const auto& u : sample_sphere_directions(d, k, rng)) kmat += lambda * u * u.transpose();
  if (invert) {
    // Factor structure on K^{-1}: normalize it, invert, normalize again.
    MatrixXd kinv = to_correlation(kmat);
    kmat = kinv.llt().solve(MatrixXd::Identity(d, d));
  }
  return CovarianceMatrix(to_correlation(kmat));
}

DesignGram make_design_gram(int n, const CovarianceMatrix& k, Stream& rng) {
  const int d = k.dim();
  require(n >= 2 * d, ErrorKind::Dimension, "design needs n >= 2d");
  // K^{1/2} from the cached eigendecomposition (handles singular K).
  const auto& e = k.eigen();
  MatrixXd root = e.vectors * e.values.cwiseMax(0.0).cwiseSqrt().asDiagonal();
  for (int attempt = 0; attempt < 2; ++attempt) {
    MatrixXd z(n, d);
    rng.normal_fill(z.data(), static_cast<std::size_t>(n) * d);
    MatrixXd x = z * root.transpose();
    VectorXd norms = x.colwise().norm();
    if ((norms.array() <= 0).any()) continue;
    x = x * norms.cwiseInverse().asDiagonal();
    MatrixXd g = x.transpose() * x;
    Eigen::LLT<MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) continue;
    MatrixXd sigma = llt.solve(MatrixXd::Identity(d, d));
    if (!sigma.allFinite()) continue;
    return DesignGram{std::move(x), CovarianceMatrix(0.5 * (sigma + sigma.transpose()))};
  }
  fail(ErrorKind::SingularMatrix, "design draw is rank deficient twice");
}

double leading_eigvec_cdf(const EigenDecomposition& decomp, double c) {
  require(c >= 0, ErrorKind::ParameterOutOfRange, "c must be >= 0");
  const auto u = decomp.vectors.col(0);
  const double cut = c / std::sqrt(static_cast<double>(u.size()));
  long count = 0;
  for (Eigen::Index j = 0; j < u.size(); ++j)
    if (std::abs(u(j)) <= cut) ++count;
  return static_cast<double>(count) / u.size();
}

int ScenarioSpec::non_null_count() const {
  if (support == Support::Fixed) return static_cast<int>(support_indices.size());
  if (d1 > 0) return d1;
  return static_cast<int>(std::lround(pi1 * d));
}

void ScenarioSpec::validate() const {
  require(d >= 1, ErrorKind::ParameterOutOfRange, "d must be >= 1");
  require(sigma2 > 0, ErrorKind::ParameterOutOfRange, "sigma2 must be > 0");
  int s = non_null_count();
  require(s >= 0 && s <= d, ErrorKind::ParameterOutOfRange, "non-null count outside [0, d]");
  if (family == Family::Equicorrelated) {
    double lo = d > 1 ? -1.0 / (d - 1) : -1.0;
    require(rho > lo && rho < 1, ErrorKind::ParameterOutOfRange, "rho outside (-1/(d-1), 1)");
  }
  if (family == Family::DesignGram) {
    require(n >= 2 * d, ErrorKind::Dimension, "design-gram needs n >= 2d");
  }
  for (int j : support_indices)
    require(j >= 0 && j < d, ErrorKind::ParameterOutOfRange, "support index out of range");
}

Family parse_family(const std::string& s) {
  if (s == "equicorrelated") return Family::Equicorrelated;
  if (s == "mcc") return Family::Mcc;
  if (s == "factor") return Family::Factor;
  if (s == "inverse-factor") return Family::InverseFactor;
  if (s == "design-gram") return Family::DesignGram;
  if (s == "identity") return Family::Identity;
  if (s == "user-file") return Family::UserFile;
  fail(ErrorKind::ParameterOutOfRange, "unknown covariance family: " + s);
}

std::string to_string(Family f) {
  switch (f) {
    case Family::Equicorrelated: return "equicorrelated";
    case Family::Mcc: return "mcc";
    case Family::Factor: return "factor";
    case Family::InverseFactor: return "inverse-factor";
    case Family::DesignGram: return "design-gram";
    case Family::Identity: return "identity";
    case Family::UserFile: return "user-file";
  }
  return "?";
}

DesignCov parse_design_cov(const std::string& s) {
  if (s == "identity") return DesignCov::Identity;
  if (s == "equicorrelated") return DesignCov::Equicorrelated;
  if (s == "inverse-equicorrelated") return DesignCov::InverseEquicorrelated;
  fail(ErrorKind::ParameterOutOfRange, "unknown design covariance: " + s);
}

std::string to_string(DesignCov c) {
  switch (c) {
    case DesignCov::Identity: return "identity";
    case DesignCov::Equicorrelated: return "equicorrelated";
    case DesignCov::InverseEquicorrelated: return "inverse-equicorrelated";
  }
  return "?";
}

namespace {

CovarianceMatrix inverse_equicorrelated(int d, double rho) {
  MatrixXd kinv = make_equicorrelated(d, rho).matrix();
  MatrixXd k = kinv.llt().solve(MatrixXd::Identity(d, d));
  return CovarianceMatrix(0.5 * (k + k.transpose()));
}

}  // namespace

CovarianceMatrix design_row_covariance(const ScenarioSpec& spec) {
  switch (spec.design_cov) {
    case DesignCov::Equicorrelated: return make_equicorrelated(spec.d, spec.rho);
    case DesignCov::InverseEquicorrelated: return inverse_equicorrelated(spec.d, spec.rho);
    case DesignCov::Identity: break;
  }
  return CovarianceMatrix(MatrixXd::Identity(spec.d, spec.d));
}

ScenarioInstance build_scenario(const ScenarioSpec& spec, Stream& rng) {
  spec.validate();
  switch (spec.family) {
    case Family::Equicorrelated: return {make_equicorrelated(spec.d, spec.rho), {}};
    case Family::Mcc: return {make_mcc(spec.d, spec.m, spec.m0), {}};
    case Family::Factor: return {make_factor(spec.d, spec.k, spec.lambda, false, rng), {}};
    case Family::InverseFactor: return {make_factor(spec.d, spec.k, spec.lambda, true, rng), {}};
    case Family::Identity: return {CovarianceMatrix(MatrixXd::Identity(spec.d, spec.d)), {}};
    case Family::UserFile: {
      CovarianceMatrix s(read_matrix_csv(spec.cov_path));
      require(s.dim() == spec.d, ErrorKind::Dimension, "covariance file dimension != d");
      return {s, {}};
    }
    case Family::DesignGram: {
      auto dg = make_design_gram(spec.n, design_row_covariance(spec), rng);
      return {dg.sigma, std::move(dg.x)};
    }
  }
  fail(ErrorKind::ParameterOutOfRange, "unhandled family");
}

VectorXd draw_beta(const ScenarioSpec& spec, Stream& rng) {
  VectorXd beta = VectorXd::Zero(spec.d);
  if (spec.support == Support::Fixed) {
    for (int j : spec.support_indices) beta(j) = spec.beta0;
    return beta;
  }
  int s = spec.non_null_count();
  std::vector<int> idx(spec.d);
  for (int j = 0; j < spec.d; ++j) idx[j] = j;
  // Partial Fisher-Yates: first s slots are a uniform random subset.
  for (int i = 0; i < s; ++i) {
    int j = i + static_cast<int>(rng.below(spec.d - i));
    std::swap(idx[i], idx[j]);
    beta(idx[i]) = spec.beta0;
  }
  return beta;
}

}  // namespace whiteout
