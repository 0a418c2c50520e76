#include "whiteout/seqstep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "whiteout/error.hpp"

namespace whiteout {

void BinaryPValueSeq::validate() const {
  require(index.size() == p.size(), ErrorKind::Dimension, "p-value sequence: index/p length differ");
  require(non_null.empty() || non_null.size() == p.size(), ErrorKind::Dimension,
          "p-value sequence: truth flags length differs");
  for (double v : p)
    require(v == 0.5 || v == 1.0, ErrorKind::ParameterOutOfRange, "binary p-values must be 1/2 or 1");
}

std::vector<double> fdp_hat_path(const BinaryPValueSeq& seq) {
  seq.validate();
  require(seq.size() > 0, ErrorKind::ParameterOutOfRange, "empty p-value sequence");
  std::vector<double> path(seq.size());
  long ones = 0, halves = 0;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    if (seq.p[k] == 1.0)
      ++ones;
    else
      ++halves;
    path[k] = halves == 0 ? std::numeric_limits<double>::infinity()
                          : static_cast<double>(1 + ones) / static_cast<double>(halves);
  }
  return path;
}

SeqStepResult run_seqstep(const BinaryPValueSeq& seq, double alpha) {
  require(alpha > 0 && alpha < 1, ErrorKind::ParameterOutOfRange, "alpha must be in (0, 1)");
  SeqStepResult out;
  if (seq.size() == 0) return out;
  out.fdp_hat_path = fdp_hat_path(seq);
  for (std::size_t k = out.fdp_hat_path.size(); k > 0; --k) {
    if (out.fdp_hat_path[k - 1] <= alpha) {
      out.k_hat = static_cast<int>(k);
      break;
    }
  }
  for (int j = 0; j < out.k_hat; ++j)
    if (seq.p[j] == 0.5) out.rejections.push_back(seq.index[j]);
  return out;
}

std::optional<int> rejection_count_identity(int k_hat, int d, double alpha) {
  if (k_hat <= 0 || k_hat >= d) return std::nullopt;
  return static_cast<int>(std::ceil((1.0 + k_hat) / (1.0 + alpha)));
}

ThresholdResult knockoff_plus_threshold(const Eigen::VectorXd& w, double alpha, bool plus) {
  require(alpha > 0 && alpha < 1, ErrorKind::ParameterOutOfRange, "alpha must be in (0, 1)");
  const Eigen::Index d = w.size();
  std::vector<double> pos, neg;  // |W| for positive and negative entries
  for (Eigen::Index j = 0; j < d; ++j) {
    if (w(j) > 0) pos.push_back(w(j));
    if (w(j) < 0) neg.push_back(-w(j));
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  std::vector<double> cand(pos);
  cand.insert(cand.end(), neg.begin(), neg.end());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  ThresholdResult out{std::numeric_limits<double>::infinity(), {}};
  const double offset = plus ? 1.0 : 0.0;
  for (double t : cand) {
    auto n_pos = pos.end() - std::lower_bound(pos.begin(), pos.end(), t);
    auto n_neg = neg.end() - std::lower_bound(neg.begin(), neg.end(), t);
    if (n_pos == 0) continue;
    double fdp = (offset + static_cast<double>(n_neg)) / static_cast<double>(n_pos);
    if (fdp <= alpha) {
      out.threshold = t;
      break;
    }
  }
  if (std::isfinite(out.threshold))
    for (Eigen::Index j = 0; j < d; ++j)
      if (w(j) >= out.threshold) out.rejections.push_back(static_cast<int>(j));
  return out;
}

}  // namespace whiteout
