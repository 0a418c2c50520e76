#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace whiteout {

// Binary p-values in testing order. p[i] is 0.5 or 1.0 for hypothesis index[i].
struct BinaryPValueSeq {
  std::vector<int> index;
  std::vector<double> p;
  std::vector<char> non_null;  // optional truth flags, same length when present

  std::size_t size() const { return p.size(); }
  void validate() const;
};

struct SeqStepResult {
  int k_hat = 0;
  std::vector<double> fdp_hat_path;  // +inf where no p = 1/2 seen yet
  std::vector<int> rejections;       // hypothesis indices
  int rejection_count() const { return static_cast<int>(rejections.size()); }
};

std::vector<double> fdp_hat_path(const BinaryPValueSeq& seq);

SeqStepResult run_seqstep(const BinaryPValueSeq& seq, double alpha);

// ceil((1 + k_hat) / (1 + alpha)); only valid for 0 < k_hat < d.
std::optional<int> rejection_count_identity(int k_hat, int d, double alpha);

struct ThresholdResult {
  double threshold;  // +inf when nothing qualifies
  std::vector<int> rejections;  // ascending index
};

// Knockoff+ by default; plus=false drops the 1 in the numerator (no guarantee).
ThresholdResult knockoff_plus_threshold(const Eigen::VectorXd& w, double alpha, bool plus = true);

}  // namespace whiteout
