#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <vector>

namespace whiteout {

// Counter-based generator. The output at position i depends only on (key, i),
// so substreams keyed by (seed, replicate, method) are reproducible no matter
// how replicates are scheduled across threads.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t key = 0) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Child stream; does not advance this one.
  Stream substream(std::initializer_list<std::uint64_t> ids) const;

  std::uint64_t key() const { return key_; }

  double uniform();  // in (0, 1)
  double normal();
  void normal_fill(double* out, std::size_t n);
  double gamma(double shape);
  double beta(double a, double b);
  bool bernoulli(double p);
  std::uint64_t below(std::uint64_t n);  // uniform on {0, ..., n-1}
  std::int64_t geometric(double p);      // failures before first success

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t hash_ids(std::initializer_list<std::uint64_t> ids);

// Fisher-Yates on an index vector.
void shuffle(std::vector<int>& v, Stream& rng);

}  // namespace whiteout
