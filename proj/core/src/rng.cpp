#include "whiteout/rng.hpp"

#include <cmath>

namespace whiteout {

std::uint64_t hash_ids(std::initializer_list<std::uint64_t> ids) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (auto id : ids) h = Stream::mix(h ^ Stream::mix(id + 0x9e3779b97f4a7c15ULL));
  return h;
}

Stream Stream::substream(std::initializer_list<std::uint64_t> ids) const {
  std::uint64_t h = key_;
  for (auto id : ids) h = mix(h ^ mix(id + 0x632be59bd9b4e019ULL));
  return Stream(h);
}

double Stream::uniform() {
  // 53 random bits, shifted off zero.
  return ((*this)() >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

double Stream::normal() {
  std::normal_distribution<double> nd;
  return nd(*this);
}

void Stream::normal_fill(double* out, std::size_t n) {
  std::normal_distribution<double> nd;
  for (std::size_t i = 0; i < n; ++i) out[i] = nd(*this);
}

double Stream::gamma(double shape) {
  std::gamma_distribution<double> gd(shape, 1.0);
  return gd(*this);
}

double Stream::beta(double a, double b) {
  double x = gamma(a);
  double y = gamma(b);
  return x / (x + y);
}

bool Stream::bernoulli(double p) { return uniform() < p; }

std::uint64_t Stream::below(std::uint64_t n) {
  std::uniform_int_distribution<std::uint64_t> ud(0, n - 1);
  return ud(*this);
}

std::int64_t Stream::geometric(double p) {
  if (p >= 1.0) return 0;
  return static_cast<std::int64_t>(std::floor(std::log(uniform()) / std::log1p(-p)));
}

void shuffle(std::vector<int>& v, Stream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = rng.below(i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace whiteout
