#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace q2sql {

// Seeded generator with fixed sampling rules, so outputs are stable across
// standard-library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // uniform in [lo, hi] inclusive
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
  }

  double uniform(double a, double b) {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return a + (b - a) * u;
  }

  bool bernoulli(double p) { return uniform(0.0, 1.0) < p; }

  template <typename T>
  const T& pick(const std::vector<T>& xs) {
    return xs[static_cast<size_t>(uniform_int(0, static_cast<int>(xs.size()) - 1))];
  }

  template <typename T>
  void shuffle(std::vector<T>& xs) {
    for (int i = static_cast<int>(xs.size()) - 1; i > 0; --i)
      std::swap(xs[static_cast<size_t>(i)], xs[static_cast<size_t>(uniform_int(0, i))]);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace q2sql
