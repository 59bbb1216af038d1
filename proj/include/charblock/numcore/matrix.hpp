#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace charblock {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using MatF = Mat<float>;
using MatD = Mat<double>;

// Accumulator type for pooled means: float data accumulates in double.
template <typename Scalar>
using Acc = std::conditional_t<std::is_same_v<Scalar, float>, double, Scalar>;

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Deterministic seedable generator for init, sampling and shuffles.
// Cross-implementation bit-equality is not a goal; determinism per seed is.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  // Derived stream with a decorrelated seed (splitmix64 over seed + stream).
  Rng split(std::uint64_t stream) const {
    std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return Rng(z ^ (z >> 31));
  }

  template <typename Scalar>
  Mat<Scalar> normal(int rows, int cols, double stddev, double mean = 0.0) {
    std::normal_distribution<double> dist(mean, stddev);
    Mat<Scalar> m(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) m(r, c) = static_cast<Scalar>(dist(gen_));
    return m;
  }

  template <typename Scalar>
  Mat<Scalar> xavier(int fan_in, int fan_out) {
    const double std = std::sqrt(2.0 / (fan_in + fan_out));
    return normal<Scalar>(fan_in, fan_out, std);
  }

  template <typename Scalar>
  Mat<Scalar> uniform_mat(int rows, int cols, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Mat<Scalar> m(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) m(r, c) = static_cast<Scalar>(dist(gen_));
    return m;
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    std::uniform_int_distribution<int> dist(lo, hi);
    return dist(gen_);
  }

  double uniform() {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    return dist(gen_);
  }

  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) std::swap(p[i], p[uniform_int(0, i)]);
    return p;
  }

  std::mt19937_64& raw() { return gen_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace charblock
