#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>

namespace monoflow {

inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Additive-recurrence (Kronecker) low-discrepancy sequence on [0,1)^dim.
// Deterministic for a given (dim, seed); the seed only shifts the start
// point, so two runs with the same seed enumerate the same points.
class LowDiscrepancy {
 public:
  LowDiscrepancy(int dim, uint64_t seed) : dim_(dim), alpha_(dim), state_(dim) {
    // irrational strides from square roots of the first primes
    static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
    uint64_t s = seed * 0x9e3779b97f4a7c15ULL + 0x243f6a8885a308d3ULL;
    for (int j = 0; j < dim; ++j) {
      double p = primes[j % 20] + 2.0 * (j / 20);
      alpha_(j) = std::sqrt(p) - std::floor(std::sqrt(p));
      state_(j) = static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
    }
  }

  Eigen::VectorXd next() {
    for (int j = 0; j < dim_; ++j) {
      state_(j) += alpha_(j);
      state_(j) -= std::floor(state_(j));
    }
    return state_;
  }

  int dim() const { return dim_; }

 private:
  int dim_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd state_;
};

}  // namespace monoflow
