#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

namespace stablab {

// Correctly rounded floating-point summation (Shewchuk partials with a
// half-even final correction). The result depends only on the multiset of
// addends, never on their order, which makes every reduction in the library
// independent of node ordering and thread count.
class ExactSum {
 public:
  void add(double x);
  double value() const;

 private:
  std::array<double, 80> partials_{};
  std::size_t count_ = 0;
};

double exact_sum(std::span<const double> xs);
double exact_dot(std::span<const double> a, std::span<const double> b);
/// Σ w_i a_i b_i, each product rounded once and then summed exactly.
double exact_dot(std::span<const double> w, std::span<const double> a,
                 std::span<const double> b);
double max_abs(std::span<const double> xs);

// Worker count used by parallel_for. Results never depend on it.
void set_thread_count(int n);
int thread_count();

/// Runs body(i) for i in [0, n). Chunks are handed to worker threads only when
/// n is large enough to amortize the spawn.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// PCG32 (XSH-RR output on a 64-bit LCG state), the reference pcg32 stream.
class Pcg32 {
 public:
  Pcg32(std::uint64_t seed, std::uint64_t stream = 54u);
  std::uint32_t next_u32();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi].
  int integer(int lo, int hi);

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
};

}  // namespace stablab
