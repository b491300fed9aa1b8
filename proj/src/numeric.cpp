#include "stablab/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <thread>
#include <utility>
#include <vector>

namespace stablab {

void ExactSum::add(double x) {
  std::size_t kept = 0;
  for (std::size_t k = 0; k < count_; ++k) {
    double y = partials_[k];
    if (std::abs(x) < std::abs(y)) std::swap(x, y);
    const double hi = x + y;
    const double lo = y - (hi - x);
    if (lo != 0.0) partials_[kept++] = lo;
    x = hi;
  }
  partials_[kept++] = x;
  count_ = kept;
}

double ExactSum::value() const {
  std::size_t n = count_;
  if (n == 0) return 0.0;
  double hi = partials_[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials_[--n];
    hi = x + y;
    const double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  // Round half to even across the remaining partials.
  if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) ||
                (lo > 0.0 && partials_[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    const double yr = x - hi;
    if (y == yr) hi = x;
  }
  return hi;
}

double exact_sum(std::span<const double> xs) {
  ExactSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

double exact_dot(std::span<const double> a, std::span<const double> b) {
  ExactSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
  return s.value();
}

double exact_dot(std::span<const double> w, std::span<const double> a,
                 std::span<const double> b) {
  ExactSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(w[i] * a[i] * b[i]);
  return s.value();
}

double max_abs(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::abs(x));
  return m;
}

namespace {
std::atomic<int> g_threads{1};
constexpr std::size_t kParallelThreshold = 1u << 16;
}  // namespace

void set_thread_count(int n) { g_threads = std::max(1, n); }
int thread_count() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(g_threads.load());
  if (workers <= 1 || n < kParallelThreshold) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(n, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&body, &errors, t, lo, hi] {
        try {
          for (std::size_t i = lo; i < hi; ++i) body(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  // Rethrow the error of the lowest chunk so the reported failure does not
  // depend on scheduling.
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Pcg32::Pcg32(std::uint64_t seed, std::uint64_t stream) {
  inc_ = (stream << 1u) | 1u;
  next_u32();
  state_ += seed;
  next_u32();
}

std::uint32_t Pcg32::next_u32() {
  const std::uint64_t old = state_;
  state_ = old * 6364136223846793005ULL + inc_;
  const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
  const auto rot = static_cast<std::uint32_t>(old >> 59u);
  return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
}

double Pcg32::uniform() {
  const std::uint64_t a = next_u32() >> 5;
  const std::uint64_t b = next_u32() >> 6;
  return (static_cast<double>(a) * 67108864.0 + static_cast<double>(b)) *
         (1.0 / 9007199254740992.0);
}

int Pcg32::integer(int lo, int hi) {
  const auto span = static_cast<std::uint32_t>(hi - lo + 1);
  // Rejection sampling keeps the draw unbiased.
  const std::uint32_t threshold = (0u - span) % span;
  for (;;) {
    const std::uint32_t r = next_u32();
    if (r >= threshold) return lo + static_cast<int>(r % span);
  }
}

}  // namespace stablab
