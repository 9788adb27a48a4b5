#pragma once

#include <cstdint>
#include <initializer_list>

namespace mxl {

/// Stateless counter-based random stream. Every variate is a pure function
/// of (seed, key...), so results do not depend on iteration order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t bits(std::initializer_list<std::uint64_t> key) const noexcept;

  /// Uniform on the open interval (0, 1).
  double uniform(std::initializer_list<std::uint64_t> key) const noexcept;
  double uniform(std::initializer_list<std::uint64_t> key, double lo, double hi) const noexcept;
  double normal(std::initializer_list<std::uint64_t> key) const;
  /// Standard Gumbel via -ln(-ln u).
  double gumbel(std::initializer_list<std::uint64_t> key) const noexcept;
  bool bernoulli(std::initializer_list<std::uint64_t> key, double p) const noexcept;

  /// Derived stream for a sub-domain.
  CounterRng fork(std::uint64_t tag) const noexcept;

 private:
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace mxl
