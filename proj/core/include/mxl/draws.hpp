#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mxl {

/// Base-`base` radical inverse of `index` (digits mirrored about the radix
/// point). Requires index >= 1; throws InvalidBase for base < 2.
double radical_inverse(std::uint64_t index, std::uint32_t base);

/// Standard normal quantile. Throws DomainError unless 0 < u < 1.
double inv_normal_cdf(double u);

/// Standard normal CDF.
double normal_cdf(double x) noexcept;

/// Prime bases for Halton dimensions, in order.
std::span<const std::uint32_t> halton_primes() noexcept;

inline constexpr std::uint64_t kDefaultDiscard = 10;
inline constexpr std::size_t kDefaultDraws = 200;

struct DrawMeta {
  std::vector<std::uint32_t> bases;
  std::uint64_t discard = kDefaultDiscard;
  std::optional<std::uint64_t> scramble_seed;

  bool operator==(const DrawMeta&) const = default;
};

/// Standard-normal quasi-random draws, one R x K block per respondent.
///
/// Blocks are addressed by respondent only: every situation of a respondent
/// sees the same draws.
class DrawSet {
 public:
  DrawSet(std::size_t n_respondents, std::size_t n_draws, std::size_t dims,
          std::vector<double> values, DrawMeta meta);

  std::size_t respondents() const noexcept { return n_respondents_; }
  std::size_t draws() const noexcept { return n_draws_; }
  std::size_t dims() const noexcept { return dims_; }
  const DrawMeta& meta() const noexcept { return meta_; }

  /// Row-major [draw][dim] block of respondent n.
  std::span<const double> respondent_block(std::size_t n) const;

  bool operator==(const DrawSet&) const = default;

 private:
  std::size_t n_respondents_;
  std::size_t n_draws_;
  std::size_t dims_;
  std::vector<double> values_;
  DrawMeta meta_;
};

/// Halton draws mapped through the normal quantile. Dimension k uses the
/// k-th prime; respondent n takes sequence indices
/// discard + n*R + 1 ... discard + (n+1)*R. With a scramble seed, each
/// dimension gets a Cranley-Patterson random shift.
DrawSet halton_normal_draws(std::size_t n_respondents, std::size_t n_draws, std::size_t dims,
                            std::uint64_t discard = kDefaultDiscard,
                            std::optional<std::uint64_t> scramble_seed = std::nullopt);

}  // namespace mxl
