#include "mxl/draws.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mxl/errors.hpp"
#include "mxl/random.hpp"

namespace mxl {
namespace {

constexpr std::array<std::uint32_t, 32> kPrimes = {
    2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31,  37,  41,  43,  47,  53,
    59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131,
};

// Acklam's rational approximation, relative error ~1.2e-9 before refinement.
double acklam(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  constexpr double p_high = 1.0 - p_low;

  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > p_high) {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double radical_inverse(std::uint64_t index, std::uint32_t base) {
  if (base < 2) throw InvalidBase("radical inverse base must be >= 2, got " + std::to_string(base));
  if (index == 0) throw DomainError("radical inverse index must be >= 1");

  // Exact integer digit reversal while the denominator fits; the final
  // division is then correctly rounded.
  std::uint64_t reversed = 0;
  std::uint64_t denom = 1;
  std::uint64_t rest = index;
  constexpr std::uint64_t limit = std::numeric_limits<std::uint64_t>::max();
  while (rest > 0 && denom <= limit / base) {
    reversed = reversed * base + rest % base;
    denom *= base;
    rest /= base;
  }
  double result = static_cast<double>(reversed) / static_cast<double>(denom);
  double scale = 1.0 / static_cast<double>(denom);
  while (rest > 0) {
    scale /= base;
    result += static_cast<double>(rest % base) * scale;
    rest /= base;
  }
  return result;
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double inv_normal_cdf(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw DomainError("normal quantile requires 0 < u < 1, got " + std::to_string(u));
  }
  if (u == 0.5) return 0.0;
  // 1 - u is exact for u > 0.5, so work on the lower tail only.
  if (u > 0.5) return -inv_normal_cdf(1.0 - u);
  double x = acklam(u);
  // One Halley step against erfc brings the error to ~machine precision.
  double e = normal_cdf(x) - u;
  double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  double step = e / pdf;
  return x - step / (1.0 + 0.5 * x * step);
}

std::span<const std::uint32_t> halton_primes() noexcept { return kPrimes; }

DrawSet::DrawSet(std::size_t n_respondents, std::size_t n_draws, std::size_t dims,
                 std::vector<double> values, DrawMeta meta)
    : n_respondents_(n_respondents),
      n_draws_(n_draws),
      dims_(dims),
      values_(std::move(values)),
      meta_(std::move(meta)) {
  if (values_.size() != n_respondents_ * n_draws_ * dims_) {
    throw DimensionMismatch("draw values do not match respondents x draws x dims");
  }
}

std::span<const double> DrawSet::respondent_block(std::size_t n) const {
  if (n >= n_respondents_) {
    throw DimensionMismatch("draw block requested for respondent " + std::to_string(n) +
                            " of " + std::to_string(n_respondents_));
  }
  const std::size_t block = n_draws_ * dims_;
  return std::span<const double>(values_).subspan(n * block, block);
}

DrawSet halton_normal_draws(std::size_t n_respondents, std::size_t n_draws, std::size_t dims,
                            std::uint64_t discard, std::optional<std::uint64_t> scramble_seed) {
  if (n_respondents == 0 || n_draws == 0) {
    throw InvalidOptions("halton draws need at least one respondent and one draw");
  }
  if (dims > kPrimes.size()) {
    throw TooManyDims("requested " + std::to_string(dims) + " Halton dimensions, prime table has " +
                      std::to_string(kPrimes.size()));
  }

  DrawMeta meta;
  meta.bases.assign(kPrimes.begin(), kPrimes.begin() + static_cast<std::ptrdiff_t>(dims));
  meta.discard = discard;
  meta.scramble_seed = scramble_seed;

  std::vector<double> shift(dims, 0.0);
  if (scramble_seed) {
    CounterRng rng(*scramble_seed);
    for (std::size_t k = 0; k < dims; ++k) shift[k] = rng.uniform({0x5C4A3B1EULL, k});
  }

  std::vector<double> values(n_respondents * n_draws * dims);
  for (std::size_t n = 0; n < n_respondents; ++n) {
    for (std::size_t r = 0; r < n_draws; ++r) {
      const std::uint64_t index = discard + n * n_draws + r + 1;
      for (std::size_t k = 0; k < dims; ++k) {
        double u = radical_inverse(index, kPrimes[k]);
        if (scramble_seed) {
          u += shift[k];
          if (u >= 1.0) u -= 1.0;
          if (u <= 0.0) u = 0x1.0p-53;
        }
        values[(n * n_draws + r) * dims + k] = inv_normal_cdf(u);
      }
    }
  }
  return DrawSet(n_respondents, n_draws, dims, std::move(values), std::move(meta));
}

}  // namespace mxl
