#include "mxl/random.hpp"

#include <cmath>

#include "mxl/draws.hpp"

namespace mxl {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t CounterRng::bits(std::initializer_list<std::uint64_t> key) const noexcept {
  std::uint64_t h = splitmix64(seed_);
  std::uint64_t i = 0;
  for (auto k : key) {
    h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ULL * ++i));
  }
  return h;
}

double CounterRng::uniform(std::initializer_list<std::uint64_t> key) const noexcept {
  // 53 random mantissa bits, centred in their cell so 0 and 1 never occur
  return (static_cast<double>(bits(key) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::uniform(std::initializer_list<std::uint64_t> key, double lo,
                           double hi) const noexcept {
  return lo + (hi - lo) * uniform(key);
}

double CounterRng::normal(std::initializer_list<std::uint64_t> key) const {
  return inv_normal_cdf(uniform(key));
}

double CounterRng::gumbel(std::initializer_list<std::uint64_t> key) const noexcept {
  return -std::log(-std::log(uniform(key)));
}

bool CounterRng::bernoulli(std::initializer_list<std::uint64_t> key, double p) const noexcept {
  return uniform(key) < p;
}

CounterRng CounterRng::fork(std::uint64_t tag) const noexcept {
  return CounterRng(splitmix64(seed_ ^ splitmix64(tag ^ 0xD1B54A32D192ED03ULL)));
}

}  // namespace mxl
