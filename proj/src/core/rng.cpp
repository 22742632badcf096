#include "nof1/rng.hpp"

#include <boost/math/distributions/normal.hpp>

namespace nof1 {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t RandomStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGoldenGamma);
}

double RandomStream::uniform() {
  // (k + 0.5) / 2^53 never hits 0 or 1.
  const std::uint64_t k = next_u64() >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  static const boost::math::normal_distribution<double> standard{};
  return boost::math::quantile(standard, uniform());
}

std::uint64_t RandomStream::below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Largest multiple of bound representable; reject draws above it.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

std::uint64_t SeedSpec::key(std::string_view label, std::uint64_t a,
                            std::uint64_t b) const {
  std::uint64_t k = mix64(base_seed ^ fnv1a(label));
  k = mix64(k + a * kGoldenGamma + 1);
  k = mix64(k + b * kGoldenGamma + 2);
  return k;
}

}  // namespace nof1
