#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace nof1 {

/// Counter-based random stream.
///
/// Draw k of a stream is a pure function of (key, k): a SplitMix64 finalizer
/// applied to key + k * golden-gamma. Streams with different keys are
/// independent for practical purposes, and nothing depends on the standard
/// library's distribution implementations, so a seed reproduces the same
/// numbers on every platform that has IEEE doubles.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform();

  /// Standard normal via inverse CDF of one uniform draw.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, bound), rejection-sampled (no modulo bias).
  std::uint64_t below(std::uint64_t bound);

  /// Fisher-Yates shuffle driven by below().
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z);

/// Base seed plus labelled substreams. Labels are hashed (FNV-1a) so the
/// mapping from (label, indices) to stream keys is stable across builds.
struct SeedSpec {
  std::uint64_t base_seed = 20220510;

  std::uint64_t key(std::string_view label, std::uint64_t a = 0,
                    std::uint64_t b = 0) const;
  RandomStream stream(std::string_view label, std::uint64_t a = 0,
                      std::uint64_t b = 0) const {
    return RandomStream(key(label, a, b));
  }
  /// Child spec whose base is a derived key; used to hand a worker its own
  /// seed space (e.g. dataset h of a replication).
  SeedSpec child(std::string_view label, std::uint64_t a = 0,
                 std::uint64_t b = 0) const {
    return SeedSpec{key(label, a, b)};
  }
};

}  // namespace nof1
