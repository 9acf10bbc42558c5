#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cogsim {

/// Deterministic random stream: a seeded mt19937_64 engine plus hand-rolled
/// distributions. The standard library's distribution objects are
/// implementation-defined, so uniform/normal/gamma are generated here from
/// raw engine output to keep logs and golden files portable.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Substream keyed by (seed, label). Streams with distinct labels are
  /// statistically independent; the mapping is stable across platforms.
  static RngStream derive(std::uint64_t seed, std::string_view label);

  /// Mixes a mission/batch index into a seed (splitmix64 chain).
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform01();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);

  /// Gaussian via Box-Muller; pairs are cached so draw counts stay cheap.
  double normal(double mean = 0.0, double stddev = 1.0);

  /// Gamma(shape, 1) via Marsaglia-Tsang, valid for any shape > 0.
  double gamma(double shape);

  /// Integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cogsim
