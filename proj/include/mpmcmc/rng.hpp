#pragma once

#include <cmath>
#include <cstdint>

namespace mpmcmc {

// SplitMix64 finalizer. Used both as the stream generator and as the
// key-derivation hash, so any tuple of integers yields a well-mixed,
// reproducible substream.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based random stream. Streams created from distinct key tuples
/// are independent for all practical purposes, and a stream's output
/// depends only on its key and the number of values drawn from it, never
/// on which thread draws them.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1]; safe as a log() argument.
  double next_double_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// One standard normal (Box-Muller, cosine branch).
  double next_gauss() {
    double a, b;
    next_gauss_pair(a, b);
    return a;
  }

  /// Two independent standard normals from one Box-Muller transform.
  void next_gauss_pair(double& a, double& b) {
    const double u1 = next_double_open();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    a = r * std::cos(t);
    b = r * std::sin(t);
  }

 private:
  std::uint64_t state_;
};

/// Roles a substream can play within one chain iteration. Distinct
/// purposes guarantee that e.g. candidate generation and the selection
/// draw never share randomness.
enum class Purpose : std::uint64_t {
  Candidates = 1,
  Latent = 2,
  Rotation = 3,
  Select = 4,
  Shadows = 5,
  Accept = 6,
  Init = 7,
  Dataset = 8,
  DatasetParam = 9,
  DatasetResponse = 10,
  Generic = 11,
};

inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b = 0, std::uint64_t c = 0,
                                std::uint64_t d = 0) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  h = mix64(h ^ d);
  return h;
}

/// Stream factory for one (chain, iteration) slot. Every candidate index
/// owns its own substream, so candidate-level parallelism cannot reorder
/// randomness.
class SubstreamContext {
 public:
  SubstreamContext(std::uint64_t seed, std::uint64_t chain, std::uint64_t iteration)
      : seed_(seed), chain_(chain), iteration_(iteration) {}

  RngStream stream(Purpose p, std::uint64_t sub = 0) const {
    return RngStream(derive_key(seed_, chain_, iteration_,
                                static_cast<std::uint64_t>(p), sub));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t chain_;
  std::uint64_t iteration_;
};

}  // namespace mpmcmc
