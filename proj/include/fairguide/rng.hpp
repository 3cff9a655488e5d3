#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "fairguide/common.hpp"

namespace fairguide {

// All randomness in a run flows from a single user seed. Component streams are
// derived as derive_seed(seed, tag, index) so that consumption in one
// component never shifts another. Tags in use: "autoencoder", "kmeans",
// "gumbel" (index = guide iteration), "random-add", "sbm", "split", "gcn",
// "louvain" (index = evaluation seed where applicable).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::uint64_t index = 0) {
  std::uint64_t h = fnv1a64(tag.data(), tag.size());
  return splitmix64(splitmix64(base ^ h) + index);
}

// mt19937_64 with fixed bit-to-double conversions. The std distributions are
// implementation-defined, so uniforms and normals are produced manually to
// keep outputs stable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in (0,1); never returns an exact endpoint.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    // Rejection sampling over the top multiple of n.
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Standard Gumbel: -log(-log(u)).
  double gumbel() { return -std::log(-std::log(uniform())); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fairguide
