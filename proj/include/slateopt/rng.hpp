#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <string_view>

#include "slateopt/errors.hpp"

namespace slateopt {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seeded generator with hand-rolled distributions so that draws depend only
// on the mt19937_64 stream, never on standard-library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Independent stream keyed by (seed, tag, index); parallel and serial
  // traversals that hand out substreams per key agree bit-for-bit.
  static Rng substream(std::uint64_t seed, std::string_view tag,
                       std::uint64_t index = 0) {
    std::uint64_t s = seed ^ fnv1a64(tag);
    s ^= 0x6a09e667f3bcc909ULL + index * 0x9e3779b97f4a7c15ULL;
    splitmix64(s);
    return Rng(splitmix64(s));
  }

  std::uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Draw an index from an (unnormalized is fine) non-negative weight vector.
  int sample_categorical(const Eigen::VectorXd& weights) {
    double total = weights.sum();
    if (!(total > 0.0)) throw ArgumentError("sample_categorical: weights sum to zero");
    double u = uniform() * total;
    double acc = 0.0;
    for (int i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    for (int i = static_cast<int>(weights.size()) - 1; i >= 0; --i) {
      if (weights[i] > 0.0) return i;
    }
    return static_cast<int>(weights.size()) - 1;
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace slateopt
