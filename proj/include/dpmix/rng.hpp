#pragma once
// Deterministic random number generation.
//
// Every stochastic component in the library draws from this class so that a
// (seed, stream) pair fully determines behavior on any platform. The engine is
// std::mt19937_64 (its output sequence is pinned by the standard); all
// distribution transforms are implemented here by hand because the standard
// library's distribution classes are allowed to differ between implementations.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dpmix/common.hpp"

namespace dpmix {

// splitmix64 step; advances `state` and returns a well-mixed 64-bit value.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from (base, stream), e.g. one seed per
// benchmark cell or per sampler restart.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t s = base;
  std::uint64_t x = splitmix64(s);
  s = x ^ (stream * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL);
  return splitmix64(s);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  static Rng for_run(std::uint64_t global_seed, std::uint64_t run_index) {
    return Rng(derive_seed(global_seed, run_index));
  }

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), unbiased via rejection.
  std::uint64_t below(std::uint64_t n) {
    check_arg(n > 0, "Rng::below: n must be positive");
    const std::uint64_t max = ~0ULL;
    const std::uint64_t limit = max - max % n;
    std::uint64_t x;
    do { x = eng_(); } while (x >= limit);
    return x % n;
  }

  // Standard normal via the polar (Marsaglia) method; caches the spare deviate.
  double normal() {
    if (has_spare_) { has_spare_ = false; return spare_; }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Gamma(shape, 1) via Marsaglia–Tsang squeeze; shape < 1 handled by boosting.
  double gamma(double shape) {
    check_arg(shape > 0.0, "Rng::gamma: shape must be positive");
    if (shape < 1.0) {
      double u;
      do { u = uniform01(); } while (u == 0.0);
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Dirichlet via normalized gammas.
  std::vector<double> dirichlet(std::size_t dim, double concentration) {
    check_arg(dim >= 1, "Rng::dirichlet: dim must be >= 1");
    std::vector<double> out(dim);
    double total = 0.0;
    for (double& g : out) { g = gamma(concentration); total += g; }
    if (total <= 0.0 || !std::isfinite(total)) {
      // Numerically degenerate draw (possible only for extremely small
      // concentration); fall back to the uniform point of the simplex.
      for (double& g : out) g = 1.0 / static_cast<double>(dim);
      return out;
    }
    for (double& g : out) g /= total;
    return out;
  }

  // In-place Fisher–Yates shuffle.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Samples an index proportional to exp(logw[i]) by exact normalization and
  // inverse-CDF walk. All-(-inf) weight vectors are an input error.
  int categorical_from_logits(const std::vector<double>& logw) {
    check_arg(!logw.empty(), "categorical_from_logits: empty weights");
    double norm = logsumexp(logw);
    check_arg(norm != kNegInf, "categorical_from_logits: all weights are zero");
    double r = uniform01();
    double cum = 0.0;
    for (std::size_t i = 0; i < logw.size(); ++i) {
      cum += std::exp(logw[i] - norm);
      if (r < cum) return static_cast<int>(i);
    }
    return static_cast<int>(logw.size()) - 1;  // guard against rounding of the tail
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dpmix
