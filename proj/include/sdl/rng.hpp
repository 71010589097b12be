// sdl/rng.hpp

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "sdl/dense_matrix.hpp"

namespace sdl {

// Deterministic random source. std::mt19937_64 has a fully specified output
// sequence, and the mappings to doubles below avoid std::*_distribution whose
// results may differ between standard library implementations. Identical
// seeds therefore give identical streams on every build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), has_spare_(false) {}

  // Seed for replicate `index` of a sweep driven by this generator's seed.
  static std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return base + 0x9E3779B97F4A7C15ull * (index + 1);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the pair is cached, so draws come in a
  // reproducible order.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // One draw from a categorical distribution given probabilities that sum to
  // one (up to rounding); returns an index in [0, probs.size()).
  std::size_t categorical(const std::vector<double> &probs) {
    if (probs.empty()) throw std::invalid_argument("categorical: empty support");
    const double u = uniform();
    double cum = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
      if (probs[k] < 0.0)
        throw std::invalid_argument("categorical: negative probability");
      cum += probs[k];
      if (u < cum) return k;
    }
    return probs.size() - 1;
  }

  DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols,
                              double stddev = 1.0) {
    DenseMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = stddev * gaussian();
    return m;
  }

  DenseMatrix uniform_matrix(std::size_t rows, std::size_t cols, double lo,
                             double hi) {
    DenseMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_;
  double spare_ = 0.0;
};

}  // namespace sdl
