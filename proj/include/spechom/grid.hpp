// Periodic voxel grid on the unit torus and its discrete frequency set.
//
// A grid with n points per axis samples the torus [-1/2, 1/2)^d at
// x_j = (j - n/2) / n, so the cell center x = 0 is always a grid point.
// Discrete frequencies are xi = 2 pi k with integer k_j in [-n/2, n/2);
// the plane k_j = -n/2 (array index n/2) is the unpaired Nyquist plane,
// which every odd-in-xi operator zeroes.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "spechom/tensor.hpp"

namespace spechom {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct GridSpec {
  int d;
  int n;

  GridSpec(int dim, int points) : d(dim), n(points) {
    check_dim(dim);
    if (points < 2 || points % 2 != 0)
      throw std::invalid_argument("grid resolution must be even and at least 2");
    // Guard the total point count before any allocation can overflow.
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) {
      if (total > (std::size_t{1} << 30) / static_cast<std::size_t>(points))
        throw std::invalid_argument("grid resolution exceeds the supported memory budget");
      total *= static_cast<std::size_t>(points);
    }
  }

  std::size_t num_points() const {
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(n);
    return total;
  }

  bool operator==(const GridSpec& o) const { return d == o.d && n == o.n; }

  /// Coordinate of axis index j in [-1/2, 1/2).
  double coordinate(int j) const { return (j - n / 2) / static_cast<double>(n); }
};

/// Signed integer frequency of axis index i: k in [-n/2, n/2).
inline int index_to_k(int i, int n) { return i < n / 2 ? i : i - n; }

/// The unpaired highest frequency plane k = -n/2 sits at array index n/2.
inline bool is_nyquist_index(int i, int n) { return i == n / 2; }

/// Per-point frequency data for one flattened row-major grid index.
struct FrequencyIndex {
  int d = 0;
  std::array<int, kMaxDim> k{};
  std::array<double, kMaxDim> xi{};
  bool zero = true;
  bool nyquist = false;

  double xi_norm2() const {
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += xi[a] * xi[a];
    return s;
  }
};

inline FrequencyIndex frequency_index(const GridSpec& g, std::size_t flat) {
  FrequencyIndex f;
  f.d = g.d;
  std::size_t rest = flat;
  for (int a = g.d - 1; a >= 0; --a) {
    const int idx = static_cast<int>(rest % static_cast<std::size_t>(g.n));
    rest /= static_cast<std::size_t>(g.n);
    f.k[a] = index_to_k(idx, g.n);
    f.xi[a] = kTwoPi * f.k[a];
    if (f.k[a] != 0) f.zero = false;
    if (is_nyquist_index(idx, g.n)) f.nyquist = true;
  }
  return f;
}

/// Visit every grid point with its frequency data. Row-major order, so the
/// flat index matches field storage.
template <typename Fn>
inline void for_each_frequency(const GridSpec& g, Fn&& fn) {
  const std::size_t total = g.num_points();
  for (std::size_t p = 0; p < total; ++p) fn(p, frequency_index(g, p));
}

/// Mean frequency magnitude over all nonzero frequencies; the scale used to
/// normalize equilibrium residuals in Fourier space.
inline double mean_frequency_magnitude(const GridSpec& g) {
  double sum = 0.0;
  std::size_t count = 0;
  for_each_frequency(g, [&](std::size_t, const FrequencyIndex& f) {
    if (f.zero) return;
    sum += std::sqrt(f.xi_norm2());
    ++count;
  });
  return sum / static_cast<double>(count);
}

}  // namespace spechom
