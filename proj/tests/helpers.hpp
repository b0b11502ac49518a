#pragma once

// Shared test utilities: deterministic random fields, analytic trigonometric
// displacement/strain pairs, a dense assembly of the strain operator on tiny
// grids with a direct solve, and the laminate closed forms.

#include <spechom/spechom.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace testutil {

using spechom::GridSpec;
using spechom::IsotropicMaterial;
using spechom::Representation;
using spechom::StiffnessField;
using spechom::SymTensor2;
using spechom::TensorField;

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Real-space field with independent uniform(-1,1) entries per component.
inline TensorField random_real_field(const GridSpec& grid, int order, std::uint64_t seed) {
  TensorField f(grid, order, Representation::real);
  auto rng = make_rng(seed);
  for (std::size_t c = 0; c < f.num_components(); ++c)
    for (std::size_t p = 0; p < f.num_points(); ++p)
      f.set_real(c, p, uniform(rng, -1.0, 1.0));
  return f;
}

// Random order-2 field made pointwise symmetric.
inline TensorField random_symmetric_field(const GridSpec& grid, std::uint64_t seed) {
  TensorField f = random_real_field(grid, 2, seed);
  const int d = grid.d;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const std::size_t lo = static_cast<std::size_t>(i) * d + j;
      const std::size_t hi = static_cast<std::size_t>(j) * d + i;
      for (std::size_t p = 0; p < f.num_points(); ++p) {
        const double v = 0.5 * (f.real_at(lo, p) + f.real_at(hi, p));
        f.set_real(lo, p, v);
        f.set_real(hi, p, v);
      }
    }
  return f;
}

// RMS of the componentwise difference divided by the RMS of b (real parts).
inline double rel_l2_diff(const TensorField& a, const TensorField& b) {
  if (a.num_components() != b.num_components() || a.num_points() != b.num_points())
    throw std::invalid_argument("rel_l2_diff: shape mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < a.num_components(); ++c)
    for (std::size_t p = 0; p < a.num_points(); ++p) {
      const std::complex<double> da = a.at(c, p) - b.at(c, p);
      num += std::norm(da);
      den += std::norm(b.at(c, p));
    }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

inline double max_abs_real(const TensorField& f) {
  double m = 0.0;
  for (std::size_t c = 0; c < f.num_components(); ++c)
    for (std::size_t p = 0; p < f.num_points(); ++p)
      m = std::max(m, std::abs(f.real_at(c, p)));
  return m;
}

// A sum of low-frequency harmonics with analytically known symmetric gradient.
// Samples live at x_j = j/n per axis, the transform's natural points, so the
// spectral derivative of the sampled field reproduces the analytic one exactly
// (all modes stay strictly below Nyquist).
struct TrigDisplacement {
  struct Mode {
    std::array<int, spechom::kMaxDim> k{};
    std::array<double, spechom::kMaxDim> a{};  // cosine amplitudes per component
    std::array<double, spechom::kMaxDim> b{};  // sine amplitudes per component
  };
  int d = 2;
  std::vector<Mode> modes;

  static TrigDisplacement random(const GridSpec& grid, int num_modes, std::uint64_t seed) {
    TrigDisplacement t;
    t.d = grid.d;
    auto rng = make_rng(seed);
    const int kmax = std::min(3, grid.n / 2 - 1);
    std::uniform_int_distribution<int> kdist(-kmax, kmax);
    while (static_cast<int>(t.modes.size()) < num_modes) {
      Mode m;
      bool zero = true;
      for (int j = 0; j < t.d; ++j) {
        m.k[j] = kdist(rng);
        if (m.k[j] != 0) zero = false;
      }
      if (zero) continue;  // the mean carries no strain, skip it
      for (int i = 0; i < t.d; ++i) {
        m.a[i] = uniform(rng, -1.0, 1.0);
        m.b[i] = uniform(rng, -1.0, 1.0);
      }
      t.modes.push_back(m);
    }
    return t;
  }

  double phase(const GridSpec& grid, const std::array<int, spechom::kMaxDim>& k,
               std::size_t p) const {
    double s = 0.0;
    std::size_t rem = p;
    // row-major point index: last axis fastest
    for (int j = d - 1; j >= 0; --j) {
      const int idx = static_cast<int>(rem % grid.n);
      rem /= grid.n;
      s += spechom::kTwoPi * k[j] * (static_cast<double>(idx) / grid.n);
    }
    return s;
  }

  TensorField displacement(const GridSpec& grid) const {
    TensorField u(grid, 1, Representation::real);
    for (std::size_t p = 0; p < u.num_points(); ++p)
      for (int i = 0; i < d; ++i) {
        double v = 0.0;
        for (const Mode& m : modes) {
          const double ph = phase(grid, m.k, p);
          v += m.a[i] * std::cos(ph) + m.b[i] * std::sin(ph);
        }
        u.set_real(static_cast<std::size_t>(i), p, v);
      }
    return u;
  }

  // epsilon_il = sym(d_l u_i); d_l of cos(ph) is -2*pi*k_l*sin(ph).
  TensorField strain(const GridSpec& grid) const {
    TensorField e(grid, 2, Representation::real);
    for (std::size_t p = 0; p < e.num_points(); ++p) {
      for (int i = 0; i < d; ++i)
        for (int l = 0; l < d; ++l) {
          double g = 0.0;
          for (const Mode& m : modes) {
            const double ph = phase(grid, m.k, p);
            const double w = spechom::kTwoPi * m.k[l];
            g += -m.a[i] * w * std::sin(ph) + m.b[i] * w * std::cos(ph);
          }
          const std::size_t c = static_cast<std::size_t>(i) * d + l;
          e.set_real(c, p, e.real_at(c, p) + 0.5 * g);
          const std::size_t ct = static_cast<std::size_t>(l) * d + i;
          e.set_real(ct, p, e.real_at(ct, p) + 0.5 * g);
        }
    }
    return e;
  }
};

// Dense Gaussian elimination with partial pivoting; a (rows x rows) row-major.
inline std::vector<double> gauss_solve(std::vector<double> a, std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  if (a.size() != n * n) throw std::invalid_argument("gauss_solve: shape mismatch");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-300) throw std::runtime_error("gauss_solve: singular");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      std::swap(rhs[piv], rhs[col]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] * inv;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t ri = n; ri-- > 0;) {
    double s = rhs[ri];
    for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri * n + c] * x[c];
    x[ri] = s / a[ri * n + ri];
  }
  return x;
}

// Independent symmetric-component coordinates for the strain operator: the
// operator preserves pointwise symmetry, so a basis over the d*(d+1)/2
// distinct components per point spans its domain.
inline std::vector<std::pair<int, int>> sym_pairs(int d) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) out.emplace_back(i, j);
  return out;
}

inline std::vector<double> field_to_sym_vector(const TensorField& f) {
  const int d = f.grid().d;
  const auto pairs = sym_pairs(d);
  std::vector<double> v(pairs.size() * f.num_points());
  std::size_t idx = 0;
  for (const auto& [i, j] : pairs) {
    const std::size_t c = static_cast<std::size_t>(i) * d + j;
    for (std::size_t p = 0; p < f.num_points(); ++p) v[idx++] = f.real_at(c, p);
  }
  return v;
}

inline TensorField sym_vector_to_field(const GridSpec& grid, const std::vector<double>& v) {
  TensorField f(grid, 2, Representation::real);
  const auto pairs = sym_pairs(grid.d);
  std::size_t idx = 0;
  for (const auto& [i, j] : pairs) {
    for (std::size_t p = 0; p < f.num_points(); ++p) {
      const double x = v[idx++];
      f.set_real(static_cast<std::size_t>(i) * grid.d + j, p, x);
      f.set_real(static_cast<std::size_t>(j) * grid.d + i, p, x);
    }
  }
  return f;
}

// Column-by-column dense assembly of eps -> eps + Green(dC : eps).
inline std::vector<double> assemble_dense_operator(const StiffnessField& c,
                                                   const spechom::ReferenceMaterial& ref) {
  const GridSpec grid = c.grid();
  const auto pairs = sym_pairs(grid.d);
  const std::size_t n = pairs.size() * grid.num_points();
  std::vector<double> a(n * n);
  std::vector<double> unit(n, 0.0);
  for (std::size_t col = 0; col < n; ++col) {
    unit[col] = 1.0;
    TensorField e = sym_vector_to_field(grid, unit);
    unit[col] = 0.0;
    TensorField ae = spechom::lippmann_schwinger_operator(c, ref, e);
    const std::vector<double> av = field_to_sym_vector(ae);
    for (std::size_t r = 0; r < n; ++r) a[r * n + col] = av[r];
  }
  return a;
}

// Two-phase laminate closed forms under mean strain E11 * e1 x e1 with layer
// normal along the first axis: sigma11 is uniform at the harmonic mean of the
// p-wave modulus, and sigma22 follows from lambda(x) * eps11(x).
struct LaminateOracle {
  double sigma11 = 0.0;
  double sigma22 = 0.0;
};

inline LaminateOracle laminate_closed_form(const IsotropicMaterial& a,
                                           const IsotropicMaterial& b, double fraction_a,
                                           double e11) {
  const double pa = a.lambda() + 2.0 * a.mu();
  const double pb = b.lambda() + 2.0 * b.mu();
  const double inv_mean = fraction_a / pa + (1.0 - fraction_a) / pb;
  LaminateOracle o;
  o.sigma11 = e11 / inv_mean;
  const double lam_over = fraction_a * a.lambda() / pa + (1.0 - fraction_a) * b.lambda() / pb;
  o.sigma22 = lam_over * o.sigma11;
  return o;
}

inline IsotropicMaterial mat_gpa(double young_gpa, double poisson) {
  return IsotropicMaterial(young_gpa * 1e9, poisson);
}

inline StiffnessField default_hashin(int n) {
  spechom::HashinSpec spec(0.25, 0.4, mat_gpa(100.0, 0.3), mat_gpa(1000.0, 0.3),
                           mat_gpa(453.685, 0.3));
  return spechom::rasterize_hashin(spec, GridSpec(2, n));
}

inline StiffnessField half_laminate(int n, double young_a_gpa = 100.0,
                                    double young_b_gpa = 1000.0) {
  spechom::LaminateSpec spec(0, 0.5, mat_gpa(young_a_gpa, 0.3), mat_gpa(young_b_gpa, 0.3));
  return spechom::rasterize_laminate(spec, GridSpec(2, n));
}

}  // namespace testutil
