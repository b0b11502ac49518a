// Generalized cell problems beyond uniform macroscopic strain.
//
// The first-order solve responds to a constant macroscopic strain E. The
// second-order problem adds the first gradient of E and needs the first-order
// displacement corrector X (one cell displacement per unit macroscopic strain
// component). With G the symmetrized gradient of X, the gradient loading
// enters through a polarization and a body force,
//   p2(y) = C(y) : sym(X(y) . dE),   g2_i(y) = C_ijkl(y) (G_klmn dE_mnj + dE_klj),
// and the cell problem is div(C : e + p2) + g2 = 0 for a periodic zero-mean
// strain fluctuation e. The body force folds into the standard operator
// through a flux potential theta with div(theta) = g2, giving the same linear
// system as the first-order case with right-hand side -G0 conv (p2 + theta).
//
// Corrector storage convention: the slice X(., m, n) with m != n holds HALF
// the displacement of the unit-pair solve for (m, n), so full contractions
// over both (m, n) and (n, m) reproduce the solve exactly.

#pragma once

#include <cstdint>
#include <cstring>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "spechom/field.hpp"
#include "spechom/green.hpp"
#include "spechom/grid.hpp"
#include "spechom/microstructure.hpp"
#include "spechom/solver.hpp"
#include "spechom/spectral.hpp"
#include "spechom/tensor.hpp"

namespace spechom {

/// Loading data: macroscopic strain and its first gradient
/// (strain_gradient(m, n, j) = d E_mn / d x_j, symmetric in m, n).
struct MacroData {
  SymTensor2 strain;
  Tensor3 strain_gradient;

  explicit MacroData(int d) : strain(d), strain_gradient(d) {}
  MacroData(const SymTensor2& e, const Tensor3& grad_e)
      : strain(e), strain_gradient(grad_e) {
    if (e.dim() != grad_e.dim())
      throw std::invalid_argument("strain and strain gradient dimensions differ");
  }
};

/// First-order displacement corrector: order-3 field, component (i, m, n) is
/// the i-th displacement component for unit macroscopic strain (m, n), with
/// the off-diagonal halving described above.
struct DisplacementCorrector {
  TensorField field;
  std::vector<SolveReport> sub_reports;

  explicit DisplacementCorrector(const GridSpec& grid) : field(grid, 3) {}
};

/// Solve the d(d+1)/2 unit-strain cell problems and pack the displacements.
/// Throws if any sub-problem fails to converge.
inline DisplacementCorrector assemble_corrector(const StiffnessField& stiffness,
                                                const ReferenceMaterial& ref,
                                                const SolveConfig& cfg = {}) {
  const GridSpec& g = stiffness.grid();
  const int d = g.d;
  DisplacementCorrector corr(g);
  LippmannSchwingerOp op(stiffness, ref);
  for (int m = 0; m < d; ++m)
    for (int n = m; n < d; ++n) {
      const TensorField b = loading_rhs(op, SymTensor2::unit_pair(d, m, n));
      auto [strain, report] = detail::solve_with_rhs(op, b, cfg);
      if (!report.converged)
        throw std::runtime_error("corrector sub-problem did not converge");
      const TensorField u = detail::displacement_from_strain(strain);
      const double w = (m == n) ? 1.0 : 0.5;
      for (int i = 0; i < d; ++i) {
        const auto dst = static_cast<std::size_t>((i * d + m) * d + n);
        const auto dst_t = static_cast<std::size_t>((i * d + n) * d + m);
        for (std::size_t p = 0; p < u.num_points(); ++p) {
          const double v = w * u.real_at(static_cast<std::size_t>(i), p);
          corr.field.set_real(dst, p, v);
          if (dst_t != dst) corr.field.set_real(dst_t, p, v);
        }
      }
      corr.sub_reports.push_back(std::move(report));
    }
  return corr;
}

/// p2(y) = C(y) : sym(A), A_il = X_imn(y) dE_mnl.
inline TensorField order2_polarization(const StiffnessField& stiffness,
                                       const DisplacementCorrector& corrector,
                                       const Tensor3& grad_e) {
  const GridSpec& g = stiffness.grid();
  const int d = g.d;
  TensorField out(g, 2);
  Tensor3 x(d);
  for (std::size_t p = 0; p < out.num_points(); ++p) {
    for (int i = 0; i < d; ++i)
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n)
          x.set(i, m, n,
                corrector.field.real_at(static_cast<std::size_t>((i * d + m) * d + n), p));
    const SymTensor2 a = sym(contract_strain_pair(x, grad_e));
    const SymTensor2 s = ddot(stiffness.stiffness(p), a);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        out.set_real(static_cast<std::size_t>(i * d + j), p, s(i, j));
  }
  return out;
}

/// g2_i(y) = C_ijkl(y) (H_klj(y) + dE_klj), H_klj = G_klmn dE_mnj with G the
/// symmetrized gradient of the corrector slices.
inline TensorField order2_body_force(const StiffnessField& stiffness,
                                     const DisplacementCorrector& corrector,
                                     const Tensor3& grad_e) {
  const GridSpec& g = stiffness.grid();
  const int d = g.d;
  TensorField h(g, 3);
  TensorField slice(g, 1);
  for (int m = 0; m < d; ++m)
    for (int n = m; n < d; ++n) {
      for (int i = 0; i < d; ++i) {
        const auto src = static_cast<std::size_t>((i * d + m) * d + n);
        for (std::size_t p = 0; p < slice.num_points(); ++p)
          slice.set_real(static_cast<std::size_t>(i), p, corrector.field.real_at(src, p));
      }
      const TensorField grad = ifft_field(sym_gradient(fft_field(slice)));
      const double w = (m == n) ? 1.0 : 2.0;
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          const auto src = static_cast<std::size_t>(k * d + l);
          for (int j = 0; j < d; ++j) {
            const double c = w * grad_e(m, n, j);
            if (c == 0.0) continue;
            const auto dst = static_cast<std::size_t>((k * d + l) * d + j);
            for (std::size_t p = 0; p < h.num_points(); ++p)
              h.set_real(dst, p, h.real_at(dst, p) + c * grad.real_at(src, p));
          }
        }
    }
  TensorField out(g, 1);
  for (std::size_t p = 0; p < out.num_points(); ++p) {
    const Stiffness4& c = stiffness.stiffness(p);
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l)
            s += c(i, j, k, l) *
                 (h.real_at(static_cast<std::size_t>((k * d + l) * d + j), p) + grad_e(k, l, j));
      out.set_real(static_cast<std::size_t>(i), p, s);
    }
  }
  return out;
}

/// Symmetric flux potential of a body force: theta with div(theta) = g on
/// every active frequency,
///   theta_ij = (i / |xi|^4) (xi_i xi_j (g . xi) - (g_i xi_j + xi_i g_j) |xi|^2).
/// Mean and Nyquist content of g has no periodic potential and is dropped.
inline TensorField divergence_potential(const TensorField& g_hat) {
  if (g_hat.order() != 1 || g_hat.representation() != Representation::fourier)
    throw std::invalid_argument("divergence_potential expects an order-1 Fourier field");
  const GridSpec& grid = g_hat.grid();
  const int d = grid.d;
  TensorField out(grid, 2, Representation::fourier);
  for_each_frequency(grid, [&](std::size_t p, const FrequencyIndex& f) {
    if (f.zero || f.nyquist) return;
    const double xi2 = f.xi_norm2();
    std::complex<double> gxi(0.0, 0.0);
    for (int k = 0; k < d; ++k) gxi += g_hat.at(static_cast<std::size_t>(k), p) * f.xi[k];
    const std::complex<double> unit_i(0.0, 1.0);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const std::complex<double> gi = g_hat.at(static_cast<std::size_t>(i), p);
        const std::complex<double> gj = g_hat.at(static_cast<std::size_t>(j), p);
        const std::complex<double> v =
            unit_i *
            (f.xi[i] * f.xi[j] * gxi - (gi * f.xi[j] + f.xi[i] * gj) * xi2) / (xi2 * xi2);
        out.at(static_cast<std::size_t>(i * d + j), p) = v;
      }
  });
  return out;
}

/// Zero-mean strain response of the reference medium to a periodic body
/// force: e = -G0 conv theta(g).
inline TensorField body_force_strain(const ReferenceMaterial& ref, const TensorField& g) {
  if (g.order() != 1 || g.representation() != Representation::real)
    throw std::invalid_argument("body_force_strain expects a real order-1 field");
  const TensorField theta = divergence_potential(fft_field(g));
  TensorField e = ifft_field(apply_green(ref, theta));
  for (std::size_t c = 0; c < e.num_components(); ++c)
    for (std::size_t p = 0; p < e.num_points(); ++p)
      e.at(c, p) = std::complex<double>(-e.at(c, p).real(), 0.0);
  return e;
}

namespace detail {

inline TensorField stress_with_field_offset(const StiffnessField& stiffness,
                                            const TensorField& strain,
                                            const TensorField& offset) {
  const int d = stiffness.grid().d;
  TensorField out(stiffness.grid(), 2);
  for (std::size_t p = 0; p < out.num_points(); ++p) {
    const Stiffness4& c = stiffness.stiffness(p);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double s = offset.real_at(static_cast<std::size_t>(i * d + j), p);
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l)
            s += c(i, j, k, l) * strain.real_at(static_cast<std::size_t>(k * d + l), p);
        out.set_real(static_cast<std::size_t>(i * d + j), p, s);
      }
  }
  return out;
}

}  // namespace detail

/// Shared cache of assembled correctors keyed by structure content, reference
/// material, and solve settings. Thread-safe; duplicate concurrent assembly
/// of the same key is allowed and the first insert wins.
class CorrectorCache {
 public:
  std::shared_ptr<const DisplacementCorrector> get_or_assemble(const StiffnessField& stiffness,
                                                               const ReferenceMaterial& ref,
                                                               const SolveConfig& cfg) {
    const std::uint64_t key = key_of(stiffness, ref, cfg);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = map_.find(key);
      if (it != map_.end()) return it->second;
    }
    auto built = std::make_shared<const DisplacementCorrector>(
        assemble_corrector(stiffness, ref, cfg));
    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, inserted] = map_.emplace(key, std::move(built));
    (void)inserted;
    return it->second;
  }

  bool contains(const StiffnessField& stiffness, const ReferenceMaterial& ref,
                const SolveConfig& cfg) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return map_.count(key_of(stiffness, ref, cfg)) != 0;
  }

  void remove(const StiffnessField& stiffness, const ReferenceMaterial& ref,
              const SolveConfig& cfg) {
    std::lock_guard<std::mutex> lock(mutex_);
    map_.erase(key_of(stiffness, ref, cfg));
  }

  void clear() {
    std::lock_guard<std::mutex> lock(mutex_);
    map_.clear();
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return map_.size();
  }

 private:
  static std::uint64_t key_of(const StiffnessField& stiffness, const ReferenceMaterial& ref,
                              const SolveConfig& cfg) {
    std::uint64_t h = content_hash(stiffness);
    auto mix = [&h](std::uint64_t v) {
      h ^= v;
      h *= 0x100000001b3ULL;
    };
    auto mix_double = [&](double v) {
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(v));
      std::memcpy(&bits, &v, sizeof(bits));
      mix(bits);
    };
    mix_double(ref.lambda0);
    mix_double(ref.mu0);
    mix_double(cfg.tolerance);
    mix(static_cast<std::uint64_t>(cfg.max_iterations));
    mix(static_cast<std::uint64_t>(cfg.method));
    return h;
  }

  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, std::shared_ptr<const DisplacementCorrector>> map_;
};

inline CorrectorCache& global_corrector_cache() {
  static CorrectorCache cache;
  return cache;
}

/// Equilibrium defect of a second-order solution over the active band,
///   || i xi . sigma_hat + g2_hat || / (mean|xi| ||p2_hat|| + ||g2_hat||),
/// with sigma = C : e + p2 the total flux.
inline double order2_equilibrium_residual(const TensorField& stress, const TensorField& p2,
                                          const TensorField& g2) {
  const GridSpec& g = stress.grid();
  const int d = g.d;
  const TensorField s_hat = fft_field(stress);
  const TensorField p_hat = fft_field(p2);
  const TensorField g_hat = fft_field(g2);
  double num2 = 0.0, p2norm = 0.0, g2norm = 0.0;
  for_each_frequency(g, [&](std::size_t p, const FrequencyIndex& f) {
    if (f.zero || f.nyquist) return;
    for (int i = 0; i < d; ++i) {
      std::complex<double> div(0.0, 0.0);
      for (int j = 0; j < d; ++j)
        div += f.xi[j] * s_hat.at(static_cast<std::size_t>(i * d + j), p);
      num2 += std::norm(std::complex<double>(0.0, 1.0) * div +
                        g_hat.at(static_cast<std::size_t>(i), p));
      g2norm += std::norm(g_hat.at(static_cast<std::size_t>(i), p));
      for (int j = 0; j < d; ++j)
        p2norm += std::norm(p_hat.at(static_cast<std::size_t>(i * d + j), p));
    }
  });
  const double denom = mean_frequency_magnitude(g) * std::sqrt(p2norm) + std::sqrt(g2norm);
  return denom == 0.0 ? 0.0 : std::sqrt(num2) / denom;
}

/// Unified entry point. order 1 solves the uniform-strain problem with the
/// configured method; order 2 solves the gradient-driven problem, assembling
/// (or fetching from the global cache) the displacement corrector when one is
/// not supplied. Other orders are rejected.
inline Solution solve_order(int order, const StiffnessField& stiffness,
                            const ReferenceMaterial& ref, const MacroData& macro,
                            const SolveConfig& cfg = {},
                            std::shared_ptr<const DisplacementCorrector> corrector = nullptr) {
  if (macro.strain.dim() != stiffness.grid().d)
    throw std::invalid_argument("macroscopic data dimension mismatch");
  if (order == 1) {
    return cfg.method == Method::fixed_point ? solve_basic_scheme(stiffness, ref, macro.strain, cfg)
                                             : solve_krylov(stiffness, ref, macro.strain, cfg);
  }
  if (order != 2) throw std::invalid_argument("order must be 1 or 2");
  if (!macro.strain_gradient.symmetric_first_pair(1e-12))
    throw std::invalid_argument("strain gradient must be symmetric in its leading index pair");

  const auto start = std::chrono::steady_clock::now();
  if (!corrector) corrector = global_corrector_cache().get_or_assemble(stiffness, ref, cfg);
  if (!(corrector->field.grid() == stiffness.grid()))
    throw std::invalid_argument("corrector grid does not match the stiffness grid");

  const TensorField p2 = order2_polarization(stiffness, *corrector, macro.strain_gradient);
  const TensorField g2 = order2_body_force(stiffness, *corrector, macro.strain_gradient);
  const TensorField theta = divergence_potential(fft_field(g2));

  LippmannSchwingerOp op(stiffness, ref);
  TensorField b(stiffness.grid(), 2);
  op.green_of(p2, &theta, b);
  for (std::size_t c = 0; c < b.num_components(); ++c)
    for (std::size_t p = 0; p < b.num_points(); ++p)
      b.at(c, p) = std::complex<double>(-b.at(c, p).real(), 0.0);

  auto [strain, report] = detail::solve_with_rhs(op, b, cfg);
  TensorField stress = detail::stress_with_field_offset(stiffness, strain, p2);
  TensorField displacement = detail::displacement_from_strain(strain);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return Solution{std::move(strain), std::move(stress), std::move(displacement),
                  std::move(report)};
}

}  // namespace spechom
