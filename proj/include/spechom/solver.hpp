// Periodic elasticity solvers built on the Green operator.
//
// Both methods solve the same linear problem
//   (Id + G conv (C - C0)) : e = b
// for the zero-mean strain fluctuation e, where b collects the loading
// (b = -G conv (C : E) for a macroscopic strain E). The fixed-point scheme
// iterates e_{n+1} = b - G conv ((C - C0) : e_n), whose successive difference
// is exactly the residual b - A e_n, so the Cauchy stopping test
// ||e_{n+1} - e_n|| / ||e_0|| is the relative residual. The Krylov method is
// matrix-free BiCGStab on the same operator (it is not symmetric in the
// Euclidean inner product, so plain conjugate gradients do not apply).

#pragma once

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "spechom/field.hpp"
#include "spechom/green.hpp"
#include "spechom/grid.hpp"
#include "spechom/microstructure.hpp"
#include "spechom/spectral.hpp"
#include "spechom/tensor.hpp"

namespace spechom {

enum class Method { fixed_point, krylov };

struct SolveConfig {
  double tolerance = 1e-6;
  long max_iterations = 50000;
  Method method = Method::fixed_point;
};

struct SolveReport {
  long iterations = 0;
  std::vector<double> residual_history;  // one entry per iteration
  bool converged = false;
  double wall_seconds = 0.0;
  long operator_applications = 0;  // Green/operator applications in the iteration phase

  double final_residual() const {
    return residual_history.empty() ? 0.0 : residual_history.back();
  }
};

struct Solution {
  TensorField strain;        // zero-mean fluctuation
  TensorField stress;        // total flux, C : (e + E) for first-order problems
  TensorField displacement;  // zero-mean fluctuation
  SolveReport report;
};

/// Matrix-free application context. Owns the scratch buffer and FFT plans so
/// repeated applications allocate nothing.
class LippmannSchwingerOp {
 public:
  LippmannSchwingerOp(const StiffnessField& stiffness, const ReferenceMaterial& ref)
      : stiffness_(stiffness),
        ref_(ref),
        scratch_(stiffness.grid(), 2),
        plans_(scratch_) {
    const int d = stiffness.grid().d;
    const Stiffness4 c0 = iso_stiffness(ref.lambda0, ref.mu0, d);
    delta_.reserve(stiffness.num_phases());
    for (int id = 0; id < stiffness.num_phases(); ++id)
      delta_.push_back(stiffness.phase_stiffness(id) - c0);
  }

  const StiffnessField& stiffness() const { return stiffness_; }
  const ReferenceMaterial& reference() const { return ref_; }
  const GridSpec& grid() const { return stiffness_.grid(); }

  /// out = e + G conv ((C - C0) : e); out must not alias e.
  void apply(const TensorField& e, TensorField& out) {
    green_of_delta(e, out);
    detail::add_scaled(out, e, 1.0);
  }

  /// out = G conv ((C - C0) : e).
  void green_of_delta(const TensorField& e, TensorField& out) {
    pointwise_ddot(delta_, e, scratch_);
    convolve_into(nullptr, out);
  }

  /// out = G conv (polarization + extra_hat), with the optional extra term
  /// given directly in Fourier space.
  void green_of(const TensorField& polarization, const TensorField* extra_hat,
                TensorField& out) {
    const std::size_t total = scratch_.num_components() * scratch_.num_points();
    const std::complex<double>* src = polarization.data();
    std::complex<double>* dst = scratch_.data();
    for (std::size_t i = 0; i < total; ++i) dst[i] = src[i];
    convolve_into(extra_hat, out);
  }

  /// Pointwise s(x) = table[phase(x)] : e(x) on the real parts.
  void pointwise_ddot(const std::vector<Stiffness4>& table, const TensorField& e,
                      TensorField& out) const {
    const int d = grid().d;
    const std::size_t npts = e.num_points();
    for (std::size_t p = 0; p < npts; ++p) {
      const Stiffness4& c = table[stiffness_.phase(p)];
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double s = 0.0;
          for (int k = 0; k < d; ++k)
            for (int l = 0; l < d; ++l)
              s += c(i, j, k, l) * e.real_at(static_cast<std::size_t>(k * d + l), p);
          out.set_real(static_cast<std::size_t>(i * d + j), p, s);
        }
    }
  }

 private:
  // scratch_ holds a real polarization; transform, convolve, transform back.
  void convolve_into(const TensorField* extra_hat, TensorField& out) {
    plans_.forward();
    const double scale = 1.0 / static_cast<double>(scratch_.num_points());
    const std::size_t total = scratch_.num_components() * scratch_.num_points();
    std::complex<double>* data = scratch_.data();
    if (extra_hat) {
      const std::complex<double>* extra = extra_hat->data();
      for (std::size_t i = 0; i < total; ++i) data[i] = data[i] * scale + extra[i];
    } else {
      for (std::size_t i = 0; i < total; ++i) data[i] *= scale;
    }
    scratch_.set_representation(Representation::fourier);
    detail::apply_green_inplace(ref_, scratch_);
    plans_.backward();
    scratch_.set_representation(Representation::real);
    std::complex<double>* o = out.data();
    for (std::size_t i = 0; i < total; ++i) o[i] = std::complex<double>(data[i].real(), 0.0);
  }

  const StiffnessField& stiffness_;
  ReferenceMaterial ref_;
  std::vector<Stiffness4> delta_;
  TensorField scratch_;
  detail::InplaceFft plans_;
};

/// Allocating one-shot wrapper around LippmannSchwingerOp::apply.
inline TensorField lippmann_schwinger_operator(const StiffnessField& stiffness,
                                               const ReferenceMaterial& ref,
                                               const TensorField& e) {
  if (e.order() != 2 || e.representation() != Representation::real)
    throw std::invalid_argument("operator expects a real-space order-2 field");
  if (!(e.grid() == stiffness.grid()))
    throw std::invalid_argument("field grid does not match the stiffness grid");
  LippmannSchwingerOp op(stiffness, ref);
  TensorField out(e.grid(), 2);
  op.apply(e, out);
  return out;
}

/// Right-hand side of the strain equation for macroscopic strain loading:
///   b = -G conv (C : E), zero-mean by construction.
inline TensorField loading_rhs(LippmannSchwingerOp& op, const SymTensor2& macro_strain) {
  const StiffnessField& stiffness = op.stiffness();
  const int d = stiffness.grid().d;
  if (macro_strain.dim() != d)
    throw std::invalid_argument("macroscopic strain dimension mismatch");
  TensorField pol(stiffness.grid(), 2);
  std::vector<SymTensor2> per_phase;
  per_phase.reserve(stiffness.num_phases());
  for (int id = 0; id < stiffness.num_phases(); ++id)
    per_phase.push_back(ddot(stiffness.phase_stiffness(id), macro_strain));
  for (std::size_t p = 0; p < pol.num_points(); ++p) {
    const SymTensor2& s = per_phase[stiffness.phase(p)];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        pol.set_real(static_cast<std::size_t>(i * d + j), p, s(i, j));
  }
  TensorField b(stiffness.grid(), 2);
  op.green_of(pol, nullptr, b);
  for (std::size_t c = 0; c < b.num_components(); ++c)
    for (std::size_t p = 0; p < b.num_points(); ++p)
      b.at(c, p) = std::complex<double>(-b.at(c, p).real(), 0.0);
  return b;
}

inline TensorField loading_rhs(const StiffnessField& stiffness, const ReferenceMaterial& ref,
                               const SymTensor2& macro_strain) {
  LippmannSchwingerOp op(stiffness, ref);
  return loading_rhs(op, macro_strain);
}

namespace detail {

inline SolveReport immediate_zero_report() {
  SolveReport r;
  r.iterations = 0;
  r.converged = true;
  return r;
}

/// Fixed-point iteration e_{n+1} = b - G conv ((C - C0) : e_n), e_0 = b.
inline std::pair<TensorField, SolveReport> run_fixed_point(LippmannSchwingerOp& op,
                                                           const TensorField& b,
                                                           const SolveConfig& cfg) {
  SolveReport report;
  const double b_norm = std::sqrt(dot_real(b, b));
  TensorField e = b;
  if (b_norm == 0.0) return {std::move(e), immediate_zero_report()};
  TensorField eta(b.grid(), 2);
  const std::size_t total = e.num_components() * e.num_points();
  for (long it = 1; it <= cfg.max_iterations; ++it) {
    op.green_of_delta(e, eta);
    ++report.operator_applications;
    // Fused update: e_new = b - eta, residual = ||e_new - e|| / ||b||.
    double diff2 = 0.0;
    std::complex<double>* pe = e.data();
    const std::complex<double>* pb = b.data();
    const std::complex<double>* ph = eta.data();
    for (std::size_t i = 0; i < total; ++i) {
      const double next = pb[i].real() - ph[i].real();
      const double diff = next - pe[i].real();
      diff2 += diff * diff;
      pe[i] = std::complex<double>(next, 0.0);
    }
    const double res = std::sqrt(diff2) / b_norm;
    report.residual_history.push_back(res);
    report.iterations = it;
    if (res < cfg.tolerance) {
      report.converged = true;
      break;
    }
  }
  return {std::move(e), std::move(report)};
}

/// Matrix-free BiCGStab started from x = b. One breakdown triggers a single
/// restart from the current iterate; a second reports non-convergence.
inline std::pair<TensorField, SolveReport> run_bicgstab(LippmannSchwingerOp& op,
                                                        const TensorField& b,
                                                        const SolveConfig& cfg) {
  SolveReport report;
  const double b_norm = std::sqrt(dot_real(b, b));
  TensorField x = b;
  if (b_norm == 0.0) return {std::move(x), immediate_zero_report()};

  const GridSpec& g = b.grid();
  TensorField r(g, 2), rhat(g, 2), v(g, 2), p(g, 2), s(g, 2), t(g, 2);
  const std::size_t total = x.num_components() * x.num_points();
  auto real_of = [](const TensorField& f) { return f.data(); };

  op.apply(x, r);
  ++report.operator_applications;
  for (std::size_t i = 0; i < total; ++i)
    r.data()[i] = std::complex<double>(b.data()[i].real() - r.data()[i].real(), 0.0);
  rhat = r;
  double res = std::sqrt(dot_real(r, r)) / b_norm;
  if (res < cfg.tolerance) {
    report.iterations = 1;
    report.residual_history.push_back(res);
    report.converged = true;
    return {std::move(x), std::move(report)};
  }

  double rho_old = 1.0, alpha = 1.0, omega = 1.0;
  bool restarted = false;
  constexpr double kBreakdown = 1e-300;

  auto restart = [&]() {
    op.apply(x, r);
    ++report.operator_applications;
    for (std::size_t i = 0; i < total; ++i)
      r.data()[i] = std::complex<double>(b.data()[i].real() - r.data()[i].real(), 0.0);
    rhat = r;
    rho_old = alpha = omega = 1.0;
    v.fill_zero();
    p.fill_zero();
  };

  for (long it = 1; it <= cfg.max_iterations; ++it) {
    report.iterations = it;
    const double rho = dot_real(rhat, r);
    if (std::abs(rho) < kBreakdown || std::abs(omega) < kBreakdown) {
      res = std::sqrt(dot_real(r, r)) / b_norm;
      report.residual_history.push_back(res);
      if (restarted) break;
      restarted = true;
      restart();
      continue;
    }
    const double beta = (rho / rho_old) * (alpha / omega);
    // p = r + beta (p - omega v)
    for (std::size_t i = 0; i < total; ++i)
      p.data()[i] = std::complex<double>(
          real_of(r)[i].real() + beta * (real_of(p)[i].real() - omega * real_of(v)[i].real()),
          0.0);
    op.apply(p, v);
    ++report.operator_applications;
    const double gamma = dot_real(rhat, v);
    if (std::abs(gamma) < kBreakdown) {
      res = std::sqrt(dot_real(r, r)) / b_norm;
      report.residual_history.push_back(res);
      if (restarted) break;
      restarted = true;
      restart();
      continue;
    }
    alpha = rho / gamma;
    // s = r - alpha v
    for (std::size_t i = 0; i < total; ++i)
      s.data()[i] = std::complex<double>(real_of(r)[i].real() - alpha * real_of(v)[i].real(), 0.0);
    const double s_res = std::sqrt(dot_real(s, s)) / b_norm;
    if (s_res < cfg.tolerance) {
      add_scaled(x, p, alpha);
      r = s;
      report.residual_history.push_back(s_res);
      report.converged = true;
      break;
    }
    op.apply(s, t);
    ++report.operator_applications;
    const double tt = dot_real(t, t);
    if (tt < kBreakdown) {
      res = std::sqrt(dot_real(r, r)) / b_norm;
      report.residual_history.push_back(res);
      if (restarted) break;
      restarted = true;
      restart();
      continue;
    }
    omega = dot_real(t, s) / tt;
    // x += alpha p + omega s;  r = s - omega t
    for (std::size_t i = 0; i < total; ++i) {
      x.data()[i] = std::complex<double>(real_of(x)[i].real() + alpha * real_of(p)[i].real() +
                                             omega * real_of(s)[i].real(),
                                         0.0);
      r.data()[i] =
          std::complex<double>(real_of(s)[i].real() - omega * real_of(t)[i].real(), 0.0);
    }
    rho_old = rho;
    res = std::sqrt(dot_real(r, r)) / b_norm;
    report.residual_history.push_back(res);
    if (res < cfg.tolerance) {
      report.converged = true;
      break;
    }
  }
  return {std::move(x), std::move(report)};
}

inline std::pair<TensorField, SolveReport> solve_with_rhs(LippmannSchwingerOp& op,
                                                          const TensorField& b,
                                                          const SolveConfig& cfg) {
  if (cfg.tolerance <= 0.0) throw std::invalid_argument("tolerance must be positive");
  if (cfg.max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
  return cfg.method == Method::fixed_point ? run_fixed_point(op, b, cfg)
                                           : run_bicgstab(op, b, cfg);
}

/// sigma(x) = C(x) : e(x) + per-phase offset (used with offset = C : E).
inline TensorField stress_with_phase_offset(const StiffnessField& stiffness,
                                            const TensorField& strain,
                                            const std::vector<SymTensor2>& offset) {
  const int d = stiffness.grid().d;
  TensorField out(stiffness.grid(), 2);
  for (std::size_t p = 0; p < out.num_points(); ++p) {
    const Stiffness4& c = stiffness.stiffness(p);
    const SymTensor2& o = offset[stiffness.phase(p)];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double s = o(i, j);
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l)
            s += c(i, j, k, l) * strain.real_at(static_cast<std::size_t>(k * d + l), p);
        out.set_real(static_cast<std::size_t>(i * d + j), p, s);
      }
  }
  return out;
}

inline TensorField displacement_from_strain(const TensorField& strain) {
  return ifft_field(recover_displacement(fft_field(strain)));
}

}  // namespace detail

namespace detail {

template <typename BuildRhs, typename BuildStress>
Solution solve_common(const StiffnessField& stiffness, const ReferenceMaterial& ref,
                      const SolveConfig& cfg, BuildRhs&& build_rhs,
                      BuildStress&& build_stress) {
  const auto start = std::chrono::steady_clock::now();
  LippmannSchwingerOp op(stiffness, ref);
  TensorField b = build_rhs(op);
  auto [strain, report] = solve_with_rhs(op, b, cfg);
  TensorField stress = build_stress(strain);
  TensorField displacement = displacement_from_strain(strain);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return Solution{std::move(strain), std::move(stress), std::move(displacement),
                  std::move(report)};
}

inline std::vector<SymTensor2> phase_stress_offsets(const StiffnessField& stiffness,
                                                    const SymTensor2& macro_strain) {
  std::vector<SymTensor2> offsets;
  offsets.reserve(stiffness.num_phases());
  for (int id = 0; id < stiffness.num_phases(); ++id)
    offsets.push_back(ddot(stiffness.phase_stiffness(id), macro_strain));
  return offsets;
}

}  // namespace detail

/// First-order solve with the fixed-point scheme.
inline Solution solve_basic_scheme(const StiffnessField& stiffness, const ReferenceMaterial& ref,
                                   const SymTensor2& macro_strain, SolveConfig cfg = {}) {
  cfg.method = Method::fixed_point;
  const auto offsets = detail::phase_stress_offsets(stiffness, macro_strain);
  return detail::solve_common(
      stiffness, ref, cfg,
      [&](LippmannSchwingerOp& op) { return loading_rhs(op, macro_strain); },
      [&](const TensorField& e) {
        return detail::stress_with_phase_offset(stiffness, e, offsets);
      });
}

/// First-order solve with BiCGStab on the same operator.
inline Solution solve_krylov(const StiffnessField& stiffness, const ReferenceMaterial& ref,
                             const SymTensor2& macro_strain, SolveConfig cfg = {}) {
  cfg.method = Method::krylov;
  const auto offsets = detail::phase_stress_offsets(stiffness, macro_strain);
  return detail::solve_common(
      stiffness, ref, cfg,
      [&](LippmannSchwingerOp& op) { return loading_rhs(op, macro_strain); },
      [&](const TensorField& e) {
        return detail::stress_with_phase_offset(stiffness, e, offsets);
      });
}

/// Volume average of the stress field of a converged solution.
inline SymTensor2 effective_stress(const Solution& sol) {
  if (!sol.report.converged)
    throw std::invalid_argument("effective stress requires a converged solution");
  const int d = sol.stress.grid().d;
  const std::vector<double> m = field_mean(sol.stress);
  SymTensor2 out(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) out.set(i, j, m[static_cast<std::size_t>(i * d + j)]);
  return out;
}

/// Normalized equilibrium defect of a stress field with optional body force
/// (Fourier residual i xi . s_hat + g_hat over the active band, scaled by the
/// mean frequency magnitude and the field norms).
inline double equilibrium_residual(const TensorField& stress, const TensorField* body_force) {
  const GridSpec& g = stress.grid();
  const int d = g.d;
  const TensorField s_hat = fft_field(stress);
  TensorField g_hat(g, 1, Representation::fourier);
  if (body_force) g_hat = fft_field(*body_force);
  double num2 = 0.0, s2 = 0.0, g2 = 0.0;
  for_each_frequency(g, [&](std::size_t p, const FrequencyIndex& f) {
    if (f.zero || f.nyquist) return;
    for (int i = 0; i < d; ++i) {
      std::complex<double> div(0.0, 0.0);
      for (int j = 0; j < d; ++j)
        div += f.xi[j] * s_hat.at(static_cast<std::size_t>(i * d + j), p);
      const std::complex<double> res =
          std::complex<double>(0.0, 1.0) * div + g_hat.at(static_cast<std::size_t>(i), p);
      num2 += std::norm(res);
      g2 += std::norm(g_hat.at(static_cast<std::size_t>(i), p));
      for (int j = 0; j < d; ++j)
        s2 += std::norm(s_hat.at(static_cast<std::size_t>(i * d + j), p));
    }
  });
  const double xi_scale = mean_frequency_magnitude(g);
  const double denom = xi_scale * std::sqrt(s2) + std::sqrt(g2);
  return denom == 0.0 ? 0.0 : std::sqrt(num2) / denom;
}

}  // namespace spechom
