// Green operator of a homogeneous isotropic reference medium, applied
// frequency-by-frequency to polarization fields.
//
// The coefficient at frequency xi != 0 is
//   G_ijkl = [d_ki xi_l xi_j + d_li xi_k xi_j + d_kj xi_l xi_i + d_lj xi_k xi_i]
//            / (4 mu0 |xi|^2)
//          - (lambda0 + mu0) / (mu0 (lambda0 + 2 mu0)) *
//            xi_i xi_j xi_k xi_l / |xi|^4,
// homogeneous of degree 0 in xi, with the minor and major symmetries of a
// stiffness. Applying it to a symmetric s reduces to the vector form
//   G : s = sym(v (x) xi) / (mu0 |xi|^2) - c0 (xi . s . xi) xi (x) xi / |xi|^4
// with v = s . xi, which is what apply_green evaluates.

#pragma once

#include <complex>
#include <stdexcept>

#include "spechom/field.hpp"
#include "spechom/grid.hpp"
#include "spechom/microstructure.hpp"
#include "spechom/tensor.hpp"

namespace spechom {

struct ReferenceMaterial {
  double lambda0;
  double mu0;

  ReferenceMaterial(double lambda, double mu) : lambda0(lambda), mu0(mu) {
    if (mu == 0.0) throw std::invalid_argument("reference material requires mu0 != 0");
    if (lambda + 2.0 * mu == 0.0)
      throw std::invalid_argument("reference material requires lambda0 + 2 mu0 != 0");
  }
};

/// Default reference: midpoint of the extreme phase Lame coefficients.
inline ReferenceMaterial default_reference(const StiffnessField& field) {
  double lambda_min = std::numeric_limits<double>::infinity(), lambda_max = -lambda_min;
  double mu_min = lambda_min, mu_max = -lambda_min;
  for (const auto& m : field.materials()) {
    lambda_min = std::min(lambda_min, m.lambda());
    lambda_max = std::max(lambda_max, m.lambda());
    mu_min = std::min(mu_min, m.mu());
    mu_max = std::max(mu_max, m.mu());
  }
  return ReferenceMaterial(0.5 * (lambda_min + lambda_max), 0.5 * (mu_min + mu_max));
}

/// Full Green coefficient tensor at one nonzero frequency.
inline Stiffness4 green_coefficient(const ReferenceMaterial& ref, const double* xi, int d) {
  check_dim(d);
  double n2 = 0.0;
  for (int a = 0; a < d; ++a) n2 += xi[a] * xi[a];
  if (n2 == 0.0)
    throw std::invalid_argument("the Green coefficient is undefined at zero frequency");
  const double c0 = (ref.lambda0 + ref.mu0) / (ref.mu0 * (ref.lambda0 + 2.0 * ref.mu0));
  auto kron = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  Stiffness4 g(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          const double part1 = (kron(k, i) * xi[l] * xi[j] + kron(l, i) * xi[k] * xi[j] +
                                kron(k, j) * xi[l] * xi[i] + kron(l, j) * xi[k] * xi[i]) /
                               (4.0 * ref.mu0 * n2);
          const double part2 = c0 * xi[i] * xi[j] * xi[k] * xi[l] / (n2 * n2);
          g.set(i, j, k, l, part1 - part2);
        }
  return g;
}

namespace detail {

/// In-place Green application on a Fourier-space symmetric order-2 field.
/// Zero frequency and Nyquist planes are zeroed.
inline void apply_green_inplace(const ReferenceMaterial& ref, TensorField& tau) {
  const int d = tau.grid().d;
  const double c0 = (ref.lambda0 + ref.mu0) / (ref.mu0 * (ref.lambda0 + 2.0 * ref.mu0));
  for_each_frequency(tau.grid(), [&](std::size_t p, const FrequencyIndex& f) {
    if (f.zero || f.nyquist) {
      for (int c = 0; c < d * d; ++c)
        tau.at(static_cast<std::size_t>(c), p) = std::complex<double>(0.0, 0.0);
      return;
    }
    const double n2 = f.xi_norm2();
    std::complex<double> v[kMaxDim];
    std::complex<double> xsx(0.0, 0.0);
    for (int i = 0; i < d; ++i) {
      v[i] = std::complex<double>(0.0, 0.0);
      for (int j = 0; j < d; ++j)
        v[i] += tau.at(static_cast<std::size_t>(i * d + j), p) * f.xi[j];
      xsx += f.xi[i] * v[i];
    }
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        const std::complex<double> value =
            (v[i] * f.xi[j] + v[j] * f.xi[i]) / (2.0 * ref.mu0 * n2) -
            c0 * xsx * f.xi[i] * f.xi[j] / (n2 * n2);
        tau.at(static_cast<std::size_t>(i * d + j), p) = value;
        tau.at(static_cast<std::size_t>(j * d + i), p) = value;
      }
  });
}

}  // namespace detail

/// Green operator applied to a symmetric polarization field (Fourier in,
/// Fourier out). Matches green_coefficient contracted with each coefficient.
[[nodiscard]] inline TensorField apply_green(const ReferenceMaterial& ref,
                                             const TensorField& tau) {
  if (tau.order() != 2) throw std::invalid_argument("apply_green expects an order-2 field");
  if (tau.representation() != Representation::fourier)
    throw std::invalid_argument("apply_green expects a Fourier-space field");
  TensorField out = tau;
  detail::apply_green_inplace(ref, out);
  return out;
}

}  // namespace spechom
