// Exact spectral differential operators: symmetric gradient, divergence, and
// displacement recovery from a compatible strain.
//
// All three multiply by powers of xi and are odd under xi -> -xi, so they
// zero the unpaired Nyquist planes; this keeps real fields real and makes
// each operator exact for band-limited data.

#pragma once

#include <complex>
#include <stdexcept>

#include "spechom/field.hpp"
#include "spechom/grid.hpp"

namespace spechom {

namespace detail {

template <typename PerFrequency>
TensorField spectral_map(const TensorField& in, int out_order, PerFrequency&& fn) {
  const bool was_real = in.representation() == Representation::real;
  const TensorField* src = &in;
  TensorField transformed(in.grid(), in.order());
  if (was_real) {
    transformed = fft_field(in);
    src = &transformed;
  }
  TensorField out(in.grid(), out_order, Representation::fourier);
  for_each_frequency(in.grid(), [&](std::size_t p, const FrequencyIndex& f) {
    if (f.zero || f.nyquist) return;  // odd operator: mean and Nyquist stay zero
    fn(p, f, *src, out);
  });
  return was_real ? ifft_field(out) : out;
}

}  // namespace detail

/// Symmetric gradient of a displacement field:
///   e_ij = (i/2)(xi_i u_j + xi_j u_i) per frequency.
/// Returned in the representation of the input.
inline TensorField sym_gradient(const TensorField& u) {
  if (u.order() != 1) throw std::invalid_argument("sym_gradient expects an order-1 field");
  const int d = u.grid().d;
  return detail::spectral_map(u, 2, [d](std::size_t p, const FrequencyIndex& f,
                                         const TensorField& src, TensorField& out) {
    const std::complex<double> iu(0.0, 1.0);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const auto v = 0.5 * iu * (f.xi[i] * src.at(j, p) + f.xi[j] * src.at(i, p));
        out.at(static_cast<std::size_t>(i * d + j), p) = v;
      }
  });
}

/// Row-wise divergence of an order-2 field: v_i = i xi_j s_ij per frequency.
/// Returned in the representation of the input.
inline TensorField divergence(const TensorField& s) {
  if (s.order() != 2) throw std::invalid_argument("divergence expects an order-2 field");
  const int d = s.grid().d;
  return detail::spectral_map(s, 1, [d](std::size_t p, const FrequencyIndex& f,
                                         const TensorField& src, TensorField& out) {
    const std::complex<double> iu(0.0, 1.0);
    for (int i = 0; i < d; ++i) {
      std::complex<double> v(0.0, 0.0);
      for (int j = 0; j < d; ++j) v += f.xi[j] * src.at(static_cast<std::size_t>(i * d + j), p);
      out.at(static_cast<std::size_t>(i), p) = iu * v;
    }
  });
}

/// Invert the symmetric gradient on a zero-mean compatible strain:
///   u = -i [ 2 (e . xi) / |xi|^2  -  xi (xi . e . xi) / |xi|^4 ].
/// Both sides are Fourier fields; u(0) = 0 and Nyquist planes are zeroed.
/// The mean strain coefficient is ignored (it has no periodic displacement).
/// If re-deriving the strain from u misses the input by more than `tol`
/// relative, the strain was not compatible and an error is raised.
inline TensorField recover_displacement(const TensorField& e, double tol = 1e-8) {
  if (e.order() != 2)
    throw std::invalid_argument("recover_displacement expects an order-2 field");
  if (e.representation() != Representation::fourier)
    throw std::invalid_argument("recover_displacement expects a Fourier-space field");
  const int d = e.grid().d;
  TensorField u(e.grid(), 1, Representation::fourier);
  double input2 = 0.0, residual2 = 0.0;
  for_each_frequency(e.grid(), [&](std::size_t p, const FrequencyIndex& f) {
    if (f.zero) return;
    double local2 = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        local2 += std::norm(e.at(static_cast<std::size_t>(i * d + j), p));
    input2 += local2;
    if (f.nyquist) {
      residual2 += local2;  // Nyquist strain content cannot come from a gradient
      return;
    }
    const double n2 = f.xi_norm2();
    std::complex<double> exi[kMaxDim];
    std::complex<double> xex(0.0, 0.0);
    for (int i = 0; i < d; ++i) {
      exi[i] = std::complex<double>(0.0, 0.0);
      for (int j = 0; j < d; ++j)
        exi[i] += e.at(static_cast<std::size_t>(i * d + j), p) * f.xi[j];
      xex += f.xi[i] * exi[i];
    }
    const std::complex<double> minus_i(0.0, -1.0);
    for (int i = 0; i < d; ++i)
      u.at(static_cast<std::size_t>(i), p) =
          minus_i * (2.0 * exi[i] / n2 - f.xi[i] * xex / (n2 * n2));
    // Round trip: a compatible coefficient satisfies e = i sym(xi (x) u).
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const std::complex<double> back =
            std::complex<double>(0.0, 0.5) *
            (f.xi[i] * u.at(static_cast<std::size_t>(j), p) +
             f.xi[j] * u.at(static_cast<std::size_t>(i), p));
        residual2 += std::norm(back - e.at(static_cast<std::size_t>(i * d + j), p));
      }
  });
  if (residual2 > tol * tol * input2)
    throw std::runtime_error("recover_displacement: strain field is not compatible");
  return u;
}

}  // namespace spechom
