// Tensor-valued fields on a periodic grid, plus the forward/inverse DFT that
// moves them between real space and Fourier coefficients.
//
// Storage is complex throughout so a field can hold either representation;
// real-space fields keep exactly zero imaginary parts. Components are stored
// component-major: component c occupies the contiguous block
// [c * num_points, (c+1) * num_points), each block in row-major grid order.
//
// Normalization: forward transforms divide by the point count, so the
// coefficient at xi = 0 is the grid mean and Parseval reads
// ||f||_rms^2 = sum_k |f_hat(k)|^2.

#pragma once

#include <algorithm>
#include <complex>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

#include "spechom/grid.hpp"
#include "spechom/tensor.hpp"

namespace spechom {

enum class Representation { real, fourier };

class TensorField {
 public:
  TensorField(const GridSpec& grid, int order, Representation rep = Representation::real)
      : grid_(grid), order_(order), rep_(rep) {
    if (order < 0 || order > 4) throw std::invalid_argument("tensor order must be in [0, 4]");
    std::size_t nc = 1;
    for (int a = 0; a < order; ++a) nc *= static_cast<std::size_t>(grid.d);
    ncomp_ = nc;
    data_.assign(nc * grid.num_points(), std::complex<double>(0.0, 0.0));
  }

  const GridSpec& grid() const { return grid_; }
  int order() const { return order_; }
  Representation representation() const { return rep_; }
  std::size_t num_components() const { return ncomp_; }
  std::size_t num_points() const { return data_.size() / ncomp_; }

  std::complex<double>& at(std::size_t comp, std::size_t point) {
    return data_[comp * num_points() + point];
  }
  const std::complex<double>& at(std::size_t comp, std::size_t point) const {
    return data_[comp * num_points() + point];
  }

  double real_at(std::size_t comp, std::size_t point) const { return at(comp, point).real(); }
  void set_real(std::size_t comp, std::size_t point, double v) {
    at(comp, point) = std::complex<double>(v, 0.0);
  }

  std::complex<double>* data() { return data_.data(); }
  const std::complex<double>* data() const { return data_.data(); }

  void set_representation(Representation rep) { rep_ = rep; }

  void fill_zero() { std::fill(data_.begin(), data_.end(), std::complex<double>(0.0, 0.0)); }

  /// Drop imaginary parts (used after an inverse transform has verified that
  /// they are roundoff).
  void clear_imaginary() {
    for (auto& v : data_) v = std::complex<double>(v.real(), 0.0);
  }

 private:
  GridSpec grid_;
  int order_;
  Representation rep_;
  std::size_t ncomp_;
  std::vector<std::complex<double>> data_;
};

namespace detail {

// FFTW plan creation/destruction is not thread safe; execution of distinct
// plans is.
inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

/// In-place component-wise DFT of `howmany` contiguous blocks of grid data.
/// sign is FFTW_FORWARD or FFTW_BACKWARD; no normalization is applied.
inline void transform_inplace(std::complex<double>* data, const GridSpec& g, int howmany,
                              int sign) {
  int dims[kMaxDim];
  for (int a = 0; a < g.d; ++a) dims[a] = g.n;
  const int dist = static_cast<int>(g.num_points());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan = fftw_plan_many_dft(g.d, dims, howmany, reinterpret_cast<fftw_complex*>(data),
                              nullptr, 1, dist, reinterpret_cast<fftw_complex*>(data), nullptr,
                              1, dist, sign, FFTW_ESTIMATE);
  }
  if (!plan) throw std::runtime_error("FFTW plan creation failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan);
  }
}

/// Reusable forward/backward plan pair bound to one field's buffer, for hot
/// loops that transform the same scratch storage every iteration.
class InplaceFft {
 public:
  InplaceFft(TensorField& f) {
    int dims[kMaxDim];
    for (int a = 0; a < f.grid().d; ++a) dims[a] = f.grid().n;
    const int dist = static_cast<int>(f.num_points());
    auto* ptr = reinterpret_cast<fftw_complex*>(f.data());
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    forward_ = fftw_plan_many_dft(f.grid().d, dims, static_cast<int>(f.num_components()), ptr,
                                  nullptr, 1, dist, ptr, nullptr, 1, dist, FFTW_FORWARD,
                                  FFTW_ESTIMATE);
    backward_ = fftw_plan_many_dft(f.grid().d, dims, static_cast<int>(f.num_components()), ptr,
                                   nullptr, 1, dist, ptr, nullptr, 1, dist, FFTW_BACKWARD,
                                   FFTW_ESTIMATE);
    if (!forward_ || !backward_) throw std::runtime_error("FFTW plan creation failed");
  }

  ~InplaceFft() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    if (forward_) fftw_destroy_plan(forward_);
    if (backward_) fftw_destroy_plan(backward_);
  }

  InplaceFft(const InplaceFft&) = delete;
  InplaceFft& operator=(const InplaceFft&) = delete;

  void forward() const { fftw_execute(forward_); }
  void backward() const { fftw_execute(backward_); }

 private:
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace detail

/// Forward DFT: real-space field to Fourier coefficients (mean at xi = 0).
inline TensorField fft_field(const TensorField& f) {
  if (f.representation() != Representation::real)
    throw std::invalid_argument("fft_field expects a real-space field");
  TensorField out = f;
  detail::transform_inplace(out.data(), f.grid(), static_cast<int>(f.num_components()),
                            FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(f.num_points());
  for (std::size_t c = 0; c < out.num_components(); ++c)
    for (std::size_t p = 0; p < out.num_points(); ++p) out.at(c, p) *= scale;
  out.set_representation(Representation::fourier);
  return out;
}

/// Inverse DFT back to real space. The input must carry conjugate symmetry;
/// an imaginary residue above 1e-10 of the field norm reports it as broken.
inline TensorField ifft_field(const TensorField& f) {
  if (f.representation() != Representation::fourier)
    throw std::invalid_argument("ifft_field expects a Fourier-space field");
  TensorField out = f;
  detail::transform_inplace(out.data(), f.grid(), static_cast<int>(f.num_components()),
                            FFTW_BACKWARD);
  double norm2 = 0.0, imag2 = 0.0;
  for (std::size_t c = 0; c < out.num_components(); ++c)
    for (std::size_t p = 0; p < out.num_points(); ++p) {
      const auto v = out.at(c, p);
      norm2 += std::norm(v);
      imag2 += v.imag() * v.imag();
    }
  if (imag2 > 1e-20 * norm2 && norm2 > 0.0)
    throw std::runtime_error(
        "ifft_field: imaginary residue exceeds 1e-10 of the field norm; "
        "conjugate symmetry is broken");
  out.clear_imaginary();
  out.set_representation(Representation::real);
  return out;
}

/// Remove the mean: subtracts the grid mean in real space, zeroes the xi = 0
/// coefficient in Fourier space. Identical effect in both representations.
inline TensorField zero_mean(const TensorField& f) {
  TensorField out = f;
  if (f.representation() == Representation::fourier) {
    for (std::size_t c = 0; c < out.num_components(); ++c)
      out.at(c, 0) = std::complex<double>(0.0, 0.0);
    return out;
  }
  const double scale = 1.0 / static_cast<double>(f.num_points());
  for (std::size_t c = 0; c < out.num_components(); ++c) {
    double mean = 0.0;
    for (std::size_t p = 0; p < out.num_points(); ++p) mean += out.real_at(c, p);
    mean *= scale;
    for (std::size_t p = 0; p < out.num_points(); ++p)
      out.set_real(c, p, out.real_at(c, p) - mean);
  }
  return out;
}

/// Root-mean-square norm over grid points (real space) or the Parseval-equal
/// coefficient l2 norm (Fourier space).
inline double field_norm(const TensorField& f) {
  double s = 0.0;
  for (std::size_t c = 0; c < f.num_components(); ++c)
    for (std::size_t p = 0; p < f.num_points(); ++p) s += std::norm(f.at(c, p));
  if (f.representation() == Representation::real)
    s /= static_cast<double>(f.num_points());
  return std::sqrt(s);
}

/// Per-component grid mean of a real-space field.
inline std::vector<double> field_mean(const TensorField& f) {
  if (f.representation() != Representation::real)
    throw std::invalid_argument("field_mean expects a real-space field");
  std::vector<double> m(f.num_components(), 0.0);
  const double scale = 1.0 / static_cast<double>(f.num_points());
  for (std::size_t c = 0; c < f.num_components(); ++c) {
    double s = 0.0;
    for (std::size_t p = 0; p < f.num_points(); ++p) s += f.real_at(c, p);
    m[c] = s * scale;
  }
  return m;
}

namespace detail {

/// Euclidean inner product of the real parts; the solvers' vector-space dot.
inline double dot_real(const TensorField& a, const TensorField& b) {
  double s = 0.0;
  const std::size_t total = a.num_components() * a.num_points();
  const std::complex<double>* pa = a.data();
  const std::complex<double>* pb = b.data();
  for (std::size_t i = 0; i < total; ++i) s += pa[i].real() * pb[i].real();
  return s;
}

/// y += alpha x on the real parts.
inline void add_scaled(TensorField& y, const TensorField& x, double alpha) {
  const std::size_t total = y.num_components() * y.num_points();
  std::complex<double>* py = y.data();
  const std::complex<double>* px = x.data();
  for (std::size_t i = 0; i < total; ++i)
    py[i] = std::complex<double>(py[i].real() + alpha * px[i].real(), 0.0);
}

}  // namespace detail

}  // namespace spechom
