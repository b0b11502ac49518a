// Small dense tensors for 2- and 3-dimensional continuum mechanics.
// Components are stored in full (no engineering/Voigt packing); contractions
// are explicit index sums so every convention is visible at the call site.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>

namespace spechom {

inline constexpr int kMaxDim = 3;

inline void check_dim(int d) {
  if (d != 2 && d != 3) throw std::invalid_argument("dimension must be 2 or 3");
}

/// General (not necessarily symmetric) second-order tensor.
class Tensor2 {
 public:
  explicit Tensor2(int d) : d_(d) { check_dim(d); }

  int dim() const { return d_; }

  double operator()(int i, int j) const { return c_[i * d_ + j]; }
  void set(int i, int j, double v) { c_[i * d_ + j] = v; }
  void add(int i, int j, double v) { c_[i * d_ + j] += v; }

 private:
  int d_;
  std::array<double, kMaxDim * kMaxDim> c_{};
};

/// Symmetric second-order tensor; set() writes both (i,j) and (j,i).
class SymTensor2 {
 public:
  explicit SymTensor2(int d) : d_(d) { check_dim(d); }

  static SymTensor2 identity(int d) {
    SymTensor2 t(d);
    for (int i = 0; i < d; ++i) t.set(i, i, 1.0);
    return t;
  }

  /// Basis tensor with 1 at (m,n) and (n,m), zero elsewhere.
  static SymTensor2 unit_pair(int d, int m, int n) {
    SymTensor2 t(d);
    if (m < 0 || m >= d || n < 0 || n >= d)
      throw std::invalid_argument("unit_pair indices out of range");
    t.set(m, n, 1.0);
    return t;
  }

  int dim() const { return d_; }

  double operator()(int i, int j) const { return c_[i * d_ + j]; }

  void set(int i, int j, double v) {
    c_[i * d_ + j] = v;
    c_[j * d_ + i] = v;
  }

  void add(int i, int j, double v) {
    c_[i * d_ + j] += v;
    if (i != j) c_[j * d_ + i] += v;
  }

  double trace() const {
    double t = 0.0;
    for (int i = 0; i < d_; ++i) t += c_[i * d_ + i];
    return t;
  }

  double norm() const {
    double s = 0.0;
    for (int i = 0; i < d_ * d_; ++i) s += c_[i] * c_[i];
    return std::sqrt(s);
  }

  SymTensor2& operator+=(const SymTensor2& o) {
    for (int i = 0; i < d_ * d_; ++i) c_[i] += o.c_[i];
    return *this;
  }

  SymTensor2& operator*=(double a) {
    for (int i = 0; i < d_ * d_; ++i) c_[i] *= a;
    return *this;
  }

 private:
  int d_;
  std::array<double, kMaxDim * kMaxDim> c_{};
};

inline SymTensor2 operator+(SymTensor2 a, const SymTensor2& b) { return a += b; }
inline SymTensor2 operator*(double s, SymTensor2 a) { return a *= s; }

inline SymTensor2 sym(const Tensor2& a) {
  SymTensor2 r(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = i; j < a.dim(); ++j) r.set(i, j, 0.5 * (a(i, j) + a(j, i)));
  return r;
}

/// Third-order tensor. Used for displacement correctors (symmetric in the
/// trailing index pair) and macroscopic strain gradients (symmetric in the
/// leading index pair); symmetry is the caller's contract, checked where the
/// pair matters.
class Tensor3 {
 public:
  explicit Tensor3(int d) : d_(d) { check_dim(d); }

  int dim() const { return d_; }

  double operator()(int i, int j, int k) const { return c_[(i * d_ + j) * d_ + k]; }
  void set(int i, int j, int k, double v) { c_[(i * d_ + j) * d_ + k] = v; }

  bool symmetric_first_pair(double tol = 0.0) const {
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < i; ++j)
        for (int k = 0; k < d_; ++k)
          if (std::abs((*this)(i, j, k) - (*this)(j, i, k)) > tol) return false;
    return true;
  }

  bool symmetric_last_pair(double tol = 0.0) const {
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j)
        for (int k = 0; k < j; ++k)
          if (std::abs((*this)(i, j, k) - (*this)(i, k, j)) > tol) return false;
    return true;
  }

 private:
  int d_;
  std::array<double, kMaxDim * kMaxDim * kMaxDim> c_{};
};

/// Fourth-order stiffness tensor with minor and major symmetries.
class Stiffness4 {
 public:
  explicit Stiffness4(int d) : d_(d) { check_dim(d); }

  int dim() const { return d_; }

  double operator()(int i, int j, int k, int l) const {
    return c_[((i * d_ + j) * d_ + k) * d_ + l];
  }

  /// Raw write; the symmetry invariants are re-established by symmetrize()
  /// or guaranteed by the isotropic constructor.
  void set(int i, int j, int k, int l, double v) {
    c_[((i * d_ + j) * d_ + k) * d_ + l] = v;
  }

  Stiffness4& operator-=(const Stiffness4& o) {
    if (o.d_ != d_) throw std::invalid_argument("stiffness dimension mismatch");
    for (int i = 0; i < d_ * d_ * d_ * d_; ++i) c_[i] -= o.c_[i];
    return *this;
  }

  bool has_symmetries(double tol = 0.0) const {
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j)
        for (int k = 0; k < d_; ++k)
          for (int l = 0; l < d_; ++l) {
            const double v = (*this)(i, j, k, l);
            if (std::abs(v - (*this)(j, i, k, l)) > tol) return false;
            if (std::abs(v - (*this)(i, j, l, k)) > tol) return false;
            if (std::abs(v - (*this)(k, l, i, j)) > tol) return false;
          }
    return true;
  }

 private:
  int d_;
  std::array<double, kMaxDim * kMaxDim * kMaxDim * kMaxDim> c_{};
};

inline Stiffness4 operator-(Stiffness4 a, const Stiffness4& b) { return a -= b; }

/// Isotropic stiffness from Lame coefficients:
///   C_ijkl = lambda d_ij d_kl + mu (d_ik d_jl + d_il d_jk).
/// In two dimensions this is the plane-strain reading. mu == 0 is rejected
/// (the Green operator of such a reference material is singular).
inline Stiffness4 iso_stiffness(double lambda, double mu, int d) {
  check_dim(d);
  if (mu == 0.0) throw std::invalid_argument("isotropic stiffness requires mu != 0");
  Stiffness4 c(d);
  auto kron = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
          c.set(i, j, k, l,
                lambda * kron(i, j) * kron(k, l) +
                    mu * (kron(i, k) * kron(j, l) + kron(i, l) * kron(j, k)));
  return c;
}

/// Lame coefficients from Young's modulus and Poisson ratio.
/// Valid range: young > 0, -1 < poisson < 0.5 (0.5 is incompressible and
/// makes lambda blow up).
inline std::pair<double, double> lame_from_engineering(double young, double poisson) {
  if (young <= 0.0) throw std::invalid_argument("Young's modulus must be positive");
  if (poisson >= 0.5)
    throw std::invalid_argument("Poisson ratio at or above the incompressible limit 0.5");
  if (poisson <= -1.0) throw std::invalid_argument("Poisson ratio must exceed -1");
  const double lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
  const double mu = young / (2.0 * (1.0 + poisson));
  return {lambda, mu};
}

/// Linear elastic phase described by engineering constants (SI units).
class IsotropicMaterial {
 public:
  IsotropicMaterial(double young, double poisson) : young_(young), poisson_(poisson) {
    auto [l, m] = lame_from_engineering(young, poisson);
    lambda_ = l;
    mu_ = m;
  }

  double young() const { return young_; }
  double poisson() const { return poisson_; }
  double lambda() const { return lambda_; }
  double mu() const { return mu_; }

  Stiffness4 stiffness(int d) const { return iso_stiffness(lambda_, mu_, d); }

 private:
  double young_;
  double poisson_;
  double lambda_;
  double mu_;
};

/// Double contraction r_ij = C_ijkl e_kl.
inline SymTensor2 ddot(const Stiffness4& c, const SymTensor2& e) {
  if (c.dim() != e.dim()) throw std::invalid_argument("ddot dimension mismatch");
  const int d = c.dim();
  SymTensor2 r(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) s += c(i, j, k, l) * e(k, l);
      r.set(i, j, s);
    }
  return r;
}

/// u_k = X_kmn E_mn: contract a corrector-like tensor with a macroscopic
/// strain over the full (m,n) pair.
inline std::array<double, kMaxDim> contract_last_pair(const Tensor3& x, const SymTensor2& e) {
  if (x.dim() != e.dim()) throw std::invalid_argument("contract_last_pair dimension mismatch");
  const int d = x.dim();
  std::array<double, kMaxDim> u{};
  for (int k = 0; k < d; ++k)
    for (int m = 0; m < d; ++m)
      for (int n = 0; n < d; ++n) u[k] += x(k, m, n) * e(m, n);
  return u;
}

/// A_il = X_imn G_mnl: contract the shared symmetric strain pair of a
/// corrector (trailing pair) with a strain gradient (leading pair). The
/// result carries the corrector's free index first and the gradient's last,
/// and is not symmetric in general.
inline Tensor2 contract_strain_pair(const Tensor3& x, const Tensor3& grad_e) {
  if (x.dim() != grad_e.dim())
    throw std::invalid_argument("contract_strain_pair dimension mismatch");
  const int d = x.dim();
  Tensor2 a(d);
  for (int i = 0; i < d; ++i)
    for (int l = 0; l < d; ++l) {
      double s = 0.0;
      for (int m = 0; m < d; ++m)
        for (int n = 0; n < d; ++n) s += x(i, m, n) * grad_e(m, n, l);
      a.set(i, l, s);
    }
  return a;
}

/// Smallest sampled quadratic form e:C:e over random unit symmetric tensors.
/// Deterministic for a given seed; used to reject indefinite phase tables.
inline double min_quadratic_sample(const Stiffness4& c, int trials, std::uint64_t seed) {
  const int d = c.dim();
  std::uint64_t state = seed ? seed : 0x9e3779b97f4a7c15ULL;
  auto next_unit = [&state]() {
    // xorshift*; quality is ample for probing a quadratic form.
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return static_cast<double>((state * 0x2545F4914F6CDD1DULL) >> 11) /
               static_cast<double>(1ULL << 53) * 2.0 -
           1.0;
  };
  double best = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    SymTensor2 e(d);
    double norm2 = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) e.set(i, j, next_unit());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) norm2 += e(i, j) * e(i, j);
    if (norm2 == 0.0) continue;
    const SymTensor2 ce = ddot(c, e);
    double q = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) q += e(i, j) * ce(i, j);
    best = std::min(best, q / norm2);
  }
  return best;
}

}  // namespace spechom
