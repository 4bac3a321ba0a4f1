#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>

#include "dispctl/symbol.hpp"

namespace dispctl {

// Coefficients u_hat(k), |k| <= n_max, with u_hat(k) = (1/2pi) int u e^{-ikx}.
// Reads outside the band are exact zeros.
template <typename Real>
class BasicFourierState {
 public:
  using Scalar = std::complex<Real>;
  using Coefficients = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicFourierState() : BasicFourierState(0) {}
  explicit BasicFourierState(int n_max)
      : n_max_(n_max), c_(Coefficients::Zero(2 * n_max + 1)) {
    if (n_max < 0) throw std::invalid_argument("negative truncation");
  }
  BasicFourierState(int n_max, Coefficients c) : n_max_(n_max), c_(std::move(c)) {
    if (c_.size() != 2 * n_max + 1)
      throw std::invalid_argument("coefficient vector does not match truncation");
  }

  static BasicFourierState delta(int n_max, std::int64_t k, Scalar value = Scalar(1)) {
    BasicFourierState s(n_max);
    s.at(k) = value;
    return s;
  }

  int n_max() const { return n_max_; }
  Eigen::Index size() const { return c_.size(); }
  bool contains(std::int64_t k) const { return k >= -n_max_ && k <= n_max_; }

  Scalar operator[](std::int64_t k) const {
    return contains(k) ? c_(static_cast<Eigen::Index>(k + n_max_)) : Scalar(0);
  }
  Scalar& at(std::int64_t k) {
    if (!contains(k)) throw std::out_of_range("frequency outside truncation");
    return c_(static_cast<Eigen::Index>(k + n_max_));
  }

  const Coefficients& coeffs() const { return c_; }
  Coefficients& coeffs() { return c_; }

  bool is_zero_mean() const { return c_(n_max_) == Scalar(0); }
  BasicFourierState zero_mean_part() const {
    BasicFourierState s = *this;
    s.c_(n_max_) = Scalar(0);
    return s;
  }

  // Zero-padded or truncated copy.
  BasicFourierState resized(int n_max) const {
    BasicFourierState s(n_max);
    const int m = std::min(n_max, n_max_);
    s.c_.segment(n_max - m, 2 * m + 1) = c_.segment(n_max_ - m, 2 * m + 1);
    return s;
  }

  BasicFourierState& operator+=(const BasicFourierState& o) { check(o); c_ += o.c_; return *this; }
  BasicFourierState& operator-=(const BasicFourierState& o) { check(o); c_ -= o.c_; return *this; }
  BasicFourierState& operator*=(Scalar a) { c_ *= a; return *this; }

  friend BasicFourierState operator+(BasicFourierState a, const BasicFourierState& b) { return a += b; }
  friend BasicFourierState operator-(BasicFourierState a, const BasicFourierState& b) { return a -= b; }
  friend BasicFourierState operator*(Scalar s, BasicFourierState a) { return a *= s; }
  friend BasicFourierState operator*(Real s, BasicFourierState a) { return a *= Scalar(s); }

 private:
  void check(const BasicFourierState& o) const {
    if (o.n_max_ != n_max_) throw std::invalid_argument("truncation mismatch");
  }

  int n_max_;
  Coefficients c_;
};

using FourierState = BasicFourierState<double>;

inline constexpr long double kTwoPiL = 2.0L * std::numbers::pi_v<long double>;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// w*s modulo 2pi. The product is formed in quad precision, so an exact
// integer w and a double s give an angle accurate to long double even when
// w*s is ~1e15.
inline long double reduced_angle(long double w, long double s) {
  // 2pi as a double-double, good to ~1e-32.
  const __float128 two_pi = static_cast<__float128>(6.283185307179586) + static_cast<__float128>(2.4492935982947064e-16);
  const __float128 x = static_cast<__float128>(w) * static_cast<__float128>(s);
  const __float128 q = x / two_pi;
  if (q > static_cast<__float128>(9.0e18) || q < static_cast<__float128>(-9.0e18)) return std::fmod(static_cast<long double>(x), kTwoPiL);
  const auto n = static_cast<long long>(q);
  return static_cast<long double>(x - static_cast<__float128>(n) * two_pi);
}

template <typename Real = double>
std::complex<Real> unit_phase(long double theta) {
  const long double r = std::fmod(theta, kTwoPiL);
  return {static_cast<Real>(std::cos(r)), static_cast<Real>(std::sin(r))};
}

// e^{i w s}
template <typename Real = double>
std::complex<Real> phase(long double w, long double s) {
  const long double r = reduced_angle(w, s);
  return {static_cast<Real>(std::cos(r)), static_cast<Real>(std::sin(r))};
}

// e^{i p(k) t} from the exact integer p(k).
template <typename Real = double>
std::complex<Real> symbol_phase(std::int64_t pk, Real t) {
  return phase<Real>(static_cast<long double>(pk), static_cast<long double>(t));
}

// int_a^b e^{i w s} ds, written as a midpoint phase times a real sinc factor
// so nothing cancels for small w.
template <typename Real = double>
std::complex<Real> exp_integral(long double w, long double a, long double b) {
  if (w == 0.0L) return {static_cast<Real>(b - a), Real(0)};
  const long double amp = 2.0L * std::sin(reduced_angle(w, 0.5L * (b - a))) / w;
  const long double r = reduced_angle(w, 0.5L * (a + b));
  return {static_cast<Real>(amp * std::cos(r)), static_cast<Real>(amp * std::sin(r))};
}

template <typename Real>
BasicFourierState<Real> evolve_free(const BasicFourierState<Real>& s,
                                    const LinearFlow& flow, Real t) {
  BasicFourierState<Real> out = s;
  const int n = s.n_max();
  for (std::int64_t k = -n; k <= n; ++k) {
    if (k == 0 && flow.frequency(0) == 0.0L) continue;
    out.at(k) *= phase<Real>(flow.frequency(k), static_cast<long double>(t));
  }
  return out;
}

template <typename Real>
BasicFourierState<Real> evolve_free(const BasicFourierState<Real>& s,
                                    const DispersionSymbol& p, Real t) {
  return evolve_free(s, LinearFlow{p, 0.0}, t);
}

template <typename Real>
Real l2_norm(const BasicFourierState<Real>& s) {
  return std::sqrt(static_cast<Real>(kTwoPi) * s.coeffs().squaredNorm());
}

// <a, b>_{L^2(T)} = 2pi sum a_k conj(b_k)
template <typename Real>
std::complex<Real> inner(const BasicFourierState<Real>& a, const BasicFourierState<Real>& b) {
  if (a.n_max() != b.n_max()) throw std::invalid_argument("truncation mismatch");
  return static_cast<Real>(kTwoPi) * b.coeffs().dot(a.coeffs());
}

}  // namespace dispctl
