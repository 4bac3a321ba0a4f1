#include "dispctl/mass_op.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "dispctl/errors.hpp"

namespace dispctl {

namespace {

constexpr double kPi = std::numbers::pi;

// <L e^{ikx}, L e^{imx}>_{L^2(T)} integrated directly over F.
std::complex<double> direct_inner(const IntervalUnion& f, std::int64_t k, std::int64_t m) {
  const double mf = f.measure();
  auto e = [&](std::int64_t j) { return f.exp_integral(static_cast<long double>(j)); };
  const std::complex<double> ck = e(k) / mf, cm = e(m) / mf;
  const std::complex<double> v = e(k - m) - std::conj(cm) * e(k) - ck * std::conj(e(m)) + ck * std::conj(cm) * mf;
  return v / (mf * mf);
}

}  // namespace

std::complex<double> ghat_closed_form(const IntervalUnion& f, std::int64_t j) {
  if (j == 0) return 1.0 / (2.0 * kPi);
  return f.exp_integral(-static_cast<long double>(j)) / (2.0 * kPi * f.measure());
}

MassControlOperator::MassControlOperator(IntervalUnion f, int table_extent)
    : f_(std::move(f)), measure_(f_.measure()), extent_(table_extent) {
  if (f_.period() != kTwoPi) throw std::invalid_argument("control support must live on the torus");
  if (!(measure_ > 0)) throw std::invalid_argument("control support has zero measure");
  if (table_extent < 0) throw std::invalid_argument("negative table extent");
  table_.resize(static_cast<std::size_t>(2 * extent_ + 1));
  table_[static_cast<std::size_t>(extent_)] = 1.0 / (2.0 * kPi);
  for (int j = 1; j <= extent_; ++j) {
    const std::complex<double> v = ghat_closed_form(f_, j);
    table_[static_cast<std::size_t>(extent_ + j)] = v;
    table_[static_cast<std::size_t>(extent_ - j)] = std::conj(v);
  }
}

std::complex<double> MassControlOperator::ghat(std::int64_t j) const {
  if (j < -extent_ || j > extent_) throw std::out_of_range("g_hat requested outside its table");
  return table_[static_cast<std::size_t>(j + extent_)];
}

std::complex<double> MassControlOperator::coefficient(std::int64_t k, std::int64_t l) const {
  // 2pi g_hat(0) = 1, so row and column 0 vanish identically.
  if (k == 0 || l == 0) return 0.0;
  return ghat(l - k) - 2.0 * kPi * (ghat(-k) * ghat(l));
}

std::complex<double> MassControlOperator::row_inner(std::int64_t k, std::int64_t m) const {
  if (k == 0 || m == 0) return 0.0;
  return (ghat(m - k) - 2.0 * kPi * (std::conj(ghat(k)) * ghat(m))) / measure_;
}

int MassControlOperator::n_arcs() const {
  const auto& iv = f_.intervals();
  if (iv.empty()) return 0;
  // Pieces touching 0 and 2pi are one arc of the circle; the whole circle has
  // no endpoints at all.
  const bool wraps = iv.front().lo == 0.0 && iv.back().hi == f_.period();
  return static_cast<int>(iv.size()) - (wraps ? 1 : 0);
}

double MassControlOperator::ghat_decay_constant() const {
  return static_cast<double>(n_arcs()) / (kPi * measure_);
}

FourierState apply_L(const MassControlOperator& op, const FourierState& h) {
  const int n = h.n_max();
  FourierState out(n);
  for (int l = -n; l <= n; ++l) {
    std::complex<double> acc = 0;
    for (int k = -n; k <= n; ++k) acc += op.coefficient(k, l) * h[k];
    out.at(l) = acc;
  }
  return out;
}

Eigen::MatrixXcd L_matrix(const MassControlOperator& op, std::int64_t k_lo, std::int64_t k_hi,
                          std::int64_t l_lo, std::int64_t l_hi) {
  if (k_hi < k_lo || l_hi < l_lo) throw std::invalid_argument("empty index range");
  Eigen::MatrixXcd m(k_hi - k_lo + 1, l_hi - l_lo + 1);
  for (std::int64_t k = k_lo; k <= k_hi; ++k)
    for (std::int64_t l = l_lo; l <= l_hi; ++l) m(k - k_lo, l - l_lo) = op.coefficient(k, l);
  return m;
}

IdentityCheck coefficient_identity_check(const MassControlOperator& op, std::int64_t k, std::int64_t l) {
  const IntervalUnion& f = op.support();
  const double mf = op.support_measure();
  const std::complex<double> ck = f.exp_integral(static_cast<long double>(k)) / mf;
  const std::complex<double> integral =
      (f.exp_integral(static_cast<long double>(k - l)) - ck * f.exp_integral(-static_cast<long double>(l))) / mf;
  IdentityCheck c;
  c.direct = integral / (2.0 * kPi);
  c.closed = op.coefficient(k, l);
  c.partial = c.closed;
  c.gap = std::abs(c.direct - c.closed);
  c.truncation_gap = c.gap;
  return c;
}

IdentityCheck inner_product_identity_check(const MassControlOperator& op, std::int64_t k, std::int64_t m,
                                           std::int64_t l_extent) {
  const std::int64_t kk = std::max(std::abs(k), std::abs(m));
  if (l_extent <= kk) throw std::invalid_argument("l-sum must extend past |k| and |m|");
  std::complex<long double> acc = 0;
  for (std::int64_t l = -l_extent; l <= l_extent; ++l) {
    const std::complex<double> v = op.coefficient(k, l) * std::conj(op.coefficient(m, l));
    acc += std::complex<long double>(v.real(), v.imag());
  }
  IdentityCheck c;
  c.partial = 2.0 * kPi * std::complex<double>(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
  c.direct = direct_inner(op.support(), k, m);
  c.closed = 2.0 * kPi * op.row_inner(k, m);
  c.gap = std::abs(c.direct - c.closed);
  c.truncation_gap = std::abs(c.partial - c.closed);
  const double b = op.ghat_decay_constant();
  const double ck = b * (1.0 + 2.0 * kPi * std::abs(op.ghat(k)));
  const double cm = b * (1.0 + 2.0 * kPi * std::abs(op.ghat(m)));
  c.tail_bound = 2.0 * kPi * 2.0 * ck * cm / static_cast<double>(l_extent - kk);
  return c;
}

IdentityCheck row_identity_check(const MassControlOperator& op, std::int64_t k, std::int64_t l_extent) {
  IdentityCheck c = inner_product_identity_check(op, k, k, l_extent);
  // Same numbers, written the way the norm identity reads.
  const double g = std::abs(op.ghat(k));
  c.closed = k == 0 ? 0.0 : (1.0 - 4.0 * kPi * kPi * g * g) / op.support_measure();
  c.gap = std::abs(c.direct - c.closed);
  c.truncation_gap = std::abs(c.partial - c.closed);
  return c;
}

CoercivityBound coercivity_delta(const MassControlOperator& op, std::int64_t k_switch) {
  if (k_switch < 1) throw std::invalid_argument("k_switch must be >= 1");
  const IntervalUnion& f = op.support();
  const double mf = op.support_measure();
  CoercivityBound b;
  b.k_switch = k_switch;
  const double ratio = 2.0 * op.n_arcs() / (mf * static_cast<double>(k_switch));
  if (ratio >= 1.0)
    throw NumericalError("coercivity tail bound not below 1 at k_switch = " + std::to_string(k_switch) +
                         "; raise k_switch");
  b.tail_lower_bound = (1.0 - ratio * ratio) / mf;
  b.scanned_min = std::numeric_limits<double>::infinity();
  // ||L e^{ikx}||^2 depends on |g_hat(k)| only, and |g_hat(-k)| = |g_hat(k)|.
  for (std::int64_t k = 1; k <= k_switch; ++k) {
    const std::complex<double> g = ghat_closed_form(f, k);
    const double v = (1.0 - 4.0 * kPi * kPi * std::norm(g)) / mf;
    if (v < b.scanned_min) {
      b.scanned_min = v;
      b.argmin = k;
    }
  }
  b.delta = std::min(b.scanned_min, b.tail_lower_bound);
  b.exact = b.tail_lower_bound >= b.scanned_min;
  if (!(b.delta > 0)) throw NumericalError("coercivity bound is not positive");
  return b;
}

CoercivityBound coercivity_delta(const MassControlOperator& op) {
  const double mf = op.support_measure();
  auto k = static_cast<std::int64_t>(std::ceil(2.0 * op.n_arcs() / mf)) + 1;
  for (; k <= (std::int64_t{1} << 26); k *= 2) {
    CoercivityBound b = coercivity_delta(op, k);
    if (b.exact) return b;
  }
  throw NumericalError("coercivity scan did not close below k = 2^26");
}

}  // namespace dispctl
