#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <vector>

#include "dispctl/fourier.hpp"
#include "dispctl/region.hpp"

namespace dispctl {

// L(h) = (1/|F|) 1_F (h - average of h over F), with g = 1_F/|F|.
class MassControlOperator {
 public:
  // Tabulates g_hat(j) for |j| <= table_extent.
  MassControlOperator(IntervalUnion f, int table_extent);

  const IntervalUnion& support() const { return f_; }
  double support_measure() const { return measure_; }
  int n_intervals() const { return static_cast<int>(f_.size()); }
  // Number of arcs of F as a subset of the circle (pieces meeting across 0 merge).
  int n_arcs() const;
  int table_extent() const { return extent_; }

  std::complex<double> ghat(std::int64_t j) const;
  // L(k,l) = g_hat(l-k) - 2pi g_hat(-k) g_hat(l)
  std::complex<double> coefficient(std::int64_t k, std::int64_t l) const;
  // sum over all l of L(k,l) conj(L(m,l)) = (1/|F|) (g_hat(m-k) - 2pi conj(g_hat(k)) g_hat(m))
  std::complex<double> row_inner(std::int64_t k, std::int64_t m) const;
  // |g_hat(j)| <= m / (pi |F| |j|), j != 0, m = n_arcs()
  double ghat_decay_constant() const;

 private:
  IntervalUnion f_;
  double measure_;
  int extent_;
  std::vector<std::complex<double>> table_;
};

// (1/(2pi|F|)) int_F e^{-ijx} dx, straight from the interval integrals.
std::complex<double> ghat_closed_form(const IntervalUnion& f, std::int64_t j);

// Output coefficient l = sum_k L(k,l) h_hat(k), kept for |l| <= n_max of the input.
FourierState apply_L(const MassControlOperator& op, const FourierState& h);

// Rows k in [k_lo, k_hi], columns l in [l_lo, l_hi].
Eigen::MatrixXcd L_matrix(const MassControlOperator& op, std::int64_t k_lo, std::int64_t k_hi,
                          std::int64_t l_lo, std::int64_t l_hi);

// Both sides of an identity of the operator. partial is the l-sum truncated to
// |l| <= l_extent, whose error is bounded by tail_bound; direct is the same
// quantity integrated exactly over F; closed is the closed form.
struct IdentityCheck {
  std::complex<double> partial;
  std::complex<double> direct;
  std::complex<double> closed;
  double gap = 0;             // |direct - closed|
  double truncation_gap = 0;  // |partial - closed|
  double tail_bound = 0;

  bool holds(double tol) const { return gap <= tol && truncation_gap <= tol + tail_bound; }
};

// L(k,l) from the table versus (1/2pi) int L(e^{ikx}) e^{-ilx} integrated directly.
IdentityCheck coefficient_identity_check(const MassControlOperator& op, std::int64_t k, std::int64_t l);
// 2pi sum_l |L(k,l)|^2 = ||L e^{ikx}||^2 = (1/|F|)(1 - 4pi^2 |g_hat(k)|^2)
IdentityCheck row_identity_check(const MassControlOperator& op, std::int64_t k, std::int64_t l_extent);
// 2pi sum_l L(k,l) conj(L(m,l)) = <L e^{ikx}, L e^{imx}> = (2pi/|F|)(g_hat(m-k) - 2pi conj(g_hat(k)) g_hat(m))
IdentityCheck inner_product_identity_check(const MassControlOperator& op, std::int64_t k, std::int64_t m,
                                           std::int64_t l_extent);

struct CoercivityBound {
  double delta = 0;
  double scanned_min = 0;  // min over 0 < |k| <= k_switch of ||L e^{ikx}||^2
  std::int64_t argmin = 0;
  double tail_lower_bound = 0;  // (1/|F|)(1 - (2m/(|F| k_switch))^2), m = n_arcs()
  std::int64_t k_switch = 0;
  bool exact = false;  // tail bound >= scanned min, so delta is the true infimum
};

// Throws NumericalError when the tail bound is not yet informative at k_switch.
CoercivityBound coercivity_delta(const MassControlOperator& op, std::int64_t k_switch);
// Doubles k_switch until the tail bound no longer decides the minimum.
CoercivityBound coercivity_delta(const MassControlOperator& op);

}  // namespace dispctl
