#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "dispctl/fourier.hpp"
#include "dispctl/mass_op.hpp"
#include "dispctl/observability.hpp"
#include "dispctl/region.hpp"

namespace dispctl {

// Linear mass-conserved control problem on the zero-mean modes 1 <= |k| <= n_max:
//   v_t = i P(D) v + L(h) 1_{E_T x F}.
// The time set E_T lives in [0, T) with T = e_t.period().
class HumSystem {
 public:
  HumSystem(IntervalUnion e_t, IntervalUnion f, LinearFlow flow, int n_max);

  const IntervalUnion& e_t() const { return e_t_; }
  double horizon() const { return e_t_.period(); }
  const MassControlOperator& op() const { return op_; }
  const LinearFlow& flow() const { return flow_; }
  int n_max() const { return n_max_; }
  int dimension() const { return 2 * n_max_; }

  // Modes in matrix order: -n_max..-1, 1..n_max.
  std::int64_t mode(int index) const { return index < n_max_ ? index - n_max_ : index - n_max_ + 1; }
  int index(std::int64_t k) const { return static_cast<int>(k < 0 ? k + n_max_ : k + n_max_ - 1); }

  // int_{E_T cap [a, b)} e^{i w s} ds
  std::complex<double> time_integral(long double w, double a, double b) const;
  std::complex<double> time_integral(long double w) const { return e_t_.exp_integral(w); }

  // (L^2 S(t) psi)^(m) = sum_k phi_coefficient(m, k) e^{i omega_k t} psi_k, from the g_hat table.
  std::complex<double> l2_coefficient(std::int64_t m, std::int64_t k) const;
  // The same coefficient integrated straight over F: L^2 e_k = |F|^{-2} 1_F (e_k - avg_F e_k).
  std::complex<double> l2_coefficient_direct(std::int64_t m, std::int64_t k) const;

  // Phi_{mk} = (L^2)_{mk} int_{E_T} e^{i(omega_k - omega_m)t} dt
  std::complex<double> phi_entry(std::int64_t m, std::int64_t k) const;

  FourierState to_state(const Eigen::VectorXcd& v) const;
  Eigen::VectorXcd to_vector(const FourierState& s) const;

 private:
  IntervalUnion e_t_;
  MassControlOperator op_;
  LinearFlow flow_;
  int n_max_;
};

// Forcing f(t) = 1_{E_T}(t) sum_j amplitude(:, j) e^{i sigma_j t}, rows indexed
// by the system's modes (the zero mode is never forced).
class ExponentialForcing {
 public:
  ExponentialForcing() = default;
  ExponentialForcing(IntervalUnion e_t, int n_max, Eigen::MatrixXcd amplitude, std::vector<long double> sigma);

  int n_max() const { return n_max_; }
  const IntervalUnion& e_t() const { return e_t_; }
  bool empty() const { return sigma_.empty(); }
  const Eigen::MatrixXcd& amplitude() const { return amp_; }
  const std::vector<long double>& sigma() const { return sigma_; }

  // f(t) on |k| <= n_max (zero outside E_T). from_left takes the mask as
  // the limit t -> t^-, for quadrature nodes sitting on a step's right end.
  FourierState value(double t, bool from_left = false) const;
  // int_{t0}^{t1} S(-tau) f(tau) d tau, exactly.
  FourierState interaction_integral(const LinearFlow& flow, double t0, double t1) const;
  // ||f||^2_{L^2([0,T] x T)}, exactly.
  double l2_norm_squared() const;

 private:
  IntervalUnion e_t_{1.0};
  int n_max_ = 0;
  Eigen::MatrixXcd amp_;  // 2 n_max x n_sigma
  std::vector<long double> sigma_;
};

// v(T) = S(T) (v0 + int_0^T S(-tau) f(tau) d tau), mode by mode.
FourierState duhamel_endpoint(const LinearFlow& flow, const FourierState& v0, const ExponentialForcing& f,
                              double t_final);

Eigen::MatrixXcd build_phi(const HumSystem& sys);
// Phi from the directly integrated L^2 coefficients, a second assembly path.
Eigen::MatrixXcd build_phi_direct(const HumSystem& sys);

// Gram of {L(e^{i omega_k t} e^{ikx})} over E_T x T, equal to 2pi Phi; normalization 2pi.
GramReport twisted_gram(const HumSystem& sys);

struct ControlSolution {
  FourierState psi;
  ExponentialForcing forcing;  // L(h) 1_{E_T x F} with h = -L S(t) psi
  FourierState endpoint;  // v(T) by exact Duhamel
  double endpoint_residual = 0;  // ||v(T) - v1|| / max(||v0||, ||v1||, 1e-14)
  double cost = 0;  // ||h||_{L^2(E_T x T)}
  double cost_constant = 0;  // cost / (||v0|| + ||v1||)
  int cg_iterations = 0;
  double cg_residual = 0;
  double condition_number = 0;
  bool dense = true;
};

// Dense Phi up to this truncation, matrix-free above.
inline constexpr int kDensePhiLimit = 256;

// Throws NumericalError on CG stagnation, with the condition estimate.
ControlSolution synthesize_control(const HumSystem& sys, const FourierState& v0, const FourierState& v1, double tol,
                                   int dense_limit = kDensePhiLimit);

}  // namespace dispctl
