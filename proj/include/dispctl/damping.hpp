#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dispctl/fourier.hpp"
#include "dispctl/region.hpp"
#include "dispctl/symbol.hpp"
#include "dispctl/trajectory.hpp"

namespace dispctl {

// a(t, x) >= 0 for i u_t + P(D) u + i a u = 0. Block n covers [nT, (n+1)T).
class DampingField {
 public:
  enum class Kind { time_independent, periodic_blocks, modulated_wave, block_indicator, custom };

  // a0 on the whole torus.
  static DampingField constant(double a0);
  // a0 1_F(x), or a0 g(x).
  static DampingField time_independent(IntervalUnion f, double a0);
  static DampingField time_independent(std::function<double(double)> g, double a0);
  // a0 1_{G0}(t mod T, x), T = g0.time_period().
  static DampingField periodic_blocks(SpaceTimeRegion g0, double a0);
  // a0 |sin(2pi t/T + xi_n)| g(x) on block n. The modulus keeps a >= 0.
  static DampingField modulated_wave(std::function<double(double)> g, double block_length, std::vector<double> xi,
                                     double a0);
  // a0 1_{G0}((t + xi_n) mod T, x) on block n.
  static DampingField block_indicator(SpaceTimeRegion g0, std::vector<double> xi, double a0);
  // Any nonnegative a. Not one of the generators; for tests of the solver.
  static DampingField from_function(std::function<double(double, double)> a, double block_length);

  Kind kind() const { return kind_; }
  std::string kind_name() const;
  double amplitude() const { return a0_; }
  double block_length() const { return block_; }
  int block_count_limit() const;  // blocks with a phase, -1 if unlimited

  double operator()(double t, double x) const;

  // int_T sup_{t in block n} a dx. Exact for indicator supports; a profile g
  // is integrated by the n_x-cell midpoint rule, a custom field sampled on
  // n_x midpoints and n_t + 1 times.
  double block_l1_linf(int block, int n_x = 2048, int n_t = 2048) const;

 private:
  DampingField() = default;
  double spatial(double x) const;
  double block_phase(int block) const;

  Kind kind_ = Kind::time_independent;
  double a0_ = 0;
  double block_ = 1;
  std::optional<IntervalUnion> support_;
  std::function<double(double)> profile_;
  SpaceTimeRegion g0_;
  std::vector<double> xi_;
  std::function<double(double, double)> custom_;
};

struct DampedSettings {
  double dt = 1e-3;
  int store_stride = 1;  // keep every stride-th step end
};

// Strang splitting on the 2 n_max + 1 point grid: free half step, multiply by
// e^{-a(t_mid, x) dt}, free half step. Throws std::invalid_argument on a < 0.
Trajectory solve_damped(const FourierState& u0, const DampingField& a, const DispersionSymbol& p, double t_total,
                        const DampedSettings& settings = {});

// | ||u(t0)||^2 - ||u(t1)||^2 - 2 int int a|u|^2 | / ||u(t0)||^2 over [t0, t1], both
// sample times of a damped run.
double energy_identity_gap(const Trajectory& traj, double t0, double t1);

struct DecayReport {
  double block_length = 0;
  std::vector<double> block_norms;  // ||u(nT)||, n = 0..K
  std::vector<double> alphas;  // ||u(nT)||^2 / ||u((n-1)T)||^2
  std::vector<double> energy_identity_gaps;
  double gamma_fit = 0;  // least squares of log ||u(nT)|| = c - gamma nT
  bool alpha_above_one = false;  // some alpha_n > 1 + alpha_tol
  bool underflow = false;  // stopped at a vanishing norm
};
// Needs at least 5 whole blocks on the sample grid.
DecayReport decay_rate(const Trajectory& traj, double block_length, double alpha_tol = 1e-12);

// ||U_n||^2 for the block propagators U_n on the same grid and step as
// solve_damped, n = 0..n_blocks-1: the contraction every datum obeys.
std::vector<double> block_contractions(const DampingField& a, const DispersionSymbol& p, int n_max, int n_blocks,
                                       double dt);

// lambda_min of the Gram of the band |k| <= n_band weighted by a_n on each
// block, a_n sampled on an n_t x n_x cell grid.
std::vector<double> block_observability(const DampingField& a, const DispersionSymbol& p, int n_blocks,
                                        std::int64_t n_band, int n_t = 64, int n_x = 128);

// sup_x |sum f_k / (p(k) - z) e^{ikx}| / ||f||_{L^1}, both on grid_n points
// (default 16 (n_max + 1), at least 256). Throws for |Im z| < 1 or f = 0.
double resolvent_ratio(const DispersionSymbol& p, std::complex<double> z, const FourierState& f, int grid_n = 0);

struct ResolventScan {
  std::vector<double> taus;
  std::vector<double> ratios;
  double max_ratio = 0;
  double argmax_tau = 0;
};
// z = tau + i s over tau = 0 and +-10^{j/m}, j = 0..m log10(tau_max).
ResolventScan resolvent_scan(const DispersionSymbol& p, const FourierState& f, double tau_max, int per_decade,
                             double s = 1.0, int grid_n = 0);

// f(t, x) piecewise constant on n_t equal time cells over [0, T), rows, and
// sampled on an odd number of x nodes, columns.
struct SpaceTimeSamples {
  double t_final = 1;
  Eigen::MatrixXcd values;
};
// ||int_0^t e^{i(t-s)P(D)} f ds||_{L^inf_x L^2_t} / ||f||_{L^1_x L^2_t}, each mode's
// Duhamel integral exact in time, L^2_t by Gauss nodes per cell, x on the grid.
double duhamel_linfty_l2_ratio(const SpaceTimeSamples& f, const DispersionSymbol& p, int gauss_per_cell = 4);

}  // namespace dispctl
