#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dispctl/fourier.hpp"
#include "dispctl/hum.hpp"
#include "dispctl/trajectory.hpp"

namespace dispctl {

// u_t + u_xxx + u u_x = f on |k| <= n_max, written as u = M + v with
// v_t = i omega(D) v - v v_x + f, omega(k) = k^3 - M k.
enum class ForcingScheme {
  exact,  // int S(-tau) f over each stage interval in closed form
  substage,  // f sampled at the RK stage times, mask taken at those times
};

struct KdvSettings {
  double dt = 1e-3;
  ForcingScheme scheme = ForcingScheme::exact;
  int grid_points = 0;  // 0: smallest power of two >= 3 n_max + 1
  // Extra forcing sampled at stage times, on top of the control. Test hook
  // for the mass-drift detector; leave empty otherwise.
  std::function<FourierState(double)> perturbation;
};

// -(v v_x)^ on |k| <= v.n_max(), from the product on a grid of grid_points
// (default as in KdvSettings). Exact, so Re <v, N(v)> vanishes up to rounding.
FourierState nonlinear_term(const FourierState& v, int grid_points = 0);

// One integrating-factor RK4 step of size dt from time t. Throws
// NumericalError when the norm grows more than 10x in the step.
FourierState step_forced(const FourierState& u, const ExponentialForcing* control, double t, double dt,
                         const KdvSettings& settings = {});

// Integrates to t_final with dt shrunk so that it divides t_final.
Trajectory integrate_kdv(const FourierState& u0, const ExponentialForcing* control, double t_final,
                         const KdvSettings& settings = {});

// v1 = int_0^T S(T - tau)(u u_x)(tau) dtau for the mean-reduced flow. Uses
// the integrator's stage quadrature when present, else composite Simpson
// over the samples in the interaction picture.
FourierState duhamel_correction(const Trajectory& traj);
FourierState duhamel_correction_samples(const Trajectory& traj);

struct PicardIterate {
  Trajectory trajectory;
  FourierState v1;  // correction the control was built for
  ControlSolution control;
  double endpoint_error = 0;  // ||u(T) - u1||
};

struct PicardSettings {
  int max_iter = 20;
  double tol = 1e-6;
  double cg_tol = 1e-13;
  KdvSettings integrator;
};

struct PicardRun {
  std::vector<PicardIterate> iterates;
  std::vector<double> contraction_estimates;  // d(n+1, n) / d(n, n-1) in C_t L^2_x
  std::optional<double> contraction_factor;  // max of the estimates
  bool converged = false;
  bool diverged = false;
  std::string failure;  // empty unless the run stopped early
  double data_size = 0;  // ||u0 - M|| + ||u1 - M||
  // Data size at which the measured contraction would reach 1/2, assuming
  // it scales linearly with the data. Empirical, not a proven radius.
  double radius_estimate = 0;
  double fixed_point_shift = -1;  // ||Psi(u*) - u*||, -1 if not measured
  double mass_drift = 0;  // over the final trajectory
};

// Iterates u -> solution of the forced KdV with control K(u0, u1 + v1(u))
// until ||u(T) - u1|| <= tol. sys must carry the flow of the mean-reduced
// data (drift -M). Numerical failures are reported, not thrown.
PicardRun picard_control(const FourierState& u0, const FourierState& u1, const HumSystem& sys,
                         const PicardSettings& settings = {});

// |e(dt/2) - e(dt)| / e(dt) for the final control of a run, re-integrated.
double dt_refinement_change(const PicardRun& run, const FourierState& u0, const FourierState& u1,
                            const HumSystem& sys, const PicardSettings& settings);

}  // namespace dispctl
