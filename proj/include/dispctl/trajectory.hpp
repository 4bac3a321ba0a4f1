#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dispctl/fourier.hpp"

namespace dispctl {

struct Trajectory {
  std::vector<double> times;  // increasing, from 0
  std::vector<FourierState> states;  // u(t_j), mean included
  double mean = 0;  // KdV: M, the mean of u0
  LinearFlow flow;  // KdV: flow of v, drift -M; damped runs: p with no drift
  bool forced = false;
  double forcing_l2 = 0;  // ||f||_{L^2([0,T] x T)} of the control
  double dt = 0;
  std::string scheme;
  int grid_points = 0;
  double dealias_fraction = 2.0 / 3.0;
  // int_0^T S(-tau)(v v_x) dtau as the integrator applied it, stage by stage.
  // Empty for trajectories not produced by integrate_kdv.
  std::optional<FourierState> stage_integral;
  // Damped runs: 2 int_0^{t_j} int a |u|^2 at each sample, accumulated by
  // Simpson on every step while the solver runs.
  std::vector<double> dissipation;
};

// max_t |mean u(t) - mean u(0)|
double mass_drift(const Trajectory& traj);

// max_j ||a(t_j) - b(t_j)||; the sample grids must agree.
double trajectory_distance(const Trajectory& a, const Trajectory& b);

// t, then Re/Im of u_hat(k) for k = -n_max..n_max.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace dispctl
