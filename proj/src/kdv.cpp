#include "dispctl/kdv.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dispctl/errors.hpp"
#include "dispctl/grid.hpp"

namespace dispctl {

namespace {

using Vec = Eigen::VectorXcd;

int default_grid(int n_max) {
  int n = 4;
  while (n < 3 * n_max + 1) n *= 2;
  return n;
}

// Advances the mean-reduced v in coefficient vectors ordered k = -n..n.
class Stepper {
 public:
  Stepper(int n_max, LinearFlow flow, const ExponentialForcing* control, const KdvSettings& settings)
      : n_(n_max), flow_(std::move(flow)), control_(control && !control->empty() ? control : nullptr),
        settings_(settings), grid_(settings.grid_points > 0 ? settings.grid_points : default_grid(n_max)) {
    if (grid_.size() < 3 * n_max + 1)
      throw AliasingError("quadratic term on |k| <= " + std::to_string(n_max) + " needs " +
                          std::to_string(3 * n_max + 1) + " grid points, got " + std::to_string(grid_.size()));
    if (control_ && control_->n_max() > n_max)
      throw std::invalid_argument("control is wider than the state truncation");
    omega_.resize(2 * n_ + 1);
    for (int k = -n_; k <= n_; ++k) omega_[k + n_] = flow_.frequency(k);
  }

  int grid_points() const { return grid_.size(); }

  // Returns the increment of int S(-tau)(v v_x) over the step.
  Vec step(Vec& v, double t, double h) {
    const Vec w = phases(-t).cwiseProduct(v);
    const double th = t + 0.5 * h, t1 = t + h;
    Vec k1, k2, k3, k4, n1, n2, n3, n4;
    double forcing_size = 0;
    if (settings_.scheme == ForcingScheme::exact) {
      const Vec fh = forcing_integral(t, 0.5 * h);
      const Vec f1 = fh + forcing_integral(th, 0.5 * h);
      forcing_size = f1.norm();
      stage(t, w, nullptr, false, k1, n1);
      stage(th, w + 0.5 * h * k1 + fh, nullptr, false, k2, n2);
      stage(th, w + 0.5 * h * k2 + fh, nullptr, false, k3, n3);
      stage(t1, w + h * k3 + f1, nullptr, false, k4, n4);
      v = phases(t1).cwiseProduct(w + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4) + f1);
    } else {
      stage(t, w, &forcing_size, false, k1, n1);
      stage(th, w + 0.5 * h * k1, &forcing_size, false, k2, n2);
      stage(th, w + 0.5 * h * k2, &forcing_size, false, k3, n3);
      stage(t1, w + h * k3, &forcing_size, true, k4, n4);
      forcing_size *= h;
      v = phases(t1).cwiseProduct(w + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4));
    }
    if (!v.allFinite()) throw NumericalError("KdV state became non-finite at t = " + std::to_string(t1));
    const double before = w.norm(), after = v.norm();
    if (after > 10 * (before + forcing_size)) {
      std::ostringstream os;
      os << "blow-up: norm grew from " << before << " to " << after << " in the step ending at t = " << t1;
      throw NumericalError(os.str());
    }
    return -(h / 6) * (n1 + 2 * n2 + 2 * n3 + n4);
  }

 private:
  Vec phases(double t) const {
    Vec p(2 * n_ + 1);
    for (int i = 0; i <= 2 * n_; ++i) p(i) = phase<double>(omega_[i], t);
    return p;
  }

  // -(v v_x)^ on |k| <= n, exact for a grid of 3n+1 points or more.
  Vec nonlinear(const Vec& v) {
    const FourierState s(n_, v);
    const auto g = grid_.to_grid(s);
    const FourierState sq = grid_.from_grid(g.cwiseProduct(g), n_);
    Vec out(2 * n_ + 1);
    for (int k = -n_; k <= n_; ++k) out(k + n_) = std::complex<double>(0, -0.5 * k) * sq[k];
    return out;
  }

  Vec pad(const FourierState& f) const {
    Vec out = Vec::Zero(2 * n_ + 1);
    const int m = std::min(f.n_max(), n_);
    for (int k = -m; k <= m; ++k) out(k + n_) = f[k];
    return out;
  }

  // Interaction-picture stage: derivative and its nonlinear part.
  void stage(double t, const Vec& w, double* sampled, bool from_left, Vec& deriv, Vec& nl) {
    const Vec pf = phases(t);
    const Vec v = pf.cwiseProduct(w);
    Vec rhs = nonlinear(v);
    nl = pf.conjugate().cwiseProduct(rhs);
    if (sampled) {
      if (control_) {
        const Vec f = pad(control_->value(t, from_left));
        *sampled = std::max(*sampled, f.norm());
        rhs += f;
      }
    }
    if (settings_.perturbation) rhs += pad(settings_.perturbation(t));
    deriv = pf.conjugate().cwiseProduct(rhs);
  }

  // int_a^{a+h} S(-s) f(s) ds with f the control. Pieces inside one interval
  // of E_T reuse the kernel int_0^h e^{i(sigma_j - omega_m)s} ds.
  Vec forcing_integral(double a, double h) {
    const double b = a + h;
    Vec out = Vec::Zero(2 * n_ + 1);
    if (!control_) return out;
    const IntervalUnion piece = control_->e_t().clip(std::max(a, 0.0), std::min(b, control_->e_t().period()));
    if (piece.empty()) return out;
    const int nf = control_->n_max();
    const auto& sigma = control_->sigma();
    const Eigen::MatrixXcd& amp = control_->amplitude();
    const bool whole = piece.size() == 1 && piece.intervals()[0].lo == a && piece.intervals()[0].hi == b;
    if (!whole) return pad(control_->interaction_integral(flow_, a, b));
    if (kernel_.size() == 0 || kernel_h_ != h) {
      kernel_.resize(amp.rows(), amp.cols());
      for (Eigen::Index r = 0; r < amp.rows(); ++r) {
        const long double wm = flow_.frequency(r < nf ? r - nf : r - nf + 1);
        for (Eigen::Index j = 0; j < amp.cols(); ++j)
          kernel_(r, j) = amp(r, j) * exp_integral<double>(sigma[j] - wm, 0.0L, static_cast<long double>(h));
      }
      kernel_h_ = h;
    }
    Vec ps(amp.cols());
    for (Eigen::Index j = 0; j < amp.cols(); ++j) ps(j) = phase<double>(sigma[j], a);
    const Vec rows = kernel_ * ps;
    for (Eigen::Index r = 0; r < amp.rows(); ++r) {
      const std::int64_t m = r < nf ? r - nf : r - nf + 1;
      out(m + n_) = rows(r) * phase<double>(-flow_.frequency(m), a);
    }
    return out;
  }

  int n_;
  LinearFlow flow_;
  const ExponentialForcing* control_;
  const KdvSettings& settings_;
  GridTransform<double> grid_;
  std::vector<long double> omega_;
  Eigen::MatrixXcd kernel_;
  double kernel_h_ = 0;
};

}  // namespace

FourierState nonlinear_term(const FourierState& v, int grid_points) {
  const int nm = v.n_max();
  GridTransform<double> grid(grid_points > 0 ? grid_points : default_grid(nm));
  if (grid.size() < 3 * nm + 1) throw AliasingError("grid too coarse for the quadratic term");
  const auto g = grid.to_grid(v);
  const FourierState sq = grid.from_grid(g.cwiseProduct(g), nm);
  FourierState out(nm);
  for (int k = -nm; k <= nm; ++k) out.at(k) = std::complex<double>(0, -0.5 * k) * sq[k];
  return out;
}

namespace {

double mean_of(const FourierState& u) { return u[0].real(); }

FourierState reduce(const FourierState& u, double mean) {
  FourierState v = u;
  v.at(0) -= mean;
  return v;
}

}  // namespace

FourierState step_forced(const FourierState& u, const ExponentialForcing* control, double t, double dt,
                         const KdvSettings& settings) {
  if (!(dt > 0)) throw std::invalid_argument("time step must be positive");
  const double mean = mean_of(u);
  Stepper st(u.n_max(), LinearFlow{DispersionSymbol::cubic(), -mean}, control, settings);
  Vec v = reduce(u, mean).coeffs();
  st.step(v, t, dt);
  FourierState out(u.n_max(), v);
  out.at(0) += mean;
  return out;
}

Trajectory integrate_kdv(const FourierState& u0, const ExponentialForcing* control, double t_final,
                         const KdvSettings& settings) {
  if (!(t_final > 0) || !(settings.dt > 0)) throw std::invalid_argument("horizon and time step must be positive");
  const int steps = static_cast<int>(std::ceil(t_final / settings.dt - 1e-9));
  const double h = t_final / steps;
  Trajectory tr;
  tr.mean = mean_of(u0);
  tr.flow = LinearFlow{DispersionSymbol::cubic(), -tr.mean};
  tr.forced = control && !control->empty();
  tr.forcing_l2 = tr.forced ? std::sqrt(control->l2_norm_squared()) : 0.0;
  tr.dt = h;
  tr.scheme = settings.scheme == ForcingScheme::exact ? "if-rk4/exact-forcing" : "if-rk4/substage-forcing";
  Stepper st(u0.n_max(), tr.flow, control, settings);
  tr.grid_points = st.grid_points();
  Vec v = reduce(u0, tr.mean).coeffs();
  Vec integral = Vec::Zero(v.size());
  tr.times.reserve(steps + 1);
  tr.states.reserve(steps + 1);
  tr.times.push_back(0.0);
  tr.states.push_back(u0);
  for (int j = 0; j < steps; ++j) {
    integral += st.step(v, j * h, h);
    FourierState u(u0.n_max(), v);
    u.at(0) += tr.mean;
    tr.times.push_back(j + 1 == steps ? t_final : (j + 1) * h);
    tr.states.push_back(std::move(u));
  }
  tr.stage_integral = FourierState(u0.n_max(), integral);
  return tr;
}

FourierState duhamel_correction(const Trajectory& traj) {
  if (!traj.stage_integral) return duhamel_correction_samples(traj);
  FourierState v1 = evolve_free(*traj.stage_integral, traj.flow, traj.times.back());
  v1.at(0) = 0;
  return v1;
}

FourierState duhamel_correction_samples(const Trajectory& traj) {
  const std::size_t n = traj.times.size();
  if (n < 2) throw std::invalid_argument("trajectory needs at least two samples");
  const int nm = traj.states.front().n_max();
  const double h = traj.times[1] - traj.times[0];
  for (std::size_t j = 1; j < n; ++j)
    if (std::abs(traj.times[j] - traj.times[j - 1] - h) > 1e-9 * h)
      throw std::invalid_argument("Simpson quadrature needs uniform samples");
  // S(-t)(v v_x)(t) at every sample.
  auto integrand = [&](std::size_t j) {
    return evolve_free(-1.0 * nonlinear_term(reduce(traj.states[j], traj.mean)), traj.flow, -traj.times[j]);
  };
  const std::size_t intervals = n - 1;
  FourierState acc(nm);
  auto add = [&](std::size_t j, double w) { acc += (w * h) * integrand(j); };
  std::size_t simpson_end = intervals;
  if (intervals == 1) {
    add(0, 0.5);
    add(1, 0.5);
    simpson_end = 0;
  } else if (intervals % 2 == 1) {
    // 3/8 rule on the last three intervals.
    simpson_end = intervals - 3;
    add(simpson_end, 3.0 / 8);
    add(simpson_end + 1, 9.0 / 8);
    add(simpson_end + 2, 9.0 / 8);
    add(simpson_end + 3, 3.0 / 8);
  }
  for (std::size_t j = 0; j + 2 <= simpson_end; j += 2) {
    add(j, 1.0 / 3);
    add(j + 1, 4.0 / 3);
    add(j + 2, 1.0 / 3);
  }
  FourierState v1 = evolve_free(acc, traj.flow, traj.times.back());
  v1.at(0) = 0;
  return v1;
}

namespace {

struct Reduced {
  double mean;
  FourierState u0, u1, v0, w1;
};

Reduced reduce_data(const FourierState& u0, const FourierState& u1, const HumSystem& sys) {
  const int n = sys.n_max();
  if (u0.n_max() > n || u1.n_max() > n) throw std::invalid_argument("data wider than the control truncation");
  const double scale = std::max({1.0, l2_norm(u0), l2_norm(u1)});
  if (std::abs(u0[0] - u1[0]) > 1e-13 * scale)
    throw std::invalid_argument("u0 and u1 have different means; the mass is conserved");
  if (std::abs(u0[0].imag()) > 0) throw std::invalid_argument("complex mean");
  Reduced r;
  r.mean = u0[0].real();
  if (!(sys.flow().symbol == DispersionSymbol::cubic()) ||
      std::abs(sys.flow().drift + r.mean) > 1e-14 * std::max(1.0, std::abs(r.mean)))
    throw std::invalid_argument("control system must use p(k) = k^3 with drift -M");
  r.u0 = u0.resized(n);
  r.u1 = u1.resized(n);
  r.u1.at(0) = r.u0[0];
  r.v0 = reduce(r.u0, r.mean);
  r.w1 = reduce(r.u1, r.mean);
  r.v0.at(0) = 0;
  r.w1.at(0) = 0;
  return r;
}

PicardIterate apply_psi(const Reduced& d, const FourierState& v1, const HumSystem& sys, const PicardSettings& s) {
  PicardIterate it;
  it.v1 = v1;
  it.control = synthesize_control(sys, d.v0, d.w1 + v1, s.cg_tol);
  it.trajectory = integrate_kdv(d.u0, &it.control.forcing, sys.horizon(), s.integrator);
  it.endpoint_error = l2_norm(it.trajectory.states.back() - d.u1);
  return it;
}

}  // namespace

PicardRun picard_control(const FourierState& u0, const FourierState& u1, const HumSystem& sys,
                         const PicardSettings& settings) {
  if (!(settings.tol > 0) || settings.max_iter < 1) throw std::invalid_argument("Picard needs tol > 0 and max_iter >= 1");
  const Reduced d = reduce_data(u0, u1, sys);
  PicardRun run;
  run.data_size = l2_norm(d.v0) + l2_norm(d.w1);
  std::vector<double> dist;
  int growth = 0;
  try {
    FourierState v1(sys.n_max());
    for (int n = 0; n < settings.max_iter; ++n) {
      run.iterates.push_back(apply_psi(d, v1, sys, settings));
      const PicardIterate& cur = run.iterates.back();
      if (n > 0) {
        const PicardIterate& prev = run.iterates[n - 1];
        dist.push_back(trajectory_distance(cur.trajectory, prev.trajectory));
        if (dist.size() >= 2 && dist[dist.size() - 2] > 0)
          run.contraction_estimates.push_back(dist.back() / dist[dist.size() - 2]);
        growth = cur.endpoint_error > prev.endpoint_error ? growth + 1 : 0;
      }
      if (!std::isfinite(cur.endpoint_error)) throw NumericalError("endpoint error is not finite");
      if (cur.endpoint_error <= settings.tol) {
        run.converged = true;
        break;
      }
      if (growth >= 3) {
        run.diverged = true;
        break;
      }
      v1 = duhamel_correction(cur.trajectory);
    }
    if (run.converged) {
      const PicardIterate& fin = run.iterates.back();
      const PicardIterate again = apply_psi(d, duhamel_correction(fin.trajectory), sys, settings);
      run.fixed_point_shift = trajectory_distance(again.trajectory, fin.trajectory);
      if (!dist.empty() && dist.back() > 0) run.contraction_estimates.push_back(run.fixed_point_shift / dist.back());
    }
  } catch (const NumericalError& e) {
    run.diverged = true;
    run.failure = e.what();
  }
  if (!run.contraction_estimates.empty()) {
    run.contraction_factor = *std::max_element(run.contraction_estimates.begin(), run.contraction_estimates.end());
    run.radius_estimate = *run.contraction_factor > 0 ? 0.5 * run.data_size / *run.contraction_factor
                                                      : std::numeric_limits<double>::infinity();
  }
  if (!run.iterates.empty()) run.mass_drift = mass_drift(run.iterates.back().trajectory);
  if (!run.converged && run.failure.empty()) {
    std::ostringstream os;
    os << (run.diverged ? "endpoint error grew for 3 consecutive iterates" : "no convergence within max_iter")
       << "; data size " << run.data_size << ", measured contraction "
       << (run.contraction_factor ? std::to_string(*run.contraction_factor) : std::string("n/a"));
    run.failure = os.str();
  } else if (!run.failure.empty()) {
    std::ostringstream os;
    os << run.failure << "; data size " << run.data_size;
    run.failure = os.str();
  }
  return run;
}

double dt_refinement_change(const PicardRun& run, const FourierState& u0, const FourierState& u1,
                            const HumSystem& sys, const PicardSettings& settings) {
  if (run.iterates.empty()) throw std::invalid_argument("empty Picard run");
  const Reduced d = reduce_data(u0, u1, sys);
  const PicardIterate& fin = run.iterates.back();
  KdvSettings fine = settings.integrator;
  fine.dt *= 0.5;
  const Trajectory tr = integrate_kdv(d.u0, &fin.control.forcing, sys.horizon(), fine);
  const double e_half = l2_norm(tr.states.back() - d.u1);
  const double e = fin.endpoint_error;
  if (e == 0) return e_half == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(e_half - e) / e;
}

}  // namespace dispctl
