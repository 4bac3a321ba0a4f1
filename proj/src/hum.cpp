#include "dispctl/hum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "dispctl/errors.hpp"
#include "dispctl/linalg.hpp"

namespace dispctl {

HumSystem::HumSystem(IntervalUnion e_t, IntervalUnion f, LinearFlow flow, int n_max)
    : e_t_(std::move(e_t)), op_(std::move(f), 2 * std::max(n_max, 1)), flow_(std::move(flow)), n_max_(n_max) {
  if (n_max < 1) throw std::invalid_argument("HUM system needs n_max >= 1");
  if (!(e_t_.measure() > 0)) throw std::invalid_argument("control time set has zero measure");
}

std::complex<double> HumSystem::time_integral(long double w, double a, double b) const {
  return e_t_.clip(a, b).exp_integral(w);
}

std::complex<double> HumSystem::l2_coefficient(std::int64_t m, std::int64_t k) const {
  if (m == 0 || k == 0) return 0.0;
  // L^2 = L / |F|, and (L e_k)^(m) = L(k, m).
  return op_.coefficient(k, m) / op_.support_measure();
}

std::complex<double> HumSystem::l2_coefficient_direct(std::int64_t m, std::int64_t k) const {
  if (m == 0 || k == 0) return 0.0;
  const IntervalUnion& f = op_.support();
  const double mf = op_.support_measure();
  const std::complex<double> avg = f.exp_integral(static_cast<long double>(k)) / mf;
  const std::complex<double> v =
      f.exp_integral(static_cast<long double>(k - m)) - avg * f.exp_integral(-static_cast<long double>(m));
  return v / (kTwoPi * mf * mf);
}

std::complex<double> HumSystem::phi_entry(std::int64_t m, std::int64_t k) const {
  return l2_coefficient(m, k) * time_integral(flow_.frequency(k) - flow_.frequency(m));
}

FourierState HumSystem::to_state(const Eigen::VectorXcd& v) const {
  FourierState s(n_max_);
  for (int i = 0; i < dimension(); ++i) s.at(mode(i)) = v(i);
  return s;
}

Eigen::VectorXcd HumSystem::to_vector(const FourierState& s) const {
  Eigen::VectorXcd v(dimension());
  for (int i = 0; i < dimension(); ++i) v(i) = s[mode(i)];
  return v;
}

ExponentialForcing::ExponentialForcing(IntervalUnion e_t, int n_max, Eigen::MatrixXcd amplitude,
                                       std::vector<long double> sigma)
    : e_t_(std::move(e_t)), n_max_(n_max), amp_(std::move(amplitude)), sigma_(std::move(sigma)) {
  if (amp_.rows() != 2 * n_max_ || amp_.cols() != static_cast<Eigen::Index>(sigma_.size()))
    throw std::invalid_argument("forcing amplitude shape does not match its modes");
}

namespace {

std::int64_t row_mode(int i, int n) { return i < n ? i - n : i - n + 1; }

}  // namespace

FourierState ExponentialForcing::value(double t, bool from_left) const {
  FourierState s(n_max_);
  const double probe = from_left ? std::nextafter(t, -1e300) : t;
  if (sigma_.empty() || probe < 0 || probe >= e_t_.period() || !e_t_.contains(probe)) return s;
  Eigen::VectorXcd ph(static_cast<Eigen::Index>(sigma_.size()));
  for (std::size_t j = 0; j < sigma_.size(); ++j) ph(j) = phase<double>(sigma_[j], t);
  const Eigen::VectorXcd v = amp_ * ph;
  for (int i = 0; i < 2 * n_max_; ++i) s.at(row_mode(i, n_max_)) = v(i);
  return s;
}

FourierState ExponentialForcing::interaction_integral(const LinearFlow& flow, double t0, double t1) const {
  FourierState s(n_max_);
  if (sigma_.empty()) return s;
  const IntervalUnion piece = e_t_.clip(std::max(t0, 0.0), std::min(t1, e_t_.period()));
  if (piece.empty()) return s;
  for (int i = 0; i < 2 * n_max_; ++i) {
    const std::int64_t m = row_mode(i, n_max_);
    const long double wm = flow.frequency(m);
    std::complex<double> acc = 0;
    for (std::size_t j = 0; j < sigma_.size(); ++j) {
      if (amp_(i, j) == 0.0) continue;
      acc += amp_(i, j) * piece.exp_integral(sigma_[j] - wm);
    }
    s.at(m) = acc;
  }
  return s;
}

double ExponentialForcing::l2_norm_squared() const {
  const Eigen::Index n = static_cast<Eigen::Index>(sigma_.size());
  Eigen::MatrixXcd g(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) g(a, b) = e_t_.exp_integral(sigma_[a] - sigma_[b]);
  // int |sum_j A_mj e^{i s_j t}|^2 = A_m. G A_m.^*, summed over modes.
  return kTwoPi * (amp_ * g * amp_.adjoint()).trace().real();
}

FourierState duhamel_endpoint(const LinearFlow& flow, const FourierState& v0, const ExponentialForcing& f,
                              double t_final) {
  const int n = std::max(v0.n_max(), f.n_max());
  FourierState acc = v0.resized(n);
  if (!f.empty()) acc += f.interaction_integral(flow, 0.0, t_final).resized(n);
  return evolve_free(acc, flow, t_final);
}

namespace {

template <typename Entry>
Eigen::MatrixXcd assemble(const HumSystem& sys, Entry&& entry) {
  const int d = sys.dimension();
  Eigen::MatrixXcd phi(d, d);
  for (int r = 0; r < d; ++r) {
    phi(r, r) = entry(sys.mode(r), sys.mode(r)).real();
    for (int c = r + 1; c < d; ++c) {
      phi(r, c) = entry(sys.mode(r), sys.mode(c));
      phi(c, r) = std::conj(phi(r, c));
    }
  }
  return phi;
}

}  // namespace

Eigen::MatrixXcd build_phi(const HumSystem& sys) {
  return assemble(sys, [&](std::int64_t m, std::int64_t k) { return sys.phi_entry(m, k); });
}

Eigen::MatrixXcd build_phi_direct(const HumSystem& sys) {
  return assemble(sys, [&](std::int64_t m, std::int64_t k) {
    return sys.l2_coefficient_direct(m, k) *
           sys.time_integral(sys.flow().frequency(k) - sys.flow().frequency(m));
  });
}

GramReport twisted_gram(const HumSystem& sys) {
  GramReport rep = make_gram_report(kTwoPi * build_phi(sys), kTwoPi);
  std::vector<LatticePoint> pts;
  for (int i = 0; i < sys.dimension(); ++i) pts.push_back({sys.mode(i), sys.flow().symbol(sys.mode(i))});
  rep.theta = set_theta(pts);
  return rep;
}

ControlSolution synthesize_control(const HumSystem& sys, const FourierState& v0, const FourierState& v1,
                                   double tol, int dense_limit) {
  if (!v0.is_zero_mean() || !v1.is_zero_mean()) throw std::invalid_argument("HUM data must have zero mean");
  if (v0.n_max() > sys.n_max() || v1.n_max() > sys.n_max())
    throw std::invalid_argument("HUM data wider than the system truncation");
  if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
  const int n = sys.n_max();
  const int d = sys.dimension();
  const double t_final = sys.horizon();
  const FourierState a = v0.resized(n), b = v1.resized(n);
  const Eigen::VectorXcd rhs = sys.to_vector(a - evolve_free(b, sys.flow(), -t_final));

  ControlSolution sol;
  sol.dense = n <= dense_limit;
  Eigen::MatrixXcd phi;
  std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)> apply;
  if (sol.dense) {
    phi = build_phi(sys);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(phi, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0), lmax = es.eigenvalues()(d - 1);
    if (!(lmin > 0)) {
      std::ostringstream os;
      os << "Phi is not positive definite: lambda_min = " << lmin << ", lambda_max = " << lmax;
      throw NumericalError(os.str());
    }
    sol.condition_number = lmax / lmin;
    apply = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return phi * v; };
  } else {
    apply = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
      Eigen::VectorXcd out(d);
      for (int r = 0; r < d; ++r) {
        std::complex<double> acc = 0;
        for (int c = 0; c < d; ++c) acc += sys.phi_entry(sys.mode(r), sys.mode(c)) * v(c);
        out(r) = acc;
      }
      return out;
    };
  }

  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(d);
  const auto cg = conjugate_gradient<std::complex<double>>(apply, rhs, psi, tol, 20 * d + 100);
  sol.cg_iterations = cg.iterations;
  sol.cg_residual = cg.relative_residual;
  if (!sol.dense) sol.condition_number = cg.condition_estimate;
  if (!cg.converged) {
    std::ostringstream os;
    os << "CG stalled at relative residual " << cg.relative_residual << " after " << cg.iterations
       << " iterations; condition number ~ " << (sol.dense ? sol.condition_number : cg.condition_estimate);
    throw NumericalError(os.str());
  }
  sol.psi = sys.to_state(psi);

  // Forcing L(h) = -L^2 S(t) psi on E_T, from the directly integrated coefficients.
  Eigen::MatrixXcd amp(d, d);
  std::vector<long double> sigma(d);
  for (int c = 0; c < d; ++c) {
    const std::int64_t k = sys.mode(c);
    sigma[c] = sys.flow().frequency(k);
    for (int r = 0; r < d; ++r) amp(r, c) = -sys.l2_coefficient_direct(sys.mode(r), k) * psi(c);
  }
  sol.forcing = ExponentialForcing(sys.e_t(), n, std::move(amp), std::move(sigma));
  sol.endpoint = duhamel_endpoint(sys.flow(), a, sol.forcing, t_final);
  const double scale = std::max({l2_norm(a), l2_norm(b), 1e-14});
  sol.endpoint_residual = l2_norm(sol.endpoint - b) / scale;
  sol.cost = std::sqrt(std::max(0.0, kTwoPi * psi.dot(apply(psi)).real()));
  const double data = l2_norm(a) + l2_norm(b);
  sol.cost_constant = data > 0 ? sol.cost / data : 0.0;
  return sol;
}

}  // namespace dispctl
