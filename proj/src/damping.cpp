#include "dispctl/damping.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dispctl/grid.hpp"
#include "dispctl/observability.hpp"

namespace dispctl {

namespace {

double wrap_x(double x) {
  double r = std::fmod(x, kTwoPi);
  return r < 0 ? r + kTwoPi : r;
}

}  // namespace

DampingField DampingField::constant(double a0) { return time_independent(IntervalUnion::full(), a0); }

DampingField DampingField::time_independent(IntervalUnion f, double a0) {
  if (!(a0 >= 0)) throw std::invalid_argument("damping amplitude must be nonnegative");
  DampingField d;
  d.kind_ = Kind::time_independent;
  d.a0_ = a0;
  d.support_ = std::move(f);
  return d;
}

DampingField DampingField::time_independent(std::function<double(double)> g, double a0) {
  if (!(a0 >= 0)) throw std::invalid_argument("damping amplitude must be nonnegative");
  DampingField d;
  d.kind_ = Kind::time_independent;
  d.a0_ = a0;
  d.profile_ = std::move(g);
  return d;
}

DampingField DampingField::periodic_blocks(SpaceTimeRegion g0, double a0) {
  if (!(a0 >= 0)) throw std::invalid_argument("damping amplitude must be nonnegative");
  DampingField d;
  d.kind_ = Kind::periodic_blocks;
  d.a0_ = a0;
  d.block_ = g0.time_period();
  d.g0_ = std::move(g0);
  return d;
}

DampingField DampingField::modulated_wave(std::function<double(double)> g, double block_length,
                                          std::vector<double> xi, double a0) {
  if (!(a0 >= 0)) throw std::invalid_argument("damping amplitude must be nonnegative");
  if (!(block_length > 0)) throw std::invalid_argument("block length must be positive");
  DampingField d;
  d.kind_ = Kind::modulated_wave;
  d.a0_ = a0;
  d.block_ = block_length;
  d.profile_ = std::move(g);
  d.xi_ = std::move(xi);
  return d;
}

DampingField DampingField::block_indicator(SpaceTimeRegion g0, std::vector<double> xi, double a0) {
  if (!(a0 >= 0)) throw std::invalid_argument("damping amplitude must be nonnegative");
  DampingField d;
  d.kind_ = Kind::block_indicator;
  d.a0_ = a0;
  d.block_ = g0.time_period();
  d.g0_ = std::move(g0);
  d.xi_ = std::move(xi);
  for (double& x : d.xi_) {
    x = std::fmod(x, d.block_);
    if (x < 0) x += d.block_;
  }
  return d;
}

DampingField DampingField::from_function(std::function<double(double, double)> a, double block_length) {
  if (!(block_length > 0)) throw std::invalid_argument("block length must be positive");
  DampingField d;
  d.kind_ = Kind::custom;
  d.a0_ = 1;
  d.block_ = block_length;
  d.custom_ = std::move(a);
  return d;
}

std::string DampingField::kind_name() const {
  switch (kind_) {
    case Kind::time_independent: return "time_independent";
    case Kind::periodic_blocks: return "periodic_blocks";
    case Kind::modulated_wave: return "modulated_wave";
    case Kind::block_indicator: return "block_indicator";
    case Kind::custom: return "custom";
  }
  return "unknown";
}

int DampingField::block_count_limit() const {
  if (kind_ == Kind::modulated_wave || kind_ == Kind::block_indicator) return static_cast<int>(xi_.size());
  return -1;
}

double DampingField::spatial(double x) const {
  if (support_) return support_->contains(wrap_x(x)) ? 1.0 : 0.0;
  return profile_(wrap_x(x));
}

double DampingField::block_phase(int block) const {
  if (block < 0 || block >= static_cast<int>(xi_.size()))
    throw std::out_of_range("damping field has no phase for block " + std::to_string(block));
  return xi_[block];
}

double DampingField::operator()(double t, double x) const {
  switch (kind_) {
    case Kind::time_independent:
      return a0_ * spatial(x);
    case Kind::periodic_blocks: {
      double s = std::fmod(t, block_);
      if (s < 0) s += block_;
      return g0_.contains(s, wrap_x(x)) ? a0_ : 0.0;
    }
    case Kind::modulated_wave: {
      const int n = static_cast<int>(std::floor(t / block_));
      const double s = t - n * block_;
      return a0_ * std::abs(std::sin(kTwoPi * s / block_ + block_phase(n))) * profile_(wrap_x(x));
    }
    case Kind::block_indicator: {
      const int n = static_cast<int>(std::floor(t / block_));
      double s = std::fmod(t - n * block_ + block_phase(n), block_);
      if (s < 0) s += block_;
      return g0_.contains(s, wrap_x(x)) ? a0_ : 0.0;
    }
    case Kind::custom:
      return custom_(t, x);
  }
  return 0;
}

double DampingField::block_l1_linf(int block, int n_x, int n_t) const {
  if (n_x < 1 || n_t < 1) throw std::invalid_argument("sampling grid must be nonempty");
  auto profile_integral = [&]() {
    if (support_) return support_->measure();
    double acc = 0;
    for (int j = 0; j < n_x; ++j) acc += profile_((j + 0.5) * kTwoPi / n_x);
    return acc * kTwoPi / n_x;
  };
  switch (kind_) {
    case Kind::time_independent:
      return a0_ * profile_integral();
    case Kind::modulated_wave:
      // A block spans a whole period of the modulation, so sup |sin| = 1.
      block_phase(block);
      return a0_ * profile_integral();
    case Kind::periodic_blocks:
    case Kind::block_indicator: {
      if (kind_ == Kind::block_indicator) block_phase(block);
      // A shift mod T is a rotation of the block, so sup_t 1_{G_n}(t, x) is
      // 1 exactly on the union of the space factors.
      IntervalUnion shadow;
      for (const Rectangle& r : g0_.rectangles())
        if (r.time.measure() > 0) shadow = unite(shadow, r.space);
      return a0_ * shadow.measure();
    }
    case Kind::custom: {
      double acc = 0;
      for (int j = 0; j < n_x; ++j) {
        const double x = (j + 0.5) * kTwoPi / n_x;
        double sup = 0;
        for (int i = 0; i <= n_t; ++i) sup = std::max(sup, custom_(block * block_ + block_ * i / n_t, x));
        acc += sup;
      }
      return acc * kTwoPi / n_x;
    }
  }
  return 0;
}

namespace {

using Vec = Eigen::VectorXcd;

// Coefficients in FFT order on the n = 2 n_max + 1 point grid.
class DampedPropagator {
 public:
  DampedPropagator(int n_max, const DispersionSymbol& p, const DampingField& a, double h)
      : n_max_(n_max), n_(2 * n_max + 1), a_(a), h_(h), half_(n_) {
    fft_.SetFlag(Eigen::FFT<double>::Unscaled);
    for (int i = 0; i < n_; ++i) half_(i) = phase<double>(static_cast<long double>(p(mode(i))), 0.5L * h);
  }

  int size() const { return n_; }
  int mode(int i) const { return i <= n_max_ ? i : i - n_; }
  double node(int j) const { return kTwoPi * j / n_; }

  Vec to_fft(const FourierState& s) const {
    Vec c(n_);
    for (int i = 0; i < n_; ++i) c(i) = s[mode(i)];
    return c;
  }
  FourierState from_fft(const Vec& c) const {
    FourierState s(n_max_);
    for (int i = 0; i < n_; ++i) s.at(mode(i)) = c(i);
    return s;
  }

  // e^{-a(t, x_j) h}, refusing negative a.
  Eigen::VectorXd damping(double t, Eigen::VectorXd* a_values = nullptr) const {
    Eigen::VectorXd m(n_);
    if (a_values) a_values->resize(n_);
    for (int j = 0; j < n_; ++j) {
      const double a = a_(t, node(j));
      if (!(a >= 0)) {
        std::ostringstream os;
        os << "negative damping a(" << t << ", " << node(j) << ") = " << a;
        throw std::invalid_argument(os.str());
      }
      m(j) = std::exp(-a * h_);
      if (a_values) (*a_values)(j) = a;
    }
    return m;
  }

  Vec grid(const Vec& c) {
    Vec g(n_);
    fft_.inv(g, c);
    return g;
  }
  Vec coeffs(const Vec& g) {
    Vec c(n_);
    fft_.fwd(c, g);
    return c / static_cast<double>(n_);
  }

  const Vec& half() const { return half_; }

 private:
  int n_max_;
  int n_;
  const DampingField& a_;
  double h_;
  Vec half_;
  Eigen::FFT<double> fft_;
};

// int a |u|^2 dx on the grid.
double weighted_energy(const Eigen::VectorXd& a, const Vec& g) {
  return kTwoPi / static_cast<double>(g.size()) * (a.array() * g.cwiseAbs2().array()).sum();
}

// a just inside a step end. The probe sits 1e-6 h in, so a switch in time
// that rounding moves off the step boundary still counts as on it.
Eigen::VectorXd one_sided(const DampingField& a, double t, double inward, const DampedPropagator& prop) {
  Eigen::VectorXd v(prop.size());
  for (int j = 0; j < prop.size(); ++j) v(j) = a(t + 1e-6 * inward, prop.node(j));
  return v;
}

}  // namespace

Trajectory solve_damped(const FourierState& u0, const DampingField& a, const DispersionSymbol& p, double t_total,
                        const DampedSettings& settings) {
  if (!(t_total > 0) || !(settings.dt > 0)) throw std::invalid_argument("horizon and time step must be positive");
  if (settings.store_stride < 1) throw std::invalid_argument("store stride must be >= 1");
  const int steps = static_cast<int>(std::ceil(t_total / settings.dt - 1e-9));
  const double h = t_total / steps;
  DampedPropagator prop(u0.n_max(), p, a, h);
  Trajectory tr;
  tr.flow = LinearFlow{p, 0.0};
  tr.mean = u0[0].real();
  tr.dt = h;
  tr.scheme = "strang";
  tr.grid_points = prop.size();
  tr.dealias_fraction = 1.0;
  tr.times.push_back(0.0);
  tr.states.push_back(u0);
  tr.dissipation.push_back(0.0);

  Vec c = prop.to_fft(u0);
  Vec g = prop.grid(c);
  double dissipated = 0;
  Eigen::VectorXd a_mid;
  for (int n = 0; n < steps; ++n) {
    const double t = n * h, t1 = (n + 1 == steps) ? t_total : (n + 1) * h;
    const double q0 = weighted_energy(one_sided(a, t, h, prop), g);
    c = prop.half().cwiseProduct(c);
    Vec gm = prop.grid(c);
    const Eigen::VectorXd m = prop.damping(t + 0.5 * h, &a_mid);
    // Mid-step value carries half of the step's damping.
    const double qm = weighted_energy(a_mid, (m.array().sqrt().matrix().cast<std::complex<double>>()).cwiseProduct(gm));
    gm = m.cast<std::complex<double>>().cwiseProduct(gm);
    c = prop.half().cwiseProduct(prop.coeffs(gm));
    g = prop.grid(c);
    const double q1 = weighted_energy(one_sided(a, t1, -h, prop), g);
    dissipated += 2 * (h / 6) * (q0 + 4 * qm + q1);
    if ((n + 1) % settings.store_stride == 0 || n + 1 == steps) {
      tr.times.push_back(t1);
      tr.states.push_back(prop.from_fft(c));
      tr.dissipation.push_back(dissipated);
    }
  }
  return tr;
}

namespace {

std::size_t sample_index(const Trajectory& traj, double t) {
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  const auto it = std::lower_bound(traj.times.begin(), traj.times.end(), t - tol);
  if (it == traj.times.end() || std::abs(*it - t) > tol) {
    std::ostringstream os;
    os << "t = " << t << " is not a sample time of the trajectory";
    throw std::invalid_argument(os.str());
  }
  return static_cast<std::size_t>(it - traj.times.begin());
}

}  // namespace

double energy_identity_gap(const Trajectory& traj, double t0, double t1) {
  if (traj.dissipation.size() != traj.times.size())
    throw std::invalid_argument("trajectory has no dissipation record");
  const std::size_t i = sample_index(traj, t0), j = sample_index(traj, t1);
  const double e0 = std::pow(l2_norm(traj.states[i]), 2), e1 = std::pow(l2_norm(traj.states[j]), 2);
  if (e0 == 0) return 0;
  return std::abs(e0 - e1 - (traj.dissipation[j] - traj.dissipation[i])) / e0;
}

DecayReport decay_rate(const Trajectory& traj, double block_length, double alpha_tol) {
  if (!(block_length > 0)) throw std::invalid_argument("block length must be positive");
  const int blocks = static_cast<int>(std::floor(traj.times.back() / block_length + 1e-9));
  if (blocks < 5) throw std::invalid_argument("decay fit needs at least 5 whole blocks");
  DecayReport rep;
  rep.block_length = block_length;
  for (int n = 0; n <= blocks; ++n) {
    const double norm = l2_norm(traj.states[sample_index(traj, n * block_length)]);
    if (!(norm > std::numeric_limits<double>::min() * 1e6)) {
      rep.underflow = true;
      break;
    }
    rep.block_norms.push_back(norm);
    if (n > 0) {
      const double prev = rep.block_norms[n - 1];
      rep.alphas.push_back(norm * norm / (prev * prev));
      if (rep.alphas.back() > 1 + alpha_tol) rep.alpha_above_one = true;
      if (traj.dissipation.size() == traj.times.size())
        rep.energy_identity_gaps.push_back(energy_identity_gap(traj, (n - 1) * block_length, n * block_length));
    }
  }
  const int m = static_cast<int>(rep.block_norms.size());
  if (m >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int n = 0; n < m; ++n) {
      const double x = n * block_length, y = std::log(rep.block_norms[n]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    rep.gamma_fit = -(m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return rep;
}

std::vector<double> block_contractions(const DampingField& a, const DispersionSymbol& p, int n_max, int n_blocks,
                                       double dt) {
  if (n_blocks < 1 || !(dt > 0)) throw std::invalid_argument("need n_blocks >= 1 and dt > 0");
  const double big_t = a.block_length();
  const int steps = static_cast<int>(std::ceil(big_t / dt - 1e-9));
  const double h = big_t / steps;
  DampedPropagator prop(n_max, p, a, h);
  const int n = prop.size();
  std::vector<double> out;
  for (int b = 0; b < n_blocks; ++b) {
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(n, n);
    for (int s = 0; s < steps; ++s) {
      const Eigen::VectorXcd m = prop.damping(b * big_t + (s + 0.5) * h).cast<std::complex<double>>();
      for (int col = 0; col < n; ++col) {
        Vec c = prop.half().cwiseProduct(u.col(col));
        c = prop.half().cwiseProduct(prop.coeffs(m.cwiseProduct(prop.grid(c))));
        u.col(col) = c;
      }
    }
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(u);
    out.push_back(svd.singularValues()(0) * svd.singularValues()(0));
  }
  return out;
}

std::vector<double> block_observability(const DampingField& a, const DispersionSymbol& p, int n_blocks,
                                        std::int64_t n_band, int n_t, int n_x) {
  const FrequencySet freqs = FrequencySet::band(p, -1, n_band);
  std::vector<double> out;
  for (int b = 0; b < n_blocks; ++b) {
    const double t0 = b * a.block_length();
    const GriddedWeight w = GriddedWeight::sample(
        [&](double t, double x) { return std::sqrt(a(t0 + t, x)); }, a.block_length(), n_t, n_x);
    out.push_back(weighted_observability(w, freqs).lambda_min);
  }
  return out;
}

double resolvent_ratio(const DispersionSymbol& p, std::complex<double> z, const FourierState& f, int grid_n) {
  if (std::abs(z.imag()) < 1) throw std::invalid_argument("resolvent needs |Im z| >= 1");
  if (f.coeffs().norm() == 0) throw std::invalid_argument("resolvent ratio of the zero function");
  const int nm = f.n_max();
  const int n = grid_n > 0 ? grid_n : std::max(256, 16 * (nm + 1));
  GridTransform<double> grid(n);
  FourierState r(nm);
  for (int k = -nm; k <= nm; ++k) r.at(k) = f[k] / (static_cast<double>(p(k)) - z);
  const double sup = grid.to_grid(r).cwiseAbs().maxCoeff();
  const double l1 = kTwoPi / n * grid.to_grid(f).cwiseAbs().sum();
  return sup / l1;
}

ResolventScan resolvent_scan(const DispersionSymbol& p, const FourierState& f, double tau_max, int per_decade,
                             double s, int grid_n) {
  if (!(tau_max >= 1) || per_decade < 1) throw std::invalid_argument("scan needs tau_max >= 1, per_decade >= 1");
  const int top = static_cast<int>(std::lround(per_decade * std::log10(tau_max)));
  std::vector<double> taus{0.0};
  for (int j = 0; j <= top; ++j) {
    const double t = std::pow(10.0, static_cast<double>(j) / per_decade);
    taus.push_back(t);
    taus.push_back(-t);
  }
  std::sort(taus.begin(), taus.end());
  ResolventScan scan;
  scan.taus = taus;
  for (double t : taus) {
    const double r = resolvent_ratio(p, {t, s}, f, grid_n);
    scan.ratios.push_back(r);
    if (r > scan.max_ratio) {
      scan.max_ratio = r;
      scan.argmax_tau = t;
    }
  }
  return scan;
}

namespace {

// Gauss-Legendre on [0, 1] by Golub-Welsch.
void gauss_unit(int q, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(q, q);
  for (int i = 1; i < q; ++i) j(i, i - 1) = j(i - 1, i) = i / std::sqrt(4.0 * i * i - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  x.resize(q);
  w.resize(q);
  for (int i = 0; i < q; ++i) {
    x[i] = 0.5 * (es.eigenvalues()(i) + 1);
    w[i] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
  }
}

}  // namespace

double duhamel_linfty_l2_ratio(const SpaceTimeSamples& f, const DispersionSymbol& p, int gauss_per_cell) {
  const Eigen::Index n_t = f.values.rows(), n_x = f.values.cols();
  if (n_t < 1 || n_x < 1 || n_x % 2 == 0) throw std::invalid_argument("need n_t >= 1 and an odd number of x nodes");
  if (!(f.t_final > 0) || gauss_per_cell < 1) throw std::invalid_argument("bad time grid");
  if (f.values.norm() == 0) throw std::invalid_argument("Duhamel ratio of the zero forcing");
  const int nm = static_cast<int>((n_x - 1) / 2);
  const double dt = f.t_final / static_cast<double>(n_t);
  GridTransform<double> grid(static_cast<int>(n_x));

  std::vector<FourierState> rows;
  for (Eigen::Index i = 0; i < n_t; ++i) rows.push_back(grid.from_grid(f.values.row(i).transpose(), nm));

  std::vector<double> gx, gw;
  gauss_unit(gauss_per_cell, gx, gw);
  Eigen::VectorXd l2t = Eigen::VectorXd::Zero(n_x);
  FourierState acc(nm);  // sum over finished cells of f_k int e^{-i omega s} ds
  for (Eigen::Index i = 0; i < n_t; ++i) {
    const double a = static_cast<double>(i) * dt;
    for (int q = 0; q < gauss_per_cell; ++q) {
      const double t = a + gx[q] * dt;
      FourierState v(nm);
      for (int k = -nm; k <= nm; ++k) {
        const long double w = static_cast<long double>(p(k));
        v.at(k) = phase<double>(w, t) * (acc[k] + rows[i][k] * exp_integral<double>(-w, a, t));
      }
      l2t += gw[q] * dt * grid.to_grid(v).cwiseAbs2();
    }
    for (int k = -nm; k <= nm; ++k)
      acc.at(k) += rows[i][k] * exp_integral<double>(-static_cast<long double>(p(k)), a, a + dt);
  }
  const double num = l2t.cwiseSqrt().maxCoeff();
  const double den = kTwoPi / static_cast<double>(n_x) * (f.values.cwiseAbs2().colwise().sum() * dt).cwiseSqrt().sum();
  return num / den;
}

}  // namespace dispctl
