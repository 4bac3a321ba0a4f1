#include "dispctl/observability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dispctl/errors.hpp"
#include "dispctl/grid.hpp"
#include "dispctl/linalg.hpp"

namespace dispctl {

namespace {

constexpr double kEigenTol = 1e-12;

void finish(GramReport& rep) {
  const auto ex = hermitian_extremes(rep.gram, kEigenTol);
  rep.lambda_min = ex.lambda_min;
  rep.lambda_max = ex.lambda_max;
  rep.eigen_iterations = ex.iterations;
  rep.slack = kEigenTol * std::max(std::abs(ex.lambda_max), std::abs(ex.lambda_min));
  if (rep.lambda_max > 0 && rep.lambda_min > kEigenTol * rep.lambda_max) {
    rep.observability_constant = rep.normalization / rep.lambda_min;
    rep.condition_number = rep.lambda_max / rep.lambda_min;
  } else {
    rep.observability_constant.reset();
    rep.condition_number = std::numeric_limits<double>::infinity();
  }
}

// The same set read in the cell [0, 2pi) x [0, 2pi).
SpaceTimeRegion on_torus(const SpaceTimeRegion& g) {
  if (g.time_period() == kTwoPi) return g;
  if (g.time_period() > kTwoPi) throw std::invalid_argument("time period longer than 2pi");
  std::vector<Rectangle> rects;
  for (const Rectangle& r : g.rectangles()) rects.push_back({IntervalUnion(r.time.intervals(), kTwoPi), r.space});
  return SpaceTimeRegion(std::move(rects), kTwoPi);
}

double threshold_lhs(const SpaceTimeRegion& g, int d, std::int64_t n, double* tail) {
  const double t = tail_energy(g, n);
  if (tail) *tail = t;
  return std::sqrt((d - 1) * t);
}

}  // namespace

GramReport make_gram_report(Eigen::MatrixXcd gram, double normalization) {
  GramReport rep;
  rep.gram = std::move(gram);
  rep.normalization = normalization;
  finish(rep);
  return rep;
}

FrequencySet FrequencySet::band(const DispersionSymbol& p, std::int64_t n_above, std::int64_t n_max) {
  if (n_above < -1 || n_max < 0) throw std::invalid_argument("bad band");
  FrequencySet s(p);
  for (std::int64_t k = -n_max; k <= n_max; ++k)
    if (std::abs(k) > n_above) s.pts_.push_back({k, p(k)});
  std::ostringstream os;
  os << "{(k, " << p.to_string() << ") : ";
  if (n_above >= 0) os << n_above << " < ";
  os << "|k| <= " << n_max << "}";
  s.band_ = os.str();
  return s;
}

bool FrequencySet::contains(std::int64_t k) const {
  return std::any_of(pts_.begin(), pts_.end(), [k](const LatticePoint& q) { return q.space == k; });
}

void FrequencySet::add(std::int64_t k) {
  if (contains(k)) throw std::invalid_argument("frequency " + std::to_string(k) + " already in the set");
  pts_.push_back({k, p_(k)});
  added_.push_back(k);
}

std::string FrequencySet::to_string() const {
  std::ostringstream os;
  os << (band_.empty() ? "{}" : band_);
  if (!added_.empty()) {
    os << " + {";
    for (std::size_t j = 0; j < added_.size(); ++j) os << (j ? ", " : "") << added_[j];
    os << "}";
  }
  return os.str();
}

std::int64_t count_coincidences(const DispersionSymbol& p, LatticePoint alpha, std::int64_t k_box) {
  if (k_box < 1) throw std::invalid_argument("k_box must be at least 1");
  std::int64_t count = 0;
  for (std::int64_t k1 = -k_box; k1 <= k_box; ++k1) {
    const std::int64_t k2 = k1 - alpha.space;
    if (k2 < -k_box || k2 > k_box) continue;
    if (p(k1) - p(k2) == alpha.time) ++count;
  }
  return count;
}

int set_theta(const std::vector<LatticePoint>& points) {
  std::map<std::pair<std::int64_t, std::int64_t>, int> hits;
  int best = 0;
  for (const LatticePoint& a : points)
    for (const LatticePoint& b : points) {
      if (a == b) continue;
      best = std::max(best, ++hits[{a.space - b.space, a.time - b.time}]);
    }
  return best;
}

L4Ratio strichartz_l4_ratio(const FourierState& a, const DispersionSymbol& p, int grid_n) {
  const int n = a.n_max();
  if (grid_n < 4 * n + 1)
    throw AliasingError("L4 grid needs at least " + std::to_string(4 * n + 1) + " points in x");
  L4Ratio out;
  out.l2_squared = a.coeffs().squaredNorm();
  if (out.l2_squared == 0) throw std::invalid_argument("zero coefficients");
  std::int64_t pmin = p(0), pmax = p(0);
  for (int k = -n; k <= n; ++k) {
    pmin = std::min(pmin, p(k));
    pmax = std::max(pmax, p(k));
  }
  const std::int64_t nt = 2 * (pmax - pmin) + 1;
  if (nt > (std::int64_t{1} << 26)) throw std::invalid_argument("time grid too large for this band");
  out.grid_x = grid_n;
  out.grid_t = static_cast<int>(nt);
  GridTransform<double> g(grid_n);
  long double acc = 0;
  FourierState b(n);
  for (std::int64_t j = 0; j < nt; ++j) {
    // p(k) t_j mod 2pi is exactly 2pi ((p(k) j) mod nt) / nt.
    for (int k = -n; k <= n; ++k) {
      const __int128 r = (static_cast<__int128>(p(k)) * j) % nt;
      b.at(k) = a[k] * unit_phase<double>(kTwoPiL * static_cast<long double>(r) / nt);
    }
    const auto v = g.to_grid(b);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const long double m = std::norm(v(i));
      acc += m * m;
    }
  }
  out.l4_fourth = static_cast<double>(acc * kTwoPiL * kTwoPiL / (static_cast<long double>(grid_n) * nt));
  out.ratio = std::pow(out.l4_fourth, 0.25) / std::sqrt(out.l2_squared);
  out.theta = p.degree() - 1;
  out.stated_bound = std::sqrt(kTwoPi + std::sqrt(static_cast<double>(out.theta)));
  out.plancherel_bound = std::sqrt(kTwoPi * (1 + std::sqrt(static_cast<double>(out.theta))));
  return out;
}

LinftyL2Ratio linfty_l2_ratio(const FourierState& a, const DispersionSymbol& p, double t_final, int grid_n) {
  if (!(t_final > 0)) throw std::invalid_argument("T must be positive");
  if (grid_n < 1) throw std::invalid_argument("grid_n must be positive");
  const double c2 = a.coeffs().squaredNorm();
  if (c2 == 0) throw std::invalid_argument("ratio undefined for the zero state");
  const int n = a.n_max();
  // int_0^T |u(t,x)|^2 dt = sum_beta q_beta e^{i beta x}
  std::vector<std::complex<double>> q(4 * n + 1, 0.0);
  LinftyL2Ratio out;
  double bound = 0;
  for (int k = -n; k <= n; ++k) {
    if (a[k] == 0.0) continue;
    for (int l = -n; l <= n; ++l) {
      if (a[l] == 0.0) continue;
      const std::int64_t dp = p(k) - p(l);
      q[k - l + 2 * n] += a[k] * std::conj(a[l]) * exp_integral<double>(static_cast<long double>(dp), 0, t_final);
      const double w = std::abs(a[k]) * std::abs(a[l]);
      if (dp == 0) {
        out.coincidence_term += t_final * w;
        bound += t_final * w;
      } else {
        bound += w * std::min(t_final, 2.0 / std::abs(static_cast<double>(dp)));
      }
    }
  }
  double best = -1;
  for (int j = 0; j < grid_n; ++j) {
    const double x = kTwoPi * j / grid_n;
    std::complex<double> v = 0;
    for (int beta = -2 * n; beta <= 2 * n; ++beta) v += q[beta + 2 * n] * std::polar(1.0, beta * x);
    if (v.real() > best) {
      best = v.real();
      out.argmax_x = x;
    }
  }
  const double u0 = kTwoPi * c2;
  out.grid_n = grid_n;
  out.ratio = std::sqrt(std::max(best, 0.0) / u0);
  out.coincidence_cap = p.degree() * t_final * c2;
  out.proof_bound = std::sqrt(bound / u0);
  return out;
}

bool highfreq_condition(const SpaceTimeRegion& g, const DispersionSymbol& p, std::int64_t n) {
  const SpaceTimeRegion t = on_torus(g);
  return threshold_lhs(t, p.degree(), n, nullptr) < t.measure() / (2 * t.cell_volume());
}

HighFreqThreshold highfreq_threshold(const SpaceTimeRegion& g, const DispersionSymbol& p, std::int64_t n_cap) {
  const SpaceTimeRegion t = on_torus(g);
  const double mg = t.measure();
  if (!(mg > 0)) throw std::invalid_argument("region has zero measure");
  const int d = p.degree();
  const double rhs = mg / (2 * t.cell_volume());
  auto holds = [&](std::int64_t n) { return threshold_lhs(t, d, n, nullptr) < rhs; };
  std::int64_t hi = 0;
  if (!holds(0)) {
    std::int64_t lo = 0;
    hi = 1;
    while (!holds(hi)) {
      lo = hi;
      hi *= 2;
      if (hi > n_cap)
        throw NumericalError("high-frequency threshold not reached below N = " + std::to_string(n_cap) +
                             " for region " + g.to_string());
    }
    while (hi - lo > 1) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      (holds(mid) ? hi : lo) = mid;
    }
  }
  HighFreqThreshold out;
  out.n = hi;
  out.lhs = threshold_lhs(t, d, hi, &out.tail);
  out.rhs = rhs;
  out.lower_bound = mg - t.cell_volume() * out.lhs;
  return out;
}

GramReport gram_matrix(const FrequencySet& freqs, const SpaceTimeRegion& g) {
  const auto& pts = freqs.points();
  const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
  GramReport rep;
  rep.gram.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    rep.gram(r, r) = g.measure();
    for (Eigen::Index c = r + 1; c < n; ++c) {
      const auto v = g.exp_integral(static_cast<long double>(pts[c].time - pts[r].time), pts[c].space - pts[r].space);
      rep.gram(r, c) = v;
      rep.gram(c, r) = std::conj(v);
    }
  }
  rep.theta = set_theta(pts);
  finish(rep);
  return rep;
}

GramReport high_band_gram(const SpaceTimeRegion& g, const DispersionSymbol& p, std::int64_t n_max) {
  const HighFreqThreshold thr = highfreq_threshold(g, p);
  if (thr.n >= n_max)
    throw NumericalError("threshold N = " + std::to_string(thr.n) + " leaves no band below n_max");
  GramReport rep = gram_matrix(FrequencySet::band(p, thr.n, n_max), g);
  rep.n_threshold = thr.n;
  rep.tail_energy = thr.tail;
  return rep;
}

TranslationReport translation_stability(const FrequencySet& freqs, const SpaceTimeRegion& g,
                                        const std::vector<Shift>& shifts) {
  TranslationReport out;
  out.base_lambda = gram_matrix(freqs, g).lambda_min;
  out.min_lambda = std::numeric_limits<double>::infinity();
  for (const Shift& h : shifts) {
    const SpaceTimeRegion cut = intersect(g, g.translate({-h.t, -h.x}));
    const GramReport r = gram_matrix(freqs, cut);
    if (!r.observability_constant) out.any_unavailable = true;
    out.lambdas.push_back(r.lambda_min);
    if (r.lambda_min < out.min_lambda) {
      out.min_lambda = r.lambda_min;
      out.argmin = h;
    }
  }
  if (shifts.empty()) out.min_lambda = out.base_lambda;
  return out;
}

Delta0Scan delta0_scan(const FrequencySet& freqs, const SpaceTimeRegion& g) {
  Delta0Scan out;
  out.base_lambda = gram_matrix(freqs, g).lambda_min;
  const double tp = g.time_period();
  for (int j = 1; j <= 12; ++j) {
    const double s = std::ldexp(1.0, -j);
    const TranslationReport r =
        translation_stability(freqs, g, {{s * tp, 0.0}, {0.0, s * kTwoPi}, {s * tp, s * kTwoPi}});
    out.radii.push_back(s * std::min(tp, kTwoPi));
    out.worst.push_back(r.min_lambda);
  }
  for (int j = 11; j >= 0; --j) {
    if (!(out.worst[j] >= out.base_lambda / 2)) break;
    out.delta0 = out.radii[j];
  }
  return out;
}

std::vector<SweepStep> augmented_sweep(const DispersionSymbol& p, const SpaceTimeRegion& g, std::int64_t n,
                                       std::int64_t n_max, std::vector<std::int64_t> order) {
  if (n < 0 || n_max < n) throw std::invalid_argument("sweep needs 0 <= N <= N_max");
  if (order.empty()) {
    order.push_back(0);
    for (std::int64_t k = 1; k <= n; ++k) {
      order.push_back(k);
      order.push_back(-k);
    }
  }
  FrequencySet set = FrequencySet::band(p, n, n_max);
  std::vector<SweepStep> steps;
  auto record = [&](std::optional<std::int64_t> added) {
    GramReport r = gram_matrix(set, g);
    r.n_threshold = n;
    steps.push_back({added, std::move(r)});
  };
  record(std::nullopt);
  for (std::int64_t k0 : order) {
    if (std::abs(k0) > n) throw std::invalid_argument("sweep point " + std::to_string(k0) + " is not low frequency");
    set.add(k0);
    record(k0);
  }
  return steps;
}

GriddedWeight GriddedWeight::sample(const std::function<double(double, double)>& a, double time_period, int n_t,
                                    int n_x) {
  if (n_t < 1 || n_x < 1 || !(time_period > 0)) throw std::invalid_argument("bad weight grid");
  GriddedWeight w;
  w.time_period = time_period;
  w.values.resize(n_t, n_x);
  for (int i = 0; i < n_t; ++i)
    for (int j = 0; j < n_x; ++j)
      w.values(i, j) = a((i + 0.5) * time_period / n_t, (j + 0.5) * kTwoPi / n_x);
  return w;
}

GramReport weighted_observability(const GriddedWeight& a, const FrequencySet& freqs) {
  if ((a.values.array() < 0).any()) throw std::invalid_argument("weight must be nonnegative");
  const Eigen::Index nt = a.values.rows(), nx = a.values.cols();
  const Eigen::MatrixXcd w2 = a.values.array().square().matrix().cast<std::complex<double>>();
  const auto& pts = freqs.points();
  const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
  const double dt = a.time_period / nt, dx = kTwoPi / nx;
  GramReport rep;
  rep.gram.resize(n, n);
  Eigen::VectorXcd et(nt), ex(nx);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = r; c < n; ++c) {
      const long double wt = static_cast<long double>(pts[c].time - pts[r].time);
      const long double wx = static_cast<long double>(pts[c].space - pts[r].space);
      for (Eigen::Index i = 0; i < nt; ++i)
        et(i) = exp_integral<double>(wt, static_cast<long double>(i) * dt, static_cast<long double>(i + 1) * dt);
      for (Eigen::Index j = 0; j < nx; ++j)
        ex(j) = exp_integral<double>(wx, static_cast<long double>(j) * dx, static_cast<long double>(j + 1) * dx);
      const std::complex<double> v = (et.transpose() * w2 * ex)(0, 0);
      rep.gram(r, c) = v;
      rep.gram(c, r) = std::conj(v);
      if (r == c) rep.gram(r, r) = v.real();
    }
  rep.theta = set_theta(pts);
  finish(rep);
  return rep;
}

}  // namespace dispctl
