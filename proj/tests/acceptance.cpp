// One line per acceptance criterion; exit status 1 if any fails.

#include <Eigen/Dense>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "dispctl/cli.hpp"
#include "dispctl/damping.hpp"
#include "dispctl/hum.hpp"
#include "dispctl/kdv.hpp"
#include "dispctl/mass_op.hpp"
#include "dispctl/observability.hpp"
#include "oracles.hpp"

using namespace dispctl;
using oracle::cd;
using oracle::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

bool report(int id, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0) o.require(secs <= budget_s, "runtime over " + std::to_string(budget_s) + " s");
  std::printf("criterion %2d: %s (%.2f s)%s\n", id, o.pass ? "PASS" : "FAIL", secs, o.detail.str().c_str());
  std::fflush(stdout);
  return o.pass;
}

IntervalUnion random_support(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_real_distribution<double> u(0, 2 * pi), len(0.05, 1.2);
  std::vector<Interval> iv;
  const int n = count(rng);
  for (int j = 0; j < n; ++j) {
    const double a = u(rng);
    iv.push_back({a, a + len(rng)});
  }
  return IntervalUnion(iv, 2 * pi);
}

// ||L e^{ikx}||^2 = (1/|F|)(1 - |int_F e^{-ikx}|^2 / |F|^2), per interval.
double l_norm_squared(const IntervalUnion& f, int k) {
  cd acc = 0;
  for (const Interval& i : f.intervals()) acc += (std::polar(1.0, -k * i.hi) - std::polar(1.0, -k * i.lo)) / cd(0, -k);
  const double m = f.measure();
  return (1 - std::norm(acc) / (m * m)) / m;
}

void criterion1(Outcome& o) {
  std::mt19937_64 rng(101);
  double worst_gap = 0, worst_delta = 0;
  for (int draw = 0; draw < 20; ++draw) {
    const IntervalUnion f = random_support(rng);
    const MassControlOperator op(f, 512);
    for (int k = -32; k <= 32; ++k) {
      if (k == 0) continue;
      const IdentityCheck row = row_identity_check(op, k, 256);
      o.require(row.holds(1e-10), "row identity");
      worst_gap = std::max(worst_gap, row.gap);
      for (int m = -32; m <= 32; ++m) {
        if (m == 0) continue;
        const IdentityCheck in = inner_product_identity_check(op, k, m, 256);
        const IdentityCheck co = coefficient_identity_check(op, k, m);
        o.require(in.holds(1e-10) && co.holds(1e-10), "inner product or coefficient identity");
        worst_gap = std::max({worst_gap, in.gap, co.gap});
      }
    }
    const CoercivityBound c = coercivity_delta(op);
    double brute = 1e300;
    for (int k = 1; k <= 10000; ++k) brute = std::min({brute, l_norm_squared(f, k), l_norm_squared(f, -k)});
    o.require(c.delta > 0, "delta > 0");
    worst_delta = std::max(worst_delta, std::abs(c.delta - brute));
  }
  o.require(worst_delta <= 1e-10, "delta vs brute-force scan");
  o.detail << " max identity gap " << worst_gap << ", max |delta - scan| " << worst_delta;
}

void criterion2(Outcome& o) {
  std::mt19937_64 rng(102);
  const DispersionSymbol cubic = DispersionSymbol::cubic(), quartic = DispersionSymbol::parse("k^4 + k^2");
  std::uniform_int_distribution<int> kk(-200, 200);
  std::int64_t worst = 0;
  for (const DispersionSymbol* p : {&cubic, &quartic}) {
    for (int draw = 0; draw < 1000; ++draw) {
      int k1 = kk(rng), k2 = kk(rng);
      if (k1 == k2) ++k2;
      const LatticePoint alpha{k1 - k2, (*p)(k1) - (*p)(k2)};
      const std::int64_t c = count_coincidences(*p, alpha, 200);
      o.require(c <= p->degree() - 1, "Theta <= d - 1 for " + p->to_string());
      worst = std::max(worst, c - (p->degree() - 1));
    }
  }
  const std::int64_t c17 = count_coincidences(cubic, {1, 7}, 200);
  o.require(c17 == 2, "(1,7) cubic count");
  o.detail << " max (count - (d-1)) " << worst << ", (1,7) count " << c17;
}

void criterion3(Outcome& o) {
  std::mt19937_64 rng(103);
  const DispersionSymbol cubic = DispersionSymbol::cubic();
  double min_slack = 1e300, min_plancherel_slack = 1e300;
  int violations = 0;
  for (int draw = 0; draw < 100; ++draw) {
    const FourierState a = oracle::random_state(8, rng);
    const L4Ratio r = strichartz_l4_ratio(a, cubic, 33);
    const double slack = r.stated_bound * r.stated_bound - r.ratio * r.ratio;
    min_slack = std::min(min_slack, slack);
    min_plancherel_slack = std::min(min_plancherel_slack, r.plancherel_bound * r.plancherel_bound - r.ratio * r.ratio);
    if (slack < 0) ++violations;
  }
  o.require(min_slack >= 0, "L4 bound (2pi + Theta^1/2) sum |a_k|^2");
  FourierState two(1);
  two.at(0) = 1;
  two.at(1) = 1;
  const double closed = std::abs(strichartz_l4_ratio(two, cubic, 5).ratio - std::pow(6 * pi * pi, 0.25));
  o.require(closed <= 1e-10, "two-mode closed form");
  o.detail << " min slack " << min_slack << " (" << violations << "/100 draws negative), min slack of "
           << "2pi(1 + Theta^1/2) bound " << min_plancherel_slack << ", two-mode error " << closed;
}

void criterion4(Outcome& o) {
  const SpaceTimeRegion g = SpaceTimeRegion::product(IntervalUnion({{0, pi}}), IntervalUnion::full());
  const DispersionSymbol cubic = DispersionSymbol::cubic();
  const HighFreqThreshold thr = highfreq_threshold(g, cubic);
  o.require(highfreq_condition(g, cubic, thr.n), "condition true at N");
  o.require(thr.n == 0 || !highfreq_condition(g, cubic, thr.n - 1), "condition false at N - 1");
  const GramReport high = high_band_gram(g, cubic, 64);
  const double floor = g.measure() / 2 * high.normalization;
  o.require(high.lambda_min >= floor - high.slack, "lambda_min >= |G|/2");
  o.detail << " N = " << thr.n << ", lambda_min " << high.lambda_min << " vs |G|/2 = " << floor
           << " (slack " << high.slack << ")";
}

void criterion5(Outcome& o) {
  const std::vector<std::pair<SpaceTimeRegion, DispersionSymbol>> cases{
      {SpaceTimeRegion::product(IntervalUnion({{0, pi}}), IntervalUnion::full()), DispersionSymbol::cubic()},
      {SpaceTimeRegion({{IntervalUnion({{0.2, 1.9}}), IntervalUnion({{0.5, 2.5}, {4.0, 4.6}})},
                        {IntervalUnion({{3.0, 4.2}}), IntervalUnion({{1.0, 5.5}})}},
                       2 * pi),
       DispersionSymbol::cubic()},
      {SpaceTimeRegion::product(IntervalUnion({{0, 1}, {1.5, 2}}, 2.0), IntervalUnion({{0, pi}, {4, 5}})),
       DispersionSymbol::parse("k^4 + k^2")},
      {SpaceTimeRegion::product(IntervalUnion({{1, 3}}), IntervalUnion({{0, 2}})), DispersionSymbol::parse("k^5")},
      {SpaceTimeRegion::product(IntervalUnion({{0, 2}, {3, 4}}), IntervalUnion({{1, 4}})),
       DispersionSymbol::parse("k^3 + 2*k")},
  };
  double worst = 0;
  for (const auto& [g, p] : cases) {
    const int n = 3, n_max = 10;
    const double one_shot = gram_matrix(FrequencySet::band(p, -1, n_max), g).lambda_min;
    const double forward = augmented_sweep(p, g, n, n_max).back().report.lambda_min;
    const double shuffled = augmented_sweep(p, g, n, n_max, {-3, 2, 0, 3, -1, 1, -2}).back().report.lambda_min;
    worst = std::max({worst, std::abs(forward - one_shot), std::abs(shuffled - one_shot)});
  }
  o.require(worst <= 1e-10, "sweep equals one-shot");
  o.detail << " max |sweep - one-shot| " << worst;
}

void criterion6(Outcome& o) {
  std::mt19937_64 rng(106);
  const HumSystem sys(IntervalUnion({{0, 1}, {1.5, 2}}, 2.0), IntervalUnion({{0, pi}, {4, 5}}),
                      LinearFlow{DispersionSymbol::cubic(), 0.0}, 16);
  const FourierState v0 = oracle::random_state(16, rng, true), v1 = oracle::random_state(16, rng, true);
  const ControlSolution sol = synthesize_control(sys, v0, v1, 1e-10);
  o.require(sol.endpoint_residual <= 1e-8, "endpoint residual");

  // Duality with a random h = sum a_k e^{i sigma_k t} e^{ikx}.
  const int d = sys.dimension();
  std::normal_distribution<double> g;
  Eigen::VectorXcd a(d);
  std::vector<long double> sigma(d);
  for (int c = 0; c < d; ++c) {
    a(c) = cd(g(rng), g(rng));
    sigma[c] = 5 * g(rng);
  }
  Eigen::MatrixXcd amp(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) amp(r, c) = sys.l2_coefficient(sys.mode(r), sys.mode(c)) * a(c);
  const ExponentialForcing f(sys.e_t(), 16, amp, sigma);
  const FourierState w0 = oracle::random_state(16, rng, true), u0 = oracle::random_state(16, rng, true);
  const FourierState ut = duhamel_endpoint(sys.flow(), u0, f, 2.0);
  const cd rhs = inner(ut, evolve_free(w0, sys.flow(), 2.0)) - inner(u0, w0);
  cd lhs = 0;
  for (const Interval& i : sys.e_t().intervals())
    lhs += oracle::gauss([&](double t) { return inner(f.value(t), evolve_free(w0, sys.flow(), t)); }, i.lo, i.hi,
                         8192, 8);
  const double duality = std::abs(lhs - rhs);
  o.require(duality <= 1e-10, "duality gap");

  const Eigen::MatrixXcd phi = build_phi(sys);
  const double herm = (phi - phi.adjoint()).norm() / phi.norm();
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(0.5 * (phi + phi.adjoint())).eigenvalues()(0);
  o.require(herm <= 1e-14, "Phi Hermitian");
  o.require(lmin > 0, "Phi positive");
  o.detail << " residual " << sol.endpoint_residual << ", duality gap " << duality << " (|rhs| " << std::abs(rhs)
           << "), Phi asymmetry " << herm << ", lambda_min(Phi) " << lmin;
}

void criterion7(Outcome& o) {
  const int n = 32;
  FourierState u0(n), u1(n);
  u0.at(1) = cd(0, -0.005);
  u0.at(-1) = cd(0, 0.005);
  u1.at(2) = cd(0, -0.005);
  u1.at(-2) = cd(0, 0.005);
  const HumSystem sys(IntervalUnion({{0, 1}, {1.5, 2}}, 2.0), IntervalUnion({{0, pi}, {4, 5}}),
                      LinearFlow{DispersionSymbol::cubic(), 0.0}, n);
  PicardSettings s;
  s.tol = 1e-6;
  s.integrator.dt = 1e-3;
  const PicardRun run = picard_control(u0, u1, sys, s);
  o.require(run.converged, "Picard converged");
  const double e = run.iterates.empty() ? 1e300 : run.iterates.back().endpoint_error;
  o.require(e <= 1e-6, "endpoint error");
  o.require(run.contraction_factor && *run.contraction_factor < 0.5, "contraction factor < 1/2");
  o.require(run.mass_drift <= 1e-12, "mass drift");
  const double change = dt_refinement_change(run, u0, u1, sys, s);
  o.require(change < 0.1, "dt halving changes error < 10%");
  o.detail << " iterates " << run.iterates.size() << ", endpoint error " << e << ", contraction "
           << (run.contraction_factor ? *run.contraction_factor : -1) << ", mass drift " << run.mass_drift
           << ", dt-halving change " << change;
}

void criterion8(Outcome& o) {
  std::mt19937_64 rng(108);
  const DispersionSymbol cubic = DispersionSymbol::cubic();
  const int n = 16;
  const FourierState u0 = oracle::random_state(n, rng);
  const DecayReport one = decay_rate(solve_damped(u0, DampingField::constant(1.0), cubic, 10.0, {1e-3, 1}), 1.0);
  double alpha_err = 0;
  for (double a : one.alphas) alpha_err = std::max(alpha_err, std::abs(a - std::exp(-2.0)));
  o.require(std::abs(one.gamma_fit - 1) <= 1e-6, "a = 1: gamma");
  o.require(alpha_err <= 1e-8, "a = 1: alpha");

  const SpaceTimeRegion g0 = SpaceTimeRegion::product(IntervalUnion({{0, 0.5}}, 1.0), IntervalUnion({{0, pi}}));
  const DampingField a = DampingField::periodic_blocks(g0, 1.0);
  const std::vector<double> mono = block_contractions(a, cubic, n, 10, 1e-4);
  const auto [lo, hi] = std::minmax_element(mono.begin(), mono.end());
  const double spread = (*hi - *lo) / *hi;
  o.require(spread <= 1e-6, "block-constant alpha");
  const DecayReport per = decay_rate(solve_damped(u0, a, cubic, 10.0, {1e-4, 100}), 1.0);
  o.require(per.gamma_fit > 0, "gamma > 0");
  double gap = 0;
  for (double e : per.energy_identity_gaps) gap = std::max(gap, e);
  o.require(gap <= 1e-6, "energy identity gap per block");
  const auto [tlo, thi] = std::minmax_element(per.alphas.begin(), per.alphas.end());
  o.detail << " a=1: |gamma-1| " << std::abs(one.gamma_fit - 1) << ", max |alpha-e^-2| " << alpha_err
           << "; periodic: ||U_n||^2 = " << *hi << " spread " << spread << ", gamma " << per.gamma_fit
           << ", max energy gap " << gap << ", datum ratios in [" << *tlo << ", " << *thi << "]";
}

void criterion9(Outcome& o) {
  const DispersionSymbol cubic = DispersionSymbol::cubic();
  std::mt19937_64 rng(109);
  std::bernoulli_distribution coin;
  FourierState f(64);
  for (int k = -64; k <= 64; ++k) f.at(k) = coin(rng) ? 1.0 : -1.0;
  const ResolventScan base = resolvent_scan(cubic, f, 1e6, 4);
  const ResolventScan fine_z = resolvent_scan(cubic, f, 1e6, 8);
  const ResolventScan fine_x = resolvent_scan(cubic, f, 1e6, 4, 1.0, 2 * 16 * 65);
  o.require(std::isfinite(base.max_ratio), "finite max");
  const double dz = std::abs(fine_z.max_ratio / base.max_ratio - 1), dx = std::abs(fine_x.max_ratio / base.max_ratio - 1);
  o.require(dz <= 0.01 && dx <= 0.01, "stable under refinement");
  const double c1 = std::abs(resolvent_ratio(cubic, {0, 1}, FourierState::delta(4, 0, 1.0)) - 1 / (2 * pi));
  const double c2 = std::abs(resolvent_ratio(cubic, {0, 1}, FourierState::delta(50, 50, 1.0)) -
                             1 / (2 * pi * std::abs(cd(125000.0, -1.0))));
  o.require(c1 <= 1e-12 && c2 <= 1e-12, "single-mode closed forms");
  o.detail << " max ratio " << base.max_ratio << " at tau " << base.argmax_tau << ", change under z refinement "
           << dz << ", under x refinement " << dx << ", closed-form errors " << c1 << ", " << c2;
}

std::string verify_body(const char* seed) {
  std::vector<std::string> args{"dispctl", "verify", "--seed", seed};
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return out.str();
}

void criterion10(Outcome& o) {
  const std::string a = verify_body("2024"), b = verify_body("2024");
  o.require(!a.empty() && a == b, "byte-identical verify reports");
  o.detail << " " << a.size() << " bytes, identical: " << (a == b ? "yes" : "no");
}

}  // namespace

int main() {
  bool all = true;
  all &= report(1, 30, criterion1);
  all &= report(2, 10, criterion2);
  all &= report(3, 0, criterion3);
  all &= report(4, 60, criterion4);
  all &= report(5, 0, criterion5);
  all &= report(6, 30, criterion6);
  all &= report(7, 300, criterion7);
  all &= report(8, 120, criterion8);
  all &= report(9, 0, criterion9);
  all &= report(10, 0, criterion10);
  std::printf("%s\n", all ? "all criteria pass" : "some criteria fail");
  return all ? 0 : 1;
}
