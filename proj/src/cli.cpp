#include "dispctl/cli.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "dispctl/damping.hpp"
#include "dispctl/errors.hpp"
#include "dispctl/hum.hpp"
#include "dispctl/kdv.hpp"
#include "dispctl/mass_op.hpp"
#include "dispctl/observability.hpp"
#include "dispctl/region.hpp"

namespace dispctl::cli {

using nlohmann::json;

namespace {

const std::vector<std::string> kWorkflows{"certify", "control-linear", "control-kdv", "decay", "verify"};

const std::map<std::string, std::string>& base_defaults() {
  static const std::map<std::string, std::string> d{
      {"run.seed", "1"},
      {"run.nmax", "16"},
      {"run.dt", "1e-3"},
      {"run.tol", "1e-10"},
      {"symbol.p", "k^3"},
      {"certify.region", "[0,pi) x [0,2pi)"},
      {"certify.time_period", "2pi"},
      {"control.horizon", "2"},
      {"control.time_set", "[0,1) U [1.5,2)"},
      {"control.space_set", "[0,pi) U [4,5)"},
      {"control.v0", "random"},
      {"control.v1", "random"},
      {"kdv.u0", "0.01*sin(x)"},
      {"kdv.u1", "0.01*sin(2x)"},
      {"kdv.tol", "1e-6"},
      {"kdv.max_iter", "20"},
      {"kdv.check_dt", "true"},
      {"kdv.csv_stride", "10"},
      {"decay.kind", "periodic_blocks"},
      {"decay.a0", "1"},
      {"decay.support", "[0,pi)"},
      {"decay.block", "[0,0.5) x [0,pi)"},
      {"decay.block_length", "1"},
      {"decay.blocks", "10"},
      {"decay.phases", "random"},
      {"decay.u0", "random"},
      {"decay.monodromy", "true"},
  };
  return d;
}

std::string field_error(const std::string& key, const std::string& msg) { return "field " + key + ": " + msg; }

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

void require(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) throw ConfigError(field_error(key, msg));
}

IntervalUnion interval_field(const ExperimentConfig& c, const std::string& key, double period) {
  try {
    IntervalUnion u = parse_interval_union(c.text(key), period);
    require(u.measure() > 0, key, "set has zero measure");
    return u;
  } catch (const ConfigError& e) {
    if (std::string(e.what()).rfind("field ", 0) == 0) throw;
    throw ConfigError(field_error(key, e.what()));
  }
}

SpaceTimeRegion region_field(const ExperimentConfig& c, const std::string& key, double time_period) {
  try {
    SpaceTimeRegion g = parse_space_time_region(c.text(key), time_period);
    require(g.measure() > 0, key, "region has zero measure");
    return g;
  } catch (const ConfigError& e) {
    if (std::string(e.what()).rfind("field ", 0) == 0) throw;
    throw ConfigError(field_error(key, e.what()));
  }
}

DispersionSymbol symbol_field(const ExperimentConfig& c) {
  try {
    return DispersionSymbol::parse(c.text("symbol.p"));
  } catch (const std::exception& e) {
    throw ConfigError(field_error("symbol.p", e.what()));
  }
}

double positive(const ExperimentConfig& c, const std::string& key) {
  const double v = c.real(key);
  require(v > 0, key, "must be positive");
  return v;
}

Trajectory strided(const Trajectory& tr, int stride) {
  Trajectory out = tr;
  out.times.clear();
  out.states.clear();
  for (std::size_t i = 0; i < tr.times.size(); i += static_cast<std::size_t>(stride)) {
    out.times.push_back(tr.times[i]);
    out.states.push_back(tr.states[i]);
  }
  if (out.times.back() != tr.times.back()) {
    out.times.push_back(tr.times.back());
    out.states.push_back(tr.states.back());
  }
  return out;
}

// Workflows.

Report certify(const ExperimentConfig& c) {
  const DispersionSymbol p = symbol_field(c);
  const double period = positive(c, "certify.time_period");
  const SpaceTimeRegion g = region_field(c, "certify.region", period);
  const int n_max = c.n_max();
  Report rep;
  const HighFreqThreshold thr = highfreq_threshold(g, p);
  const GramReport full = gram_matrix(FrequencySet::band(p, -1, n_max), g);
  json r;
  r["region"] = g.to_string();
  r["symbol"] = p.to_string();
  r["threshold"] = {{"n", thr.n}, {"tail", thr.tail}, {"lhs", thr.lhs}, {"rhs", thr.rhs},
                    {"lambda_lower_bound", thr.lower_bound}};
  r["gram"] = {{"band", "|k| <= " + std::to_string(n_max)},
               {"lambda_min", full.lambda_min},
               {"lambda_max", full.lambda_max},
               {"normalization", full.normalization},
               {"observability_constant", opt(full.observability_constant)},
               {"theta", full.theta},
               {"condition_number", full.condition_number},
               {"slack", full.slack}};
  if (thr.n < n_max) {
    const GramReport high = high_band_gram(g, p, n_max);
    r["high_band"] = {{"band", std::to_string(thr.n) + " < |k| <= " + std::to_string(n_max)},
                      {"lambda_min", high.lambda_min},
                      {"slack", high.slack},
                      {"lambda_lower_bound", thr.lower_bound},
                      {"bound_holds", high.lambda_min + high.slack >= thr.lower_bound}};
  }
  rep.body["result"] = r;
  if (!full.observability_constant) rep.exit_code = kNumericalFailure;
  return rep;
}

HumSystem control_system(const ExperimentConfig& c, const LinearFlow& flow) {
  const double horizon = positive(c, "control.horizon");
  return HumSystem(interval_field(c, "control.time_set", horizon), interval_field(c, "control.space_set", kTwoPi),
                   flow, c.n_max());
}

Report control_linear(const ExperimentConfig& c) {
  const DispersionSymbol p = symbol_field(c);
  const double tol = positive(c, "run.tol");
  const HumSystem sys = control_system(c, LinearFlow{p, 0.0});
  std::mt19937_64 rng(c.seed());
  FourierState v0 = parse_state("control.v0", c.text("control.v0"), c.n_max(), rng);
  FourierState v1 = parse_state("control.v1", c.text("control.v1"), c.n_max(), rng);
  require(std::abs(v0[0]) == 0.0, "control.v0", "linear control acts on zero-mean data");
  require(std::abs(v1[0]) == 0.0, "control.v1", "linear control acts on zero-mean data");
  Report rep;
  json r;
  try {
    const ControlSolution sol = synthesize_control(sys, v0, v1, tol);
    const GramReport gram = twisted_gram(sys);
    r = {{"endpoint_residual", sol.endpoint_residual},
         {"residual_bound", 10 * tol},
         {"cost", sol.cost},
         {"cost_constant", sol.cost_constant},
         {"cg_iterations", sol.cg_iterations},
         {"cg_residual", sol.cg_residual},
         {"condition_number", sol.condition_number},
         {"dense_phi", sol.dense},
         {"twisted_gram_lambda_min", gram.lambda_min}};
    std::ostringstream csv;
    csv << std::setprecision(17) << "k,re_psi,im_psi\n";
    for (int k = -sol.psi.n_max(); k <= sol.psi.n_max(); ++k)
      csv << k << ',' << sol.psi[k].real() << ',' << sol.psi[k].imag() << '\n';
    rep.csv.push_back({"psi.csv", csv.str()});
    if (!(sol.endpoint_residual <= 10 * tol)) rep.exit_code = kNumericalFailure;
  } catch (const NumericalError& e) {
    r["failure"] = e.what();
    rep.exit_code = kNumericalFailure;
  }
  rep.body["result"] = r;
  return rep;
}

Report control_kdv(const ExperimentConfig& c) {
  const DispersionSymbol p = symbol_field(c);
  require(p == DispersionSymbol::cubic(), "symbol.p", "the nonlinear workflow is KdV, p = k^3");
  std::mt19937_64 rng(c.seed());
  const FourierState u0 = parse_state("kdv.u0", c.text("kdv.u0"), c.n_max(), rng);
  const FourierState u1 = parse_state("kdv.u1", c.text("kdv.u1"), c.n_max(), rng);
  require(std::abs(u0[0] - u1[0]) == 0.0, "kdv.u1", "mass is conserved, so u1 needs the mean of u0");
  const double mean = u0[0].real();
  const HumSystem sys = control_system(c, LinearFlow{p, -mean});
  PicardSettings s;
  s.tol = positive(c, "kdv.tol");
  s.max_iter = static_cast<int>(c.integer("kdv.max_iter"));
  require(s.max_iter >= 1, "kdv.max_iter", "must be at least 1");
  s.integrator.dt = positive(c, "run.dt");
  const int stride = static_cast<int>(c.integer("kdv.csv_stride"));
  require(stride >= 1, "kdv.csv_stride", "must be at least 1");

  const PicardRun run = picard_control(u0, u1, sys, s);
  Report rep;
  json r;
  json iterates = json::array();
  for (const PicardIterate& it : run.iterates)
    iterates.push_back({{"endpoint_error", it.endpoint_error},
                        {"cg_iterations", it.control.cg_iterations},
                        {"cost", it.control.cost},
                        {"v1_norm", l2_norm(it.v1)}});
  r["iterates"] = iterates;
  r["converged"] = run.converged;
  r["diverged"] = run.diverged;
  r["failure"] = run.failure;
  r["contraction_estimates"] = run.contraction_estimates;
  r["contraction_factor"] = opt(run.contraction_factor);
  r["data_size"] = run.data_size;
  r["radius_estimate"] = run.radius_estimate;
  r["fixed_point_shift"] = run.fixed_point_shift;
  r["mass_drift"] = run.mass_drift;
  r["mean"] = mean;
  if (run.converged && c.flag("kdv.check_dt"))
    r["dt_refinement_change"] = dt_refinement_change(run, u0, u1, sys, s);
  if (!run.iterates.empty()) {
    std::ostringstream csv;
    write_trajectory_csv(strided(run.iterates.back().trajectory, stride), csv);
    rep.csv.push_back({"trajectory.csv", csv.str()});
  }
  rep.body["result"] = r;
  if (!run.converged) rep.exit_code = kNumericalFailure;
  return rep;
}

std::vector<double> phases(const ExperimentConfig& c, int blocks, double span, std::mt19937_64& rng) {
  const std::string text = c.text("decay.phases");
  std::vector<double> xi;
  if (text == "random") {
    std::uniform_real_distribution<double> u(0.0, span);
    for (int i = 0; i < blocks; ++i) xi.push_back(u(rng));
    return xi;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      xi.push_back(parse_real_expression(item));
    } catch (const ConfigError& e) {
      throw ConfigError(field_error("decay.phases", e.what()));
    }
  }
  require(static_cast<int>(xi.size()) >= blocks, "decay.phases", "fewer phases than blocks");
  return xi;
}

Report decay(const ExperimentConfig& c) {
  const DispersionSymbol p = symbol_field(c);
  const std::string kind = c.text("decay.kind");
  const double a0 = c.real("decay.a0");
  require(a0 >= 0, "decay.a0", "damping must be nonnegative");
  const double block = positive(c, "decay.block_length");
  const int blocks = static_cast<int>(c.integer("decay.blocks"));
  require(blocks >= 5, "decay.blocks", "the rate fit needs at least 5 blocks");
  std::mt19937_64 rng(c.seed());

  std::optional<DampingField> field;
  if (kind == "constant") {
    field = DampingField::constant(a0);
  } else if (kind == "time_independent") {
    field = DampingField::time_independent(interval_field(c, "decay.support", kTwoPi), a0);
  } else if (kind == "periodic_blocks") {
    field = DampingField::periodic_blocks(region_field(c, "decay.block", block), a0);
  } else if (kind == "modulated_wave") {
    const IntervalUnion f = interval_field(c, "decay.support", kTwoPi);
    field = DampingField::modulated_wave([f](double x) { return f.contains(x) ? 1.0 : 0.0; }, block,
                                         phases(c, blocks, kTwoPi, rng), a0);
  } else if (kind == "block_indicator") {
    field = DampingField::block_indicator(region_field(c, "decay.block", block), phases(c, blocks, block, rng), a0);
  } else {
    throw ConfigError(field_error("decay.kind", "unknown kind \"" + kind +
                                                    "\" (constant, time_independent, periodic_blocks, "
                                                    "modulated_wave, block_indicator)"));
  }
  const DampingField& a = *field;
  const double dt_req = positive(c, "run.dt");
  const int per_block = static_cast<int>(std::ceil(block / dt_req - 1e-9));
  const double dt = block / per_block;

  FourierState u0 = parse_state("decay.u0", c.text("decay.u0"), c.n_max(), rng);
  require(l2_norm(u0) > 0, "decay.u0", "zero initial datum");
  const Trajectory tr = solve_damped(u0, a, p, blocks * block, {dt, per_block});
  const DecayReport d = decay_rate(tr, block);

  Report rep;
  json r;
  r["kind"] = a.kind_name();
  r["dt"] = dt;
  r["block_length"] = block;
  r["block_norms"] = d.block_norms;
  r["alphas"] = d.alphas;
  r["energy_identity_gaps"] = d.energy_identity_gaps;
  r["gamma_fit"] = d.gamma_fit;
  r["alpha_above_one"] = d.alpha_above_one;
  r["underflow"] = d.underflow;
  std::vector<double> l1;
  for (int b = 0; b < blocks; ++b) l1.push_back(a.block_l1_linf(b));
  r["block_l1_linf"] = l1;
  r["alpha0"] = *std::min_element(l1.begin(), l1.end());
  if (c.flag("decay.monodromy")) {
    const std::vector<double> m = block_contractions(a, p, c.n_max(), blocks, dt);
    const auto [lo, hi] = std::minmax_element(m.begin(), m.end());
    r["monodromy_alphas"] = m;
    r["monodromy_spread"] = (*hi - *lo) / *hi;
  }
  std::ostringstream csv;
  csv << std::setprecision(17) << "n,norm,alpha\n";
  for (std::size_t n = 0; n < d.block_norms.size(); ++n) {
    csv << n << ',' << d.block_norms[n] << ',';
    if (n > 0) csv << d.alphas[n - 1];
    csv << '\n';
  }
  rep.csv.push_back({"decay.csv", csv.str()});
  rep.body["result"] = r;
  if (d.alpha_above_one) rep.exit_code = kNumericalFailure;
  return rep;
}

// The verify suite: one entry per identity, value against bound.
struct Checks {
  json list = json::array();
  bool all = true;
  void add(const std::string& name, double value, double bound) {
    const bool pass = value <= bound;
    all = all && pass;
    list.push_back({{"name", name}, {"value", value}, {"bound", bound}, {"pass", pass}});
  }
};

IntervalUnion random_support(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  const int n = count(rng);
  std::vector<double> pts;
  for (int i = 0; i < 2 * n; ++i) pts.push_back(u(rng));
  std::sort(pts.begin(), pts.end());
  std::vector<Interval> iv;
  for (int i = 0; i < n; ++i) iv.push_back({pts[2 * i], pts[2 * i + 1]});
  return IntervalUnion(iv, kTwoPi);
}

FourierState random_real(int n_max, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  FourierState s(n_max);
  for (int k = 1; k <= n_max; ++k) {
    s.at(k) = {g(rng), g(rng)};
    s.at(-k) = std::conj(s[k]);
  }
  return s;
}

Report verify(const ExperimentConfig& c) {
  std::mt19937_64 rng(c.seed());
  const DispersionSymbol cubic = DispersionSymbol::cubic();
  Checks ch;

  double gap = 0, delta_min = 1e300;
  for (int draw = 0; draw < 5; ++draw) {
    const MassControlOperator op(random_support(rng), 512);
    for (int k = -6; k <= 6; ++k) {
      if (k == 0) continue;
      const IdentityCheck row = row_identity_check(op, k, 256);
      gap = std::max(gap, row.holds(1e-10) ? row.gap : 1.0);
      for (int m = -6; m <= 6; ++m) {
        if (m == 0) continue;
        const IdentityCheck in = inner_product_identity_check(op, k, m, 256);
        gap = std::max(gap, in.holds(1e-10) ? in.gap : 1.0);
        gap = std::max(gap, coefficient_identity_check(op, k, m).gap);
      }
    }
    delta_min = std::min(delta_min, coercivity_delta(op).delta);
  }
  ch.add("mass_op.identities", gap, 1e-10);
  ch.add("mass_op.coercivity_negated", -delta_min, 0.0);

  ch.add("theta.cubic_1_7", std::abs(static_cast<double>(count_coincidences(cubic, {1, 7}, 200)) - 2), 0.0);
  const DispersionSymbol quartic = DispersionSymbol::parse("k^4 + k^2");
  std::uniform_int_distribution<int> kk(-200, 200);
  double theta_excess = -1e300;
  for (const DispersionSymbol* p : {&cubic, &quartic}) {
    for (int draw = 0; draw < 100; ++draw) {
      int k1 = kk(rng), k2 = kk(rng);
      if (k1 == k2) k2 = k1 + 1;
      const LatticePoint alpha{k1 - k2, (*p)(k1) - (*p)(k2)};
      theta_excess = std::max(theta_excess, static_cast<double>(count_coincidences(*p, alpha, 200) - (p->degree() - 1)));
    }
  }
  ch.add("theta.scan_excess", theta_excess, 0.0);

  FourierState two(1);
  two.at(0) = 1;
  two.at(1) = 1;
  ch.add("strichartz.two_mode", std::abs(strichartz_l4_ratio(two, cubic, 5).ratio - std::pow(6 * std::numbers::pi * std::numbers::pi, 0.25)),
         1e-10);

  const GramReport full = gram_matrix(FrequencySet::band(cubic, -1, 4), SpaceTimeRegion::full_cell());
  ch.add("observability.full_cell", std::abs(full.lambda_min - 4 * std::numbers::pi * std::numbers::pi), 1e-10);
  ch.add("observability.full_cell_threshold",
         static_cast<double>(highfreq_threshold(SpaceTimeRegion::full_cell(), cubic).n), 0.0);

  const HumSystem sys(IntervalUnion({{0, 1}, {1.5, 2}}, 2.0), IntervalUnion({{0, std::numbers::pi}, {4, 5}}),
                      LinearFlow{cubic, 0.0}, 8);
  const ControlSolution sol = synthesize_control(sys, random_real(8, rng), random_real(8, rng), 1e-10);
  ch.add("hum.endpoint_residual", sol.endpoint_residual, 1e-8);
  ch.add("hum.phi_lambda_min_negated", -twisted_gram(sys).lambda_min, 0.0);

  FourierState u0 = random_real(16, rng);
  u0.coeffs() *= 1e-2 / l2_norm(u0);
  const Trajectory kdv = integrate_kdv(u0, nullptr, 0.5);
  double drift = 0;
  for (const FourierState& s : kdv.states) drift = std::max(drift, std::abs(l2_norm(s) - 1e-2));
  ch.add("kdv.norm_drift", drift, 1e-10);
  ch.add("kdv.mass_drift", mass_drift(kdv), 1e-12);

  const Trajectory damped = solve_damped(random_real(8, rng), DampingField::constant(1.0), cubic, 5.0, {1e-3, 100});
  const DecayReport d = decay_rate(damped, 1.0);
  double alpha_err = 0, energy = 0;
  for (double a : d.alphas) alpha_err = std::max(alpha_err, std::abs(a - std::exp(-2.0)));
  for (double e : d.energy_identity_gaps) energy = std::max(energy, e);
  ch.add("damping.uniform_alpha", alpha_err, 1e-8);
  ch.add("damping.uniform_gamma", std::abs(d.gamma_fit - 1), 1e-6);
  ch.add("damping.uniform_energy_gap", energy, 1e-8);

  ch.add("resolvent.constant", std::abs(resolvent_ratio(cubic, {0, 1}, FourierState::delta(4, 0, 1.0)) - 1 / kTwoPi),
         1e-12);
  ch.add("resolvent.mode_50",
         std::abs(resolvent_ratio(cubic, {0, 1}, FourierState::delta(50, 50, 1.0)) -
                  1 / (kTwoPi * std::abs(std::complex<double>(125000.0, -1.0)))),
         1e-12);

  SpaceTimeSamples f{1.0, Eigen::MatrixXcd(20, 9)};
  for (int j = 0; j < 9; ++j) f.values.col(j).setConstant(std::polar(1.0, 2 * kTwoPi * j / 9));
  const double expect = std::sqrt(2 - 2 * std::sin(8.0) / 8) / 8 / kTwoPi;
  ch.add("duhamel.single_mode", std::abs(duhamel_linfty_l2_ratio(f, cubic, 8) - expect) / expect, 1e-10);

  Report rep;
  rep.body["result"] = {{"checks", ch.list}, {"all_pass", ch.all}};
  if (!ch.all) rep.exit_code = kNumericalFailure;
  return rep;
}

}  // namespace

std::string ExperimentConfig::text(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) throw ConfigError(field_error(key, "missing"));
  return it->second;
}

double ExperimentConfig::real(const std::string& key) const {
  try {
    return parse_real_expression(text(key));
  } catch (const ConfigError& e) {
    throw ConfigError(field_error(key, e.what()));
  }
}

long long ExperimentConfig::integer(const std::string& key) const {
  const std::string t = text(key);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size()) throw ConfigError(field_error(key, "expected an integer, got \"" + t + "\""));
  return v;
}

bool ExperimentConfig::flag(const std::string& key) const {
  const std::string t = text(key);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(field_error(key, "expected true or false, got \"" + t + "\""));
}

std::string ExperimentConfig::hash() const {
  std::string s = "workflow=" + workflow + "\n";
  for (const auto& [k, v] : values) s += k + "=" + v + "\n";
  return fnv1a(s);
}

ExperimentConfig default_config(const std::string& workflow) {
  if (std::find(kWorkflows.begin(), kWorkflows.end(), workflow) == kWorkflows.end())
    throw ConfigError("unknown workflow \"" + workflow + "\"");
  ExperimentConfig c;
  c.workflow = workflow;
  c.values = base_defaults();
  if (workflow == "control-kdv") c.values["run.nmax"] = "32";
  return c;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  std::string t = s.substr(b, e - b + 1);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
  return t;
}

std::string format_real(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void validate(const ExperimentConfig& c) {
  require(c.integer("run.nmax") >= 4, "run.nmax", "truncation must be at least 4");
  require(c.integer("run.seed") >= 0, "run.seed", "seed must be nonnegative");
  positive(c, "run.dt");
  positive(c, "run.tol");
}

}  // namespace

ExperimentConfig load_config(const std::string& workflow, const std::string& ini_path, const Overrides& flags) {
  ExperimentConfig c = default_config(workflow);
  if (!ini_path.empty()) {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::read_ini(ini_path, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(e.filename() + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    for (const auto& [section, body] : tree) {
      if (body.empty()) throw ConfigError(ini_path + ": key \"" + section + "\" outside a section");
      for (const auto& [key, value] : body) {
        const std::string full = section + "." + key;
        if (!c.values.count(full)) throw ConfigError(ini_path + ": " + field_error(full, "unknown key"));
        c.values[full] = trim(value.data());
      }
    }
  }
  if (flags.seed) c.values["run.seed"] = std::to_string(*flags.seed);
  if (flags.n_max) c.values["run.nmax"] = std::to_string(*flags.n_max);
  if (flags.dt) c.values["run.dt"] = format_real(*flags.dt);
  validate(c);
  return c;
}

FourierState parse_state(const std::string& field, const std::string& text, int n_max, std::mt19937_64& rng) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  auto fail = [&](const std::string& msg, std::size_t at) {
    throw ConfigError(field_error(field, msg + " at column " + std::to_string(at + 1) + " of \"" + s + "\""));
  };
  if (s.rfind("random", 0) == 0) {
    double norm = 1.0;
    if (s.size() > 6) {
      if (s[6] != '(' || s.back() != ')') fail("expected random or random(norm)", 6);
      norm = parse_real_expression(s.substr(7, s.size() - 8));
      if (!(norm > 0)) fail("norm must be positive", 7);
    }
    FourierState r = random_real(n_max, rng);
    r.coeffs() *= norm / l2_norm(r);
    return r;
  }
  FourierState u(n_max);
  std::size_t i = 0;
  if (s.empty()) fail("empty state", 0);
  while (i < s.size()) {
    double sign = 1;
    if (s[i] == '+' || s[i] == '-') {
      sign = s[i] == '-' ? -1 : 1;
      ++i;
    } else if (i > 0) {
      fail("expected + or -", i);
    }
    double amp = 1;
    bool have_amp = false;
    if (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) {
      std::size_t used = 0;
      try {
        amp = std::stod(s.substr(i), &used);
      } catch (const std::exception&) {
        fail("bad number", i);
      }
      i += used;
      have_amp = true;
    }
    if (i < s.size() && s[i] == '*') {
      if (!have_amp) fail("'*' without a coefficient", i);
      ++i;
    }
    const std::string fn = s.substr(i, 4);
    if (fn == "sin(" || fn == "cos(") {
      i += 4;
      std::int64_t k = 1;
      if (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        std::size_t used = 0;
        k = std::stoll(s.substr(i), &used);
        i += used;
        if (i < s.size() && s[i] == '*') ++i;
      }
      if (s.compare(i, 2, "x)") != 0) fail("expected x)", i);
      i += 2;
      if (k < 1 || k > n_max) fail("frequency outside 1.." + std::to_string(n_max), i);
      const double a = sign * amp;
      if (fn == "sin(") {
        u.at(k) += std::complex<double>(0, -a / 2);
        u.at(-k) += std::complex<double>(0, a / 2);
      } else {
        u.at(k) += a / 2;
        u.at(-k) += a / 2;
      }
    } else {
      if (!have_amp) fail("expected a number, sin(kx) or cos(kx)", i);
      u.at(0) += sign * amp;
    }
  }
  return u;
}

Report run(const ExperimentConfig& config) {
  Report rep;
  if (config.workflow == "certify") rep = certify(config);
  else if (config.workflow == "control-linear") rep = control_linear(config);
  else if (config.workflow == "control-kdv") rep = control_kdv(config);
  else if (config.workflow == "decay") rep = decay(config);
  else if (config.workflow == "verify") rep = verify(config);
  else throw ConfigError("unknown workflow \"" + config.workflow + "\"");

  rep.body["provenance"] = {
      {"program", "dispctl"},
      {"workflow", config.workflow},
      {"config_hash", config.hash()},
      {"config", config.values},
      {"seed", config.seed()},
      {"n_max", config.n_max()},
      {"conventions",
       {{"fourier", "u_hat(k) = (1/2pi) int_0^2pi u(x) e^{-ikx} dx, ||u||^2 = 2pi sum_k |u_hat(k)|^2"},
        {"indicator", "1_G^(alpha) = (1/(2pi T)) int_G e^{-i(alpha_x x + alpha_t (2pi/T) t)} dx dt on [0,T) x [0,2pi)"},
        {"flow", "S(t) e^{ikx} = e^{i p(k) t} e^{ikx}"},
        {"gram", "entries int_G e^{i(lambda_c - lambda_r).(x,t)}; constant = normalization / lambda_min"}}}};
  rep.body["status"] = rep.exit_code == kOk ? "ok" : "numerical_failure";
  return rep;
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Observability, control and damping of dispersive equations on the torus"};
  app.footer(
      "Exit codes:\n"
      "  0  success\n"
      "  1  numerical failure: lambda_min unavailable, Picard divergence or\n"
      "     stagnation, CG stagnation, failed identity check\n"
      "  2  config error: unreadable file, unknown key, malformed region or value");
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int n_max = 0;
  double dt = 0;
  std::map<std::string, CLI::App*> subs;
  std::vector<CLI::Option*> seed_opts, nmax_opts, dt_opts;
  const std::map<std::string, std::string> help{
      {"certify", "observability certificate for a space-time region"},
      {"control-linear", "HUM control of the linear equation"},
      {"control-kdv", "Picard control of the nonlinear KdV equation"},
      {"decay", "decay of the damped equation"},
      {"verify", "identity checks of every module"}};
  for (const std::string& w : kWorkflows) {
    CLI::App* sub = app.add_subcommand(w, help.at(w));
    sub->add_option("--config", config_path, "INI file with [run], [symbol], [" + w + "] sections");
    sub->add_option("--out", out_dir, "directory for report.json and CSV series");
    seed_opts.push_back(sub->add_option("--seed", seed, "seed for randomized data and checks"));
    nmax_opts.push_back(sub->add_option("--nmax", n_max, "Fourier truncation N_max"));
    dt_opts.push_back(sub->add_option("--dt", dt, "time step"));
    subs[w] = sub;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  std::string workflow;
  for (const auto& [w, sub] : subs)
    if (sub->parsed()) workflow = w;
  auto given = [](const std::vector<CLI::Option*>& opts) {
    return std::any_of(opts.begin(), opts.end(), [](CLI::Option* o) { return o->count() > 0; });
  };
  Overrides flags;
  if (given(seed_opts)) flags.seed = seed;
  if (given(nmax_opts)) flags.n_max = n_max;
  if (given(dt_opts)) flags.dt = dt;

  Report rep;
  try {
    if (!config_path.empty() && !std::filesystem::exists(config_path))
      throw ConfigError(config_path + ": no such file");
    rep = run(load_config(workflow, config_path, flags));
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const AliasingError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  }

  const std::string body = rep.body.dump(2) + "\n";
  if (out_dir.empty()) {
    out << body;
  } else {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
      err << "config error: cannot create " << out_dir << ": " << ec.message() << '\n';
      return kConfigError;
    }
    std::ofstream(std::filesystem::path(out_dir) / "report.json", std::ios::binary) << body;
    for (const CsvFile& f : rep.csv) std::ofstream(std::filesystem::path(out_dir) / f.name, std::ios::binary) << f.body;
    out << "wrote " << (std::filesystem::path(out_dir) / "report.json").string() << '\n';
  }
  if (rep.exit_code != kOk) err << "workflow " << workflow << " finished with a numerical failure\n";
  return rep.exit_code;
}

}  // namespace dispctl::cli
