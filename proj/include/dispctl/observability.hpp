#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dispctl/fourier.hpp"
#include "dispctl/region.hpp"
#include "dispctl/symbol.hpp"

namespace dispctl {

// Points lambda_k = (k, p(k)); at most one point per k.
class FrequencySet {
 public:
  explicit FrequencySet(DispersionSymbol p) : p_(std::move(p)) {}

  // {(k, p(k)) : n_above < |k| <= n_max}; n_above = -1 keeps k = 0.
  static FrequencySet band(const DispersionSymbol& p, std::int64_t n_above, std::int64_t n_max);

  // Throws std::invalid_argument if k is already present.
  void add(std::int64_t k);

  const DispersionSymbol& symbol() const { return p_; }
  const std::vector<LatticePoint>& points() const { return pts_; }
  std::size_t size() const { return pts_.size(); }
  bool contains(std::int64_t k) const;
  std::string to_string() const;

 private:
  DispersionSymbol p_;
  std::vector<LatticePoint> pts_;
  std::string band_;
  std::vector<std::int64_t> added_;
};

struct GramReport {
  Eigen::MatrixXcd gram;
  double lambda_min = 0;
  double lambda_max = 0;
  double normalization = 1;
  // normalization / lambda_min; empty when lambda_min <= 1e-12 lambda_max.
  std::optional<double> observability_constant;
  std::int64_t n_threshold = -1;  // -1 when no threshold was attached
  double tail_energy = 0;
  int theta = 0;  // max coincidence count among differences of the set
  double condition_number = 0;  // lambda_max / lambda_min, inf if unavailable
  double slack = 0;  // eigensolver error allowance on lambda_min
  int eigen_iterations = 0;
};

// Fills the spectrum, constant and condition number of an assembled Gram.
GramReport make_gram_report(Eigen::MatrixXcd gram, double normalization);

// #{(k1,k2) : |k1|,|k2| <= k_box, lambda_k1 - lambda_k2 = alpha}
std::int64_t count_coincidences(const DispersionSymbol& p, LatticePoint alpha, std::int64_t k_box);
// Max over alpha != 0 of coincidences inside the set.
int set_theta(const std::vector<LatticePoint>& points);

// |f|^2 has x-band 2N, so |f|^4 needs grid_n >= 4N+1 points in x; the time
// grid is sized from the spread of p over the band.
struct L4Ratio {
  double ratio = 0;  // ||f||_{L^4(T^2)} / (sum |a_k|^2)^{1/2}
  double l4_fourth = 0;  // int_{T^2} |f|^4
  double l2_squared = 0;  // sum |a_k|^2
  int theta = 0;  // d - 1
  double stated_bound = 0;  // (2pi + theta^{1/2})^{1/2}
  double plancherel_bound = 0;  // (2pi (1 + theta^{1/2}))^{1/2}
  int grid_x = 0;
  int grid_t = 0;
};
L4Ratio strichartz_l4_ratio(const FourierState& a, const DispersionSymbol& p, int grid_n);

struct LinftyL2Ratio {
  double ratio = 0;  // sup_x (int_0^T |u|^2 dt)^{1/2} / ||u_0||
  double argmax_x = 0;
  int grid_n = 0;
  // Terms of the proof, as multiples of sum |c_k|^2 where noted.
  double coincidence_term = 0;  // T sum_{p(k)=p(l)} |c_k c_l|
  double coincidence_cap = 0;  // d T sum |c_k|^2
  double proof_bound = 0;  // ratio bound from coincidences plus min(T, 2/|p(k)-p(l)|) off-diagonal
};
// Throws std::invalid_argument on the zero state.
LinftyL2Ratio linfty_l2_ratio(const FourierState& a, const DispersionSymbol& p, double t_final, int grid_n);

// Threshold rule (d-1)^{1/2} tail(N)^{1/2} < |G| / (2 * cell volume), the
// tail taken in the normalized transform on the 2pi x 2pi lattice. Regions
// with a shorter time period are read inside [0, 2pi).
struct HighFreqThreshold {
  std::int64_t n = 0;
  double tail = 0;
  double lhs = 0;  // (d-1)^{1/2} tail(N)^{1/2}
  double rhs = 0;  // |G| / (2 (2pi)^2)
  double lower_bound = 0;  // |G| - (2pi)^2 lhs, proven floor for lambda_min on |k| > N
};
HighFreqThreshold highfreq_threshold(const SpaceTimeRegion& g, const DispersionSymbol& p,
                                     std::int64_t n_cap = std::int64_t{1} << 22);
bool highfreq_condition(const SpaceTimeRegion& g, const DispersionSymbol& p, std::int64_t n);

// Entry (r, c) = int_G e^{i (lambda_c - lambda_r) . (x, t)}, so that
// a^* M a = int_G |sum a_k e^{i(kx + p(k)t)}|^2.
GramReport gram_matrix(const FrequencySet& freqs, const SpaceTimeRegion& g);

// Gram on the band N < |k| <= n_max with N from highfreq_threshold.
GramReport high_band_gram(const SpaceTimeRegion& g, const DispersionSymbol& p, std::int64_t n_max);

struct TranslationReport {
  double base_lambda = 0;  // h = 0
  std::vector<double> lambdas;  // one per shift, on G cap (G - h)
  double min_lambda = 0;
  Shift argmin;
  bool any_unavailable = false;  // some shift left no observable region
};
TranslationReport translation_stability(const FrequencySet& freqs, const SpaceTimeRegion& g,
                                        const std::vector<Shift>& shifts);

// h = 2^{-j} along t, along x and along the diagonal of the cell, j = 1..12.
// delta0 is the largest |h| below which every scanned shift keeps
// lambda_min >= base/2; 0 if even the smallest fails.
struct Delta0Scan {
  double base_lambda = 0;
  double delta0 = 0;
  std::vector<double> radii;  // |h| for j = 1..12
  std::vector<double> worst;  // min lambda over the three directions
};
Delta0Scan delta0_scan(const FrequencySet& freqs, const SpaceTimeRegion& g);

struct SweepStep {
  std::optional<std::int64_t> added;  // empty for the starting band
  GramReport report;
};
// Starts from N < |k| <= n_max and adds k0 from order (default 0, 1, -1, ..., N, -N).
std::vector<SweepStep> augmented_sweep(const DispersionSymbol& p, const SpaceTimeRegion& g, std::int64_t n,
                                       std::int64_t n_max, std::vector<std::int64_t> order = {});

// Nonnegative weight, constant on the cells of an n_t x n_x grid over [0,T) x [0,2pi).
struct GriddedWeight {
  double time_period = kTwoPi;
  Eigen::MatrixXd values;  // rows: time cells, cols: space cells

  // Samples a at cell midpoints.
  static GriddedWeight sample(const std::function<double(double, double)>& a, double time_period, int n_t,
                              int n_x);
};
// Entry (r, c) = int |a|^2 e^{i (lambda_c - lambda_r).(x,t)}, exact for the cellwise weight.
GramReport weighted_observability(const GriddedWeight& a, const FrequencySet& freqs);

}  // namespace dispctl
