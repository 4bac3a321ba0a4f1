#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "dispctl/fourier.hpp"

namespace dispctl {

struct Interval {
  double lo;
  double hi;
  double length() const { return hi - lo; }
};

// Finite union of half-open intervals in the cell [0, period). Inputs are
// wrapped into the cell and merged, so any description of the same set
// yields the same representation.
class IntervalUnion {
 public:
  explicit IntervalUnion(double period = kTwoPi);
  IntervalUnion(std::initializer_list<Interval> intervals, double period = kTwoPi);
  IntervalUnion(const std::vector<Interval>& intervals, double period);

  static IntervalUnion full(double period = kTwoPi) { return IntervalUnion({{0.0, period}}, period); }

  double period() const { return period_; }
  const std::vector<Interval>& intervals() const { return iv_; }
  bool empty() const { return iv_.empty(); }
  std::size_t size() const { return iv_.size(); }
  double measure() const;
  bool contains(double s) const;

  // int_U e^{i w s} ds, with U read as a subset of [0, period).
  std::complex<double> exp_integral(long double w) const;
  // (1/period) int_U e^{-i alpha (2pi/period) s} ds
  std::complex<double> indicator_fourier(std::int64_t alpha) const;

  // U + h modulo the period.
  IntervalUnion translate(double h) const;
  // U intersected with [lo, hi), no wrapping.
  IntervalUnion clip(double lo, double hi) const;

  std::string to_string() const;

 private:
  double period_;
  std::vector<Interval> iv_;
};

IntervalUnion intersect(const IntervalUnion& a, const IntervalUnion& b);
IntervalUnion set_difference(const IntervalUnion& a, const IntervalUnion& b);
IntervalUnion unite(const IntervalUnion& a, const IntervalUnion& b);

inline double measure(const IntervalUnion& u) { return u.measure(); }

// Lattice frequency alpha = (alpha_x, alpha_t); lambda_k = (k, p(k)).
struct LatticePoint {
  std::int64_t space = 0;
  std::int64_t time = 0;
  bool operator==(const LatticePoint&) const = default;
};

struct Shift {
  double t = 0.0;
  double x = 0.0;
};

struct Rectangle {
  IntervalUnion time;
  IntervalUnion space;
  double measure() const { return time.measure() * space.measure(); }
};

// Disjoint union of products (time set) x (space set) in [0, T_period) x [0, 2pi).
class SpaceTimeRegion {
 public:
  explicit SpaceTimeRegion(double time_period = kTwoPi);
  SpaceTimeRegion(std::vector<Rectangle> rectangles, double time_period);

  static SpaceTimeRegion product(const IntervalUnion& time, const IntervalUnion& space);
  static SpaceTimeRegion full_cell(double time_period = kTwoPi);

  double time_period() const { return time_period_; }
  double cell_volume() const { return kTwoPi * time_period_; }
  const std::vector<Rectangle>& rectangles() const { return rects_; }
  bool empty() const { return rects_.empty(); }
  double measure() const;
  bool contains(double t, double x) const;

  // Raw integral over G of e^{i(w_t t + k x)}.
  std::complex<double> exp_integral(long double w_t, std::int64_t k) const;
  // (1/(2pi T_period)) int_G e^{-i(alpha_x x + alpha_t (2pi/T_period) t)}
  std::complex<double> indicator_fourier(LatticePoint alpha) const;

  SpaceTimeRegion translate(Shift h) const;
  std::string to_string() const;

 private:
  double time_period_;
  std::vector<Rectangle> rects_;
};

SpaceTimeRegion intersect(const SpaceTimeRegion& a, const SpaceTimeRegion& b);
SpaceTimeRegion set_difference(const SpaceTimeRegion& a, const SpaceTimeRegion& b);

inline double measure(const SpaceTimeRegion& g) { return g.measure(); }
inline SpaceTimeRegion translate(const SpaceTimeRegion& g, Shift h) { return g.translate(h); }
inline IntervalUnion translate(const IntervalUnion& u, double h) { return u.translate(h); }

// Sum of |1_G^(alpha)|^2 over the whole lattice, i.e. |G| / (2pi T_period).
double plancherel_total(const SpaceTimeRegion& g);
// Sum over the Euclidean disk |alpha| <= N.
double disk_energy(const SpaceTimeRegion& g, std::int64_t n);
// Sum over |alpha| > N, as plancherel_total - disk_energy (clamped at 0).
double tail_energy(const SpaceTimeRegion& g, std::int64_t n);

// Config syntax. Endpoints are arithmetic in numbers and "pi":
//   "[0, pi) U [3*pi/2, 2pi)"
//   "[0,1) U [1.5,2) x [0,pi) U [4,5) ; [2,3) x [0,1)"   (time x space)
double parse_real_expression(const std::string& text);
IntervalUnion parse_interval_union(const std::string& text, double period);
SpaceTimeRegion parse_space_time_region(const std::string& text, double time_period);

}  // namespace dispctl
