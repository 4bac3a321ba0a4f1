#include "dispctl/region.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "dispctl/errors.hpp"

namespace dispctl {

namespace {

double wrap_into(double s, double period) {
  double r = std::fmod(s, period);
  if (r < 0) r += period;
  if (r >= period) r = 0.0;
  return r;
}

std::vector<Interval> normalize(std::vector<Interval> in, double period) {
  std::vector<Interval> pieces;
  for (const Interval& i : in) {
    if (!(i.hi >= i.lo)) throw std::invalid_argument("interval with hi < lo");
    const double len = i.hi - i.lo;
    if (len <= 0) continue;
    if (len >= period) return {{0.0, period}};
    if (i.lo >= 0 && i.hi <= period) {
      pieces.push_back(i);
      continue;
    }
    const double lo = wrap_into(i.lo, period);
    const double hi = lo + len;
    if (hi <= period) {
      pieces.push_back({lo, hi});
    } else {
      pieces.push_back({lo, period});
      pieces.push_back({0.0, hi - period});
    }
  }
  std::sort(pieces.begin(), pieces.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const Interval& i : pieces) {
    if (i.hi <= i.lo) continue;
    if (!out.empty() && i.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, i.hi);
    } else {
      out.push_back(i);
    }
  }
  return out;
}

void require_same_period(double a, double b) {
  if (a != b) throw std::invalid_argument("regions live on different period cells");
}

}  // namespace

IntervalUnion::IntervalUnion(double period) : period_(period) {
  if (!(period > 0)) throw std::invalid_argument("period must be positive");
}

IntervalUnion::IntervalUnion(std::initializer_list<Interval> intervals, double period)
    : IntervalUnion(std::vector<Interval>(intervals), period) {}

IntervalUnion::IntervalUnion(const std::vector<Interval>& intervals, double period)
    : IntervalUnion(period) {
  iv_ = normalize(intervals, period);
}

double IntervalUnion::measure() const {
  double m = 0;
  for (const Interval& i : iv_) m += i.length();
  return m;
}

bool IntervalUnion::contains(double s) const {
  const double r = wrap_into(s, period_);
  auto it = std::upper_bound(iv_.begin(), iv_.end(), r,
                             [](double v, const Interval& i) { return v < i.lo; });
  if (it == iv_.begin()) return false;
  --it;
  return r < it->hi;
}

std::complex<double> IntervalUnion::exp_integral(long double w) const {
  std::complex<long double> acc = 0;
  for (const Interval& i : iv_) {
    const auto v = dispctl::exp_integral<long double>(w, i.lo, i.hi);
    acc += v;
  }
  return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

std::complex<double> IntervalUnion::indicator_fourier(std::int64_t alpha) const {
  const long double w = -static_cast<long double>(alpha) * kTwoPiL / static_cast<long double>(period_);
  return exp_integral(w) / period_;
}

IntervalUnion IntervalUnion::translate(double h) const {
  std::vector<Interval> shifted;
  shifted.reserve(iv_.size());
  for (const Interval& i : iv_) shifted.push_back({i.lo + h, i.hi + h});
  return IntervalUnion(shifted, period_);
}

IntervalUnion IntervalUnion::clip(double lo, double hi) const {
  std::vector<Interval> out;
  for (const Interval& i : iv_) {
    const double a = std::max(i.lo, lo), b = std::min(i.hi, hi);
    if (b > a) out.push_back({a, b});
  }
  return IntervalUnion(out, period_);
}

std::string IntervalUnion::to_string() const {
  if (iv_.empty()) return "{}";
  std::ostringstream os;
  os.precision(17);
  for (std::size_t j = 0; j < iv_.size(); ++j) {
    if (j) os << " U ";
    os << "[" << iv_[j].lo << ", " << iv_[j].hi << ")";
  }
  return os.str();
}

IntervalUnion intersect(const IntervalUnion& a, const IntervalUnion& b) {
  require_same_period(a.period(), b.period());
  std::vector<Interval> out;
  const auto& x = a.intervals();
  const auto& y = b.intervals();
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    const double lo = std::max(x[i].lo, y[j].lo), hi = std::min(x[i].hi, y[j].hi);
    if (hi > lo) out.push_back({lo, hi});
    if (x[i].hi < y[j].hi) ++i; else ++j;
  }
  return IntervalUnion(out, a.period());
}

IntervalUnion set_difference(const IntervalUnion& a, const IntervalUnion& b) {
  require_same_period(a.period(), b.period());
  std::vector<Interval> out;
  for (const Interval& i : a.intervals()) {
    double cur = i.lo;
    for (const Interval& c : b.intervals()) {
      if (c.hi <= cur || c.lo >= i.hi) continue;
      if (c.lo > cur) out.push_back({cur, c.lo});
      cur = std::max(cur, c.hi);
      if (cur >= i.hi) break;
    }
    if (cur < i.hi) out.push_back({cur, i.hi});
  }
  return IntervalUnion(out, a.period());
}

IntervalUnion unite(const IntervalUnion& a, const IntervalUnion& b) {
  require_same_period(a.period(), b.period());
  std::vector<Interval> all = a.intervals();
  all.insert(all.end(), b.intervals().begin(), b.intervals().end());
  return IntervalUnion(all, a.period());
}

// ---------------------------------------------------------------------------

SpaceTimeRegion::SpaceTimeRegion(double time_period) : time_period_(time_period) {
  if (!(time_period > 0)) throw std::invalid_argument("time period must be positive");
}

SpaceTimeRegion::SpaceTimeRegion(std::vector<Rectangle> rectangles, double time_period)
    : SpaceTimeRegion(time_period) {
  for (Rectangle& r : rectangles) {
    require_same_period(r.time.period(), time_period);
    require_same_period(r.space.period(), kTwoPi);
    if (r.time.empty() || r.space.empty()) continue;
    rects_.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < rects_.size(); ++i)
    for (std::size_t j = i + 1; j < rects_.size(); ++j) {
      const double overlap = intersect(rects_[i].time, rects_[j].time).measure() *
                             intersect(rects_[i].space, rects_[j].space).measure();
      if (overlap > 1e-14 * cell_volume())
        throw std::invalid_argument("rectangles of a space-time region overlap");
    }
}

SpaceTimeRegion SpaceTimeRegion::product(const IntervalUnion& time, const IntervalUnion& space) {
  return SpaceTimeRegion({Rectangle{time, space}}, time.period());
}

SpaceTimeRegion SpaceTimeRegion::full_cell(double time_period) {
  return product(IntervalUnion::full(time_period), IntervalUnion::full(kTwoPi));
}

double SpaceTimeRegion::measure() const {
  double m = 0;
  for (const Rectangle& r : rects_) m += r.measure();
  return m;
}

bool SpaceTimeRegion::contains(double t, double x) const {
  for (const Rectangle& r : rects_)
    if (r.time.contains(t) && r.space.contains(x)) return true;
  return false;
}

std::complex<double> SpaceTimeRegion::exp_integral(long double w_t, std::int64_t k) const {
  std::complex<double> acc = 0;
  for (const Rectangle& r : rects_)
    acc += r.time.exp_integral(w_t) * r.space.exp_integral(static_cast<long double>(k));
  return acc;
}

std::complex<double> SpaceTimeRegion::indicator_fourier(LatticePoint alpha) const {
  std::complex<double> acc = 0;
  for (const Rectangle& r : rects_)
    acc += r.time.indicator_fourier(alpha.time) * r.space.indicator_fourier(alpha.space);
  return acc;
}

SpaceTimeRegion SpaceTimeRegion::translate(Shift h) const {
  std::vector<Rectangle> out;
  for (const Rectangle& r : rects_) out.push_back({r.time.translate(h.t), r.space.translate(h.x)});
  return SpaceTimeRegion(std::move(out), time_period_);
}

std::string SpaceTimeRegion::to_string() const {
  if (rects_.empty()) return "{}";
  std::string s;
  for (std::size_t j = 0; j < rects_.size(); ++j) {
    if (j) s += " ; ";
    s += rects_[j].time.to_string() + " x " + rects_[j].space.to_string();
  }
  return s;
}

SpaceTimeRegion intersect(const SpaceTimeRegion& a, const SpaceTimeRegion& b) {
  require_same_period(a.time_period(), b.time_period());
  std::vector<Rectangle> out;
  for (const Rectangle& r : a.rectangles())
    for (const Rectangle& s : b.rectangles())
      out.push_back({intersect(r.time, s.time), intersect(r.space, s.space)});
  return SpaceTimeRegion(std::move(out), a.time_period());
}

SpaceTimeRegion set_difference(const SpaceTimeRegion& a, const SpaceTimeRegion& b) {
  require_same_period(a.time_period(), b.time_period());
  std::vector<Rectangle> pieces = a.rectangles();
  for (const Rectangle& cut : b.rectangles()) {
    std::vector<Rectangle> next;
    for (const Rectangle& r : pieces) {
      // (A x B) \ (C x D) = (A \ C) x B  U  (A n C) x (B \ D)
      next.push_back({set_difference(r.time, cut.time), r.space});
      next.push_back({intersect(r.time, cut.time), set_difference(r.space, cut.space)});
    }
    pieces.clear();
    for (Rectangle& r : next)
      if (!r.time.empty() && !r.space.empty()) pieces.push_back(std::move(r));
  }
  return SpaceTimeRegion(std::move(pieces), a.time_period());
}

double plancherel_total(const SpaceTimeRegion& g) { return g.measure() / g.cell_volume(); }

double disk_energy(const SpaceTimeRegion& g, std::int64_t n) {
  if (n < 0) throw std::invalid_argument("negative disk radius");
  const auto& rects = g.rectangles();
  const std::size_t r = rects.size();
  if (r == 0) return 0.0;
  using C = std::complex<long double>;
  auto widen = [](std::complex<double> z) { return C(z.real(), z.imag()); };

  // Time factors for |a| <= n, then prefix sums over the symmetric window
  // |a| <= m of It_i(a) conj(It_j(a)).
  std::vector<std::vector<C>> it(r, std::vector<C>(static_cast<std::size_t>(2 * n + 1)));
  for (std::size_t i = 0; i < r; ++i)
    for (std::int64_t a = -n; a <= n; ++a)
      it[i][static_cast<std::size_t>(a + n)] = widen(rects[i].time.indicator_fourier(a));
  std::vector<std::vector<std::vector<C>>> prefix(r, std::vector<std::vector<C>>(r));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      auto& pr = prefix[i][j];
      pr.resize(static_cast<std::size_t>(n + 1));
      const auto& u = it[i];
      const auto& v = it[j];
      C acc = u[static_cast<std::size_t>(n)] * std::conj(v[static_cast<std::size_t>(n)]);
      pr[0] = acc;
      for (std::int64_t m = 1; m <= n; ++m) {
        acc += u[static_cast<std::size_t>(n + m)] * std::conj(v[static_cast<std::size_t>(n + m)]);
        acc += u[static_cast<std::size_t>(n - m)] * std::conj(v[static_cast<std::size_t>(n - m)]);
        pr[static_cast<std::size_t>(m)] = acc;
      }
    }

  long double total = 0;
  std::vector<C> jx(r);
  for (std::int64_t b = -n; b <= n; ++b) {
    const auto rem = static_cast<std::uint64_t>(n * n - b * b);
    auto m = static_cast<std::int64_t>(std::sqrt(static_cast<long double>(rem)));
    while (static_cast<std::uint64_t>(m * m) > rem) --m;
    while (static_cast<std::uint64_t>((m + 1) * (m + 1)) <= rem) ++m;
    for (std::size_t i = 0; i < r; ++i) jx[i] = widen(rects[i].space.indicator_fourier(b));
    C acc = 0;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j)
        acc += jx[i] * std::conj(jx[j]) * prefix[i][j][static_cast<std::size_t>(m)];
    total += acc.real();
  }
  return static_cast<double>(total);
}

double tail_energy(const SpaceTimeRegion& g, std::int64_t n) {
  const double t = plancherel_total(g) - disk_energy(g, n);
  return t > 0 ? t : 0.0;
}

// ---------------------------------------------------------------------------
// Config parsing.

namespace {

class Cursor {
 public:
  Cursor(const std::string& text, std::string what) : s_(text), what_(std::move(what)) {}

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool at_end() {
    skip();
    return i_ >= s_.size();
  }
  char peek() {
    skip();
    return i_ < s_.size() ? s_[i_] : '\0';
  }
  bool eat(char c) {
    if (peek() == c) {
      ++i_;
      return true;
    }
    return false;
  }
  bool eat_word(const char* w) {
    skip();
    const std::size_t n = std::char_traits<char>::length(w);
    if (s_.compare(i_, n, w) == 0) {
      i_ += n;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw ConfigError(what_ + " \"" + s_ + "\": " + msg + " at column " + std::to_string(i_ + 1));
  }

  double expression() {
    double v = term();
    for (;;) {
      if (eat('+')) v += term();
      else if (eat('-')) v -= term();
      else return v;
    }
  }

 private:
  double term() {
    double v = factor();
    for (;;) {
      if (eat('*')) v *= factor();
      else if (eat('/')) {
        const double d = factor();
        if (d == 0) fail("division by zero");
        v /= d;
      } else if (peek() == 'p' || peek() == '(') {
        v *= factor();  // implicit product, e.g. "2pi"
      } else {
        return v;
      }
    }
  }
  double factor() {
    if (eat('-')) return -factor();
    if (eat('+')) return factor();
    if (eat('(')) {
      const double v = expression();
      expect(')');
      return v;
    }
    if (eat_word("pi")) return std::numbers::pi;
    skip();
    const char* begin = s_.c_str() + i_;
    char* end = nullptr;
    if (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.')) {
      const double v = std::strtod(begin, &end);
      if (end != begin) {
        i_ += static_cast<std::size_t>(end - begin);
        return v;
      }
    }
    fail("expected number");
  }

  const std::string& s_;
  std::string what_;
  std::size_t i_ = 0;
};

IntervalUnion union_from(Cursor& c, double period) {
  std::vector<Interval> iv;
  do {
    c.expect('[');
    const double lo = c.expression();
    c.expect(',');
    const double hi = c.expression();
    if (!c.eat(')') && !c.eat(']')) c.fail("expected ')'");
    if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) c.fail("interval with hi < lo");
    iv.push_back({lo, hi});
  } while (c.eat('U') || c.eat('u'));
  return IntervalUnion(iv, period);
}

}  // namespace

double parse_real_expression(const std::string& text) {
  Cursor c(text, "expression");
  const double v = c.expression();
  if (!c.at_end()) c.fail("trailing characters");
  return v;
}

IntervalUnion parse_interval_union(const std::string& text, double period) {
  Cursor c(text, "region");
  if (c.at_end()) c.fail("empty region");
  IntervalUnion u = union_from(c, period);
  if (!c.at_end()) c.fail("trailing characters");
  return u;
}

SpaceTimeRegion parse_space_time_region(const std::string& text, double time_period) {
  Cursor c(text, "region");
  if (c.at_end()) c.fail("empty region");
  std::vector<Rectangle> rects;
  do {
    IntervalUnion time = union_from(c, time_period);
    c.expect('x');
    IntervalUnion space = union_from(c, kTwoPi);
    rects.push_back({std::move(time), std::move(space)});
  } while (c.eat(';'));
  if (!c.at_end()) c.fail("trailing characters");
  try {
    return SpaceTimeRegion(std::move(rects), time_period);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("region \"" + text + "\": " + e.what());
  }
}

}  // namespace dispctl
