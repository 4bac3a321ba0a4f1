#include "dispctl/symbol.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

#include "dispctl/errors.hpp"

namespace dispctl {

DispersionSymbol::DispersionSymbol(std::vector<std::int64_t> coefficients)
    : coeffs_(std::move(coefficients)) {
  while (coeffs_.size() > 1 && coeffs_.back() == 0) coeffs_.pop_back();
  if (coeffs_.size() < 3) throw std::invalid_argument("dispersion symbol needs degree >= 2");
  if (coeffs_.back() != 1) throw std::invalid_argument("dispersion symbol must be monic");
}

DispersionSymbol DispersionSymbol::monomial(int degree) {
  std::vector<std::int64_t> c(static_cast<std::size_t>(degree) + 1, 0);
  c.back() = 1;
  return DispersionSymbol(std::move(c));
}

std::int64_t DispersionSymbol::operator()(std::int64_t k) const {
  std::int64_t acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    if (__builtin_mul_overflow(acc, k, &acc) || __builtin_add_overflow(acc, *it, &acc))
      throw std::overflow_error("p(k) overflows int64 at k = " + std::to_string(k));
  }
  return acc;
}

std::string DispersionSymbol::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (int j = degree(); j >= 0; --j) {
    const std::int64_t c = coeffs_[static_cast<std::size_t>(j)];
    if (c == 0) continue;
    const std::int64_t a = c < 0 ? -c : c;
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    if (j == 0 || a != 1) os << a;
    if (j > 0) {
      if (a != 1) os << "*";
      os << "k";
      if (j > 1) os << "^" << j;
    }
  }
  return os.str();
}

namespace {

struct TermParser {
  const std::string& s;
  std::size_t i = 0;

  void skip() { while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i; }
  bool done() { skip(); return i >= s.size(); }
  bool eat(char c) {
    skip();
    if (i < s.size() && s[i] == c) { ++i; return true; }
    return false;
  }
  bool integer(std::int64_t& out) {
    skip();
    const std::size_t start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == start) return false;
    out = std::stoll(s.substr(start, i - start));
    return true;
  }
  [[noreturn]] void fail(const std::string& what) {
    throw ConfigError("symbol \"" + s + "\": " + what + " at column " + std::to_string(i + 1));
  }
};

}  // namespace

DispersionSymbol DispersionSymbol::parse(const std::string& text) {
  TermParser p{text};
  std::vector<std::int64_t> c;
  if (p.done()) p.fail("empty polynomial");
  bool first = true;
  while (!p.done()) {
    std::int64_t sign = 1;
    if (p.eat('-')) sign = -1;
    else if (!p.eat('+') && !first) p.fail("expected + or -");
    first = false;
    std::int64_t coef = 1;
    const bool has_coef = p.integer(coef);
    int power = 0;
    if (has_coef) p.eat('*');
    if (p.eat('k')) {
      power = 1;
      if (p.eat('^')) {
        std::int64_t e = 0;
        if (!p.integer(e) || e > 16) p.fail("bad exponent");
        power = static_cast<int>(e);
      }
    } else if (!has_coef) {
      p.fail("expected a term");
    }
    if (c.size() <= static_cast<std::size_t>(power)) c.resize(static_cast<std::size_t>(power) + 1, 0);
    c[static_cast<std::size_t>(power)] += sign * coef;
  }
  try {
    return DispersionSymbol(std::move(c));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("symbol \"" + text + "\": " + e.what());
  }
}

}  // namespace dispctl
