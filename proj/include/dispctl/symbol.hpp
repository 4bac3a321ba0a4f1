#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dispctl {

// Monic integer polynomial p, stored lowest order first.
class DispersionSymbol {
 public:
  explicit DispersionSymbol(std::vector<std::int64_t> coefficients);

  static DispersionSymbol monomial(int degree);
  static DispersionSymbol cubic() { return monomial(3); }
  // Accepts "k^3", "k^4 + k^2", "k^3 - 2*k + 1".
  static DispersionSymbol parse(const std::string& text);

  // Exact; throws std::overflow_error if p(k) leaves int64.
  std::int64_t operator()(std::int64_t k) const;

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<std::int64_t>& coefficients() const { return coeffs_; }
  std::string to_string() const;

  bool operator==(const DispersionSymbol&) const = default;

 private:
  std::vector<std::int64_t> coeffs_;
};

// Phase frequencies of the linear flow: omega(k) = p(k) + drift*k.
// drift is nonzero only after the mean-M reduction of KdV data.
struct LinearFlow {
  DispersionSymbol symbol = DispersionSymbol::cubic();
  double drift = 0.0;

  long double frequency(std::int64_t k) const {
    return static_cast<long double>(symbol(k)) +
           static_cast<long double>(drift) * static_cast<long double>(k);
  }
};

}  // namespace dispctl
