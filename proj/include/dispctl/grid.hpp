#pragma once

#include <unsupported/Eigen/FFT>

#include <string>

#include "dispctl/errors.hpp"
#include "dispctl/fourier.hpp"

namespace dispctl {

// Point values on x_j = 2pi j / n. Holds its own FFT plan cache, so one
// instance per thread.
template <typename Real>
class GridTransform {
 public:
  using Scalar = std::complex<Real>;
  using Values = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit GridTransform(int n_points) : n_(n_points) {
    if (n_points < 1) throw std::invalid_argument("grid needs at least one point");
    fft_.SetFlag(Eigen::FFT<Real>::Unscaled);
  }

  int size() const { return n_; }

  Values to_grid(const BasicFourierState<Real>& s) {
    require(s.n_max());
    Values coef = Values::Zero(n_);
    const int m = s.n_max();
    for (int k = -m; k <= m; ++k) coef(wrap(k)) = s[k];
    Values out(n_);
    fft_.inv(out, coef);
    return out;
  }

  BasicFourierState<Real> from_grid(const Values& v, int n_max) {
    require(n_max);
    if (v.size() != n_) throw std::invalid_argument("grid size mismatch");
    Values coef(n_);
    fft_.fwd(coef, v);
    BasicFourierState<Real> s(n_max);
    const Real inv_n = Real(1) / static_cast<Real>(n_);
    for (int k = -n_max; k <= n_max; ++k) s.at(k) = coef(wrap(k)) * inv_n;
    return s;
  }

  Real node(int j) const { return static_cast<Real>(kTwoPi) * static_cast<Real>(j) / static_cast<Real>(n_); }

 private:
  void require(int n_max) const {
    if (n_ < 2 * n_max + 1)
      throw AliasingError("grid of " + std::to_string(n_) + " points cannot carry |k| <= " +
                          std::to_string(n_max));
  }
  Eigen::Index wrap(int k) const { return static_cast<Eigen::Index>(((k % n_) + n_) % n_); }

  int n_;
  Eigen::FFT<Real> fft_;
};

template <typename Real>
typename GridTransform<Real>::Values to_grid(const BasicFourierState<Real>& s, int n_points) {
  return GridTransform<Real>(n_points).to_grid(s);
}

template <typename Real>
BasicFourierState<Real> from_grid(const typename GridTransform<Real>::Values& v, int n_max) {
  return GridTransform<Real>(static_cast<int>(v.size())).from_grid(v, n_max);
}

}  // namespace dispctl
