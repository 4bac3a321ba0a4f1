#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <vector>

namespace dispctl {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
struct Extremes {
  Real lambda_min = 0;
  Real lambda_max = 0;
  int iterations = 0;  // 0 for the dense path
};

inline constexpr Eigen::Index kDenseEigenLimit = 513;

// Extreme eigenvalues of a Hermitian operator by Lanczos with full
// reorthogonalisation. apply(v) returns A v.
template <typename Scalar, typename Apply>
auto lanczos_extremes(Apply&& apply, Eigen::Index n, typename Eigen::NumTraits<Scalar>::Real tol,
                      unsigned seed = 7) {
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  Extremes<Real> out;
  if (n == 0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<Real> nd;
  Mat<Scalar> q(n, std::min<Eigen::Index>(n, 64));
  Vec<Scalar> v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if constexpr (Eigen::NumTraits<Scalar>::IsComplex)
      v(i) = Scalar(nd(rng), nd(rng));
    else
      v(i) = nd(rng);
  }
  v.normalize();
  std::vector<Real> alpha, beta;
  Eigen::Index m = 0;
  for (;;) {
    if (m == q.cols()) q.conservativeResize(Eigen::NoChange, std::min<Eigen::Index>(n, 2 * q.cols()));
    q.col(m) = v;
    Vec<Scalar> w = apply(v);
    alpha.push_back(std::real(v.dot(w)));
    // Two passes of classical Gram-Schmidt against every Lanczos vector.
    for (int pass = 0; pass < 2; ++pass) w -= q.leftCols(m + 1) * (q.leftCols(m + 1).adjoint() * w);
    const Real b = w.norm();
    ++m;
    const bool last = m == n || b <= std::numeric_limits<Real>::min();
    if (!last && m % 8 != 0) {
      beta.push_back(b);
      v = w / b;
      continue;
    }
    Eigen::Matrix<Real, Eigen::Dynamic, 1> diag(m), off(std::max<Eigen::Index>(m - 1, 1));
    for (Eigen::Index i = 0; i < m; ++i) diag(i) = alpha[i];
    for (Eigen::Index i = 0; i + 1 < m; ++i) off(i) = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>> es;
    es.computeFromTridiagonal(diag, off.head(m - 1), Eigen::ComputeEigenvectors);
    const auto& th = es.eigenvalues();
    const Real scale = std::max(std::abs(th(0)), std::abs(th(m - 1)));
    // Residual norm of a Ritz pair is b |last component of its eigenvector|.
    const Real r_min = b * std::abs(es.eigenvectors()(m - 1, 0));
    const Real r_max = b * std::abs(es.eigenvectors()(m - 1, m - 1));
    out.lambda_min = th(0);
    out.lambda_max = th(m - 1);
    out.iterations = static_cast<int>(m);
    if (last || (r_min <= tol * scale && r_max <= tol * scale)) return out;
    beta.push_back(b);
    v = w / b;
  }
}

// Dense Hermitian solve up to kDenseEigenLimit, Lanczos above.
template <typename Derived>
auto hermitian_extremes(const Eigen::MatrixBase<Derived>& a, typename Derived::RealScalar tol = 1e-12) {
  using Scalar = typename Derived::Scalar;
  using Real = typename Derived::RealScalar;
  if (a.rows() <= kDenseEigenLimit) {
    Extremes<Real> out;
    if (a.rows() == 0) return out;
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(a, Eigen::EigenvaluesOnly);
    out.lambda_min = es.eigenvalues()(0);
    out.lambda_max = es.eigenvalues()(a.rows() - 1);
    return out;
  }
  const Mat<Scalar> m = a;
  return lanczos_extremes<Scalar>([&](const Vec<Scalar>& v) -> Vec<Scalar> { return m * v; }, m.rows(), tol);
}

template <typename Real>
struct CgReport {
  int iterations = 0;
  Real relative_residual = 0;  // ||b - A x|| / ||b||, recomputed at exit
  bool converged = false;
  bool stagnated = false;
  Real condition_estimate = 0;  // from the Lanczos tridiagonal that CG builds implicitly
};

// Conjugate gradients for a Hermitian positive definite operator. x holds
// the starting guess and receives the solution. Stagnation: no new best
// residual for 2*stall_window steps, or a non-positive curvature.
template <typename Scalar, typename Apply>
auto conjugate_gradient(Apply&& apply, const Vec<Scalar>& b, Vec<Scalar>& x,
                        typename Eigen::NumTraits<Scalar>::Real tol, int max_iter, int stall_window = 50) {
  using Real = typename Eigen::NumTraits<Scalar>::Real;
  CgReport<Real> rep;
  const Real bn = b.norm();
  if (x.size() != b.size()) x = Vec<Scalar>::Zero(b.size());
  if (bn == 0) {
    x.setZero();
    rep.converged = true;
    return rep;
  }
  Vec<Scalar> r = b - apply(x);
  Vec<Scalar> d = r;
  Real rr = r.squaredNorm();
  Real best = std::sqrt(rr);
  int since_best = 0;
  std::vector<Real> alphas, betas;
  while (std::sqrt(rr) > tol * bn) {
    if (rep.iterations >= max_iter) break;
    const Vec<Scalar> ad = apply(d);
    const Real curv = std::real(d.dot(ad));
    if (!(curv > 0)) {
      rep.stagnated = true;
      break;
    }
    const Real a = rr / curv;
    x += a * d;
    r -= a * ad;
    const Real rr_new = r.squaredNorm();
    const Real be = rr_new / rr;
    alphas.push_back(a);
    betas.push_back(be);
    rr = rr_new;
    d = r + be * d;
    ++rep.iterations;
    if (std::sqrt(rr) < best) {
      best = std::sqrt(rr);
      since_best = 0;
    } else if (++since_best >= 2 * stall_window) {
      rep.stagnated = true;
      break;
    }
  }
  rep.relative_residual = (b - apply(x)).norm() / bn;
  rep.converged = rep.relative_residual <= tol;
  if (rep.converged) rep.stagnated = false;
  // T_jj = 1/a_j + b_{j-1}/a_{j-1}, T_{j,j+1} = sqrt(b_j)/a_j.
  const Eigen::Index m = static_cast<Eigen::Index>(alphas.size());
  if (m > 0) {
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic> t = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      t(j, j) = 1 / alphas[j] + (j > 0 ? betas[j - 1] / alphas[j - 1] : 0);
      if (j + 1 < m) t(j, j + 1) = t(j + 1, j) = std::sqrt(betas[j]) / alphas[j];
    }
    Eigen::SelfAdjointEigenSolver<decltype(t)> es(t, Eigen::EigenvaluesOnly);
    rep.condition_estimate = es.eigenvalues()(m - 1) / es.eigenvalues()(0);
  } else {
    rep.condition_estimate = 1;
  }
  return rep;
}

}  // namespace dispctl
