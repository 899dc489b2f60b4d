#pragma once

// Rotation groups SO(d): hat/vee, exponential, logarithm and the Gamma series
//   Gamma_m(v) = sum_k hat(v)^k / (k + m)!
// Closed forms are used for d = 2 and d = 3; other dimensions go through a
// scaling-and-squaring matrix exponential and an inverse scaling-and-squaring
// logarithm.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>

#include "multiframe/errors.hpp"

namespace multiframe {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Number of coordinates of so(d).
constexpr Index skew_dim(Index d) { return d * (d - 1) / 2; }

/// Inverse of skew_dim; throws if `coords` is not a triangular number.
inline Index dim_from_skew(Index coords) {
  for (Index d = 2; skew_dim(d) <= coords; ++d) {
    if (skew_dim(d) == coords) return d;
  }
  throw InvalidArgument("no rotation dimension has " + std::to_string(coords) +
                        " skew coordinates");
}

namespace detail {

// Position of the +1 entry of the k-th so(d) basis element; -1 sits at the
// transposed position. d = 3 uses the cross-product ordering (e1 rotates the
// y-z plane); every other d uses lexicographic pairs i < j with E_ji - E_ij.
inline std::pair<Index, Index> skew_basis(Index d, Index k) {
  if (d == 3) {
    constexpr Index rows[3] = {2, 0, 1};
    constexpr Index cols[3] = {1, 2, 0};
    return {rows[k], cols[k]};
  }
  Index idx = 0;
  for (Index i = 0; i < d; ++i) {
    for (Index j = i + 1; j < d; ++j) {
      if (idx == k) return {j, i};
      ++idx;
    }
  }
  throw InvalidArgument("skew basis index out of range");
}

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// f_p(t) = sum_j (-t^2)^j / (2j + p)!. With these, for d = 3,
//   Gamma_m(v) = I/m! + f_{m+1}(|v|) K + f_{m+2}(|v|) K^2,   K = hat(v).
inline double series_coefficient(int p, double t) {
  if (p == 0) return std::cos(t);
  if (t >= 2.0) {
    if (p == 1) return std::sin(t) / t;
    return (1.0 / factorial(p - 2) - series_coefficient(p - 2, t)) / (t * t);
  }
  const double t2 = t * t;
  double term = 1.0 / factorial(p);
  double sum = term;
  for (int j = 1; j < 40; ++j) {
    term *= -t2 / ((2.0 * j + p - 1.0) * (2.0 * j + p));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

inline void require_square(const Matrix& M, const char* what) {
  if (M.rows() != M.cols()) {
    throw InvalidArgument(std::string(what) + ": matrix must be square");
  }
}

// Principal square root by the Denman-Beavers iteration.
inline Matrix sqrtm(const Matrix& X) {
  Matrix Y = X;
  Matrix Z = Matrix::Identity(X.rows(), X.cols());
  for (int it = 0; it < 100; ++it) {
    const Matrix Yn = 0.5 * (Y + Z.inverse());
    const Matrix Zn = 0.5 * (Z + Y.inverse());
    const double step = (Yn - Y).norm();
    Y = Yn;
    Z = Zn;
    if (step < 1e-15 * Y.norm()) return Y;
  }
  throw NumericError("matrix square root did not converge");
}

}  // namespace detail

/// Dense matrix exponential (Taylor series with scaling and squaring).
inline Matrix expm(const Matrix& A) {
  detail::require_square(A, "expm");
  const Index n = A.rows();
  const double norm1 = n == 0 ? 0.0 : A.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Matrix X = A / std::ldexp(1.0, squarings);

  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k < 60; ++k) {
    term = term * X / static_cast<double>(k);
    result += term;
    if (term.norm() < 1e-16) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

/// so(d) coordinates -> antisymmetric d x d matrix. For d = 3,
/// hat(v) * w == v.cross(w).
inline Matrix hat(const Vector& v, Index d) {
  if (d < 2) throw InvalidArgument("hat: dimension must be >= 2");
  if (v.size() != skew_dim(d)) {
    throw InvalidArgument("hat: expected " + std::to_string(skew_dim(d)) +
                          " coordinates for d = " + std::to_string(d) + ", got " +
                          std::to_string(v.size()));
  }
  Matrix M = Matrix::Zero(d, d);
  for (Index k = 0; k < v.size(); ++k) {
    const auto [r, c] = detail::skew_basis(d, k);
    M(r, c) = v(k);
    M(c, r) = -v(k);
  }
  return M;
}

inline Matrix hat(const Vector& v) { return hat(v, dim_from_skew(v.size())); }

/// Antisymmetric matrix -> so(d) coordinates.
inline Vector vee(const Matrix& M) {
  detail::require_square(M, "vee");
  if ((M + M.transpose()).norm() >= 1e-9) {
    throw InvalidArgument("vee: matrix is not antisymmetric");
  }
  const Index d = M.rows();
  Vector v(skew_dim(d));
  for (Index k = 0; k < v.size(); ++k) {
    const auto [r, c] = detail::skew_basis(d, k);
    v(k) = 0.5 * (M(r, c) - M(c, r));
  }
  return v;
}

/// Gamma_m(v) = sum_{k>=0} hat(v)^k / (k + m)!. Gamma_0 is the rotation
/// exponential and Gamma_1 its left Jacobian.
inline Matrix gamma_series(int m, const Vector& v, Index d) {
  if (m < 0) throw InvalidArgument("gamma_series: order must be nonnegative");
  const Matrix K = hat(v, d);
  if (d == 2) {
    const double a = v(0);
    const double t = std::abs(a);
    return detail::series_coefficient(m, t) * Matrix::Identity(2, 2) +
           detail::series_coefficient(m + 1, t) * K;
  }
  if (d == 3) {
    const double t = v.norm();
    return Matrix::Identity(3, 3) / detail::factorial(m) +
           detail::series_coefficient(m + 1, t) * K +
           detail::series_coefficient(m + 2, t) * (K * K);
  }
  if (m == 0) return expm(K);
  // Top-right block of exp([[K, I, 0..], [0, 0, I ..], ..., [0 .. 0]]).
  const Index blocks = m + 1;
  Matrix aug = Matrix::Zero(blocks * d, blocks * d);
  aug.topLeftCorner(d, d) = K;
  for (Index b = 0; b < m; ++b) {
    aug.block(b * d, (b + 1) * d, d, d).setIdentity();
  }
  return expm(aug).topRightCorner(d, d);
}

inline Matrix gamma_series(int m, const Vector& v) {
  return gamma_series(m, v, dim_from_skew(v.size()));
}

/// Rotation exponential; Rodrigues for d = 3.
inline Matrix so_exp(const Vector& v, Index d) { return gamma_series(0, v, d); }
inline Matrix so_exp(const Vector& v) { return so_exp(v, dim_from_skew(v.size())); }

/// Principal rotation logarithm. Throws BranchError when a rotation angle is
/// within 1e-6 of pi.
inline Vector so_log(const Matrix& R) {
  detail::require_square(R, "so_log");
  const Index d = R.rows();
  constexpr double kCut = std::numbers::pi - 1e-6;
  if (d == 2) {
    const double a = std::atan2(R(1, 0) - R(0, 1), R(0, 0) + R(1, 1));
    if (std::abs(a) >= kCut) throw BranchError("so_log: rotation angle at the cut locus");
    return Vector::Constant(1, a);
  }
  if (d == 3) {
    const Vector w = 0.5 * vee(R - R.transpose());
    const double s = w.norm();
    const double c = 0.5 * (R.trace() - 1.0);
    const double angle = std::atan2(s, c);
    if (angle >= kCut) throw BranchError("so_log: rotation angle at the cut locus");
    if (s < 1e-8) return w * (1.0 + angle * angle / 6.0);
    return w * (angle / s);
  }

  const Eigen::EigenSolver<Matrix> eig(R, false);
  for (Index i = 0; i < d; ++i) {
    if (std::abs(std::arg(eig.eigenvalues()(i))) >= kCut) {
      throw BranchError("so_log: rotation angle at the cut locus");
    }
  }
  const Matrix I = Matrix::Identity(d, d);
  Matrix X = R;
  int roots = 0;
  while ((X - I).norm() > 0.25) {
    X = detail::sqrtm(X);
    if (++roots > 60) throw NumericError("so_log: inverse scaling did not converge");
  }
  const Matrix E = X - I;
  Matrix power = E;
  Matrix L = E;
  for (int j = 2; j < 200; ++j) {
    power = power * E;
    const double sign = (j % 2 == 0) ? -1.0 : 1.0;
    L += sign * power / static_cast<double>(j);
    if (power.norm() / j < 1e-17) break;
  }
  L *= std::ldexp(1.0, roots);
  return vee(0.5 * (L - L.transpose()));
}

/// Rotation-group membership within `tol` (orthogonality and unit determinant).
inline bool is_rotation(const Matrix& R, double tol = 1e-10) {
  if (R.rows() != R.cols()) return false;
  const Matrix I = Matrix::Identity(R.rows(), R.cols());
  return (R.transpose() * R - I).norm() < tol && std::abs(R.determinant() - 1.0) < tol;
}

}  // namespace multiframe
