#pragma once

// Two-frame group TFG(d, n, m): a rotation R in SO(d) with n world-frame
// vectors x (d x n) and m body-frame vectors y (d x m), embedded as
//
//   T = [ R  r ]      r = [x, R y]
//       [ 0  I ]
//
// and its automorphism group SIM_{n+m}(d) of block upper-triangular
// matrices S = [[Omega, rho], [0, A]] acting by conjugation.

#include <string>

#include "multiframe/so.hpp"

namespace multiframe {

struct TfgSignature {
  Index d = 3;
  Index n = 0;
  Index m = 0;

  Index vectors() const { return n + m; }
  Index matrix_size() const { return d + n + m; }
  Index tangent_dim() const { return skew_dim(d) + d * (n + m); }
  bool operator==(const TfgSignature&) const = default;
};

inline std::string to_string(const TfgSignature& s) {
  return "(" + std::to_string(s.d) + "," + std::to_string(s.n) + "," + std::to_string(s.m) + ")";
}

struct TfgElement {
  Matrix R;  // d x d
  Matrix x;  // d x n, world-frame vectors
  Matrix y;  // d x m, body-frame vectors

  static TfgElement identity(const TfgSignature& s) {
    return {Matrix::Identity(s.d, s.d), Matrix::Zero(s.d, s.n), Matrix::Zero(s.d, s.m)};
  }
  TfgSignature signature() const { return {R.rows(), x.cols(), y.cols()}; }

  /// Translation block [x, R y] of the embedding.
  Matrix r() const {
    Matrix out(R.rows(), x.cols() + y.cols());
    out << x, R * y;
    return out;
  }
};

/// Lie algebra coordinates: rotation part theta and translation columns [u, v].
struct TfgTangent {
  Vector theta;  // skew_dim(d)
  Matrix u;      // d x n
  Matrix v;      // d x m

  static TfgTangent zero(const TfgSignature& s) {
    return {Vector::Zero(skew_dim(s.d)), Matrix::Zero(s.d, s.n), Matrix::Zero(s.d, s.m)};
  }
  TfgSignature signature() const { return {u.rows(), u.cols(), v.cols()}; }

  /// Stacked coordinates [theta; vec(u); vec(v)], column-major.
  Vector to_vector() const {
    Vector out(theta.size() + u.size() + v.size());
    out << theta, u.reshaped(), v.reshaped();
    return out;
  }
  static TfgTangent from_vector(const Vector& c, const TfgSignature& s) {
    if (c.size() != s.tangent_dim()) throw InvalidArgument("TfgTangent: coordinate size mismatch");
    const Index k = skew_dim(s.d);
    TfgTangent t;
    t.theta = c.head(k);
    t.u = c.segment(k, s.d * s.n).reshaped(s.d, s.n);
    t.v = c.segment(k + s.d * s.n, s.d * s.m).reshaped(s.d, s.m);
    return t;
  }
};

inline TfgTangent operator-(const TfgTangent& a) { return {-a.theta, -a.u, -a.v}; }
inline TfgTangent operator*(double s, const TfgTangent& a) {
  return {s * a.theta, s * a.u, s * a.v};
}

/// Element of SIM_{n+m}(d).
struct SimElement {
  Matrix Omega;  // d x d rotation
  Matrix rho;    // d x (n+m)
  Matrix A;      // (n+m) x (n+m), invertible

  static SimElement identity(const TfgSignature& s) {
    return {Matrix::Identity(s.d, s.d), Matrix::Zero(s.d, s.vectors()),
            Matrix::Identity(s.vectors(), s.vectors())};
  }
  Index d() const { return Omega.rows(); }
  Index k() const { return A.rows(); }

  Matrix embed() const {
    Matrix S = Matrix::Zero(d() + k(), d() + k());
    S.topLeftCorner(d(), d()) = Omega;
    S.topRightCorner(d(), k()) = rho;
    S.bottomRightCorner(k(), k()) = A;
    return S;
  }
  SimElement inverse() const {
    const Matrix Ainv = A.inverse();
    return {Omega.transpose(), -Omega.transpose() * rho * Ainv, Ainv};
  }
};

inline SimElement operator*(const SimElement& a, const SimElement& b) {
  return {a.Omega * b.Omega, a.Omega * b.rho + a.rho * b.A, a.A * b.A};
}

/// Element of the Lie algebra sim_{n+m}(d): [[hat(theta), gamma], [0, L]].
struct SimTangent {
  Vector theta;  // skew_dim(d)
  Matrix gamma;  // d x (n+m)
  Matrix L;      // (n+m) x (n+m)

  static SimTangent zero(const TfgSignature& s) {
    return {Vector::Zero(skew_dim(s.d)), Matrix::Zero(s.d, s.vectors()),
            Matrix::Zero(s.vectors(), s.vectors())};
  }
  Index d() const { return gamma.rows(); }
  Index k() const { return L.rows(); }

  Matrix embed() const {
    Matrix X = Matrix::Zero(d() + k(), d() + k());
    X.topLeftCorner(d(), d()) = hat(theta, d());
    X.topRightCorner(d(), k()) = gamma;
    X.bottomRightCorner(k(), k()) = L;
    return X;
  }
};

inline SimTangent operator+(const SimTangent& a, const SimTangent& b) {
  return {a.theta + b.theta, a.gamma + b.gamma, a.L + b.L};
}
inline SimTangent operator-(const SimTangent& a, const SimTangent& b) {
  return {a.theta - b.theta, a.gamma - b.gamma, a.L - b.L};
}
inline SimTangent operator*(double s, const SimTangent& a) {
  return {s * a.theta, s * a.gamma, s * a.L};
}

namespace detail {

inline void require_same(const TfgSignature& a, const TfgSignature& b, const char* op) {
  if (!(a == b)) {
    throw InvalidArgument(std::string(op) + ": signature mismatch " + to_string(a) + " vs " +
                          to_string(b));
  }
}

}  // namespace detail

inline TfgElement tfg_compose(const TfgElement& a, const TfgElement& b) {
  detail::require_same(a.signature(), b.signature(), "tfg_compose");
  return {a.R * b.R, a.x + a.R * b.x, b.R.transpose() * a.y + b.y};
}

inline TfgElement operator*(const TfgElement& a, const TfgElement& b) { return tfg_compose(a, b); }

inline TfgElement tfg_inverse(const TfgElement& a) {
  return {a.R.transpose(), -a.R.transpose() * a.x, -a.R * a.y};
}

/// Inner automorphism C_g(h) = g h g^-1.
inline TfgElement tfg_conjugate(const TfgElement& g, const TfgElement& h) {
  return g * h * tfg_inverse(g);
}

inline Matrix tfg_embed(const TfgElement& a) {
  const auto s = a.signature();
  Matrix T = Matrix::Identity(s.matrix_size(), s.matrix_size());
  T.topLeftCorner(s.d, s.d) = a.R;
  T.topRightCorner(s.d, s.vectors()) = a.r();
  return T;
}

/// Reads (R, x, y) back from a (d+n+m)-square embedding; the lower blocks
/// are not checked.
inline TfgElement tfg_extract(const Matrix& T, Index n, Index m) {
  const Index d = T.rows() - n - m;
  if (d < 2 || T.cols() != T.rows()) throw InvalidArgument("tfg_extract: bad embedding size");
  TfgElement a;
  a.R = T.topLeftCorner(d, d);
  a.x = T.block(0, d, d, n);
  a.y = a.R.transpose() * T.block(0, d + n, d, m);
  return a;
}

inline Matrix tfg_algebra_embed(const TfgTangent& xi) {
  const auto s = xi.signature();
  Matrix X = Matrix::Zero(s.matrix_size(), s.matrix_size());
  X.topLeftCorner(s.d, s.d) = hat(xi.theta, s.d);
  X.block(0, s.d, s.d, s.n) = xi.u;
  X.block(0, s.d + s.n, s.d, s.m) = xi.v;
  return X;
}

inline TfgTangent tfg_algebra_extract(const Matrix& X, Index n, Index m) {
  const Index d = X.rows() - n - m;
  return {vee(X.topLeftCorner(d, d)), X.block(0, d, d, n), X.block(0, d + n, d, m)};
}

/// Closed form: R = exp(theta), x = Gamma_1 u, y = R^T Gamma_1 v.
inline TfgElement tfg_exp(const TfgTangent& xi) {
  const Index d = xi.u.rows();
  const Matrix R = so_exp(xi.theta, d);
  const Matrix G1 = gamma_series(1, xi.theta, d);
  return {R, G1 * xi.u, R.transpose() * (G1 * xi.v)};
}

inline TfgTangent tfg_log(const TfgElement& a) {
  const Index d = a.R.rows();
  const Vector theta = so_log(a.R);
  const auto G1 = gamma_series(1, theta, d).partialPivLu();
  return {theta, G1.solve(a.x), G1.solve(a.R * a.y)};
}

/// Matrix of Ad_a on stacked tangent coordinates (see TfgTangent::to_vector).
inline Matrix tfg_adjoint(const TfgElement& a) {
  const auto s = a.signature();
  const Index k = skew_dim(s.d);
  const Index D = s.tangent_dim();
  const Matrix r = a.r();

  // Rotation part: Theta -> R Theta R^T, read off on the so(d) basis.
  Matrix rot(k, k);
  for (Index c = 0; c < k; ++c) {
    const Matrix E = hat(Vector::Unit(k, c), s.d);
    rot.col(c) = vee(a.R * E * a.R.transpose());
  }

  Matrix Ad = Matrix::Zero(D, D);
  Ad.topLeftCorner(k, k) = rot;
  for (Index i = 0; i < s.vectors(); ++i) {
    const Index row = k + i * s.d;
    // w_i' = R w_i - hat(theta') r_i
    Matrix H(s.d, k);
    for (Index c = 0; c < k; ++c) H.col(c) = hat(Vector::Unit(k, c), s.d) * r.col(i);
    Ad.block(row, 0, s.d, k) = -H * rot;
    Ad.block(row, row, s.d, s.d) = a.R;
  }
  return Ad;
}

/// psi_S(T) = S T S^-1.
inline TfgElement sim_conjugate(const SimElement& S, const TfgElement& a) {
  const auto s = a.signature();
  if (S.d() != s.d || S.k() != s.vectors()) throw InvalidArgument("sim_conjugate: size mismatch");
  const Matrix R = S.Omega * a.R * S.Omega.transpose();
  const Matrix I = Matrix::Identity(s.d, s.d);
  const Matrix r = (S.Omega * a.r() + (I - R) * S.rho) * S.A.inverse();
  TfgElement out;
  out.R = R;
  out.x = r.leftCols(s.n);
  out.y = R.transpose() * r.rightCols(s.m);
  return out;
}

/// Exponential of a sim_{n+m}(d) element; the rotation block is taken from
/// the closed-form rotation exponential.
inline SimElement sim_exp(const SimTangent& xi) {
  const Matrix E = expm(xi.embed());
  const Index d = xi.d();
  const Index k = xi.k();
  return {so_exp(xi.theta, d), E.topRightCorner(d, k), E.bottomRightCorner(k, k)};
}

}  // namespace multiframe
