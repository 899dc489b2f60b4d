#pragma once

// Test-only generators and independent oracles. Nothing here is used by the
// library itself.

#include <unsupported/Eigen/MatrixFunctions>

#include <functional>
#include <random>

#include "multiframe/dynamics.hpp"

namespace mftest {

using multiframe::Index;
using multiframe::Matrix;
using multiframe::Vector;

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 42) : engine_(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  Vector vector(Index size, double scale = 1.0) {
    Vector v(size);
    for (Index i = 0; i < size; ++i) v(i) = scale * uniform();
    return v;
  }
  Matrix matrix(Index rows, Index cols, double scale = 1.0) {
    Matrix M(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) M(i, j) = scale * uniform();
    return M;
  }
  /// Rotation vector with norm below max_angle.
  Vector rotation_vector(Index d, double max_angle = 2.5) {
    Vector v = vector(multiframe::skew_dim(d));
    const double n = v.norm();
    if (n > 0) v *= uniform(0.0, max_angle) / n;
    return v;
  }
  Matrix rotation(Index d) { return multiframe::so_exp(rotation_vector(d, 3.0), d); }

  multiframe::TfgElement tfg(const multiframe::TfgSignature& s) {
    return {rotation(s.d), matrix(s.d, s.n, 2.0), matrix(s.d, s.m, 2.0)};
  }
  multiframe::TfgTangent tfg_tangent(const multiframe::TfgSignature& s, double max_angle = 2.5,
                                     double scale = 2.0) {
    return {rotation_vector(s.d, max_angle), matrix(s.d, s.n, scale), matrix(s.d, s.m, scale)};
  }
  multiframe::MfgElement mfg(const multiframe::MfgSignature& g) {
    multiframe::MfgElement a;
    a.core = tfg(g.tfg());
    for (Index j = 0; j < g.s; ++j) a.left.push_back(tfg(g.tfg()));
    for (Index j = 0; j < g.t; ++j) a.right.push_back(tfg(g.tfg()));
    return a;
  }
  multiframe::MfgTangent mfg_tangent(const multiframe::MfgSignature& g, double max_angle = 2.5,
                                     double scale = 2.0) {
    multiframe::MfgTangent xi;
    for (Index i = 0; i < g.blocks(); ++i) xi.blocks.push_back(tfg_tangent(g.tfg(), max_angle, scale));
    return xi;
  }
  multiframe::SimElement sim(const multiframe::TfgSignature& s) {
    const Index k = s.vectors();
    Matrix A = matrix(k, k) + 2.0 * Matrix::Identity(k, k);
    return {rotation(s.d), matrix(s.d, k, 2.0), A};
  }
  multiframe::SimTangent sim_tangent(const multiframe::TfgSignature& s, double scale = 1.0) {
    const Index k = s.vectors();
    return {vector(multiframe::skew_dim(s.d), scale), matrix(s.d, k, scale), matrix(k, k, scale)};
  }
  multiframe::MfgAutomorphism automorphism(const multiframe::MfgSignature& g) {
    multiframe::MfgAutomorphism S;
    for (Index i = 0; i < g.blocks(); ++i) S.blocks.push_back(sim(g.tfg()));
    return S;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Dense matrix exponential from Eigen's unsupported MatrixFunctions module
/// (Pade scaling-and-squaring), independent of multiframe::expm.
inline Matrix dense_expm(const Matrix& A) { return A.exp(); }

/// Dense-embedding product oracle for TFG elements.
inline Matrix embed_product(const multiframe::TfgElement& a, const multiframe::TfgElement& b) {
  return multiframe::tfg_embed(a) * multiframe::tfg_embed(b);
}

/// Central finite-difference Jacobian of f: R^n -> R^k at x.
inline Matrix numerical_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& x,
                                 double h = 1e-6) {
  const Vector f0 = f(x);
  Matrix J(f0.size(), x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    J.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return J;
}

inline multiframe::ChainLink random_link(Rng& rng, const multiframe::TfgSignature& s,
                                         double scale) {
  const Index k = s.vectors();
  const Index q = multiframe::skew_dim(s.d);
  return {rng.vector(q, scale), rng.matrix(s.d, k, scale), rng.vector(q, scale),
          rng.matrix(s.d, k, scale), rng.matrix(k, k, scale)};
}

/// Random admissible coefficients (core L blocks tied by lL0 = -rL0).
inline multiframe::DynamicsCoefficients random_coefficients(Rng& rng,
                                                            const multiframe::MfgSignature& g,
                                                            double scale = 1.0) {
  multiframe::DynamicsCoefficients c;
  c.core = random_link(rng, g.tfg(), scale);
  c.core_right_L = -c.core.L;
  for (Index j = 0; j < g.s; ++j) c.left.push_back(random_link(rng, g.tfg(), scale));
  for (Index j = 0; j < g.t; ++j) c.right.push_back(random_link(rng, g.tfg(), scale));
  return c;
}

/// Random spec affine in an input of size `inputs`.
inline multiframe::DynamicsSpec random_spec(Rng& rng, const multiframe::MfgSignature& g,
                                            Index inputs = 2, double scale = 1.0) {
  std::vector<multiframe::DynamicsCoefficients> per_input;
  for (Index i = 0; i < inputs; ++i) per_input.push_back(random_coefficients(rng, g, scale));
  return multiframe::linear_dynamics(g, random_coefficients(rng, g, scale), std::move(per_input));
}

/// chi + h * rate, componentwise (no projection back onto the group).
inline multiframe::MfgElement advance(const multiframe::MfgElement& chi,
                                      const multiframe::MfgRate& f, double h) {
  auto step = [h](const multiframe::TfgElement& a, const multiframe::FactorRate& r) {
    return multiframe::TfgElement{a.R + h * r.R, a.x + h * r.x, a.y + h * r.y};
  };
  multiframe::MfgElement out;
  out.core = step(chi.core, f.core);
  for (std::size_t j = 0; j < chi.left.size(); ++j) out.left.push_back(step(chi.left[j], f.left[j]));
  for (std::size_t j = 0; j < chi.right.size(); ++j) {
    out.right.push_back(step(chi.right[j], f.right[j]));
  }
  return out;
}

inline multiframe::MfgRate combine(const std::vector<std::pair<double, multiframe::MfgRate>>& terms) {
  multiframe::MfgRate out = terms.front().second;
  auto scale = [](multiframe::FactorRate& r, double c) {
    r.R *= c;
    r.x *= c;
    r.y *= c;
  };
  auto add = [](multiframe::FactorRate& r, const multiframe::FactorRate& o, double c) {
    r.R += c * o.R;
    r.x += c * o.x;
    r.y += c * o.y;
  };
  const double c0 = terms.front().first;
  scale(out.core, c0);
  for (auto& l : out.left) scale(l, c0);
  for (auto& r : out.right) scale(r, c0);
  for (std::size_t i = 1; i < terms.size(); ++i) {
    const auto& [c, f] = terms[i];
    add(out.core, f.core, c);
    for (std::size_t j = 0; j < out.left.size(); ++j) add(out.left[j], f.left[j], c);
    for (std::size_t j = 0; j < out.right.size(); ++j) add(out.right[j], f.right[j], c);
  }
  return out;
}

/// Classical RK4 in factor coordinates.
inline multiframe::MfgElement rk4(const std::function<multiframe::MfgRate(double, const multiframe::MfgElement&)>& f,
                                  multiframe::MfgElement chi, double t0, double horizon,
                                  int steps) {
  const double h = horizon / steps;
  for (int k = 0; k < steps; ++k) {
    const double t = t0 + k * h;
    const auto k1 = f(t, chi);
    const auto k2 = f(t + h / 2, advance(chi, k1, h / 2));
    const auto k3 = f(t + h / 2, advance(chi, k2, h / 2));
    const auto k4 = f(t + h, advance(chi, k3, h));
    chi = advance(chi, combine({{1.0, k1}, {2.0, k2}, {2.0, k3}, {1.0, k4}}), h / 6);
  }
  return chi;
}

inline double max_abs(const Matrix& M) { return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff(); }

}  // namespace mftest
