#pragma once

// Group-affine dynamics on MFG(d, n, m, s, t). Every such system is
//
//   chi' = S chi + chi W,    S = diag(lS_0 | lS_j | rS_j),  W = diag(rW_0 | lW_j | rW_j)
//
// with sim_{n+m}(d)-valued blocks built from freely chosen input-dependent
// coefficients. Notation for the coefficients (all functions of u):
//
//   core      lS_0 = (theta, gamma, L)        rW_0 = (omega, rho, right_L),  right_L = -L
//   left j    lS_j = (theta, gamma, L)        lW_j - lW_{j-1} = (omega, rho, L_{j-1} - L_j)
//   right j   rW_j = (omega, rho, L)          rS_j - rS_{j-1} = (theta, gamma, L_{j-1} - L_j)

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "multiframe/mfg.hpp"

namespace multiframe {

struct ChainLink {
  Vector theta;  // skew_dim(d)
  Matrix gamma;  // d x (n+m)
  Vector omega;  // skew_dim(d)
  Matrix rho;    // d x (n+m)
  Matrix L;      // (n+m) x (n+m)

  static ChainLink zero(const TfgSignature& s) {
    const Index k = s.vectors();
    return {Vector::Zero(skew_dim(s.d)), Matrix::Zero(s.d, k), Vector::Zero(skew_dim(s.d)),
            Matrix::Zero(s.d, k), Matrix::Zero(k, k)};
  }
};

inline ChainLink operator+(const ChainLink& a, const ChainLink& b) {
  return {a.theta + b.theta, a.gamma + b.gamma, a.omega + b.omega, a.rho + b.rho, a.L + b.L};
}
inline ChainLink operator*(double c, const ChainLink& a) {
  return {c * a.theta, c * a.gamma, c * a.omega, c * a.rho, c * a.L};
}

/// Coefficient values at one input. `core` holds (lθ0, lγ0, lL0, rω0, rρ0) and
/// `core_right_L` holds rL0.
struct DynamicsCoefficients {
  ChainLink core;
  Matrix core_right_L;
  std::vector<ChainLink> left;   // j = 1..s
  std::vector<ChainLink> right;  // j = 1..t

  static DynamicsCoefficients zero(const MfgSignature& g) {
    const auto z = ChainLink::zero(g.tfg());
    return {z, z.L, std::vector<ChainLink>(g.s, z), std::vector<ChainLink>(g.t, z)};
  }
};

inline DynamicsCoefficients operator+(const DynamicsCoefficients& a,
                                      const DynamicsCoefficients& b) {
  DynamicsCoefficients out{a.core + b.core, a.core_right_L + b.core_right_L, {}, {}};
  for (std::size_t j = 0; j < a.left.size(); ++j) out.left.push_back(a.left[j] + b.left[j]);
  for (std::size_t j = 0; j < a.right.size(); ++j) out.right.push_back(a.right[j] + b.right[j]);
  return out;
}
inline DynamicsCoefficients operator*(double c, const DynamicsCoefficients& a) {
  DynamicsCoefficients out{c * a.core, c * a.core_right_L, {}, {}};
  for (const auto& l : a.left) out.left.push_back(c * l);
  for (const auto& r : a.right) out.right.push_back(c * r);
  return out;
}

/// A group-affine system: coefficient generator for a fixed signature.
struct DynamicsSpec {
  MfgSignature signature;
  std::function<DynamicsCoefficients(const Vector& u)> coefficients;

  DynamicsCoefficients at(const Vector& u) const {
    auto c = coefficients(u);
    if (static_cast<Index>(c.left.size()) != signature.s ||
        static_cast<Index>(c.right.size()) != signature.t) {
      throw InvalidSpec("dynamics coefficients do not match the signature chain lengths");
    }
    if ((c.core.L + c.core_right_L).norm() > 1e-12) {
      throw InvalidSpec("core L blocks must satisfy lL0 = -rL0");
    }
    return c;
  }
};

inline DynamicsSpec constant_dynamics(const MfgSignature& g, DynamicsCoefficients c) {
  return {g, [c = std::move(c)](const Vector&) { return c; }};
}

/// coefficients(u) = base + sum_i u_i * per_input[i].
inline DynamicsSpec linear_dynamics(const MfgSignature& g, DynamicsCoefficients base,
                                    std::vector<DynamicsCoefficients> per_input) {
  return {g, [base = std::move(base), per_input = std::move(per_input)](const Vector& u) {
            if (u.size() != static_cast<Index>(per_input.size())) {
              throw InvalidArgument("linear_dynamics: input size mismatch");
            }
            DynamicsCoefficients c = base;
            for (Index i = 0; i < u.size(); ++i) c = c + u(i) * per_input[i];
            return c;
          }};
}

struct MfgVelocity {
  std::vector<SimTangent> S;  // core, left chain, right chain
  std::vector<SimTangent> W;
};

inline MfgVelocity assemble_velocity(const DynamicsSpec& spec, const Vector& u) {
  const auto& g = spec.signature;
  const auto c = spec.at(u);
  MfgVelocity vel;
  const SimTangent S0{c.core.theta, c.core.gamma, c.core.L};
  const SimTangent W0{c.core.omega, c.core.rho, c.core_right_L};
  vel.S.push_back(S0);
  vel.W.push_back(W0);

  Matrix prev_L = c.core.L;
  SimTangent W = W0;
  for (Index j = 0; j < g.s; ++j) {
    const auto& l = c.left[j];
    W = W + SimTangent{l.omega, l.rho, prev_L - l.L};
    vel.S.push_back({l.theta, l.gamma, l.L});
    vel.W.push_back(W);
    prev_L = l.L;
  }

  prev_L = c.core_right_L;
  SimTangent S = S0;
  for (Index j = 0; j < g.t; ++j) {
    const auto& r = c.right[j];
    S = S + SimTangent{r.theta, r.gamma, prev_L - r.L};
    vel.S.push_back(S);
    vel.W.push_back({r.omega, r.rho, r.L});
    prev_L = r.L;
  }
  return vel;
}

/// Time derivative of one TFG factor in (R, x, y) coordinates.
struct FactorRate {
  Matrix R;
  Matrix x;
  Matrix y;
};

struct MfgRate {
  FactorRate core;
  std::vector<FactorRate> left;
  std::vector<FactorRate> right;
};

namespace detail {

inline FactorRate rate_from_translation(const TfgElement& a, const Matrix& Rdot,
                                        const Matrix& rdot) {
  const Index n = a.x.cols();
  const Index m = a.y.cols();
  return {Rdot, rdot.leftCols(n), a.R.transpose() * (rdot.rightCols(m) - Rdot * a.y)};
}

inline FactorRate rate_from_embedding(const TfgElement& a, const Matrix& Tdot) {
  const Index d = a.R.rows();
  return rate_from_translation(a, Tdot.topLeftCorner(d, d),
                               Tdot.topRightCorner(d, a.x.cols() + a.y.cols()));
}

inline Matrix embedding_rate(const TfgElement& a, const FactorRate& f) {
  const auto s = a.signature();
  Matrix Tdot = Matrix::Zero(s.matrix_size(), s.matrix_size());
  Tdot.topLeftCorner(s.d, s.d) = f.R;
  Tdot.block(0, s.d, s.d, s.n) = f.x;
  Tdot.block(0, s.d + s.n, s.d, s.m) = f.R * a.y + a.R * f.y;
  return Tdot;
}

}  // namespace detail

/// Factor ODEs in embedding form:
///   T0'   = lS_0 T0 + T0 rW_0
///   lT_j' = lS_j lT_j + lT_j (Ad_{lB_{j-1}}(lW_j - lW_{j-1}) - lS_{j-1})
///   rT_j' = (Ad^-1_{rB_{j-1}}(rS_j - rS_{j-1}) - rW_{j-1}) rT_j + rT_j rW_j
/// where lB, rB are the accumulated diagonal blocks.
inline MfgRate block_ode_rhs(const MfgVelocity& vel, const MfgElement& chi) {
  const auto g = chi.signature();
  if (static_cast<Index>(vel.S.size()) != g.blocks() ||
      static_cast<Index>(vel.W.size()) != g.blocks()) {
    throw InvalidArgument("block_ode_rhs: velocity does not match the state signature");
  }
  const auto blocks = mfg_accumulate(chi);
  auto dense = [](const SimTangent& X) { return X.embed(); };

  MfgRate out;
  const Matrix T0 = tfg_embed(chi.core);
  out.core = detail::rate_from_embedding(chi.core, dense(vel.S[0]) * T0 + T0 * dense(vel.W[0]));

  for (Index j = 1; j <= g.s; ++j) {
    const auto& f = chi.left[j - 1];
    const Matrix T = tfg_embed(f);
    const Matrix B = tfg_embed(blocks[j - 1]);
    const Matrix Wbar = dense(vel.W[j]) - dense(vel.W[j - 1]);
    const Matrix inner = B * Wbar * B.inverse() - dense(vel.S[j - 1]);
    out.left.push_back(detail::rate_from_embedding(f, dense(vel.S[j]) * T + T * inner));
  }

  for (Index j = 1; j <= g.t; ++j) {
    const auto& f = chi.right[j - 1];
    const Index here = g.s + j;
    const Index before = j == 1 ? 0 : here - 1;
    const Matrix T = tfg_embed(f);
    const Matrix B = tfg_embed(blocks[before]);
    const Matrix Sbar = dense(vel.S[here]) - dense(vel.S[before]);
    const Matrix outer = B.inverse() * Sbar * B - dense(vel.W[before]);
    out.right.push_back(detail::rate_from_embedding(f, outer * T + T * dense(vel.W[here])));
  }
  return out;
}

/// Component ODEs for every frame rotation and translation block, written out
/// in terms of the coefficients; y-rates follow from r = [x, R y].
inline MfgRate component_ode_rhs(const DynamicsSpec& spec, const Vector& u,
                                 const MfgElement& chi) {
  const auto g = chi.signature();
  detail::require_same(spec.signature, g, "component_ode_rhs");
  const auto c = spec.at(u);
  const Index d = g.d;
  auto X = [d](const Vector& v) { return hat(v, d); };

  // Rotations and translations indexed from 0 (core) along each chain.
  std::vector<Matrix> lR{chi.core.R}, lr{chi.core.r()}, rR{chi.core.R}, rr{chi.core.r()};
  for (const auto& f : chi.left) {
    lR.push_back(f.R);
    lr.push_back(f.r());
  }
  for (const auto& f : chi.right) {
    rR.push_back(f.R);
    rr.push_back(f.r());
  }
  // Products R_i R_{i-1} ... R_j (i >= j) on the left chain, R_i ... R_j (i <= j) on the right.
  auto lbar = [&](Index i, Index j) {
    Matrix P = Matrix::Identity(d, d);
    for (Index k = i; k >= j; --k) P = P * lR[k];
    return P;
  };
  auto rbar = [&](Index i, Index j) {
    Matrix P = Matrix::Identity(d, d);
    for (Index k = i; k <= j; ++k) P = P * rR[k];
    return P;
  };

  MfgRate out;
  {
    const Matrix R0 = chi.core.R;
    const Matrix r0 = lr[0];
    const Matrix Rdot = X(c.core.theta) * R0 + R0 * X(c.core.omega);
    const Matrix rdot =
        X(c.core.theta) * r0 + c.core.gamma + R0 * c.core.rho + r0 * c.core_right_L;
    out.core = detail::rate_from_translation(chi.core, Rdot, rdot);
  }

  for (Index j = 1; j <= g.s; ++j) {
    const auto& cj = c.left[j - 1];
    const auto& prev = j == 1 ? c.core : c.left[j - 2];
    const Matrix Lbar = prev.L - cj.L;
    const Matrix Rj = lR[j];
    const Matrix P = lbar(j - 1, 0);
    const Matrix Rdot = X(cj.theta) * Rj + Rj * (P * X(cj.omega) * P.transpose() - X(prev.theta));

    Matrix rdot = cj.gamma + lbar(j, 0) * cj.rho + X(cj.theta) * lr[j] - Rj * prev.gamma -
                  lr[j] * cj.L;
    for (Index k = 0; k < j; ++k) {
      const Matrix Pk = lbar(k, 0);
      rdot += lbar(j, k + 1) * (lr[k] * Lbar - Pk * X(cj.omega) * Pk.transpose() * lr[k]);
    }
    out.left.push_back(detail::rate_from_translation(chi.left[j - 1], Rdot, rdot));
  }

  for (Index j = 1; j <= g.t; ++j) {
    const auto& cj = c.right[j - 1];
    const auto& prev = j == 1 ? c.core : c.right[j - 2];
    const Matrix prev_L = j == 1 ? c.core_right_L : prev.L;
    const Matrix Lbar = prev_L - cj.L;
    const Matrix Rj = rR[j];
    const Matrix P = rbar(0, j - 1);
    const Matrix ThetaJ = P.transpose() * X(cj.theta) * P;
    const Matrix Rdot = (ThetaJ - X(prev.omega)) * Rj + Rj * X(cj.omega);

    Matrix rdot = P.transpose() * X(cj.theta) * rr[0] + ThetaJ * rr[j] - prev.rho + Rj * cj.rho +
                  rr[j] * cj.L - X(prev.omega) * rr[j] + P.transpose() * cj.gamma;
    for (Index k = 1; k < j; ++k) {
      const Matrix Pk = rbar(0, k - 1);
      rdot += rbar(k, j - 1).transpose() * Pk.transpose() * X(cj.theta) * Pk * rr[k];
    }
    for (Index k = 0; k < j; ++k) rdot -= rbar(k, j - 1).transpose() * rr[k] * Lbar;
    out.right.push_back(detail::rate_from_translation(chi.right[j - 1], Rdot, rdot));
  }
  return out;
}

/// Exact flow for a velocity held constant over dt: every diagonal block B
/// becomes exp(dt S_i) B exp(dt W_i).
inline MfgElement exact_flow_step(const MfgVelocity& vel, const MfgElement& chi, double dt) {
  const auto g = chi.signature();
  if (static_cast<Index>(vel.S.size()) != g.blocks() ||
      static_cast<Index>(vel.W.size()) != g.blocks()) {
    throw InvalidArgument("exact_flow_step: velocity does not match the state signature");
  }
  auto blocks = mfg_accumulate(chi);
  for (Index i = 0; i < g.blocks(); ++i) {
    const Matrix left = sim_exp(dt * vel.S[i]).embed();
    const Matrix right = sim_exp(dt * vel.W[i]).embed();
    blocks[i] = tfg_extract(left * tfg_embed(blocks[i]) * right, g.n, g.m);
  }
  return mfg_from_blocks(blocks, g.s, g.t);
}

/// Input signal for trajectory integration.
using InputSignal = std::function<Vector(double t)>;

/// Integrates from t0 over `horizon` with exact flow steps; the input is held
/// at its value at each step midpoint. Calls `observer(t, chi)` after every step.
inline MfgElement integrate_flow(const DynamicsSpec& spec, const InputSignal& u,
                                 MfgElement chi, double t0, double horizon, double dt,
                                 const std::function<void(double, const MfgElement&)>& observer = {}) {
  if (dt <= 0) throw InvalidArgument("integrate_flow: dt must be positive");
  const auto steps = static_cast<long>(std::llround(horizon / dt));
  for (long k = 0; k < steps; ++k) {
    const double t = t0 + k * dt;
    chi = exact_flow_step(assemble_velocity(spec, u(t + 0.5 * dt)), chi, dt);
    if (observer) observer(t + dt, chi);
  }
  return chi;
}

/// A vector field on the MFG in factor coordinates.
using MfgVectorField = std::function<MfgRate(const MfgElement&)>;

inline MfgVectorField spec_field(const DynamicsSpec& spec, const Vector& u) {
  return [spec, u](const MfgElement& chi) { return component_ode_rhs(spec, u, chi); };
}

/// Derivative of the block-diagonal embedding induced by factor rates.
inline Matrix embedding_rate(const MfgElement& chi, const MfgRate& f) {
  const auto g = chi.signature();
  const Index k = g.tfg().matrix_size();
  const auto blocks = mfg_accumulate(chi);
  std::vector<Matrix> rates;
  rates.push_back(detail::embedding_rate(chi.core, f.core));
  for (Index j = 1; j <= g.s; ++j) {
    const auto& fac = chi.left[j - 1];
    rates.push_back(detail::embedding_rate(fac, f.left[j - 1]) * tfg_embed(blocks[j - 1]) +
                    tfg_embed(fac) * rates[j - 1]);
  }
  for (Index j = 1; j <= g.t; ++j) {
    const auto& fac = chi.right[j - 1];
    const Index before = j == 1 ? 0 : g.s + j - 1;
    rates.push_back(rates[before] * tfg_embed(fac) +
                    tfg_embed(blocks[before]) * detail::embedding_rate(fac, f.right[j - 1]));
  }
  Matrix M = Matrix::Zero(g.matrix_size(), g.matrix_size());
  for (Index i = 0; i < g.blocks(); ++i) M.block(i * k, i * k, k, k) = rates[i];
  return M;
}

/// Frobenius norm of f(ab) - f(a) b - a f(b) + a f(id) b in the embedding;
/// zero exactly for group-affine fields.
inline double group_affine_residual(const MfgVectorField& f, const MfgElement& a,
                                    const MfgElement& b) {
  detail::require_same(a.signature(), b.signature(), "group_affine_residual");
  const auto id = MfgElement::identity(a.signature());
  const Matrix A = mfg_embed(a);
  const Matrix B = mfg_embed(b);
  const Matrix r = embedding_rate(a * b, f(a * b)) - embedding_rate(a, f(a)) * B -
                   A * embedding_rate(b, f(b)) + A * embedding_rate(id, f(id)) * B;
  return r.norm();
}

inline double group_affine_residual(const DynamicsSpec& spec, const Vector& u,
                                    const MfgElement& a, const MfgElement& b) {
  return group_affine_residual(spec_field(spec, u), a, b);
}

/// Integrates (a, b) and (c, c a^-1 b) under the same input and returns the
/// largest deviation between their left-invariant errors a^-1 b and
/// c^-1 (c a^-1 b) over the horizon.
inline double error_autonomy_check(const DynamicsSpec& spec, const InputSignal& u,
                                   const MfgElement& a, const MfgElement& b, double horizon,
                                   double dt, const MfgElement* c = nullptr) {
  const auto g = a.signature();
  const MfgElement base = c ? *c : MfgElement::identity(g);
  MfgElement xa = a, xb = b, xc = base, xd = base * left_invariant_error(b, a);
  double worst = (mfg_embed(left_invariant_error(xb, xa)) -
                  mfg_embed(left_invariant_error(xd, xc))).norm();
  const auto steps = static_cast<long>(std::llround(horizon / dt));
  for (long k = 0; k < steps; ++k) {
    const auto vel = assemble_velocity(spec, u((k + 0.5) * dt));
    xa = exact_flow_step(vel, xa, dt);
    xb = exact_flow_step(vel, xb, dt);
    xc = exact_flow_step(vel, xc, dt);
    xd = exact_flow_step(vel, xd, dt);
    const double dev = (mfg_embed(left_invariant_error(xb, xa)) -
                        mfg_embed(left_invariant_error(xd, xc))).norm();
    worst = std::max(worst, dev);
  }
  return worst;
}

}  // namespace multiframe
