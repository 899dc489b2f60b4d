#pragma once

// Linear-observed outputs on MFG. A diagonal block B of the embedding (the
// core, a left accumulation lT_j..T0 or a right accumulation T0..rT_j) acts
// on a constant vector either from the left (B d) or through its inverse
// (B^-1 d), optionally twisted by a SIM automorphism S:
//
//   left   w = first block of S B S^-1 d
//   right  w = first block of S B^-1 S^-1 d
//
// With the constants written as d = [d1 + rho d2; A d2] the output no longer
// depends on A, which is how ObservationSpec stores them.

#include <functional>

#include "multiframe/mfg.hpp"

namespace multiframe {

enum class ActionSide { Left, Right };
enum class ChainKind { Core, Left, Right };

struct ObservationSpec {
  ActionSide side = ActionSide::Left;
  ChainKind chain = ChainKind::Core;
  Index index = 0;  // 1-based position along the chain; ignored for the core
  Matrix Omega;     // d x d rotation
  Matrix rho;       // d x (n+m)
  Vector d1;        // d
  Vector d2;        // n+m

  /// Position of the observed block in mfg_accumulate order.
  Index block(const MfgSignature& g) const {
    switch (chain) {
      case ChainKind::Core:
        return 0;
      case ChainKind::Left:
        if (index < 1 || index > g.s) throw InvalidArgument("observation: left index out of range");
        return index;
      case ChainKind::Right:
        if (index < 1 || index > g.t) throw InvalidArgument("observation: right index out of range");
        return g.s + index;
    }
    return 0;
  }

  /// Twist with A = I; the output is independent of A for these constants.
  SimElement twist() const { return {Omega, rho, Matrix::Identity(d2.size(), d2.size())}; }
};

/// S embed(block)^{+1 or -1} S^-1 v.
inline Vector twisted_action(const SimElement& S, const TfgElement& block, const Vector& v,
                             ActionSide side) {
  const Matrix T = tfg_embed(block);
  const Matrix Sd = S.embed();
  const Matrix Sinv = S.inverse().embed();
  if (side == ActionSide::Left) return Sd * T * Sinv * v;
  return Sd * tfg_embed(tfg_inverse(block)) * Sinv * v;
}

/// Closed-form output written in the factor components (R_k, r_k) of chi.
inline Vector build_output(const ObservationSpec& spec, const MfgElement& chi) {
  const auto g = chi.signature();
  const Index d = g.d;
  if (spec.d1.size() != d || spec.d2.size() != g.tfg().vectors() || spec.Omega.rows() != d ||
      spec.rho.rows() != d || spec.rho.cols() != g.tfg().vectors()) {
    throw InvalidArgument("build_output: observation constants do not match the signature");
  }
  spec.block(g);
  const Matrix& W = spec.Omega;
  auto conj = [&W](const Matrix& R) { return Matrix(W * R * W.transpose()); };

  std::vector<Matrix> R{chi.core.R}, r{chi.core.r()};
  const auto& chain = spec.chain == ChainKind::Right ? chi.right : chi.left;
  for (const auto& f : chain) {
    R.push_back(f.R);
    r.push_back(f.r());
  }
  const Index j = spec.chain == ChainKind::Core ? 0 : spec.index;

  // Rbar_{i,k}: R_i R_{i-1} .. R_k on the left chain (i >= k), R_i .. R_k on the
  // right chain (i <= k); empty products are the identity.
  auto lbar = [&](Index i, Index k) {
    Matrix P = Matrix::Identity(d, d);
    for (Index q = i; q >= k; --q) P = P * R[q];
    return P;
  };
  auto rbar = [&](Index i, Index k) {
    Matrix P = Matrix::Identity(d, d);
    for (Index q = i; q <= k; ++q) P = P * R[q];
    return P;
  };

  Matrix Rbar;
  Matrix trans;  // d x (n+m)
  const bool left_action = spec.side == ActionSide::Left;
  if (spec.chain == ChainKind::Right) {
    Rbar = rbar(0, j);
    trans = left_action ? Matrix(r[0]) : Matrix(Rbar.transpose() * r[0]);
    if (left_action) {
      for (Index k = 1; k <= j; ++k) trans += rbar(0, k - 1) * r[k];
    } else {
      for (Index k = 1; k <= j; ++k) trans += rbar(k, j).transpose() * r[k];
    }
  } else {
    Rbar = lbar(j, 0);
    trans = left_action ? Matrix(r[j]) : Matrix::Zero(d, r[0].cols());
    if (left_action) {
      for (Index k = 0; k < j; ++k) trans += lbar(j, k + 1) * r[k];
    } else {
      for (Index k = 0; k <= j; ++k) trans += lbar(k, 0).transpose() * r[k];
    }
  }

  if (left_action) return conj(Rbar) * spec.d1 + (spec.rho + W * trans) * spec.d2;
  return conj(Rbar.transpose()) * spec.d1 + (spec.rho - W * trans) * spec.d2;
}

/// Innovation: the measurement mapped back through the estimate's twisted
/// block action, z = first block of (S B_hat^{+-1} S^-1)^-1 [w; d2] minus the
/// constant S-frame reference. It vanishes when the measurement matches the estimate.
inline Vector invariant_innovation(const ObservationSpec& spec, const MfgElement& estimate,
                                   const Vector& w) {
  const auto g = estimate.signature();
  const auto block = mfg_accumulate(estimate)[spec.block(g)];
  const ActionSide inverse_side =
      spec.side == ActionSide::Left ? ActionSide::Right : ActionSide::Left;
  Vector full(w.size() + spec.d2.size());
  full << w, spec.d2;
  Vector reference(full.size());
  reference << spec.d1 + spec.rho * spec.d2, spec.d2;
  return (twisted_action(spec.twist(), block, full, inverse_side) - reference).head(w.size());
}

/// Central-difference Jacobian of the invariant innovation with respect to the
/// tangent coordinates xi of the chosen error convention: the true state is
/// chi_hat exp(xi) (left) or exp(xi) chi_hat (right).
inline Matrix innovation_jacobian(const ObservationSpec& spec, const MfgElement& estimate,
                                  ErrorConvention convention, double step = 1e-6) {
  const auto g = estimate.signature();
  const Index D = g.tangent_dim();
  auto innovation = [&](const Vector& xi) {
    const auto err = mfg_exp(MfgTangent::from_vector(-xi, g), g);
    const auto truth = convention == ErrorConvention::Left ? left_error_recover(estimate, err)
                                                           : right_error_recover(estimate, err);
    return invariant_innovation(spec, estimate, build_output(spec, truth));
  };
  Matrix J(g.d, D);
  for (Index i = 0; i < D; ++i) {
    const Vector e = step * Vector::Unit(D, i);
    J.col(i) = (innovation(e) - innovation(-e)) / (2.0 * step);
  }
  return J;
}

}  // namespace multiframe
