#pragma once

// Multi-frame group MFG(d, n, m, s, t): a core TFG element T0 with s factors
// chained on its left and t factors chained on its right. The group law is
// the type-II semi-direct product through inner automorphisms, realised by
// the block-diagonal embedding
//
//   diag(T0, lT1 T0, ..., lTs ... T0, T0 rT1, ..., T0 rT1 ... rTt).
//
// Elements store the factors; accumulated diagonal blocks are computed on
// demand.

#include <string>
#include <vector>

#include "multiframe/tfg.hpp"

namespace multiframe {

struct MfgSignature {
  Index d = 3;
  Index n = 0;
  Index m = 0;
  Index s = 0;
  Index t = 0;

  TfgSignature tfg() const { return {d, n, m}; }
  Index blocks() const { return s + t + 1; }
  Index tangent_dim() const { return blocks() * tfg().tangent_dim(); }
  Index matrix_size() const { return blocks() * tfg().matrix_size(); }
  bool operator==(const MfgSignature&) const = default;
};

inline std::string to_string(const MfgSignature& g) {
  return "(" + std::to_string(g.d) + "," + std::to_string(g.n) + "," + std::to_string(g.m) +
         "," + std::to_string(g.s) + "," + std::to_string(g.t) + ")";
}

struct MfgElement {
  TfgElement core;
  std::vector<TfgElement> left;   // lT_1 .. lT_s
  std::vector<TfgElement> right;  // rT_1 .. rT_t

  static MfgElement identity(const MfgSignature& g) {
    const auto e = TfgElement::identity(g.tfg());
    return {e, std::vector<TfgElement>(g.s, e), std::vector<TfgElement>(g.t, e)};
  }
  MfgSignature signature() const {
    const auto c = core.signature();
    return {c.d, c.n, c.m, static_cast<Index>(left.size()), static_cast<Index>(right.size())};
  }
};

/// One tangent block per diagonal block, ordered core, left chain, right chain.
struct MfgTangent {
  std::vector<TfgTangent> blocks;

  static MfgTangent zero(const MfgSignature& g) {
    return {std::vector<TfgTangent>(g.blocks(), TfgTangent::zero(g.tfg()))};
  }
  Vector to_vector() const {
    Index size = 0;
    for (const auto& b : blocks) size += b.to_vector().size();
    Vector out(size);
    Index at = 0;
    for (const auto& b : blocks) {
      const Vector c = b.to_vector();
      out.segment(at, c.size()) = c;
      at += c.size();
    }
    return out;
  }
  static MfgTangent from_vector(const Vector& c, const MfgSignature& g) {
    if (c.size() != g.tangent_dim()) throw InvalidArgument("MfgTangent: coordinate size mismatch");
    const Index D = g.tfg().tangent_dim();
    MfgTangent out;
    for (Index i = 0; i < g.blocks(); ++i) {
      out.blocks.push_back(TfgTangent::from_vector(c.segment(i * D, D), g.tfg()));
    }
    return out;
  }
};

inline MfgTangent operator-(const MfgTangent& a) {
  MfgTangent out = a;
  for (auto& b : out.blocks) b = -b;
  return out;
}

/// Automorphism diag(S_1, ..., S_{s+t+1}) acting by conjugation.
struct MfgAutomorphism {
  std::vector<SimElement> blocks;

  static MfgAutomorphism identity(const MfgSignature& g) {
    return {std::vector<SimElement>(g.blocks(), SimElement::identity(g.tfg()))};
  }
};

enum class ErrorConvention { Left, Right };

namespace detail {

inline void require_same(const MfgSignature& a, const MfgSignature& b, const char* op) {
  if (!(a == b)) {
    throw InvalidArgument(std::string(op) + ": signature mismatch " + to_string(a) + " vs " +
                          to_string(b));
  }
}

}  // namespace detail

/// Diagonal blocks of the embedding: T0, lT_j...T0 (j = 1..s), T0...rT_j (j = 1..t).
inline std::vector<TfgElement> mfg_accumulate(const MfgElement& a) {
  std::vector<TfgElement> out;
  out.reserve(1 + a.left.size() + a.right.size());
  out.push_back(a.core);
  TfgElement acc = a.core;
  for (const auto& f : a.left) {
    acc = f * acc;
    out.push_back(acc);
  }
  acc = a.core;
  for (const auto& f : a.right) {
    acc = acc * f;
    out.push_back(acc);
  }
  return out;
}

/// Inverse of mfg_accumulate: factors recovered by dividing consecutive blocks.
inline MfgElement mfg_from_blocks(const std::vector<TfgElement>& blocks, Index s, Index t) {
  if (static_cast<Index>(blocks.size()) != s + t + 1) {
    throw InvalidArgument("mfg_from_blocks: expected s + t + 1 blocks");
  }
  MfgElement out;
  out.core = blocks[0];
  const TfgElement* prev = &blocks[0];
  for (Index j = 1; j <= s; ++j) {
    out.left.push_back(blocks[j] * tfg_inverse(*prev));
    prev = &blocks[j];
  }
  prev = &blocks[0];
  for (Index j = 1; j <= t; ++j) {
    out.right.push_back(tfg_inverse(*prev) * blocks[s + j]);
    prev = &blocks[s + j];
  }
  return out;
}

inline Matrix mfg_embed(const MfgElement& a) {
  const auto g = a.signature();
  const Index k = g.tfg().matrix_size();
  Matrix M = Matrix::Zero(g.matrix_size(), g.matrix_size());
  const auto blocks = mfg_accumulate(a);
  for (Index i = 0; i < g.blocks(); ++i) M.block(i * k, i * k, k, k) = tfg_embed(blocks[i]);
  return M;
}

inline MfgElement mfg_extract(const Matrix& M, const MfgSignature& g) {
  const Index k = g.tfg().matrix_size();
  if (M.rows() != g.matrix_size() || M.cols() != g.matrix_size()) {
    throw InvalidArgument("mfg_extract: embedding size mismatch");
  }
  std::vector<TfgElement> blocks;
  for (Index i = 0; i < g.blocks(); ++i) {
    blocks.push_back(tfg_extract(M.block(i * k, i * k, k, k), g.n, g.m));
  }
  return mfg_from_blocks(blocks, g.s, g.t);
}

/// Type-II semi-direct product with inner automorphisms:
///   core   a0 b0
///   left   la_j C_{La_{j-1}}(lb_j)           La_{j-1} = la_{j-1} ... a0
///   right  C_{Rb_{j-1}}^-1(ra_j) rb_j        Rb_{j-1} = b0 rb_1 ... rb_{j-1}
inline MfgElement mfg_compose(const MfgElement& a, const MfgElement& b) {
  detail::require_same(a.signature(), b.signature(), "mfg_compose");
  MfgElement out;
  out.core = a.core * b.core;
  TfgElement acc = a.core;
  for (std::size_t j = 0; j < a.left.size(); ++j) {
    out.left.push_back(a.left[j] * tfg_conjugate(acc, b.left[j]));
    acc = a.left[j] * acc;
  }
  acc = b.core;
  for (std::size_t j = 0; j < a.right.size(); ++j) {
    out.right.push_back(tfg_conjugate(tfg_inverse(acc), a.right[j]) * b.right[j]);
    acc = acc * b.right[j];
  }
  return out;
}

inline MfgElement operator*(const MfgElement& a, const MfgElement& b) { return mfg_compose(a, b); }

inline MfgElement mfg_inverse(const MfgElement& a) {
  MfgElement out;
  out.core = tfg_inverse(a.core);
  TfgElement acc = a.core;
  for (const auto& f : a.left) {
    out.left.push_back(tfg_conjugate(tfg_inverse(acc), tfg_inverse(f)));
    acc = f * acc;
  }
  acc = a.core;
  for (const auto& f : a.right) {
    out.right.push_back(tfg_conjugate(acc, tfg_inverse(f)));
    acc = acc * f;
  }
  return out;
}

/// Each diagonal block of the result is the TFG exponential of the matching
/// tangent block.
inline MfgElement mfg_exp(const MfgTangent& xi, Index s, Index t) {
  if (static_cast<Index>(xi.blocks.size()) != s + t + 1) {
    throw InvalidArgument("mfg_exp: expected s + t + 1 tangent blocks");
  }
  std::vector<TfgElement> blocks;
  for (const auto& b : xi.blocks) blocks.push_back(tfg_exp(b));
  return mfg_from_blocks(blocks, s, t);
}

inline MfgElement mfg_exp(const MfgTangent& xi, const MfgSignature& g) {
  return mfg_exp(xi, g.s, g.t);
}

inline MfgTangent mfg_log(const MfgElement& a) {
  MfgTangent out;
  for (const auto& b : mfg_accumulate(a)) out.blocks.push_back(tfg_log(b));
  return out;
}

/// psi_S(chi) = S chi S^-1, blockwise.
inline MfgElement mfg_aut_apply(const MfgAutomorphism& S, const MfgElement& a) {
  const auto g = a.signature();
  if (static_cast<Index>(S.blocks.size()) != g.blocks()) {
    throw InvalidArgument("mfg_aut_apply: expected s + t + 1 automorphism blocks");
  }
  auto blocks = mfg_accumulate(a);
  for (Index i = 0; i < g.blocks(); ++i) blocks[i] = sim_conjugate(S.blocks[i], blocks[i]);
  return mfg_from_blocks(blocks, g.s, g.t);
}

/// Left-invariant error chi^-1 chi_hat.
inline MfgElement left_invariant_error(const MfgElement& estimate, const MfgElement& truth) {
  return mfg_inverse(truth) * estimate;
}

/// Right-invariant error chi_hat chi^-1.
inline MfgElement right_invariant_error(const MfgElement& estimate, const MfgElement& truth) {
  return estimate * mfg_inverse(truth);
}

/// Recovers chi from chi_hat and the left-invariant error delta = chi^-1 chi_hat,
/// i.e. chi = chi_hat eps with eps = delta^-1, componentwise in the eps
/// diagonal blocks E_j:
///   T0   = T0_hat E_0
///   rT_j = ER_{j-1}^-1 rT_j_hat ER_j
///   lT_j = lT_j_hat C_{lT_{j-1}_hat} o ... o C_{T0_hat}[EL_j EL_{j-1}^-1]
inline MfgElement left_error_recover(const MfgElement& estimate, const MfgElement& delta) {
  detail::require_same(estimate.signature(), delta.signature(), "left_error_recover");
  const auto g = estimate.signature();
  const auto eps = mfg_accumulate(mfg_inverse(delta));

  MfgElement out;
  out.core = estimate.core * eps[0];
  TfgElement hat_acc = estimate.core;
  for (Index j = 1; j <= g.s; ++j) {
    const TfgElement inner = eps[j] * tfg_inverse(eps[j - 1]);
    out.left.push_back(estimate.left[j - 1] * tfg_conjugate(hat_acc, inner));
    hat_acc = estimate.left[j - 1] * hat_acc;
  }
  const TfgElement* prev = &eps[0];
  for (Index j = 1; j <= g.t; ++j) {
    const TfgElement& cur = eps[g.s + j];
    out.right.push_back(tfg_inverse(*prev) * estimate.right[j - 1] * cur);
    prev = &cur;
  }
  return out;
}

/// Recovers chi from chi_hat and the right-invariant error delta = chi_hat chi^-1,
/// i.e. chi = eps chi_hat with eps = delta^-1:
///   T0   = E_0 T0_hat
///   lT_j = EL_j lT_j_hat EL_{j-1}^-1
///   rT_j = C_{(T0_hat ... rT_{j-1}_hat)^-1}[ER_{j-1}^-1 ER_j] rT_j_hat
inline MfgElement right_error_recover(const MfgElement& estimate, const MfgElement& delta) {
  detail::require_same(estimate.signature(), delta.signature(), "right_error_recover");
  const auto g = estimate.signature();
  const auto eps = mfg_accumulate(mfg_inverse(delta));

  MfgElement out;
  out.core = eps[0] * estimate.core;
  const TfgElement* prev = &eps[0];
  for (Index j = 1; j <= g.s; ++j) {
    const TfgElement& cur = eps[j];
    out.left.push_back(cur * estimate.left[j - 1] * tfg_inverse(*prev));
    prev = &cur;
  }
  TfgElement hat_acc = estimate.core;
  prev = &eps[0];
  for (Index j = 1; j <= g.t; ++j) {
    const TfgElement& cur = eps[g.s + j];
    const TfgElement inner = tfg_inverse(*prev) * cur;
    out.right.push_back(tfg_conjugate(tfg_inverse(hat_acc), inner) * estimate.right[j - 1]);
    hat_acc = hat_acc * estimate.right[j - 1];
    prev = &cur;
  }
  return out;
}

}  // namespace multiframe
