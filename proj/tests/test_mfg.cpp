#include <gtest/gtest.h>

#include "multiframe/mfg.hpp"
#include "support.hpp"

using namespace multiframe;

namespace {

const MfgSignature kSignatures[] = {{3, 2, 0, 0, 1}, {3, 1, 1, 1, 1}, {2, 1, 0, 2, 0}, {3, 1, 0, 2, 2}};

double distance(const MfgElement& a, const MfgElement& b) {
  return (mfg_embed(a) - mfg_embed(b)).norm();
}

Matrix block_diag(const std::vector<Matrix>& blocks) {
  Index size = 0;
  for (const auto& b : blocks) size += b.rows();
  Matrix M = Matrix::Zero(size, size);
  Index at = 0;
  for (const auto& b : blocks) {
    M.block(at, at, b.rows(), b.rows()) = b;
    at += b.rows();
  }
  return M;
}

}  // namespace

TEST(Mfg, AccumulatedBlocksFollowChainOrder) {
  mftest::Rng rng(31);
  const MfgSignature g{3, 1, 1, 2, 2};
  const auto a = rng.mfg(g);
  const auto blocks = mfg_accumulate(a);
  ASSERT_EQ(static_cast<Index>(blocks.size()), g.blocks());
  const Matrix T0 = tfg_embed(a.core);
  const Matrix L2 = tfg_embed(a.left[1]) * tfg_embed(a.left[0]) * T0;
  const Matrix R2 = T0 * tfg_embed(a.right[0]) * tfg_embed(a.right[1]);
  EXPECT_LT((tfg_embed(blocks[2]) - L2).norm(), 1e-12);
  EXPECT_LT((tfg_embed(blocks[4]) - R2).norm(), 1e-12);
  EXPECT_LT(distance(mfg_from_blocks(blocks, 2, 2), a), 1e-12);
}

TEST(Mfg, EmbeddingIsBlockDiagonal) {
  mftest::Rng rng(32);
  const MfgSignature g{2, 1, 0, 2, 0};
  const auto a = rng.mfg(g);
  const Matrix M = mfg_embed(a);
  EXPECT_EQ(M.rows(), g.matrix_size());
  EXPECT_EQ(Matrix(M.block(0, 3, 3, 3)), Matrix::Zero(3, 3));
  EXPECT_LT(distance(mfg_extract(M, g), a), 1e-13);
  EXPECT_THROW(mfg_extract(Matrix::Identity(4, 4), g), InvalidArgument);
}

TEST(Mfg, GroupLawMatchesEmbedding) {
  mftest::Rng rng(33);
  for (const auto& g : kSignatures) {
    const auto e = MfgElement::identity(g);
    for (int i = 0; i < 50; ++i) {
      const auto a = rng.mfg(g), b = rng.mfg(g), c = rng.mfg(g);
      EXPECT_LT((mfg_embed(a * b) - mfg_embed(a) * mfg_embed(b)).norm(), 1e-10) << to_string(g);
      EXPECT_LT(distance((a * b) * c, a * (b * c)), 1e-10);
      EXPECT_LT(distance(a * e, a), 1e-12);
      EXPECT_LT(distance(e * a, a), 1e-12);
      EXPECT_LT(distance(a * mfg_inverse(a), e), 1e-10);
      EXPECT_LT(distance(mfg_inverse(a) * a, e), 1e-10);
    }
  }
}

TEST(Mfg, ComposeRejectsMismatchedSignatures) {
  EXPECT_THROW(MfgElement::identity({3, 1, 0, 1, 0}) * MfgElement::identity({3, 1, 0, 0, 1}),
               InvalidArgument);
  EXPECT_THROW(mfg_exp(MfgTangent::zero({3, 1, 0, 1, 0}), 0, 0), InvalidArgument);
}

TEST(Mfg, ExpMatchesDenseExponentialAndLogInverts) {
  mftest::Rng rng(34);
  for (const auto& g : kSignatures) {
    for (int i = 0; i < 50; ++i) {
      const auto xi = rng.mfg_tangent(g);
      std::vector<Matrix> algebra;
      for (const auto& b : xi.blocks) algebra.push_back(tfg_algebra_embed(b));
      const Matrix oracle = mftest::dense_expm(block_diag(algebra));
      const auto chi = mfg_exp(xi, g);
      EXPECT_LT((mfg_embed(chi) - oracle).norm(), 1e-10) << to_string(g);
      EXPECT_LT((mfg_log(chi).to_vector() - xi.to_vector()).norm(), 1e-8);
    }
  }
}

TEST(Mfg, AutomorphismIsConjugationAndHomomorphism) {
  mftest::Rng rng(35);
  for (const auto& g : kSignatures) {
    for (int i = 0; i < 30; ++i) {
      const auto S = rng.automorphism(g);
      const auto a = rng.mfg(g), b = rng.mfg(g);
      std::vector<Matrix> blocks;
      for (const auto& s : S.blocks) blocks.push_back(s.embed());
      const Matrix Sd = block_diag(blocks);
      EXPECT_LT((mfg_embed(mfg_aut_apply(S, a)) - Sd * mfg_embed(a) * Sd.inverse()).norm(), 1e-9);
      EXPECT_LT(distance(mfg_aut_apply(S, a * b), mfg_aut_apply(S, a) * mfg_aut_apply(S, b)),
                1e-9);
    }
  }
}

TEST(Mfg, InvariantErrorsRecoverTruth) {
  mftest::Rng rng(36);
  for (const auto& g : kSignatures) {
    for (int i = 0; i < 30; ++i) {
      const auto truth = rng.mfg(g), estimate = rng.mfg(g);
      const auto dl = left_invariant_error(estimate, truth);
      const auto dr = right_invariant_error(estimate, truth);
      EXPECT_LT(distance(left_error_recover(estimate, dl), truth), 1e-9) << to_string(g);
      EXPECT_LT(distance(right_error_recover(estimate, dr), truth), 1e-9) << to_string(g);
    }
  }
}

TEST(Mfg, ErrorRecoverMatchesGroupProducts) {
  mftest::Rng rng(37);
  const MfgSignature g{3, 1, 1, 2, 2};
  for (int i = 0; i < 30; ++i) {
    const auto estimate = rng.mfg(g);
    const auto delta = rng.mfg(g);
    EXPECT_LT(distance(left_error_recover(estimate, delta), estimate * mfg_inverse(delta)), 1e-9);
    EXPECT_LT(distance(right_error_recover(estimate, delta), mfg_inverse(delta) * estimate), 1e-9);
  }
}

TEST(Mfg, TangentCoordinatesRoundTrip) {
  mftest::Rng rng(38);
  const MfgSignature g{3, 2, 0, 0, 1};
  const auto xi = rng.mfg_tangent(g);
  EXPECT_EQ(g.tangent_dim(), 18);
  EXPECT_EQ(MfgTangent::from_vector(xi.to_vector(), g).to_vector(), xi.to_vector());
}
