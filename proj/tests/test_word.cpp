#include <gtest/gtest.h>

#include <cmath>

#include "afp/ergodic.hpp"
#include "afp/errors.hpp"
#include "afp/word.hpp"

using namespace afp;

namespace {

AlgebraWithExpectation two_point() { return presets::function_algebra_with_state({0.5, 0.5}); }

Matrix u2() {
  Matrix u = Matrix::Zero(2, 2);
  u(0, 0) = 1.0;
  u(1, 1) = -1.0;
  return u;
}

Matrix dense(const FockOperator& x) { return Matrix(x.matrix); }

CenteredElement letter(const AlgebraWithExpectation& spec, const Matrix& a, int owner) {
  return as_centered(spec, a, owner);
}

std::vector<FockContext> sample_contexts() {
  std::vector<FockContext> out;
  out.push_back(build_fock_copies(two_point(), 0, 1, 5));
  out.push_back(build_fock_copies(presets::function_algebra_with_state({0.3, 0.7}), 0, 2, 4));
  out.push_back(build_fock_copies(presets::diagonal_in_matn(2), 0, 2, 5));
  out.push_back(build_fock_copies(presets::scalars_in_matn(2), 0, 1, 4));
  return out;
}

}  // namespace

TEST(WordType, Validation) {
  const auto spec = two_point();
  EXPECT_THROW(Word({}), DomainError);
  EXPECT_THROW(Word({letter(spec, u2(), 0), letter(spec, u2(), 0)}), DomainError);
  const Word w({letter(spec, u2(), 0), letter(spec, 2.0 * u2(), 1), letter(spec, u2(), 0)});
  EXPECT_EQ(w.length(), 3);
  EXPECT_EQ(w.indices(), (std::vector<int>{0, 1, 0}));
  EXPECT_NEAR(w.norm_product(), 2.0, 1e-14);
  const Word a = adjoint_word(w);
  EXPECT_EQ(a.indices(), (std::vector<int>{0, 1, 0}));
}

TEST(WordType, FamilyLengthAndSeparation) {
  const auto spec = two_point();
  const Word w01({letter(spec, u2(), 0), letter(spec, u2(), 1)});
  const Word w12({letter(spec, u2(), 1), letter(spec, u2(), 2)});
  const Word w03({letter(spec, u2(), 0), letter(spec, u2(), 3)});
  const Word w2({letter(spec, u2(), 2)});
  EXPECT_EQ(WordFamily{}.length(), 0);
  EXPECT_THROW((WordFamily{{w01, w2}}.length()), DomainError);
  EXPECT_TRUE(is_separated(WordFamily{{w01, w12}}));
  const auto clash = find_separation_clash(WordFamily{{w01, w12, w03}});
  ASSERT_TRUE(clash.has_value());
  EXPECT_EQ(clash->first, 0u);
  EXPECT_EQ(clash->second, 2u);
  EXPECT_TRUE(clash->at_start);
  EXPECT_THROW(haagerup_upper(WordFamily{{w01, w12, w03}}), HypothesisError);
}

TEST(WordType, HaagerupUpperExamples) {
  const auto spec = two_point();
  EXPECT_NEAR(haagerup_upper(WordFamily{{Word({letter(spec, u2(), 0)})}}), 3.0, 1e-14);
  EXPECT_NEAR(haagerup_upper(WordFamily{{Word({letter(spec, 2.0 * u2(), 0), letter(spec, 3.0 * u2(), 1)})}}), 30.0,
              1e-12);
  for (int n : {1, 4, 9, 7}) {
    const WordFamily orbit = average_family(Word({letter(spec, u2(), 0)}), n);
    EXPECT_NEAR(haagerup_upper(orbit), 3.0 * std::sqrt(n), 1e-12);
  }
}

TEST(WordOperator, SingleLetterAndAdjoint) {
  for (const FockContext& ctx : sample_contexts()) {
    const Word one = random_word(ctx, {ctx.indices().front()}, 3);
    EXPECT_LT(op_norm(dense(word_operator(ctx, one) - op_lambda(ctx, one.index(0), one.letter(0).matrix))), 1e-12);
    const Word w = random_word(ctx, random_alternating_indices(ctx, 3, 5), 5);
    EXPECT_LT(op_norm(dense(word_operator(ctx, adjoint_word(w)) - adjoint(word_operator(ctx, w)))), 1e-10);
    EXPECT_LT(op_norm(dense(family_operator(ctx, WordFamily{{w}}) - word_operator(ctx, w))), 1e-14);
    EXPECT_EQ(family_operator(ctx, WordFamily{}).matrix.nonZeros(), 0);
  }
}

TEST(WordOperator, ForeignIndexOrUncenteredLetter) {
  const FockContext ctx = build_fock_copies(two_point(), 0, 1, 2);
  const auto spec = two_point();
  EXPECT_THROW(word_operator(ctx, Word({letter(spec, u2(), 5)})), DomainError);
  CenteredElement bad = letter(spec, u2(), 0);
  bad.matrix = u2() + Matrix::Identity(2, 2);
  bad.coords = spec.algebra().coordinates(bad.matrix);
  EXPECT_THROW(word_operator(ctx, Word({bad})), DomainError);
}

TEST(Decompose, OutOfRangeAndErrors) {
  const FockContext ctx = build_fock_copies(two_point(), 0, 1, 5);
  const Word w = random_word(ctx, {0, 1}, 1);
  EXPECT_EQ(decompose_block(ctx, w, 1, 4).matrix.nonZeros(), 0);  // r > m + n
  EXPECT_EQ(decompose_block(ctx, w, 3, 0).matrix.nonZeros(), 0);  // r < m - n
  EXPECT_THROW(decompose_block(ctx, w, 4, 2), TruncationError);
  EXPECT_THROW(decompose_block(ctx, w, 1, 6), DomainError);
  EXPECT_THROW(decompose_block(ctx, w, -1, 0), DomainError);
}

TEST(Decompose, TwoLetterOddCase) {
  // P_2 w P_1 = psi(a_1^) rho(a_2) P_1, checked against the direct product.
  for (const FockContext& ctx : sample_contexts()) {
    const Word w = random_word(ctx, {ctx.indices()[0], ctx.indices()[1]}, 17);
    const auto& m1 = ctx.module(w.index(0));
    const FockOperator p1 = proj_level(ctx, 1);
    const FockOperator direct = proj_level(ctx, 2) * op_lambda(ctx, w.index(0), w.letter(0).matrix) *
                                op_lambda(ctx, w.index(1), w.letter(1).matrix) * p1;
    const FockOperator formula =
        op_psi(ctx, w.index(0), m1.hat(w.letter(0).matrix)) * op_rho(ctx, w.index(1), w.letter(1).matrix) * p1;
    const double scale = w.norm_product();
    EXPECT_LT(op_norm(dense(direct - formula)), 1e-9 * scale);
    EXPECT_LT(op_norm(dense(decompose_block(ctx, w, 1, 2) - direct)), 1e-9 * scale);
  }
}

TEST(Decompose, SingleLetterThreeTerms) {
  for (const FockContext& ctx : sample_contexts()) {
    const Word w = random_word(ctx, {ctx.indices()[1]}, 23);
    const int k = w.index(0);
    const Matrix& a = w.letter(0).matrix;
    const auto& mod = ctx.module(k);
    for (int m = 1; m + 1 <= ctx.max_level(); ++m) {
      const FockOperator pm = proj_level(ctx, m);
      const FockOperator rhs = proj_level(ctx, m + 1) * op_psi(ctx, k, mod.hat(a)) * pm +
                               pm * op_rho(ctx, k, a) * pm +
                               proj_level(ctx, m - 1) * adjoint(op_psi(ctx, k, mod.hat(a.adjoint()))) * pm;
      EXPECT_LT(op_norm(dense(word_operator(ctx, w) * pm - rhs)), 1e-9 * op_norm(a));
    }
  }
}

TEST(Decompose, EveryBlockMatchesDirectProduct) {
  for (const FockContext& ctx : sample_contexts()) {
    const int M = ctx.max_level();
    for (int n = 1; n <= std::min(4, M); ++n) {
      const Word w = random_word(ctx, random_alternating_indices(ctx, n, 100 + n), 200 + n);
      const FockOperator wo = word_operator(ctx, w);
      for (int m = 0; m + n <= M; ++m)
        for (int r = 0; r <= M; ++r) {
          const FockOperator direct = proj_level(ctx, r) * wo * proj_level(ctx, m);
          const double err = op_norm(dense(decompose_block(ctx, w, m, r) - direct));
          EXPECT_LT(err, 1e-8 * w.norm_product()) << "n=" << n << " m=" << m << " r=" << r;
        }
    }
  }
}

TEST(Bigsum, ResidualsAndVacuumChain) {
  for (const FockContext& ctx : sample_contexts()) {
    const int M = ctx.max_level();
    for (int n = 1; n <= std::min(4, M); ++n) {
      const Word w = random_word(ctx, random_alternating_indices(ctx, n, 300 + n), 400 + n);
      for (int m = 0; m + n <= M && m <= 3; ++m) {
        const BigsumReport rep = verify_bigsum(ctx, w, m);
        EXPECT_TRUE(rep.passed) << rep.residual;
        EXPECT_LT(rep.residual, kBigsumTolerance * rep.scale);
      }
      FockOperator chain = proj_level(ctx, n);
      for (int i = 0; i < n; ++i) chain = chain * op_psi(ctx, w.index(i), ctx.module(w.index(i)).hat(w.letter(i).matrix));
      chain = chain * proj_level(ctx, 0);
      EXPECT_LT(op_norm(dense(word_operator(ctx, w) * proj_level(ctx, 0) - chain)), 1e-9 * w.norm_product());
    }
    const Word w = random_word(ctx, random_alternating_indices(ctx, 2, 1), 1);
    EXPECT_THROW(verify_bigsum(ctx, w, M - 1), TruncationError);
  }
}

TEST(NormLower, IdentityAndUnitary) {
  for (int M = 0; M <= 3; ++M) {
    const FockContext ctx = build_fock_copies(two_point(), 0, 1, M);
    EXPECT_NEAR(norm_lower(ctx, identity_op(ctx), 0).lower, 1.0, 1e-12);
    if (M >= 1) {
      const FockOperator lu = op_lambda(ctx, 0, u2());
      const NormReport rep = norm_lower(ctx, lu, 1);
      EXPECT_NEAR(rep.lower, 1.0, 1e-12);
      EXPECT_NEAR((lu.matrix * rep.witness).norm(), rep.lower, 1e-12);
    }
  }
  const FockContext ctx = build_fock_copies(two_point(), 0, 1, 2);
  EXPECT_THROW(norm_lower(ctx, identity_op(ctx), 3), DomainError);
}

TEST(NormLower, MonotoneInTruncation) {
  double previous = 0.0;
  for (int M = 2; M <= 6; ++M) {
    const FockContext ctx = build_fock_copies(two_point(), 0, 3, M);
    const WordFamily f{{random_word(ctx, {0, 1}, 1), random_word(ctx, {1, 2}, 2), random_word(ctx, {2, 3}, 3)}};
    const double lower = norm_lower(ctx, family_operator(ctx, f), 2).lower;
    EXPECT_GE(lower, previous * (1 - 1e-12)) << "M=" << M;
    previous = lower;
  }
}

TEST(NormLower, FamiliesRespectBounds) {
  for (const FockContext& ctx : sample_contexts()) {
    const int M = ctx.max_level();
    const int maxsize = static_cast<int>(ctx.indices().size());
    for (int n = 1; n <= std::min(3, M); ++n)
      for (int size = 1; size <= maxsize; ++size) {
        const WordFamily f = random_separated_family(ctx, n, size, 1000 * n + size);
        ASSERT_TRUE(is_separated(f));
        const FockOperator x = family_operator(ctx, f);
        const double upper = haagerup_upper(f);
        EXPECT_LE(norm_lower(ctx, x, n).lower, upper * (1 + kInequalitySlack));
        const double g2 = gamma(f) * gamma(f);
        for (int m = 0; m + n <= M; ++m)
          for (int r = 0; r <= M; ++r) {
            const double b = block_norm(ctx, x, r, m);
            EXPECT_LE(b * b, g2 * (1 + kInequalitySlack)) << "r=" << r << " m=" << m;
          }
      }
  }
}

TEST(Random, SeparatedFamilyNeedsIndices) {
  const FockContext ctx = build_fock_copies(two_point(), 0, 1, 3);
  EXPECT_THROW(random_separated_family(ctx, 2, 3, 1), DomainError);
  const WordFamily f = random_separated_family(ctx, 3, 2, 1);
  EXPECT_EQ(f.size(), 2u);
  EXPECT_EQ(f.length(), 3);
  const WordFamily again = random_separated_family(ctx, 3, 2, 1);
  for (std::size_t i = 0; i < f.size(); ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(f.words[i].letter(j).matrix, again.words[i].letter(j).matrix);
}

TEST(Json, WordRoundTrip) {
  const FockContext ctx = build_fock_copies(presets::scalars_in_matn(2), 0, 2, 2);
  const Word w = random_word(ctx, {0, 2, 1}, 9);
  const Word back = word_from_json(word_to_json(w), ctx);
  ASSERT_EQ(back.length(), 3);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(back.index(i), w.index(i));
    EXPECT_LT((back.letter(i).matrix - w.letter(i).matrix).norm(), 1e-12);
  }
  try {
    word_from_json(nlohmann::json{{"letters", {{{"index", 9}, {"element", word_to_json(w)["letters"][0]["element"]}}}}},
                   ctx, "/parameters/word");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.pointer().rfind("/parameters/word", 0), 0u) << e.pointer();
  }
}
