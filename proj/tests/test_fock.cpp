#include <gtest/gtest.h>

#include <map>

#include "afp/errors.hpp"
#include "afp/fock.hpp"
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

double dist(const FockOperator& x, const FockOperator& y) { return op_norm(dense(x - y)); }

double restricted_dist(const FockContext& ctx, const FockOperator& x, const FockOperator& y, int top) {
  return op_norm(dense((x - y) * proj_levels_upto(ctx, top)));
}

std::vector<FockContext> sample_contexts() {
  std::vector<FockContext> out;
  out.push_back(build_fock_copies(two_point(), 0, 2, 3));
  out.push_back(build_fock_copies(presets::diagonal_in_matn(2), 0, 1, 3));
  out.push_back(build_fock_copies(presets::scalars_in_matn(2), 0, 1, 2));
  out.push_back(build_fock_copies(presets::vector_state_in_matn(2), 0, 2, 3));
  out.push_back(build_fock({{0, presets::function_algebra_with_state({0.3, 0.7})},
                            {1, presets::vector_state_in_matn(2)},
                            {2, presets::scalars_in_matn(2)}},
                           3));
  return out;
}

}  // namespace

TEST(FockBuild, DimensionExamples) {
  EXPECT_EQ(build_fock_copies(two_point(), 1, 2, 2).total_dim(), 5);
  EXPECT_EQ(build_fock_copies(two_point(), 1, 2, 3).total_dim(), 7);
  EXPECT_EQ(build_fock_copies(two_point(), 1, 2, 0).total_dim(), 1);
  EXPECT_EQ(build_fock_copies(presets::diagonal_in_matn(2), 0, 2, 0).total_dim(), 2);
}

TEST(FockBuild, ScalarBaseDimensionFormula) {
  // B = C: dim = 1 + sum over alternating sequences of products of E° dims.
  const std::map<int, AlgebraWithExpectation> f{{0, presets::scalars_in_matn(2)},
                                                {1, presets::vector_state_in_matn(2)},
                                                {2, two_point()},
                                                {3, presets::function_algebra_with_state({0.1, 0.9})}};
  const std::vector<int> d{3, 1, 1, 1};
  const int M = 3;
  long expected = 1;
  std::vector<std::pair<int, long>> frontier{{-1, 1}};
  for (int m = 1; m <= M; ++m) {
    std::vector<std::pair<int, long>> next;
    for (const auto& [last, w] : frontier)
      for (int i = 0; i < 4; ++i)
        if (i != last) next.emplace_back(i, w * d[static_cast<std::size_t>(i)]);
    for (const auto& p : next) expected += p.second;
    frontier = next;
  }
  EXPECT_EQ(build_fock(f, M).total_dim(), expected);
}

TEST(FockBuild, DiagonalBaseQuotientsTensorLevels) {
  // Over the diagonal of M_2, E°(x)_B E° keeps only e12 (x) e21 and e21 (x) e12,
  // so every alternating sequence contributes two dimensions.
  const FockContext ctx = build_fock_copies(presets::diagonal_in_matn(2), 0, 2, 3);
  EXPECT_EQ(ctx.level_dim(0), 2);
  EXPECT_EQ(ctx.level_dim(1), 6);
  EXPECT_EQ(ctx.level_dim(2), 12);
  EXPECT_EQ(ctx.level_dim(3), 24);
}

TEST(FockBuild, Errors) {
  EXPECT_THROW(build_fock({{0, two_point()}}, 2), ConfigurationError);
  EXPECT_THROW(build_fock_copies(two_point(), 0, 1, -1), ConfigurationError);
  EXPECT_THROW(build_fock({{0, presets::scalars_in_matn(2)}, {1, presets::scalars_in_matn(3)}}, 1),
               ConfigurationError);
  FockOptions small;
  small.max_dim = 6;
  try {
    build_fock_copies(two_point(), 1, 2, 3, small);
    FAIL();
  } catch (const CapacityError& e) {
    EXPECT_GT(e.required(), 6.0);
  }
}

TEST(FockBuild, BasisLabelsAreOrdered) {
  const FockContext ctx = build_fock_copies(presets::scalars_in_matn(2), 0, 2, 3);
  const auto& labels = ctx.basis_index();
  ASSERT_EQ(static_cast<int>(labels.size()), ctx.total_dim());
  for (std::size_t i = 1; i < labels.size(); ++i) {
    const auto& a = labels[i - 1];
    const auto& b = labels[i];
    EXPECT_LE(a.level, b.level);
    if (a.level == b.level) EXPECT_TRUE(a.sequence < b.sequence || (a.sequence == b.sequence && a.slot + 1 == b.slot));
    for (std::size_t j = 1; j < b.sequence.size(); ++j) EXPECT_NE(b.sequence[j - 1], b.sequence[j]);
    EXPECT_EQ(static_cast<int>(b.sequence.size()), b.level);
  }
}

TEST(Projections, LevelsAndFirstIndex) {
  const FockContext ctx = build_fock_copies(two_point(), 1, 2, 2);
  const FockOperator id = identity_op(ctx);
  FockOperator sum = zero_op(ctx);
  for (int m = 0; m <= 2; ++m) sum = sum + proj_level(ctx, m);
  EXPECT_LT(dist(sum, id), 1e-14);
  EXPECT_LT(op_norm(dense(proj_level(ctx, 1) * proj_level(ctx, 2))), 1e-14);
  EXPECT_EQ(numerical_rank(dense(proj_level(ctx, 2))), 2);
  const Vector vac = ctx.vacuum();
  EXPECT_LT((proj_level(ctx, 0).matrix * vac - vac).norm(), 1e-14);
  const FockOperator q1 = proj_first_index(ctx, 1);
  const FockOperator q2 = proj_first_index(ctx, 2);
  EXPECT_LT(dist(q1 + q2, id - proj_level(ctx, 0)), 1e-14);
  EXPECT_LT(op_norm(dense(q1 * proj_level(ctx, 0))), 1e-14);
  EXPECT_THROW(proj_level(ctx, 3), DomainError);
  EXPECT_THROW(proj_first_index(ctx, 7), DomainError);
}

TEST(Projections, AreOrthogonalAndCommute) {
  for (const FockContext& ctx : sample_contexts())
    for (int k : ctx.indices()) {
      const FockOperator q = proj_first_index(ctx, k);
      EXPECT_LT(dist(q * q, q), 1e-9);
      EXPECT_LT(dist(adjoint(q), q), 1e-9);
      for (int m = 0; m <= ctx.max_level(); ++m) {
        const FockOperator p = proj_level(ctx, m);
        EXPECT_LT(dist(q * p, p * q), 1e-9);
        EXPECT_LT(dist(p * p, p), 1e-9);
      }
    }
}

TEST(Psi, Identities) {
  for (const FockContext& ctx : sample_contexts()) {
    const int M = ctx.max_level();
    for (int k : ctx.indices()) {
      const GnsModule& mod = ctx.module(k);
      const auto& spec = mod.source();
      for (std::uint64_t s = 0; s < 3; ++s) {
        const Matrix a = center(spec, random_element(spec.algebra(), s)).matrix;
        const ModuleVector y = mod.hat(a);
        const FockOperator psi = op_psi(ctx, k, y);
        const FockOperator q = proj_first_index(ctx, k);
        const FockOperator one_minus_q = identity_op(ctx) - q;
        const FockOperator lhs = adjoint(psi) * psi;
        const FockOperator rhs = op_left_b(ctx, inner_product(mod, y, y)) * one_minus_q;
        EXPECT_LT(restricted_dist(ctx, lhs, rhs, M - 1), 1e-9 * (1 + a.squaredNorm()));
        EXPECT_NEAR(op_norm(dense(psi)), module_norm(mod, y), 1e-9 * (1 + module_norm(mod, y)));
        EXPECT_LT(dist(q * psi * one_minus_q, psi), 1e-12);
        EXPECT_LT(op_norm(dense(adjoint(psi) * proj_level(ctx, 0))), 1e-12);
      }
    }
  }
}

TEST(Psi, RejectsUnitComponent) {
  const FockContext ctx = build_fock_copies(two_point(), 0, 1, 2);
  const GnsModule& mod = ctx.module(0);
  EXPECT_THROW(op_psi(ctx, 0, mod.hat(Matrix::Identity(2, 2))), DomainError);
  EXPECT_THROW(op_psi(ctx, 0, mod.hat(u2() + Matrix::Identity(2, 2))), DomainError);
  EXPECT_NO_THROW(op_psi(ctx, 0, mod.hat(u2())));
}

TEST(Psi, TopLevelIsTruncated) {
  const FockContext ctx = build_fock_copies(two_point(), 0, 1, 2);
  const FockOperator psi = op_psi(ctx, 0, ctx.module(0).hat(u2()));
  EXPECT_LT(op_norm(dense(psi * proj_level(ctx, 2))), 1e-14);
}

TEST(Psi, MixedFirstIndicesAnnihilate) {
  const FockContext ctx = build_fock_copies(presets::scalars_in_matn(2), 0, 2, 3);
  const auto& spec = ctx.module(0).source();
  for (int i : ctx.indices())
    for (int j : ctx.indices()) {
      if (i == j) continue;
      const Matrix a = center(spec, random_element(spec.algebra(), 10 + i)).matrix;
      const Matrix b = center(spec, random_element(spec.algebra(), 20 + j)).matrix;
      const FockOperator x = adjoint(op_psi(ctx, i, ctx.module(i).hat(a.adjoint()))) * op_psi(ctx, j, ctx.module(j).hat(b));
      EXPECT_LT(op_norm(dense(x)), 1e-12);
    }
}

TEST(Rho, Identities) {
  for (const FockContext& ctx : sample_contexts())
    for (int k : ctx.indices()) {
      const auto& spec = ctx.module(k).source();
      const FockOperator q = proj_first_index(ctx, k);
      EXPECT_LT(dist(op_rho(ctx, k, Matrix::Identity(spec.ambient_dim(), spec.ambient_dim())), q), 1e-9);
      for (std::uint64_t s = 0; s < 3; ++s) {
        const Matrix a = random_element(spec.algebra(), s);
        const FockOperator r = op_rho(ctx, k, a);
        EXPECT_LE(op_norm(dense(r)), op_norm(a) * (1 + 1e-12));
        EXPECT_LT(dist(q * r * q, r), 1e-12);
      }
      for (const Matrix& b : spec.subalgebra().basis())
        EXPECT_LT(dist(op_rho(ctx, k, b), op_left_b(ctx, b) * q), 1e-9);
    }
}

TEST(Lambda, UnitAndBaseElements) {
  for (const FockContext& ctx : sample_contexts()) {
    const int n = ctx.module(ctx.indices().front()).source().ambient_dim();
    for (int k : ctx.indices()) EXPECT_LT(dist(op_lambda(ctx, k, Matrix::Identity(n, n)), identity_op(ctx)), 1e-9);
    for (const Matrix& b : ctx.base().basis()) {
      const FockOperator first = op_lambda(ctx, ctx.indices().front(), b);
      for (int k : ctx.indices()) EXPECT_LT(dist(op_lambda(ctx, k, b), first), 1e-9);
      EXPECT_LT(dist(first, op_left_b(ctx, b)), 1e-9);
    }
  }
}

TEST(Lambda, EqualsCreationPlusDiagonalPlusAnnihilation) {
  for (const FockContext& ctx : sample_contexts())
    for (int k : ctx.indices()) {
      const GnsModule& mod = ctx.module(k);
      const auto& spec = mod.source();
      for (std::uint64_t s = 0; s < 3; ++s) {
        const Matrix a = center(spec, random_element(spec.algebra(), 40 + s)).matrix;
        const FockOperator sum = op_psi(ctx, k, mod.hat(a)) + op_rho(ctx, k, a) +
                                 adjoint(op_psi(ctx, k, mod.hat(a.adjoint())));
        const FockOperator lam = op_lambda(ctx, k, a);
        EXPECT_LT(dist(lam, sum), 1e-9 * (1 + op_norm(a)));
        EXPECT_LT(dist(lam * proj_level(ctx, 0), proj_level(ctx, 1) * op_psi(ctx, k, mod.hat(a)) * proj_level(ctx, 0)),
                  1e-9 * (1 + op_norm(a)));
      }
    }
}

TEST(Lambda, StarAndMultiplicativeBelowTop) {
  for (const FockContext& ctx : sample_contexts()) {
    const int M = ctx.max_level();
    for (int k : ctx.indices()) {
      const auto& spec = ctx.module(k).source();
      const Matrix a = random_element(spec.algebra(), 1);
      const Matrix b = random_element(spec.algebra(), 2);
      const FockOperator la = op_lambda(ctx, k, a);
      const FockOperator lb = op_lambda(ctx, k, b);
      EXPECT_LT(dist(adjoint(la), op_lambda(ctx, k, a.adjoint())), 1e-9 * op_norm(a));
      EXPECT_LT(restricted_dist(ctx, la * lb, op_lambda(ctx, k, a * b), M - 2), 1e-8 * op_norm(a) * op_norm(b));
      for (int r = 0; r <= M; ++r)
        for (int m = 0; m <= M; ++m)
          if (std::abs(r - m) > 1)
            EXPECT_LT(op_norm(dense(proj_level(ctx, r) * la * proj_level(ctx, m))), 1e-9 * op_norm(a));
    }
  }
}

TEST(Lambda, ScalarBaseOracle) {
  // Two-point letters u = diag(1, -1) with the uniform state: u is a centered
  // self-adjoint unitary, so lambda_u^i deletes a leading i and otherwise
  // prepends i, on the basis of alternating sequences.
  const FockContext ctx = build_fock_copies(two_point(), 0, 2, 3);
  const auto& labels = ctx.basis_index();
  std::map<std::vector<int>, int> where;
  for (std::size_t p = 0; p < labels.size(); ++p) where[labels[p].sequence] = static_cast<int>(p);
  for (int i : ctx.indices()) {
    Matrix oracle = Matrix::Zero(ctx.total_dim(), ctx.total_dim());
    for (const auto& [seq, col] : where) {
      std::vector<int> image;
      if (!seq.empty() && seq.front() == i) {
        image.assign(seq.begin() + 1, seq.end());
      } else {
        image.push_back(i);
        image.insert(image.end(), seq.begin(), seq.end());
      }
      if (static_cast<int>(image.size()) > ctx.max_level()) continue;
      oracle(where.at(image), col) = 1.0;
    }
    EXPECT_LT((dense(op_lambda(ctx, i, u2())) - oracle).norm(), 1e-12) << "index " << i;
  }
}

TEST(PhiState, Examples) {
  for (const FockContext& ctx : sample_contexts()) {
    const int nb = ctx.base().ambient_dim();
    EXPECT_LT((phi_state(ctx, identity_op(ctx)) - Matrix::Identity(nb, nb)).norm(), 1e-12);
    for (int k : ctx.indices()) {
      const auto& spec = ctx.module(k).source();
      const Matrix a = random_element(spec.algebra(), 5);
      EXPECT_LT((phi_state(ctx, op_lambda(ctx, k, a)) - spec.apply(a)).norm(), 1e-10 * (1 + op_norm(a)));
    }
    const std::vector<int>& idx = ctx.indices();
    for (int n = 1; n <= ctx.max_level(); ++n) {
      std::vector<int> seq;
      for (int j = 0; j < n; ++j) seq.push_back(idx[static_cast<std::size_t>(j % 2)]);
      const Word w = random_word(ctx, seq, 77 + n);
      EXPECT_LT(phi_state(ctx, word_operator(ctx, w)).norm(), 1e-10 * (1 + w.norm_product()));
    }
  }
}

TEST(Operators, ContextMismatch) {
  const FockContext a = build_fock_copies(two_point(), 0, 1, 1);
  const FockContext b = build_fock_copies(two_point(), 0, 1, 1);
  EXPECT_THROW(identity_op(a) + identity_op(b), DomainError);
  EXPECT_THROW(identity_op(a) * identity_op(b), DomainError);
  EXPECT_THROW(phi_state(a, identity_op(b)), DomainError);
}

TEST(Operators, CooExport) {
  const FockContext ctx = build_fock_copies(two_point(), 0, 1, 2);
  const FockOperator p = proj_level(ctx, 1);
  const nlohmann::json j = operator_to_coo(p);
  EXPECT_EQ(j["rows"], ctx.total_dim());
  EXPECT_EQ(j["entries"].size(), static_cast<std::size_t>(ctx.level_dim(1)));
  const nlohmann::json s = ctx.summary();
  EXPECT_TRUE(s.is_object());
}
