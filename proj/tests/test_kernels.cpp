#include <gtest/gtest.h>
#include <omp.h>

#include <random>

#include "afp/kernels.hpp"

using namespace afp;
using namespace afp::kernels;

namespace {

SparseMatrix random_sparse(int rows, int cols, double density, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Triplet> t;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (u(gen) < density) t.emplace_back(r, c, cplx(g(gen), g(gen)));
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

double dense_sigma(const SparseMatrix& m) {
  Eigen::BDCSVD<Matrix> svd{Matrix(m)};
  return svd.singularValues()(0);
}

}  // namespace

TEST(Kernels, SpmvMatchesEigen) {
  const SparseMatrix a = random_sparse(300, 200, 0.05, 1);
  const Vector x = random_vector(200, 2);
  Vector ys(300), yo(300);
  serial::spmv(csr(a), {x.data(), 200}, {ys.data(), 300});
  omp::spmv(csr(a), {x.data(), 200}, {yo.data(), 300});
  const Vector ref = a * x;
  EXPECT_LT((ys - ref).norm(), 1e-12 * ref.norm());
  EXPECT_EQ(ys, yo);
}

TEST(Kernels, Norm2AgreesAcrossVariants) {
  const Vector x = random_vector(3 * kReductionChunk + 17, 5);
  const double s = serial::norm2({x.data(), static_cast<std::size_t>(x.size())});
  const double o = omp::norm2({x.data(), static_cast<std::size_t>(x.size())});
  EXPECT_NEAR(s, x.norm(), 1e-12 * x.norm());
  EXPECT_NEAR(o, s, 1e-12 * s);
}

TEST(Kernels, OmpResultIndependentOfThreadCount) {
  const SparseMatrix a = random_sparse(2500, 2500, 0.002, 9);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const SigmaEstimate one = omp::power_sigma_max(a, 3);
  omp_set_num_threads(4);
  const SigmaEstimate four = omp::power_sigma_max(a, 3);
  omp_set_num_threads(saved);
  EXPECT_EQ(one.sigma, four.sigma);
  EXPECT_EQ(one.iterations, four.iterations);
  EXPECT_EQ(one.right_vector, four.right_vector);
}

TEST(Kernels, PowerIterationSerialAndOmpAgree) {
  const SparseMatrix a = random_sparse(150, 120, 0.1, 4);
  const SigmaEstimate s = serial::power_sigma_max(a, 11);
  const SigmaEstimate o = omp::power_sigma_max(a, 11);
  EXPECT_NEAR(s.sigma, o.sigma, 1e-10 * s.sigma);
  EXPECT_LE(s.sigma, dense_sigma(a) * (1 + 1e-12));
  EXPECT_NEAR(s.sigma, dense_sigma(a), 1e-6 * dense_sigma(a));
}

TEST(Kernels, DenseSigmaMatchesSvd) {
  const SparseMatrix a = random_sparse(80, 60, 0.2, 6);
  const SigmaEstimate est = sigma_max(a);
  EXPECT_TRUE(est.dense);
  EXPECT_NEAR(est.sigma, dense_sigma(a), 1e-10 * dense_sigma(a));
  EXPECT_NEAR(sigma_max_value(a), est.sigma, 1e-10 * est.sigma);
  EXPECT_NEAR((a * est.right_vector).norm(), est.sigma, 1e-9 * est.sigma);
}

TEST(Kernels, BlockDiagonalDomainHandledPerComponent) {
  // Two decoupled column groups; the larger singular value sits in the
  // second group, and a large third group forces the iterative vector path.
  std::vector<Triplet> t;
  t.emplace_back(0, 0, 1.0);
  t.emplace_back(1, 1, 5.0);
  t.emplace_back(2, 1, cplx(0.0, 1.0));
  for (int i = 0; i < 400; ++i) t.emplace_back(3 + i, 2 + i, 2.0 + 0.001 * i);
  for (int i = 0; i + 1 < 400; ++i) t.emplace_back(3 + i, 3 + i, 0.5);
  SparseMatrix a(403, 402);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  const SigmaEstimate est = sigma_max(a);
  EXPECT_NEAR(est.sigma, dense_sigma(a), 1e-10 * dense_sigma(a));
  EXPECT_NEAR(sigma_max_value(a), dense_sigma(a), 1e-10 * dense_sigma(a));
}

TEST(Kernels, LargeDomainUsesPowerIteration) {
  const int n = kDenseDomainLimit + 1;
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) t.emplace_back(i, i, i == 17 ? 3.0 : 1.0 + 0.5 * i / n);
  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  const SigmaEstimate est = sigma_max(a);
  EXPECT_FALSE(est.dense);
  EXPECT_LE(est.sigma, 3.0 * (1 + 1e-12));
  EXPECT_NEAR(est.sigma, 3.0, 1e-9);
}

TEST(Kernels, EmptyDomain) {
  SparseMatrix a(5, 0);
  EXPECT_EQ(sigma_max(a).sigma, 0.0);
  EXPECT_EQ(sigma_max_value(a), 0.0);
}
