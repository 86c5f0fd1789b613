#include "afp/linalg.hpp"

#include <random>

namespace afp {

double op_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

int numerical_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > kRankTolerance * s(0)) ++rank;
  return rank;
}

Matrix matrix_unit(int n, int i, int j) {
  Matrix e = Matrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

Vector vectorize(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvectorize(const Vector& v, int n) {
  return Eigen::Map<const Matrix>(v.data(), n, n);
}

Matrix kron_identity(const Matrix& a, int d) {
  Matrix out = Matrix::Zero(a.rows() * d, a.cols() * d);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) == cplx(0.0)) continue;
      for (int t = 0; t < d; ++t) out(i * d + t, j * d + t) = a(i, j);
    }
  return out;
}

HermitianFactor positive_part(const Matrix& hermitian) {
  HermitianFactor f;
  const Eigen::Index n = hermitian.rows();
  if (n == 0) {
    f.isometry = Matrix::Zero(0, 0);
    f.eigenvalues = RealVector::Zero(0);
    return f;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian);
  const RealVector& ev = es.eigenvalues();
  const double top = std::max(ev.cwiseAbs().maxCoeff(), 0.0);
  std::vector<Eigen::Index> keep;
  // Eigen sorts ascending; keep the ordering descending for stable bases.
  for (Eigen::Index i = n - 1; i >= 0; --i)
    if (top > 0.0 && ev(i) > kRankTolerance * top) keep.push_back(i);
  f.isometry.resize(n, static_cast<Eigen::Index>(keep.size()));
  f.eigenvalues.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    f.isometry.col(k) = es.eigenvectors().col(keep[k]);
    f.eigenvalues(k) = ev(keep[k]);
  }
  return f;
}

Vector random_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v(i) = cplx(re, im);
  }
  return v;
}

SparseMatrix to_sparse(const Matrix& dense, double drop) {
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < dense.rows(); ++i)
    for (Eigen::Index j = 0; j < dense.cols(); ++j)
      if (std::abs(dense(i, j)) > drop)
        t.emplace_back(static_cast<int>(i), static_cast<int>(j), dense(i, j));
  SparseMatrix s(dense.rows(), dense.cols());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

}  // namespace afp
