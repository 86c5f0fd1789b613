#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace afp {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor, int>;
using Triplet = Eigen::Triplet<cplx, int>;

/// Singular values below this fraction of the largest one count as zero.
inline constexpr double kRankTolerance = 1e-10;
/// Relative residual allowed when re-expanding a matrix in a basis.
inline constexpr double kSpanTolerance = 1e-9;
inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

/// Largest singular value of a dense matrix (0 for empty matrices).
double op_norm(const Matrix& m);

/// Number of singular values above kRankTolerance * the largest.
int numerical_rank(const Matrix& m);

/// Matrix unit e_{ij} of size n.
Matrix matrix_unit(int n, int i, int j);

/// Column-stacked vectorization of a square matrix.
Vector vectorize(const Matrix& m);
Matrix unvectorize(const Vector& v, int n);

/// A ⊗ I_d with A acting on the leading tensor factor.
Matrix kron_identity(const Matrix& a, int d);

/// Hermitian inverse square root and square root restricted to the
/// eigenvalues above the rank tolerance; used to orthonormalize Gram data.
struct HermitianFactor {
  Matrix isometry;        // columns: eigenvectors with nonzero eigenvalue
  RealVector eigenvalues; // the retained eigenvalues
};
HermitianFactor positive_part(const Matrix& hermitian);

Vector random_vector(int n, std::uint64_t seed);

SparseMatrix to_sparse(const Matrix& dense, double drop = 0.0);

}  // namespace afp
