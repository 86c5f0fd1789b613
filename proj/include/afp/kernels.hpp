#pragma once

// Sparse operator kernels. The omp:: variants are what the library calls;
// serial:: is the reference they are tested against and benchmarked with.
// Both produce results independent of the thread count: rows are owned by
// one thread each and reductions use a fixed chunking.

#include <cstdint>
#include <span>

#include "afp/linalg.hpp"

namespace afp::kernels {

struct CsrView {
  int rows = 0;
  int cols = 0;
  std::span<const int> outer;
  std::span<const int> inner;
  std::span<const cplx> values;
};

/// View of a compressed row-major sparse matrix.
CsrView csr(const SparseMatrix& m);

inline constexpr int kPowerMaxIterations = 300;
inline constexpr double kPowerRelativeTolerance = 1e-12;
/// Domains up to this dimension use a full Hermitian eigendecomposition.
inline constexpr int kDenseDomainLimit = 2000;
inline constexpr int kReductionChunk = 4096;

struct SigmaEstimate {
  /// ||A v|| for the unit vector v below; never exceeds the true norm.
  double sigma = 0.0;
  Vector right_vector;
  int iterations = 0;
  bool converged = false;
  bool dense = false;
};

namespace serial {
void spmv(const CsrView& a, std::span<const cplx> x, std::span<cplx> y);
double norm2(std::span<const cplx> x);
SigmaEstimate power_sigma_max(const SparseMatrix& a, std::uint64_t seed,
                              int max_iterations = kPowerMaxIterations,
                              double tolerance = kPowerRelativeTolerance);
}  // namespace serial

namespace omp {
void spmv(const CsrView& a, std::span<const cplx> x, std::span<cplx> y);
double norm2(std::span<const cplx> x);
SigmaEstimate power_sigma_max(const SparseMatrix& a, std::uint64_t seed,
                              int max_iterations = kPowerMaxIterations,
                              double tolerance = kPowerRelativeTolerance);
}  // namespace omp

/// Dense eigendecomposition of A*A when A has at most kDenseDomainLimit
/// columns, otherwise omp::power_sigma_max.
SigmaEstimate sigma_max(const SparseMatrix& a, std::uint64_t seed = kDefaultSeed);
/// Same value without the singular vector; the dense path skips the
/// eigenvectors.
double sigma_max_value(const SparseMatrix& a, std::uint64_t seed = kDefaultSeed);

/// ||A v|| for a given v, through the omp kernel.
double apply_norm(const SparseMatrix& a, const Vector& v);

}  // namespace afp::kernels
