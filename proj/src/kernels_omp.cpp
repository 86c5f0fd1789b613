#include <omp.h>

#include <cmath>
#include <vector>

#include "afp/kernels.hpp"
#include "afp/linalg.hpp"

namespace afp::kernels {
namespace omp {

void spmv(const CsrView& a, std::span<const cplx> x, std::span<cplx> y) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < a.rows; ++r) {
    cplx acc = 0.0;
    for (int p = a.outer[r]; p < a.outer[r + 1]; ++p) acc += a.values[p] * x[a.inner[p]];
    y[r] = acc;
  }
}

double norm2(std::span<const cplx> x) {
  const auto n = static_cast<long>(x.size());
  const long chunks = (n + kReductionChunk - 1) / kReductionChunk;
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
#pragma omp parallel for schedule(static)
  for (long c = 0; c < chunks; ++c) {
    const long lo = c * kReductionChunk;
    const long hi = std::min(n, lo + kReductionChunk);
    double acc = 0.0;
    for (long i = lo; i < hi; ++i) acc += std::norm(x[static_cast<std::size_t>(i)]);
    partial[static_cast<std::size_t>(c)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return std::sqrt(total);
}

namespace {
void scale_into(const Vector& src, double factor, Vector& dst) {
  const auto n = static_cast<long>(src.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) dst(i) = src(i) * factor;
}
std::span<const cplx> cspan(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<cplx> mspan(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
}  // namespace

SigmaEstimate power_sigma_max(const SparseMatrix& a_in, std::uint64_t seed,
                              int max_iterations, double tolerance) {
  SparseMatrix a = a_in;
  a.makeCompressed();
  SparseMatrix adj = a.adjoint();
  adj.makeCompressed();
  const CsrView av = csr(a);
  const CsrView hv = csr(adj);

  SigmaEstimate out;
  Vector v = random_vector(av.cols, seed);
  if (av.cols == 0 || a.nonZeros() == 0) {
    out.right_vector = Vector::Zero(av.cols);
    if (av.cols > 0) out.right_vector(0) = 1.0;
    out.converged = true;
    return out;
  }
  scale_into(v, 1.0 / norm2(cspan(v)), v);
  Vector u(av.rows);
  Vector w(av.cols);
  double previous = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    spmv(av, cspan(v), mspan(u));
    const double sigma = norm2(cspan(u));
    spmv(hv, cspan(u), mspan(w));
    const double wn = norm2(cspan(w));
    out.iterations = it + 1;
    if (wn == 0.0) break;
    scale_into(w, 1.0 / wn, v);
    if (it > 0 && std::abs(sigma - previous) <= tolerance * sigma) {
      out.converged = true;
      break;
    }
    previous = sigma;
  }
  spmv(av, cspan(v), mspan(u));
  out.sigma = norm2(cspan(u));
  out.right_vector = v;
  return out;
}

}  // namespace omp

double apply_norm(const SparseMatrix& a_in, const Vector& v) {
  SparseMatrix a = a_in;
  a.makeCompressed();
  Vector u(a.rows());
  omp::spmv(csr(a), omp::cspan(v), omp::mspan(u));
  return omp::norm2(omp::cspan(u));
}

namespace {

constexpr Eigen::Index kDenseVectorLimit = 256;

// Connected components of the sparsity graph of a (column-major) Hermitian
// matrix, each as a sorted index list.
std::vector<std::vector<int>> components(const Eigen::SparseMatrix<cplx>& g) {
  const int n = static_cast<int>(g.cols());
  std::vector<int> parent(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
  auto find = [&](int i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
      i = parent[static_cast<std::size_t>(i)];
    }
    return i;
  };
  for (int c = 0; c < n; ++c)
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(g, c); it; ++it) {
      const int a = find(static_cast<int>(it.row()));
      const int b = find(c);
      if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<int>> out;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (label[static_cast<std::size_t>(r)] < 0) {
      label[static_cast<std::size_t>(r)] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[static_cast<std::size_t>(label[static_cast<std::size_t>(r)])].push_back(i);
  }
  return out;
}

Matrix restrict_dense(const Eigen::SparseMatrix<cplx>& g, const std::vector<int>& idx) {
  std::vector<int> pos(static_cast<std::size_t>(g.cols()), -1);
  for (std::size_t k = 0; k < idx.size(); ++k) pos[static_cast<std::size_t>(idx[k])] = static_cast<int>(k);
  const auto d = static_cast<Eigen::Index>(idx.size());
  Matrix out = Matrix::Zero(d, d);
  for (std::size_t k = 0; k < idx.size(); ++k)
    for (Eigen::SparseMatrix<cplx>::InnerIterator it(g, idx[k]); it; ++it)
      out(pos[static_cast<std::size_t>(it.row())], static_cast<Eigen::Index>(k)) = it.value();
  return out;
}

struct TopEigen {
  double value = -1.0;
  std::vector<int> support;
  Vector vector;
};

// Largest eigenvalue of A*A, one dense decomposition per connected block.
TopEigen top_eigen(const SparseMatrix& a, bool want_vector, std::uint64_t seed) {
  const Eigen::SparseMatrix<cplx> gram = Eigen::SparseMatrix<cplx>(a.adjoint() * a);
  TopEigen best;
  for (const auto& comp : components(gram)) {
    const Matrix g = restrict_dense(gram, comp);
    const bool vectors = want_vector && g.cols() <= kDenseVectorLimit;
    Eigen::SelfAdjointEigenSolver<Matrix> es(g, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues()(g.cols() - 1);
    if (top > best.value) {
      best.value = top;
      best.support = comp;
      best.vector = vectors ? Vector(es.eigenvectors().col(g.cols() - 1)) : Vector();
    }
  }
  best.value = std::max(0.0, best.value);
  if (want_vector && best.vector.size() == 0) {
    // Large block: the value is exact, the vector comes from iterating the
    // sparse Gram matrix on that block.
    Vector v = Vector::Zero(gram.cols());
    const Vector start = random_vector(static_cast<int>(best.support.size()), seed);
    for (std::size_t k = 0; k < best.support.size(); ++k) v(best.support[k]) = start(static_cast<Eigen::Index>(k));
    v.normalize();
    for (int it = 0; it < kPowerMaxIterations; ++it) {
      Vector w = gram * v;
      const double rq = v.dot(w).real();
      const double nw = w.norm();
      if (nw == 0.0) break;
      v = w / nw;
      if (std::abs(best.value - rq) <= kPowerRelativeTolerance * best.value) break;
    }
    best.vector.resize(static_cast<Eigen::Index>(best.support.size()));
    for (std::size_t k = 0; k < best.support.size(); ++k) best.vector(static_cast<Eigen::Index>(k)) = v(best.support[k]);
  }
  return best;
}

}  // namespace

SigmaEstimate sigma_max(const SparseMatrix& a, std::uint64_t seed) {
  if (a.cols() > kDenseDomainLimit) return omp::power_sigma_max(a, seed);
  SigmaEstimate out;
  out.dense = true;
  out.converged = true;
  out.right_vector = Vector::Zero(a.cols());
  if (a.cols() == 0) return out;
  const TopEigen top = top_eigen(a, true, seed);
  for (std::size_t k = 0; k < top.support.size(); ++k)
    out.right_vector(top.support[k]) = top.vector(static_cast<Eigen::Index>(k));
  out.right_vector.normalize();
  out.sigma = std::max(std::sqrt(top.value), apply_norm(a, out.right_vector));
  return out;
}

double sigma_max_value(const SparseMatrix& a, std::uint64_t seed) {
  if (a.cols() > kDenseDomainLimit) return omp::power_sigma_max(a, seed).sigma;
  if (a.cols() == 0) return 0.0;
  return std::sqrt(top_eigen(a, false, seed).value);
}

}  // namespace afp::kernels
