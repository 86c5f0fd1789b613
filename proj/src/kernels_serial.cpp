#include <cmath>

#include "afp/kernels.hpp"

namespace afp::kernels {

CsrView csr(const SparseMatrix& m) {
  CsrView v;
  v.rows = static_cast<int>(m.rows());
  v.cols = static_cast<int>(m.cols());
  v.outer = {m.outerIndexPtr(), static_cast<std::size_t>(m.rows() + 1)};
  v.inner = {m.innerIndexPtr(), static_cast<std::size_t>(m.nonZeros())};
  v.values = {m.valuePtr(), static_cast<std::size_t>(m.nonZeros())};
  return v;
}

namespace serial {

void spmv(const CsrView& a, std::span<const cplx> x, std::span<cplx> y) {
  for (int r = 0; r < a.rows; ++r) {
    cplx acc = 0.0;
    for (int p = a.outer[r]; p < a.outer[r + 1]; ++p) acc += a.values[p] * x[a.inner[p]];
    y[r] = acc;
  }
}

double norm2(std::span<const cplx> x) {
  double acc = 0.0;
  for (const cplx& z : x) acc += std::norm(z);
  return std::sqrt(acc);
}

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
  v /= norm2({v.data(), static_cast<std::size_t>(v.size())});
  Vector u(av.rows);
  Vector w(av.cols);
  double previous = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    spmv(av, {v.data(), static_cast<std::size_t>(v.size())}, {u.data(), static_cast<std::size_t>(u.size())});
    const double sigma = norm2({u.data(), static_cast<std::size_t>(u.size())});
    spmv(hv, {u.data(), static_cast<std::size_t>(u.size())}, {w.data(), static_cast<std::size_t>(w.size())});
    const double wn = norm2({w.data(), static_cast<std::size_t>(w.size())});
    out.iterations = it + 1;
    if (wn == 0.0) break;
    v = w / wn;
    if (it > 0 && std::abs(sigma - previous) <= tolerance * sigma) {
      out.converged = true;
      break;
    }
    previous = sigma;
  }
  spmv(av, {v.data(), static_cast<std::size_t>(v.size())}, {u.data(), static_cast<std::size_t>(u.size())});
  out.sigma = norm2({u.data(), static_cast<std::size_t>(u.size())});
  out.right_vector = v;
  return out;
}

}  // namespace serial
}  // namespace afp::kernels
