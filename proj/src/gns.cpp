#include "afp/gns.hpp"

#include <atomic>
#include <sstream>

#include "afp/errors.hpp"

namespace afp {

namespace {

int next_module_id() {
  static std::atomic<int> counter{0};
  return counter++;
}

/// Rotates each column so its first significant entry is real positive.
void fix_phases(Matrix& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    const double top = v.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      if (std::abs(v(r, c)) > 1e-8 * top) {
        v.col(c) *= std::conj(v(r, c)) / std::abs(v(r, c));
        break;
      }
    }
  }
}

}  // namespace

cplx normalized_trace(const Matrix& m) { return m.trace() / static_cast<double>(m.rows()); }

GnsModule::GnsModule(AlgebraWithExpectation source, std::uint64_t seed)
    : id_(next_module_id()), source_(std::move(source)) {
  const ValidationReport report = validate_expectation(source_, seed);
  if (!report.all_passed()) {
    std::ostringstream msg;
    msg << "invalid conditional expectation; failed checks:";
    for (const auto& c : report.checks)
      if (!c.passed) msg << ' ' << c.name << " (residual " << c.residual << ")";
    throw StructuralError(msg.str());
  }

  const auto& A = source_.algebra();
  const int d = A.dim();
  Matrix scalar_gram(d, d);
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q)
      scalar_gram(p, q) = normalized_trace(source_.apply(A.basis()[p].adjoint() * A.basis()[q]));
  scalar_gram = 0.5 * (scalar_gram + scalar_gram.adjoint()).eval();
  const int total_rank = static_cast<int>(positive_part(scalar_gram).eigenvalues.size());

  // B-summand: Loewdin-orthonormalized image of the B basis.
  const Matrix& inc = source_.inclusion();
  const Matrix kb = inc.adjoint() * scalar_gram * inc;
  const HermitianFactor fb = positive_part(0.5 * (kb + kb.adjoint()));
  if (fb.eigenvalues.size() != kb.rows())
    throw StructuralError("B does not embed injectively into L^2(A, phi)");
  const Matrix kb_inv_sqrt =
      fb.isometry * fb.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() * fb.isometry.adjoint();
  const Matrix unit_block = inc * kb_inv_sqrt;

  // E°: range of a -> a - phi(a) modulo the null space.
  const Matrix centering = Matrix::Identity(d, d) - inc * source_.expectation_matrix();
  const Matrix kc = centering.adjoint() * scalar_gram * centering;
  HermitianFactor fc = positive_part(0.5 * (kc + kc.adjoint()));
  fix_phases(fc.isometry);
  const Matrix centered_block =
      centering * fc.isometry * fc.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal();

  const int r = static_cast<int>(unit_block.cols() + centered_block.cols());
  if (r != total_rank)
    throw StructuralError("splitting B (+) E° does not exhaust the carrier (" + std::to_string(r) +
                          " vs rank " + std::to_string(total_rank) + ")");
  lift_coords_.resize(d, r);
  lift_coords_ << unit_block, centered_block;
  hat_ = lift_coords_.adjoint() * scalar_gram;
  for (int p = 0; p < r; ++p) lifts_.push_back(A.element(lift_coords_.col(p)));

  gram_.reserve(static_cast<std::size_t>(r) * r);
  for (int p = 0; p < r; ++p)
    for (int q = 0; q < r; ++q) gram_.push_back(source_.apply(lifts_[p].adjoint() * lifts_[q]));
}

ModuleVector GnsModule::hat(const Matrix& a) const {
  return {id_, hat_ * source_.algebra().coordinates(a)};
}

Matrix GnsModule::lift(const ModuleVector& x) const {
  if (x.module_id != id_) throw DomainError("module vector belongs to a different module");
  return source_.algebra().element(lift_coords_ * x.coords);
}

Matrix GnsModule::left_action(const Matrix& a) const {
  const int r = carrier_dim();
  Matrix out(r, r);
  for (int q = 0; q < r; ++q) out.col(q) = hat_ * source_.algebra().coordinates(a * lifts_[q]);
  return out;
}

ModuleVector GnsModule::right_action(const ModuleVector& x, const Matrix& b) const {
  if (!source_.subalgebra().contains(b)) throw DomainError("right action requires an element of B");
  return hat(lift(x) * b);
}

SplitProjections GnsModule::split_unit() const {
  const int r = carrier_dim();
  const int u = unit_dim();
  SplitProjections s;
  s.unit_part = Matrix::Zero(r, r);
  s.centered_part = Matrix::Zero(r, r);
  s.unit_part.topLeftCorner(u, u).setIdentity();
  s.centered_part.bottomRightCorner(r - u, r - u).setIdentity();
  return s;
}

Vector GnsModule::centered_coords(const ModuleVector& x) const {
  if (x.module_id != id_) throw DomainError("module vector belongs to a different module");
  return x.coords.tail(centered_dim());
}

Vector GnsModule::unit_coords(const ModuleVector& x) const {
  if (x.module_id != id_) throw DomainError("module vector belongs to a different module");
  return x.coords.head(unit_dim());
}

nlohmann::json GnsModule::to_json() const {
  nlohmann::json j;
  j["algebra"] = algebra_to_json(source_);
  j["carrier_dim"] = carrier_dim();
  j["unit_dim"] = unit_dim();
  j["centered_dim"] = centered_dim();
  j["null_dim"] = null_dim();
  j["carrier_basis"] = nlohmann::json::array();
  for (const auto& l : lifts_) j["carrier_basis"].push_back(matrix_to_json(l));
  j["gram"] = nlohmann::json::array();
  for (const auto& g : gram_) j["gram"].push_back(matrix_to_json(g));
  return j;
}

Matrix inner_product(const GnsModule& mod, const ModuleVector& x, const ModuleVector& y) {
  if (x.module_id != mod.id() || y.module_id != mod.id())
    throw DomainError("inner product of vectors from different modules");
  const int n = mod.source().ambient_dim();
  Matrix out = Matrix::Zero(n, n);
  for (int p = 0; p < mod.carrier_dim(); ++p) {
    if (x.coords(p) == cplx(0.0)) continue;
    for (int q = 0; q < mod.carrier_dim(); ++q)
      if (y.coords(q) != cplx(0.0)) out += std::conj(x.coords(p)) * y.coords(q) * mod.gram(p, q);
  }
  return out;
}

double module_norm(const GnsModule& mod, const ModuleVector& x) {
  return std::sqrt(op_norm(inner_product(mod, x, x)));
}

}  // namespace afp
