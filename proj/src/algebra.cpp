#include "afp/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "afp/errors.hpp"

namespace afp {

namespace {

double rel(double residual, double scale) { return residual / std::max(1.0, scale); }

}  // namespace

// ---------------------------------------------------------------------------
// MatrixStarAlgebra

MatrixStarAlgebra::MatrixStarAlgebra(int ambient_dim, std::vector<Matrix> basis)
    : ambient_dim_(ambient_dim), basis_(std::move(basis)) {
  if (ambient_dim_ <= 0) throw ConfigurationError("ambient dimension must be positive");
  if (basis_.empty()) throw ConfigurationError("algebra basis is empty");
  const int n = ambient_dim_;
  const int d = dim();
  stacked_.resize(static_cast<Eigen::Index>(n) * n, d);
  for (int p = 0; p < d; ++p) {
    if (basis_[p].rows() != n || basis_[p].cols() != n)
      throw ConfigurationError("basis element " + std::to_string(p) + " is not " +
                               std::to_string(n) + "x" + std::to_string(n));
    stacked_.col(p) = vectorize(basis_[p]);
  }
  if (numerical_rank(stacked_) < d)
    throw StructuralError("algebra basis is linearly dependent");

  const Matrix gram = stacked_.adjoint() * stacked_;
  solver_ = gram.ldlt().solve(stacked_.adjoint());

  for (int p = 0; p < d; ++p) {
    if (!contains(basis_[p].adjoint()))
      throw StructuralError("span not closed under adjoint (basis element " + std::to_string(p) + ")");
    for (int q = 0; q < d; ++q)
      if (!contains(basis_[p] * basis_[q]))
        throw StructuralError("span not closed under product (basis elements " +
                              std::to_string(p) + ", " + std::to_string(q) + ")");
  }
  auto unit = try_coordinates(Matrix::Identity(n, n));
  if (!unit) throw StructuralError("identity matrix is not in the span");
  unit_coords_ = *unit;
}

MatrixStarAlgebra MatrixStarAlgebra::generated_by(int ambient_dim, const std::vector<Matrix>& generators) {
  if (ambient_dim <= 0) throw ConfigurationError("ambient dimension must be positive");
  const int n = ambient_dim;
  std::vector<Matrix> basis;
  Matrix q(static_cast<Eigen::Index>(n) * n, 0);

  auto try_add = [&](const Matrix& m) {
    if (m.rows() != n || m.cols() != n) throw ConfigurationError("generator has wrong shape");
    const Vector v = vectorize(m);
    const double norm = v.norm();
    if (norm == 0.0) return false;
    Vector r = v;
    if (q.cols() > 0) r -= q * (q.adjoint() * v);
    if (q.cols() > 0) r -= q * (q.adjoint() * r);  // second pass for stability
    if (r.norm() <= kRankTolerance * 1e2 * norm) return false;
    q.conservativeResize(Eigen::NoChange, q.cols() + 1);
    q.col(q.cols() - 1) = r / r.norm();
    basis.push_back(m);
    return true;
  };

  try_add(Matrix::Identity(n, n));
  for (const auto& g : generators) {
    try_add(g);
    try_add(g.adjoint());
  }
  bool grew = true;
  while (grew) {
    grew = false;
    const std::size_t current = basis.size();
    for (std::size_t p = 0; p < current; ++p)
      for (std::size_t r = 0; r < current; ++r)
        if (try_add(basis[p] * basis[r])) grew = true;
  }
  return MatrixStarAlgebra(n, std::move(basis));
}

std::optional<Vector> MatrixStarAlgebra::try_coordinates(const Matrix& x) const {
  if (x.rows() != ambient_dim_ || x.cols() != ambient_dim_) return std::nullopt;
  const Vector v = vectorize(x);
  Vector c = solver_ * v;
  const double residual = (stacked_ * c - v).norm();
  if (residual > kSpanTolerance * std::max(1.0, v.norm())) return std::nullopt;
  return c;
}

Vector MatrixStarAlgebra::coordinates(const Matrix& x) const {
  if (x.rows() != ambient_dim_ || x.cols() != ambient_dim_)
    throw ConfigurationError("element has wrong shape for this algebra");
  auto c = try_coordinates(x);
  if (!c) throw StructuralError("element lies outside the algebra span");
  return *c;
}

Matrix MatrixStarAlgebra::element(const Vector& coords) const {
  if (coords.size() != dim()) throw ConfigurationError("coordinate vector has wrong length");
  return unvectorize(stacked_ * coords, ambient_dim_);
}

// ---------------------------------------------------------------------------
// AlgebraWithExpectation

AlgebraWithExpectation::AlgebraWithExpectation(MatrixStarAlgebra algebra, MatrixStarAlgebra subalgebra,
                                               Matrix expectation, std::string name)
    : algebra_(std::move(algebra)),
      subalgebra_(std::move(subalgebra)),
      expectation_(std::move(expectation)),
      name_(std::move(name)) {
  if (algebra_.ambient_dim() != subalgebra_.ambient_dim())
    throw ConfigurationError("algebra and subalgebra live in different ambient dimensions");
  if (expectation_.rows() != subalgebra_.dim() || expectation_.cols() != algebra_.dim())
    throw ConfigurationError("expectation matrix must be dim(B) x dim(A) = " +
                             std::to_string(subalgebra_.dim()) + "x" + std::to_string(algebra_.dim()));
  inclusion_.resize(algebra_.dim(), subalgebra_.dim());
  for (int t = 0; t < subalgebra_.dim(); ++t) {
    auto c = algebra_.try_coordinates(subalgebra_.basis()[t]);
    if (!c) throw StructuralError("subalgebra basis element " + std::to_string(t) + " is not in A");
    inclusion_.col(t) = *c;
  }
}

Matrix AlgebraWithExpectation::apply(const Matrix& a) const {
  return subalgebra_.element(expectation_ * algebra_.coordinates(a));
}

Vector expectation_apply(const AlgebraWithExpectation& spec, const Matrix& a) {
  return spec.expectation_matrix() * spec.algebra().coordinates(a);
}

CenteredElement center(const AlgebraWithExpectation& spec, const Matrix& a, int owner) {
  const Vector coords = spec.algebra().coordinates(a);
  CenteredElement c;
  c.owner = owner;
  c.coords = coords - spec.inclusion() * (spec.expectation_matrix() * coords);
  c.matrix = spec.algebra().element(c.coords);
  return c;
}

CenteredElement as_centered(const AlgebraWithExpectation& spec, const Matrix& a, int owner) {
  const Matrix phi = spec.apply(a);
  if (op_norm(phi) > kSpanTolerance * std::max(1.0, op_norm(a)))
    throw DomainError("letter is not centered: ||phi(a)|| = " + std::to_string(op_norm(phi)));
  CenteredElement c;
  c.owner = owner;
  c.coords = spec.algebra().coordinates(a);
  c.matrix = a;
  return c;
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult& ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw DomainError("no check named " + name);
}

Matrix random_element(const MatrixStarAlgebra& algebra, std::uint64_t seed) {
  return algebra.element(random_vector(algebra.dim(), seed));
}

std::optional<Matrix> nondegeneracy_witness(const AlgebraWithExpectation& spec, const Matrix& a,
                                            std::uint64_t seed) {
  const auto& alg = spec.algebra();
  const double scale = op_norm(a);
  if (scale == 0.0) return std::nullopt;
  auto test = [&](const Matrix& x) {
    const Matrix y = a * x;
    const double xn = op_norm(x);
    if (xn == 0.0) return false;
    return op_norm(spec.apply(y.adjoint() * y)) > kRankTolerance * scale * scale * xn * xn;
  };
  for (const auto& x : alg.basis())
    if (test(x)) return x;
  for (int s = 0; s < kNondegeneracySamples; ++s) {
    Matrix x = random_element(alg, seed + 7919u * static_cast<std::uint64_t>(s + 1));
    if (test(x)) return x;
  }
  return std::nullopt;
}

ValidationReport validate_expectation(const AlgebraWithExpectation& spec, std::uint64_t seed) {
  constexpr double tol = 1e-9;
  const auto& A = spec.algebra();
  const auto& B = spec.subalgebra();
  const int n = A.ambient_dim();
  ValidationReport report;

  const Matrix one = Matrix::Identity(n, n);
  const double unit_res = op_norm(spec.apply(one) - one);
  report.checks.push_back({"unit_preservation", unit_res <= tol, unit_res});

  double idem = 0.0;
  for (const auto& b : B.basis()) idem = std::max(idem, rel(op_norm(spec.apply(b) - b), op_norm(b)));
  report.checks.push_back({"idempotence", idem <= tol, idem});

  double bimod = 0.0;
  for (const auto& b1 : B.basis())
    for (const auto& b2 : B.basis())
      for (const auto& a : A.basis()) {
        const double r = op_norm(spec.apply(b1 * a * b2) - b1 * spec.apply(a) * b2);
        bimod = std::max(bimod, rel(r, op_norm(b1) * op_norm(a) * op_norm(b2)));
      }
  report.checks.push_back({"bimodule", bimod <= tol, bimod});

  std::vector<Matrix> samples = A.basis();
  for (int s = 0; s < kPositivitySamples; ++s)
    samples.push_back(random_element(A, seed + 104729u * static_cast<std::uint64_t>(s + 1)));

  double pos = 0.0;
  double adj = 0.0;
  double contraction = 0.0;
  for (const auto& a : samples) {
    const double an = op_norm(a);
    const Matrix p = spec.apply(a.adjoint() * a);
    const Matrix herm = 0.5 * (p + p.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
    const double neg = std::max(0.0, -es.eigenvalues().minCoeff());
    pos = std::max(pos, rel(neg + op_norm(p - p.adjoint()), an * an));
    adj = std::max(adj, rel(op_norm(spec.apply(a).adjoint() - spec.apply(a.adjoint())), an));
    contraction = std::max(contraction, rel(std::max(0.0, op_norm(spec.apply(a)) - an), an));
  }
  report.checks.push_back({"positivity", pos <= tol, pos});
  report.checks.push_back({"adjoint_compatibility", adj <= tol, adj});
  report.checks.push_back({"contraction", contraction <= tol, contraction});

  // Residual is the number of tested elements without a witness.
  double missing = 0.0;
  std::vector<Matrix> nondeg = A.basis();
  for (int s = 0; s < kNondegeneracySamples; ++s)
    nondeg.push_back(random_element(A, seed + 15485863u * static_cast<std::uint64_t>(s + 1)));
  for (const auto& a : nondeg)
    if (!nondegeneracy_witness(spec, a, seed)) missing += 1.0;
  report.checks.push_back({"nondegeneracy", missing == 0.0, missing});

  return report;
}

// ---------------------------------------------------------------------------
// Presets

namespace presets {

namespace {
std::vector<Matrix> matrix_units(int n) {
  std::vector<Matrix> units;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) units.push_back(matrix_unit(n, i, j));
  return units;
}
std::vector<Matrix> diagonal_units(int n) {
  std::vector<Matrix> units;
  for (int i = 0; i < n; ++i) units.push_back(matrix_unit(n, i, i));
  return units;
}
void check_n(int n) {
  if (n <= 0) throw ConfigurationError("preset size n must be positive");
}
}  // namespace

AlgebraWithExpectation scalars_in_matn(int n) {
  check_n(n);
  Matrix e = Matrix::Zero(1, n * n);
  for (int i = 0; i < n; ++i) e(0, i * n + i) = 1.0 / n;
  return {MatrixStarAlgebra(n, matrix_units(n)), MatrixStarAlgebra(n, {Matrix::Identity(n, n)}), e,
          "scalars_in_matn"};
}

AlgebraWithExpectation diagonal_in_matn(int n) {
  check_n(n);
  Matrix e = Matrix::Zero(n, n * n);
  for (int i = 0; i < n; ++i) e(i, i * n + i) = 1.0;
  return {MatrixStarAlgebra(n, matrix_units(n)), MatrixStarAlgebra(n, diagonal_units(n)), e,
          "diagonal_in_matn"};
}

AlgebraWithExpectation function_algebra_with_state(const std::vector<double>& weights) {
  const int n = static_cast<int>(weights.size());
  check_n(n);
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ConfigurationError("state weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigurationError("state weights must sum to 1");
  Matrix e = Matrix::Zero(1, n);
  for (int i = 0; i < n; ++i) e(0, i) = weights[i];
  return {MatrixStarAlgebra(n, diagonal_units(n)), MatrixStarAlgebra(n, {Matrix::Identity(n, n)}), e,
          "function_algebra_with_state"};
}

AlgebraWithExpectation vector_state_in_matn(int n) {
  check_n(n);
  Matrix e = Matrix::Zero(1, n * n);
  e(0, 0) = 1.0;
  return {MatrixStarAlgebra(n, matrix_units(n)), MatrixStarAlgebra(n, {Matrix::Identity(n, n)}), e,
          "vector_state_in_matn"};
}

}  // namespace presets

std::vector<std::string> algebra_preset_names() {
  return {"scalars_in_matn", "diagonal_in_matn", "function_algebra_with_state", "vector_state_in_matn"};
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json complex_to_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

cplx complex_from_json(const nlohmann::json& j, const std::string& pointer) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw ParseError("expected a number or a [re, im] pair", pointer);
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(complex_to_json(m(i, j)));
  return out;
}

Matrix matrix_from_json(const nlohmann::json& j, int n, const std::string& pointer) {
  if (!j.is_array()) throw ParseError("expected a matrix", pointer);
  Matrix m(n, n);
  // Nested rows have n entries, the flat form n^2; only n = 1 needs a peek.
  const bool nested = n > 1 ? j.size() == static_cast<std::size_t>(n)
                            : (j.size() == 1 && j[0].is_array() && j[0].size() == 1);
  if (nested) {
    for (int r = 0; r < n; ++r) {
      if (!j[r].is_array() || j[r].size() != static_cast<std::size_t>(n))
        throw ParseError("matrix row has wrong length", pointer + "/" + std::to_string(r));
      for (int c = 0; c < n; ++c)
        m(r, c) = complex_from_json(j[r][c], pointer + "/" + std::to_string(r) + "/" + std::to_string(c));
    }
    return m;
  }
  if (j.size() != static_cast<std::size_t>(n) * n)
    throw ParseError("matrix needs " + std::to_string(n * n) + " row-major entries", pointer);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      m(r, c) = complex_from_json(j[r * n + c], pointer + "/" + std::to_string(r * n + c));
  return m;
}

namespace {

const nlohmann::json& require(const nlohmann::json& j, const std::string& key, const std::string& pointer) {
  if (!j.is_object()) throw ParseError("expected an object", pointer);
  auto it = j.find(key);
  if (it == j.end()) throw ParseError("missing required key '" + key + "'", pointer + "/" + key);
  return *it;
}

std::vector<Matrix> matrices_from_json(const nlohmann::json& j, int n, const std::string& pointer) {
  if (!j.is_array() || j.empty()) throw ParseError("expected a nonempty list of matrices", pointer);
  std::vector<Matrix> out;
  for (std::size_t p = 0; p < j.size(); ++p)
    out.push_back(matrix_from_json(j[p], n, pointer + "/" + std::to_string(p)));
  return out;
}

int int_from_json(const nlohmann::json& j, const std::string& pointer) {
  if (!j.is_number_integer()) throw ParseError("expected an integer", pointer);
  return j.get<int>();
}

}  // namespace

AlgebraWithExpectation algebra_from_json(const nlohmann::json& j, const std::string& pointer) {
  if (!j.is_object()) throw ParseError("algebra specification must be an object", pointer);
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) throw ParseError("preset must be a string", pointer + "/preset");
    const std::string name = j["preset"].get<std::string>();
    const int n = j.contains("n") ? int_from_json(j["n"], pointer + "/n") : 2;
    if (name == "scalars_in_matn") return presets::scalars_in_matn(n);
    if (name == "diagonal_in_matn") return presets::diagonal_in_matn(n);
    if (name == "vector_state_in_matn") return presets::vector_state_in_matn(n);
    if (name == "function_algebra_with_state") {
      std::vector<double> w;
      if (j.contains("weights")) {
        const auto& jw = j["weights"];
        if (!jw.is_array()) throw ParseError("weights must be a list", pointer + "/weights");
        for (std::size_t i = 0; i < jw.size(); ++i) {
          if (!jw[i].is_number()) throw ParseError("weight must be a number", pointer + "/weights/" + std::to_string(i));
          w.push_back(jw[i].get<double>());
        }
      } else {
        w.assign(static_cast<std::size_t>(n), 1.0 / n);
      }
      return presets::function_algebra_with_state(w);
    }
    throw ParseError("unknown algebra preset '" + name + "'", pointer + "/preset");
  }

  const int n = int_from_json(require(j, "ambient_dim", pointer), pointer + "/ambient_dim");
  if (n <= 0) throw ParseError("ambient_dim must be positive", pointer + "/ambient_dim");

  auto build = [&](const std::string& basis_key, const std::string& gen_key) {
    if (j.contains(basis_key))
      return MatrixStarAlgebra(n, matrices_from_json(j[basis_key], n, pointer + "/" + basis_key));
    if (j.contains(gen_key))
      return MatrixStarAlgebra::generated_by(n, matrices_from_json(j[gen_key], n, pointer + "/" + gen_key));
    throw ParseError("missing required key '" + basis_key + "'", pointer + "/" + basis_key);
  };
  MatrixStarAlgebra algebra = build("algebra_basis", "algebra_generators");
  MatrixStarAlgebra subalgebra = build("subalgebra_basis", "subalgebra_generators");

  const auto& je = require(j, "expectation_matrix", pointer);
  const std::string ep = pointer + "/expectation_matrix";
  if (!je.is_array() || je.size() != static_cast<std::size_t>(subalgebra.dim()))
    throw ParseError("expectation_matrix must have dim(B) = " + std::to_string(subalgebra.dim()) + " rows", ep);
  Matrix e(subalgebra.dim(), algebra.dim());
  for (int r = 0; r < subalgebra.dim(); ++r) {
    const std::string rp = ep + "/" + std::to_string(r);
    if (!je[r].is_array() || je[r].size() != static_cast<std::size_t>(algebra.dim()))
      throw ParseError("expectation row must have dim(A) = " + std::to_string(algebra.dim()) + " entries", rp);
    for (int c = 0; c < algebra.dim(); ++c) e(r, c) = complex_from_json(je[r][c], rp + "/" + std::to_string(c));
  }
  std::string name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "custom";
  return {std::move(algebra), std::move(subalgebra), std::move(e), std::move(name)};
}

nlohmann::json algebra_to_json(const AlgebraWithExpectation& spec) {
  nlohmann::json j;
  j["name"] = spec.name();
  j["ambient_dim"] = spec.ambient_dim();
  j["algebra_basis"] = nlohmann::json::array();
  for (const auto& b : spec.algebra().basis()) j["algebra_basis"].push_back(matrix_to_json(b));
  j["subalgebra_basis"] = nlohmann::json::array();
  for (const auto& b : spec.subalgebra().basis()) j["subalgebra_basis"].push_back(matrix_to_json(b));
  nlohmann::json rows = nlohmann::json::array();
  const Matrix& e = spec.expectation_matrix();
  for (Eigen::Index r = 0; r < e.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < e.cols(); ++c) row.push_back(complex_to_json(e(r, c)));
    rows.push_back(row);
  }
  j["expectation_matrix"] = rows;
  return j;
}

}  // namespace afp
