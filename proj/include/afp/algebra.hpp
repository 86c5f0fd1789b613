#pragma once

// Finite-dimensional C*-algebras realized as concrete matrix *-algebras,
// together with a distinguished unital subalgebra B and a conditional
// expectation onto it.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "afp/linalg.hpp"

namespace afp {

class MatrixStarAlgebra {
 public:
  /// Validates linear independence, closure under product and adjoint, and
  /// that the identity lies in the span. Throws StructuralError.
  MatrixStarAlgebra(int ambient_dim, std::vector<Matrix> basis);

  /// Smallest *-algebra containing the generators and the identity.
  static MatrixStarAlgebra generated_by(int ambient_dim, const std::vector<Matrix>& generators);

  int ambient_dim() const { return ambient_dim_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  const std::vector<Matrix>& basis() const { return basis_; }
  const Vector& unit_coords() const { return unit_coords_; }

  std::optional<Vector> try_coordinates(const Matrix& x) const;
  /// Coordinates of x in the basis; StructuralError if x is outside the span.
  Vector coordinates(const Matrix& x) const;
  Matrix element(const Vector& coords) const;
  bool contains(const Matrix& x) const { return try_coordinates(x).has_value(); }

 private:
  int ambient_dim_;
  std::vector<Matrix> basis_;
  Matrix stacked_;  // n^2 x d, columns are vectorized basis elements
  Matrix solver_;   // d x n^2 left inverse of stacked_
  Vector unit_coords_;
};

class AlgebraWithExpectation {
 public:
  /// `expectation` maps A-coordinates to B-coordinates (dim B x dim A).
  /// ConfigurationError on dimension mismatch, StructuralError if B is not
  /// contained in A.
  AlgebraWithExpectation(MatrixStarAlgebra algebra, MatrixStarAlgebra subalgebra,
                         Matrix expectation, std::string name = {});

  const MatrixStarAlgebra& algebra() const { return algebra_; }
  const MatrixStarAlgebra& subalgebra() const { return subalgebra_; }
  const Matrix& expectation_matrix() const { return expectation_; }
  /// dim A x dim B matrix sending B-coordinates to A-coordinates.
  const Matrix& inclusion() const { return inclusion_; }
  const std::string& name() const { return name_; }
  int ambient_dim() const { return algebra_.ambient_dim(); }

  /// phi(a) as an ambient matrix.
  Matrix apply(const Matrix& a) const;

 private:
  MatrixStarAlgebra algebra_;
  MatrixStarAlgebra subalgebra_;
  Matrix expectation_;
  Matrix inclusion_;
  std::string name_;
};

/// phi(a) in B-coordinates. StructuralError if a is outside A.
Vector expectation_apply(const AlgebraWithExpectation& spec, const Matrix& a);

struct CenteredElement {
  int owner = 0;
  Vector coords;  // coordinates in the owning algebra's basis
  Matrix matrix;
};

/// a - phi(a), tagged with the owning copy index.
CenteredElement center(const AlgebraWithExpectation& spec, const Matrix& a, int owner = 0);

/// Wraps an element that must already satisfy phi(a) = 0; DomainError otherwise.
CenteredElement as_centered(const AlgebraWithExpectation& spec, const Matrix& a, int owner = 0);

struct CheckResult {
  std::string name;
  bool passed = false;
  double residual = 0.0;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
  const CheckResult& find(const std::string& name) const;
};

inline constexpr int kPositivitySamples = 200;
inline constexpr int kNondegeneracySamples = 100;

ValidationReport validate_expectation(const AlgebraWithExpectation& spec,
                                      std::uint64_t seed = kDefaultSeed);

/// Searches x over the basis and random elements for phi(x* a* a x) != 0.
std::optional<Matrix> nondegeneracy_witness(const AlgebraWithExpectation& spec, const Matrix& a,
                                            std::uint64_t seed = kDefaultSeed);

/// Random element of A with Gaussian coordinates.
Matrix random_element(const MatrixStarAlgebra& algebra, std::uint64_t seed);

namespace presets {
/// M_n with B = scalars and phi = normalized trace.
AlgebraWithExpectation scalars_in_matn(int n);
/// M_n with B = diagonal matrices and phi = diagonal compression.
AlgebraWithExpectation diagonal_in_matn(int n);
/// Functions on weights.size() points (diagonal matrices), B = scalars,
/// phi = the state given by the weights.
AlgebraWithExpectation function_algebra_with_state(const std::vector<double>& weights);
/// M_n with B = scalars and phi(a) = a_11.
AlgebraWithExpectation vector_state_in_matn(int n);
}  // namespace presets

std::vector<std::string> algebra_preset_names();

/// Parses either {"preset": name, ...} or the explicit
/// {ambient_dim, algebra_basis | algebra_generators, subalgebra_basis, expectation_matrix}.
/// Errors are ParseError with pointers rooted at `pointer`.
AlgebraWithExpectation algebra_from_json(const nlohmann::json& j, const std::string& pointer = "");
nlohmann::json algebra_to_json(const AlgebraWithExpectation& spec);

/// Complex matrix <-> flat row-major list of [re, im] pairs.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, int n, const std::string& pointer = "");
nlohmann::json complex_to_json(cplx z);
cplx complex_from_json(const nlohmann::json& j, const std::string& pointer = "");

}  // namespace afp
