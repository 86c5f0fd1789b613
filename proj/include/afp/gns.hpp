#pragma once

// The right Hilbert B-module L^2(A, phi): separation of A by the null space
// of <x, y> = phi(x* y), the hat map, and the splitting E = B (+) E°.

#include <vector>

#include <json.hpp>

#include "afp/algebra.hpp"

namespace afp {

class GnsModule;

struct ModuleVector {
  int module_id = -1;
  Vector coords;  // carrier coordinates
};

struct SplitProjections {
  Matrix unit_part;      // onto the image of B
  Matrix centered_part;  // H, onto E°
};

class GnsModule {
 public:
  /// build_gns: validates the expectation first (StructuralError listing the
  /// failed checks).
  explicit GnsModule(AlgebraWithExpectation source, std::uint64_t seed = kDefaultSeed);

  int id() const { return id_; }
  const AlgebraWithExpectation& source() const { return source_; }

  /// dim A - dim N.
  int carrier_dim() const { return static_cast<int>(lifts_.size()); }
  int null_dim() const { return source_.algebra().dim() - carrier_dim(); }
  /// The first unit_dim() carrier vectors span the image of B.
  int unit_dim() const { return source_.subalgebra().dim(); }
  int centered_dim() const { return carrier_dim() - unit_dim(); }

  /// carrier_dim x dim A; sends A-coordinates to carrier coordinates.
  const Matrix& hat_map() const { return hat_; }
  ModuleVector hat(const Matrix& a) const;

  /// Elements of A representing the carrier basis; orthonormal for the
  /// scalar inner product tau(<x, y>) with tau the normalized trace.
  const std::vector<Matrix>& carrier_lifts() const { return lifts_; }
  Matrix lift(const ModuleVector& x) const;

  /// B-valued <x_p, x_q> for carrier basis vectors, as ambient matrices.
  const Matrix& gram(int p, int q) const { return gram_[static_cast<std::size_t>(p * carrier_dim() + q)]; }

  /// Matrix of pi(a) on carrier coordinates.
  Matrix left_action(const Matrix& a) const;
  ModuleVector right_action(const ModuleVector& x, const Matrix& b) const;

  SplitProjections split_unit() const;

  /// Coordinates of the E° component (trailing block of the carrier).
  Vector centered_coords(const ModuleVector& x) const;
  /// Coordinates of the B-summand component.
  Vector unit_coords(const ModuleVector& x) const;

  nlohmann::json to_json() const;

 private:
  int id_;
  AlgebraWithExpectation source_;
  std::vector<Matrix> lifts_;
  Matrix lift_coords_;  // dim A x carrier_dim
  Matrix hat_;
  std::vector<Matrix> gram_;
};

/// B-valued inner product <x, y>; DomainError on module mismatch.
Matrix inner_product(const GnsModule& mod, const ModuleVector& x, const ModuleVector& y);

/// ||x||_E = || |x| ||_B.
double module_norm(const GnsModule& mod, const ModuleVector& x);

/// Normalized trace on the ambient matrices; faithful on every subalgebra.
cplx normalized_trace(const Matrix& m);

}  // namespace afp
