#pragma once

// Truncated amalgamated Fock module
//
//   E = B (+) sum over alternating (i_1, ..., i_m), m <= M, of E°_{i_1} (x)_B ... (x)_B E°_{i_m}
//
// realized as a Hilbert space through the left regular representation of B
// on L^2(B, tau), tau the normalized ambient trace. Each alternating
// sequence s = (i, tail) is a block V_s = E°_i (x) V_tail built from the
// Gram matrix of formal simple tensors; null directions are dropped and the
// remaining directions orthonormalized. V_() = L^2(B, tau).
//
// Operators are sparse matrices in the orthonormal block bases, ordered by
// level, then lexicographically by sequence, then by slot within a block.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "afp/gns.hpp"

namespace afp {

inline constexpr long kDefaultMaxDim = 20000;

struct FockOptions {
  long max_dim = kDefaultMaxDim;
};

struct FockBasisLabel {
  int level = 0;
  std::vector<int> sequence;
  int slot = 0;  // index within the block's orthonormal basis
};

struct FockOperator {
  int context_id = -1;
  SparseMatrix matrix;
  std::string tag;
};

FockOperator operator*(const FockOperator& x, const FockOperator& y);
FockOperator operator+(const FockOperator& x, const FockOperator& y);
FockOperator operator-(const FockOperator& x, const FockOperator& y);
FockOperator operator*(cplx s, const FockOperator& x);
FockOperator adjoint(const FockOperator& x);

class FockContext {
 public:
  struct Block {
    std::vector<int> sequence;
    int level = 0;
    int offset = 0;
    int dim = 0;
    int head = -1;  // factor slot of i_1, -1 at level 0
    int tail = -1;  // block id of (i_2, ..., i_m)
    int formal_dim = 0;
    bool identity_frame = true;
    Matrix to_block;    // formal -> orthonormal coordinates
    Matrix from_block;  // orthonormal -> formal coordinates
    std::vector<Matrix> b_action;  // left action of each base-B basis element
    std::vector<int> prepend;      // per factor slot: block of (k, sequence) or -1
  };

  struct Factor {
    int index = 0;
    std::shared_ptr<const GnsModule> module;
    int centered_dim = 0;
    std::vector<Vector> gram_b;   // base-B coordinates of <c_j, c_j'>, row-major in (j, j')
    std::vector<Matrix> left_b;   // E° block of the left action of each base-B basis element
  };

  FockContext(std::map<int, std::shared_ptr<const GnsModule>> factors, int max_level,
              FockOptions options = {});

  int id() const { return id_; }
  int max_level() const { return max_level_; }
  int total_dim() const { return total_dim_; }
  const std::vector<int>& indices() const { return indices_; }
  bool has_index(int i) const;
  int slot_of(int index) const;  // DomainError if absent
  const Factor& factor_at_slot(int slot) const { return factors_[static_cast<std::size_t>(slot)]; }
  const GnsModule& module(int index) const { return *factors_[static_cast<std::size_t>(slot_of(index))].module; }

  /// The common subalgebra B (as given by the first factor).
  const MatrixStarAlgebra& base() const { return factors_.front().module->source().subalgebra(); }
  int sigma_dim() const { return blocks_.front().dim; }

  const std::vector<Block>& blocks() const { return blocks_; }
  int level_offset(int m) const { return level_offsets_[static_cast<std::size_t>(m)]; }
  int level_dim(int m) const;
  const std::vector<FockBasisLabel>& basis_index() const { return labels_; }

  /// 1_B in the level-0 block.
  Vector vacuum() const;
  /// Base-B coordinates of a B element; DomainError if outside B.
  Vector base_coords(const Matrix& b) const;
  /// The B element whose L^2(B) coordinates are `level0`.
  Matrix level0_element(const Vector& level0) const;
  /// L^2(B) coordinates of a B element.
  Vector level0_coords(const Matrix& b) const;

  nlohmann::json summary() const;

 private:
  void check_common_base() const;
  void build_level0();
  void build_block(int slot, int tail_id);

  int id_;
  int max_level_;
  std::vector<int> indices_;
  std::vector<Factor> factors_;
  std::vector<Block> blocks_;
  std::vector<int> level_offsets_;  // size M + 2
  std::vector<FockBasisLabel> labels_;
  int total_dim_ = 0;
  Matrix level0_sqrt_;      // K^{1/2}, K the tau-Gram of the B basis
  Matrix level0_inv_sqrt_;  // K^{-1/2}
};

/// Upper bound on the total dimension (no tensor-level degeneracy).
double estimated_fock_dim(const std::vector<int>& centered_dims, int base_dim, int max_level);

FockContext build_fock(const std::map<int, AlgebraWithExpectation>& factors, int max_level,
                       FockOptions options = {});
/// Copies of one algebra on the indices first..last, sharing one module.
FockContext build_fock_copies(const AlgebraWithExpectation& algebra, int first, int last, int max_level,
                              FockOptions options = {});

FockOperator identity_op(const FockContext& ctx);
FockOperator zero_op(const FockContext& ctx);
/// P_m; DomainError if m is outside 0..M.
FockOperator proj_level(const FockContext& ctx, int m);
/// P_0 + ... + P_m.
FockOperator proj_levels_upto(const FockContext& ctx, int m);
/// Q_k; DomainError if k is not an index of the context.
FockOperator proj_first_index(const FockContext& ctx, int k);

/// Creation operator psi_k(y) for y in E°_k; DomainError if y has a
/// B-summand component. Terms above level M are dropped.
FockOperator op_psi(const FockContext& ctx, int k, const ModuleVector& y);
/// rho_k(a): x_1 (x) ... -> H_k(a x_1) (x) ... on tensors starting in k.
FockOperator op_rho(const FockContext& ctx, int k, const Matrix& a);
/// lambda_a^i from its defining two-case action.
FockOperator op_lambda(const FockContext& ctx, int i, const Matrix& a);
/// Left action of b in B on the whole module.
FockOperator op_left_b(const FockContext& ctx, const Matrix& b);

/// <1_B, X 1_B>, read back as an element of B.
Matrix phi_state(const FockContext& ctx, const FockOperator& x);

/// {"rows", "cols", "tag", "entries": [[row, col, re, im], ...]}.
nlohmann::json operator_to_coo(const FockOperator& x);

}  // namespace afp
