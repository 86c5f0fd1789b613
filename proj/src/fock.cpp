#include "afp/fock.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <numeric>

#include "afp/errors.hpp"

namespace afp {

namespace {

int next_context_id() {
  static std::atomic<int> counter{0};
  return counter++;
}

constexpr double kIdentityFrameTolerance = 1e-12;

struct BlockEntry {
  int row_block;
  int col_block;
  Matrix values;
};

Matrix inverse_sqrt(const HermitianFactor& f) {
  return f.isometry * f.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal() * f.isometry.adjoint();
}

Matrix sqrt_of(const HermitianFactor& f) {
  return f.isometry * f.eigenvalues.cwiseSqrt().asDiagonal() * f.isometry.adjoint();
}

/// Entries below this fraction of a block's largest entry are roundoff.
constexpr double kDropFraction = 1e-15;

SparseMatrix assemble(const FockContext& ctx, const std::vector<std::vector<BlockEntry>>& parts) {
  const auto& blocks = ctx.blocks();
  std::vector<Triplet> triplets;
  for (const auto& part : parts)
    for (const auto& e : part) {
      const auto& rb = blocks[static_cast<std::size_t>(e.row_block)];
      const auto& cb = blocks[static_cast<std::size_t>(e.col_block)];
      const double top = e.values.size() ? e.values.cwiseAbs().maxCoeff() : 0.0;
      if (top == 0.0) continue;
      for (Eigen::Index r = 0; r < e.values.rows(); ++r)
        for (Eigen::Index c = 0; c < e.values.cols(); ++c) {
          const cplx v = e.values(r, c);
          if (std::abs(v) > kDropFraction * top)
            triplets.emplace_back(rb.offset + static_cast<int>(r), cb.offset + static_cast<int>(c), v);
        }
    }
  SparseMatrix m(ctx.total_dim(), ctx.total_dim());
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

/// Runs `fill(block_id, out)` for every nonempty block concurrently and
/// assembles the entries in block order.
template <typename Fill>
SparseMatrix assemble_by_block(const FockContext& ctx, Fill fill) {
  const int nb = static_cast<int>(ctx.blocks().size());
  std::vector<std::vector<BlockEntry>> parts(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(dynamic, 32)
  for (int s = 0; s < nb; ++s) {
    if (ctx.blocks()[static_cast<std::size_t>(s)].dim == 0) continue;
    fill(s, parts[static_cast<std::size_t>(s)]);
  }
  return assemble(ctx, parts);
}

Matrix to_frame(const FockContext::Block& b, const Matrix& formal) {
  return b.identity_frame ? formal : Matrix(b.to_block * formal);
}

Matrix from_frame(const FockContext::Block& b, const Matrix& formal) {
  return b.identity_frame ? formal : Matrix(formal * b.from_block);
}

Matrix combine(const std::vector<Matrix>& basis_ops, const Vector& coords, int dim) {
  Matrix out = Matrix::Zero(dim, dim);
  for (Eigen::Index u = 0; u < coords.size(); ++u)
    if (coords(u) != cplx(0.0)) out += coords(u) * basis_ops[static_cast<std::size_t>(u)];
  return out;
}

/// Formal column block y (x) I_d.
Matrix creation_formal(const Vector& y, int d) {
  Matrix out = Matrix::Zero(y.size() * d, d);
  for (Eigen::Index j = 0; j < y.size(); ++j)
    for (int t = 0; t < d; ++t) out(j * d + t, t) = y(j);
  return out;
}

/// Formal map x_j (x) f_t -> pi_tail(h_j) f_t.
Matrix annihilation_formal(const FockContext::Block& tail, const std::vector<Vector>& h_coords) {
  const int dt = tail.dim;
  Matrix out(dt, static_cast<Eigen::Index>(h_coords.size()) * dt);
  for (std::size_t j = 0; j < h_coords.size(); ++j)
    out.middleCols(static_cast<Eigen::Index>(j) * dt, dt) = combine(tail.b_action, h_coords[j], dt);
  return out;
}

void require_same_context(const FockOperator& x, const FockOperator& y) {
  if (x.context_id != y.context_id) throw DomainError("operators belong to different Fock contexts");
}

}  // namespace

// ---------------------------------------------------------------------------
// Operator algebra

FockOperator operator*(const FockOperator& x, const FockOperator& y) {
  require_same_context(x, y);
  return {x.context_id, SparseMatrix(x.matrix * y.matrix), "(" + x.tag + ")*(" + y.tag + ")"};
}

FockOperator operator+(const FockOperator& x, const FockOperator& y) {
  require_same_context(x, y);
  return {x.context_id, SparseMatrix(x.matrix + y.matrix), x.tag + "+" + y.tag};
}

FockOperator operator-(const FockOperator& x, const FockOperator& y) {
  require_same_context(x, y);
  return {x.context_id, SparseMatrix(x.matrix - y.matrix), x.tag + "-(" + y.tag + ")"};
}

FockOperator operator*(cplx s, const FockOperator& x) {
  return {x.context_id, SparseMatrix(s * x.matrix), "scaled(" + x.tag + ")"};
}

FockOperator adjoint(const FockOperator& x) {
  return {x.context_id, SparseMatrix(x.matrix.adjoint()), x.tag + "^*"};
}

// ---------------------------------------------------------------------------
// Context

double estimated_fock_dim(const std::vector<int>& centered_dims, int base_dim, int max_level) {
  // weight[i] = sum over length-m sequences starting at i of the product of E° dimensions
  std::vector<double> weight(centered_dims.begin(), centered_dims.end());
  double total = 1.0;
  for (int m = 1; m <= max_level; ++m) {
    const double level = std::accumulate(weight.begin(), weight.end(), 0.0);
    total += level;
    std::vector<double> next(weight.size());
    for (std::size_t i = 0; i < weight.size(); ++i) next[i] = centered_dims[i] * (level - weight[i]);
    weight = std::move(next);
  }
  return total * base_dim;
}

FockContext::FockContext(std::map<int, std::shared_ptr<const GnsModule>> factors, int max_level,
                         FockOptions options)
    : id_(next_context_id()), max_level_(max_level) {
  if (factors.size() < 2) throw ConfigurationError("a free product needs at least two factors");
  if (max_level < 0) throw ConfigurationError("truncation level must be nonnegative");
  for (auto& [index, module] : factors) {
    if (!module) throw ConfigurationError("null factor module");
    Factor f;
    f.index = index;
    f.module = module;
    indices_.push_back(index);
    factors_.push_back(std::move(f));
  }
  check_common_base();

  const int base_dim = base().dim();
  for (auto& f : factors_) {
    const GnsModule& m = *f.module;
    const int e = m.centered_dim();
    const int u = m.unit_dim();
    f.centered_dim = e;
    for (int j = 0; j < e; ++j)
      for (int jj = 0; jj < e; ++jj) f.gram_b.push_back(base_coords(m.gram(u + j, u + jj)));
    for (int t = 0; t < base_dim; ++t)
      f.left_b.push_back(m.left_action(base().basis()[static_cast<std::size_t>(t)]).bottomRightCorner(e, e));
  }

  build_level0();
  std::vector<std::vector<int>> by_level(static_cast<std::size_t>(max_level_) + 1);
  by_level[0].push_back(0);
  level_offsets_.push_back(0);
  int offset = blocks_[0].dim;
  for (int m = 1; m <= max_level_; ++m) {
    level_offsets_.push_back(offset);
    for (int slot = 0; slot < static_cast<int>(factors_.size()); ++slot)
      for (int tail : by_level[static_cast<std::size_t>(m) - 1]) {
        const Block& t = blocks_[static_cast<std::size_t>(tail)];
        if (t.head == slot || t.dim == 0) continue;
        build_block(slot, tail);
        Block& b = blocks_.back();
        b.offset = offset;
        offset += b.dim;
        if (offset > options.max_dim)
          throw CapacityError("Fock space dimension exceeds the cap of " + std::to_string(options.max_dim) +
                                  " at level " + std::to_string(m) + " of " + std::to_string(max_level_),
                              static_cast<double>(offset));
        by_level[static_cast<std::size_t>(m)].push_back(static_cast<int>(blocks_.size()) - 1);
      }
  }
  level_offsets_.push_back(offset);
  total_dim_ = offset;

  for (const auto& b : blocks_)
    for (int t = 0; t < b.dim; ++t) labels_.push_back({b.level, b.sequence, t});
}

void FockContext::check_common_base() const {
  const auto& b0 = factors_.front().module->source().subalgebra();
  for (const auto& f : factors_) {
    const auto& b = f.module->source().subalgebra();
    bool same = b.ambient_dim() == b0.ambient_dim() && b.dim() == b0.dim();
    if (same)
      for (const auto& x : b.basis()) same = same && b0.contains(x);
    if (!same)
      throw ConfigurationError("factor " + std::to_string(f.index) + " does not share the common subalgebra B");
  }
}

bool FockContext::has_index(int i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

int FockContext::slot_of(int index) const {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), index);
  if (it == indices_.end() || *it != index)
    throw DomainError("index " + std::to_string(index) + " is not part of the Fock context");
  return static_cast<int>(it - indices_.begin());
}

int FockContext::level_dim(int m) const {
  if (m < 0 || m > max_level_) return 0;
  return level_offsets_[static_cast<std::size_t>(m) + 1] - level_offsets_[static_cast<std::size_t>(m)];
}

Vector FockContext::base_coords(const Matrix& b) const {
  auto c = base().try_coordinates(b);
  if (!c) throw DomainError("element is not in the common subalgebra B");
  return *c;
}

Vector FockContext::level0_coords(const Matrix& b) const { return level0_sqrt_ * base_coords(b); }

Matrix FockContext::level0_element(const Vector& level0) const {
  return base().element(level0_inv_sqrt_ * level0);
}

Vector FockContext::vacuum() const {
  Vector v = Vector::Zero(total_dim_);
  v.head(sigma_dim()) = level0_sqrt_ * base().unit_coords();
  return v;
}

void FockContext::build_level0() {
  const auto& B = base();
  const int d = B.dim();
  Matrix k(d, d);
  for (int t = 0; t < d; ++t)
    for (int u = 0; u < d; ++u) k(t, u) = normalized_trace(B.basis()[t].adjoint() * B.basis()[u]);
  const HermitianFactor f = positive_part(0.5 * (k + k.adjoint()));
  if (f.eigenvalues.size() != d) throw StructuralError("trace is not faithful on B");
  level0_sqrt_ = sqrt_of(f);
  level0_inv_sqrt_ = inverse_sqrt(f);

  Block b;
  b.level = 0;
  b.offset = 0;
  b.dim = d;
  b.prepend.assign(factors_.size(), -1);
  for (int t = 0; t < d; ++t) {
    Matrix mult(d, d);
    for (int v = 0; v < d; ++v) mult.col(v) = B.coordinates(B.basis()[t] * B.basis()[v]);
    b.b_action.push_back(level0_sqrt_ * mult * level0_inv_sqrt_);
  }
  blocks_.push_back(std::move(b));
}

void FockContext::build_block(int slot, int tail_id) {
  const Factor& f = factors_[static_cast<std::size_t>(slot)];
  const int e = f.centered_dim;
  Block b;
  {
    const Block& tail = blocks_[static_cast<std::size_t>(tail_id)];
    b.sequence.push_back(f.index);
    b.sequence.insert(b.sequence.end(), tail.sequence.begin(), tail.sequence.end());
    b.level = tail.level + 1;
  }
  const Block& tail = blocks_[static_cast<std::size_t>(tail_id)];
  b.head = slot;
  b.tail = tail_id;
  b.prepend.assign(factors_.size(), -1);
  const int dt = tail.dim;
  b.formal_dim = e * dt;

  if (b.formal_dim > 0) {
    Matrix gamma(b.formal_dim, b.formal_dim);
    for (int j = 0; j < e; ++j)
      for (int jj = 0; jj < e; ++jj)
        gamma.block(j * dt, jj * dt, dt, dt) =
            combine(tail.b_action, f.gram_b[static_cast<std::size_t>(j * e + jj)], dt);
    gamma = 0.5 * (gamma + gamma.adjoint()).eval();
    const double off_identity = (gamma - Matrix::Identity(b.formal_dim, b.formal_dim)).cwiseAbs().maxCoeff();
    if (off_identity < kIdentityFrameTolerance) {
      b.identity_frame = true;
      b.dim = b.formal_dim;
    } else {
      b.identity_frame = false;
      const HermitianFactor hf = positive_part(gamma);
      b.dim = static_cast<int>(hf.eigenvalues.size());
      b.from_block = hf.isometry * hf.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal();
      b.to_block = hf.eigenvalues.cwiseSqrt().asDiagonal() * hf.isometry.adjoint();
    }
    for (const auto& lb : f.left_b) b.b_action.push_back(from_frame(b, to_frame(b, kron_identity(lb, dt))));
  }

  const int id = static_cast<int>(blocks_.size());
  blocks_[static_cast<std::size_t>(tail_id)].prepend[static_cast<std::size_t>(slot)] = id;
  blocks_.push_back(std::move(b));
}

nlohmann::json FockContext::summary() const {
  nlohmann::json j;
  j["total_dim"] = total_dim_;
  j["max_level"] = max_level_;
  j["sigma_dim"] = sigma_dim();
  j["indices"] = indices_;
  j["levels"] = nlohmann::json::array();
  for (int m = 0; m <= max_level_; ++m) {
    nlohmann::json lv;
    lv["level"] = m;
    lv["dim"] = level_dim(m);
    lv["sequences"] = nlohmann::json::array();
    for (const auto& b : blocks_)
      if (b.level == m && b.dim > 0) lv["sequences"].push_back({{"sequence", b.sequence}, {"dim", b.dim}});
    j["levels"].push_back(lv);
  }
  return j;
}

FockContext build_fock(const std::map<int, AlgebraWithExpectation>& factors, int max_level, FockOptions options) {
  std::map<int, std::shared_ptr<const GnsModule>> modules;
  for (const auto& [i, spec] : factors) modules.emplace(i, std::make_shared<const GnsModule>(spec));
  return FockContext(std::move(modules), max_level, options);
}

FockContext build_fock_copies(const AlgebraWithExpectation& algebra, int first, int last, int max_level,
                              FockOptions options) {
  if (last < first) throw ConfigurationError("empty index window");
  auto module = std::make_shared<const GnsModule>(algebra);
  std::map<int, std::shared_ptr<const GnsModule>> modules;
  for (int i = first; i <= last; ++i) modules.emplace(i, module);
  return FockContext(std::move(modules), max_level, options);
}

// ---------------------------------------------------------------------------
// Operators

namespace {

FockOperator diagonal_projection(const FockContext& ctx, const std::string& tag,
                                 const std::function<bool(const FockContext::Block&)>& keep) {
  std::vector<Triplet> t;
  for (const auto& b : ctx.blocks())
    if (keep(b))
      for (int s = 0; s < b.dim; ++s) t.emplace_back(b.offset + s, b.offset + s, 1.0);
  SparseMatrix m(ctx.total_dim(), ctx.total_dim());
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return {ctx.id(), std::move(m), tag};
}

}  // namespace

FockOperator identity_op(const FockContext& ctx) {
  return diagonal_projection(ctx, "1", [](const FockContext::Block&) { return true; });
}

FockOperator zero_op(const FockContext& ctx) {
  SparseMatrix m(ctx.total_dim(), ctx.total_dim());
  m.makeCompressed();
  return {ctx.id(), std::move(m), "0"};
}

FockOperator proj_level(const FockContext& ctx, int m) {
  if (m < 0 || m > ctx.max_level())
    throw DomainError("level " + std::to_string(m) + " is outside 0.." + std::to_string(ctx.max_level()));
  return diagonal_projection(ctx, "P" + std::to_string(m), [m](const FockContext::Block& b) { return b.level == m; });
}

FockOperator proj_levels_upto(const FockContext& ctx, int m) {
  return diagonal_projection(ctx, "P<=" + std::to_string(m), [m](const FockContext::Block& b) { return b.level <= m; });
}

FockOperator proj_first_index(const FockContext& ctx, int k) {
  const int slot = ctx.slot_of(k);
  return diagonal_projection(ctx, "Q" + std::to_string(k), [slot](const FockContext::Block& b) { return b.head == slot; });
}

FockOperator op_psi(const FockContext& ctx, int k, const ModuleVector& y) {
  const int slot = ctx.slot_of(k);
  const GnsModule& mod = *ctx.factor_at_slot(slot).module;
  if (y.module_id != mod.id()) throw DomainError("vector does not belong to E_" + std::to_string(k));
  const Vector unit = mod.unit_coords(y);
  if (unit.norm() > kSpanTolerance * std::max(1.0, y.coords.norm()))
    throw DomainError("psi requires a vector in E°: B-summand component has norm " + std::to_string(unit.norm()));
  const Vector yc = mod.centered_coords(y);
  const auto& blocks = ctx.blocks();
  SparseMatrix m = assemble_by_block(ctx, [&](int s, std::vector<BlockEntry>& out) {
    const auto& src = blocks[static_cast<std::size_t>(s)];
    const int dst = src.prepend[static_cast<std::size_t>(slot)];
    if (dst < 0 || blocks[static_cast<std::size_t>(dst)].dim == 0) return;
    out.push_back({dst, s, to_frame(blocks[static_cast<std::size_t>(dst)], creation_formal(yc, src.dim))});
  });
  return {ctx.id(), std::move(m), "psi" + std::to_string(k)};
}

FockOperator op_rho(const FockContext& ctx, int k, const Matrix& a) {
  const int slot = ctx.slot_of(k);
  const GnsModule& mod = *ctx.factor_at_slot(slot).module;
  const int e = mod.centered_dim();
  const Matrix r = mod.left_action(a).bottomRightCorner(e, e);
  const auto& blocks = ctx.blocks();
  SparseMatrix m = assemble_by_block(ctx, [&](int s, std::vector<BlockEntry>& out) {
    const auto& b = blocks[static_cast<std::size_t>(s)];
    if (b.head != slot) return;
    const int dt = blocks[static_cast<std::size_t>(b.tail)].dim;
    out.push_back({s, s, to_frame(b, from_frame(b, kron_identity(r, dt)))});
  });
  return {ctx.id(), std::move(m), "rho" + std::to_string(k)};
}

FockOperator op_lambda(const FockContext& ctx, int i, const Matrix& a) {
  const int slot = ctx.slot_of(i);
  const GnsModule& mod = *ctx.factor_at_slot(slot).module;
  const AlgebraWithExpectation& spec = mod.source();
  const int e = mod.centered_dim();
  const int u = mod.unit_dim();

  const Vector phi_a = ctx.base_coords(spec.apply(a));           // phi_i(a)
  const Vector centered_hat = mod.centered_coords(mod.hat(a));   // H_i(a^)
  const Matrix diagonal = mod.left_action(a).bottomRightCorner(e, e);  // x -> H_i(a x) on E°
  std::vector<Vector> h;  // <(a*)^, c_j> = phi_i(a c_j)
  for (int j = 0; j < e; ++j)
    h.push_back(ctx.base_coords(spec.apply(a * mod.carrier_lifts()[static_cast<std::size_t>(u + j)])));

  const auto& blocks = ctx.blocks();
  SparseMatrix m = assemble_by_block(ctx, [&](int s, std::vector<BlockEntry>& out) {
    const auto& b = blocks[static_cast<std::size_t>(s)];
    if (b.head != slot) {
      out.push_back({s, s, combine(b.b_action, phi_a, b.dim)});
      const int dst = b.prepend[static_cast<std::size_t>(slot)];
      if (dst >= 0 && blocks[static_cast<std::size_t>(dst)].dim > 0)
        out.push_back({dst, s, to_frame(blocks[static_cast<std::size_t>(dst)], creation_formal(centered_hat, b.dim))});
    } else {
      const auto& tail = blocks[static_cast<std::size_t>(b.tail)];
      out.push_back({s, s, to_frame(b, from_frame(b, kron_identity(diagonal, tail.dim)))});
      out.push_back({b.tail, s, from_frame(b, annihilation_formal(tail, h))});
    }
  });
  return {ctx.id(), std::move(m), "lambda" + std::to_string(i)};
}

FockOperator op_left_b(const FockContext& ctx, const Matrix& b) {
  const Vector c = ctx.base_coords(b);
  const auto& blocks = ctx.blocks();
  SparseMatrix m = assemble_by_block(ctx, [&](int s, std::vector<BlockEntry>& out) {
    const auto& blk = blocks[static_cast<std::size_t>(s)];
    out.push_back({s, s, combine(blk.b_action, c, blk.dim)});
  });
  return {ctx.id(), std::move(m), "sigma"};
}

Matrix phi_state(const FockContext& ctx, const FockOperator& x) {
  if (x.context_id != ctx.id()) throw DomainError("operator belongs to a different Fock context");
  const Vector image = x.matrix * ctx.vacuum();
  return ctx.level0_element(image.head(ctx.sigma_dim()));
}

nlohmann::json operator_to_coo(const FockOperator& x) {
  nlohmann::json j;
  j["rows"] = x.matrix.rows();
  j["cols"] = x.matrix.cols();
  j["tag"] = x.tag;
  j["entries"] = nlohmann::json::array();
  for (int r = 0; r < x.matrix.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(x.matrix, r); it; ++it)
      j["entries"].push_back({it.row(), it.col(), it.value().real(), it.value().imag()});
  return j;
}

}  // namespace afp
