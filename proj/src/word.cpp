#include "afp/word.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "afp/kernels.hpp"

namespace afp {

Word::Word(std::vector<CenteredElement> letters) : letters_(std::move(letters)) {
  if (letters_.empty()) throw DomainError("a word needs at least one letter");
  for (std::size_t i = 0; i + 1 < letters_.size(); ++i)
    if (letters_[i].owner == letters_[i + 1].owner)
      throw DomainError("letters " + std::to_string(i) + " and " + std::to_string(i + 1) +
                        " share the index " + std::to_string(letters_[i].owner));
}

std::vector<int> Word::indices() const {
  std::vector<int> out;
  for (const auto& a : letters_) out.push_back(a.owner);
  return out;
}

double Word::norm_product() const {
  double p = 1.0;
  for (const auto& a : letters_) p *= op_norm(a.matrix);
  return p;
}

Word adjoint_word(const Word& w) {
  std::vector<CenteredElement> letters;
  for (int i = w.length() - 1; i >= 0; --i) {
    CenteredElement a = w.letter(i);
    a.matrix = a.matrix.adjoint().eval();
    a.coords = Vector();  // basis coordinates are not conjugation-covariant in general
    letters.push_back(std::move(a));
  }
  return Word(std::move(letters));
}

int WordFamily::length() const {
  if (words.empty()) return 0;
  const int n = words.front().length();
  for (const auto& w : words)
    if (w.length() != n) throw DomainError("word family mixes lengths " + std::to_string(n) + " and " +
                                           std::to_string(w.length()));
  return n;
}

std::optional<SeparationClash> find_separation_clash(const WordFamily& f) {
  for (std::size_t a = 0; a < f.words.size(); ++a)
    for (std::size_t b = a + 1; b < f.words.size(); ++b) {
      const Word& x = f.words[a];
      const Word& y = f.words[b];
      if (x.index(0) == y.index(0)) return SeparationClash{a, b, true};
      if (x.index(x.length() - 1) == y.index(y.length() - 1)) return SeparationClash{a, b, false};
    }
  return std::nullopt;
}

bool is_separated(const WordFamily& f) { return !find_separation_clash(f).has_value(); }

// ---------------------------------------------------------------------------

namespace {

void require_centered(const FockContext& ctx, const CenteredElement& a) {
  const GnsModule& mod = ctx.module(a.owner);
  const Matrix phi = mod.source().apply(a.matrix);
  if (op_norm(phi) > kSpanTolerance * std::max(1.0, op_norm(a.matrix)))
    throw DomainError("letter in factor " + std::to_string(a.owner) + " is not centered");
}

}  // namespace

FockOperator word_operator(const FockContext& ctx, const Word& w) {
  for (const auto& a : w.letters()) require_centered(ctx, a);
  FockOperator x = op_lambda(ctx, w.index(0), w.letter(0).matrix);
  for (int i = 1; i < w.length(); ++i) x = x * op_lambda(ctx, w.index(i), w.letter(i).matrix);
  x.tag = "word";
  return x;
}

FockOperator family_operator(const FockContext& ctx, const WordFamily& f) {
  f.length();
  FockOperator sum = zero_op(ctx);
  for (const auto& w : f.words) sum = sum + word_operator(ctx, w);
  sum.tag = "family";
  return sum;
}

FockOperator creation_of(const FockContext& ctx, const CenteredElement& a) {
  return op_psi(ctx, a.owner, ctx.module(a.owner).hat(a.matrix));
}

FockOperator annihilation_of(const FockContext& ctx, const CenteredElement& a) {
  return adjoint(op_psi(ctx, a.owner, ctx.module(a.owner).hat(a.matrix.adjoint())));
}

FockOperator decompose_block(const FockContext& ctx, const Word& w, int m, int r) {
  const int n = w.length();
  const int big_m = ctx.max_level();
  if (m < 0 || m > big_m || r < 0 || r > big_m)
    throw DomainError("levels (m, r) = (" + std::to_string(m) + ", " + std::to_string(r) + ") outside 0.." +
                      std::to_string(big_m));
  if (m + n > big_m)
    throw TruncationError("m + n = " + std::to_string(m + n) + " exceeds the truncation level " +
                          std::to_string(big_m));
  for (const auto& a : w.letters()) require_centered(ctx, a);
  if (r > m + n || r < std::abs(m - n)) return zero_op(ctx);

  const int gap = m + n - r;
  const bool diagonal_case = gap % 2 == 1;
  const int s = diagonal_case ? (gap + 1) / 2 : gap / 2;
  FockOperator x = proj_level(ctx, r);
  for (int i = 0; i < n - s; ++i) x = x * creation_of(ctx, w.letter(i));
  int next = n - s;
  if (diagonal_case) {
    x = x * op_rho(ctx, w.index(next), w.letter(next).matrix);
    ++next;
  }
  for (int i = next; i < n; ++i) x = x * annihilation_of(ctx, w.letter(i));
  x = x * proj_level(ctx, m);
  x.tag = "block(" + std::to_string(r) + "," + std::to_string(m) + ")";
  return x;
}

BigsumReport verify_bigsum(const FockContext& ctx, const Word& w, int m) {
  const int n = w.length();
  if (m + n > ctx.max_level())
    throw TruncationError("m + n = " + std::to_string(m + n) + " exceeds the truncation level " +
                          std::to_string(ctx.max_level()));
  FockOperator rhs = zero_op(ctx);
  for (int s = 0; s <= std::min(m, n); ++s) rhs = rhs + decompose_block(ctx, w, m, m + n - 2 * s);
  for (int s = 1; s <= std::min(m, n); ++s) rhs = rhs + decompose_block(ctx, w, m, m + n - 2 * s + 1);
  const FockOperator lhs = word_operator(ctx, w) * proj_level(ctx, m);
  BigsumReport rep;
  rep.m = m;
  rep.residual = SparseMatrix(lhs.matrix - rhs.matrix).norm();
  rep.scale = w.norm_product();
  rep.passed = rep.residual < kBigsumTolerance * rep.scale;
  return rep;
}

double gamma(const WordFamily& f) {
  double sum = 0.0;
  for (const auto& w : f.words) {
    const double p = w.norm_product();
    sum += p * p;
  }
  return std::sqrt(sum);
}

double haagerup_upper(const WordFamily& f) {
  const int n = f.length();
  if (auto clash = find_separation_clash(f)) {
    const Word& x = f.words[clash->first];
    const int k = clash->at_start ? x.index(0) : x.index(x.length() - 1);
    throw HypothesisError("words " + std::to_string(clash->first) + " and " + std::to_string(clash->second) +
                          " share their " + (clash->at_start ? "first" : "last") + " index " + std::to_string(k));
  }
  return (2.0 * n + 1.0) * gamma(f);
}

// ---------------------------------------------------------------------------

namespace {

SparseMatrix submatrix(const SparseMatrix& x, int row0, int rows, int col0, int cols) {
  std::vector<Triplet> t;
  for (int r = row0; r < row0 + rows; ++r)
    for (SparseMatrix::InnerIterator it(x, r); it; ++it)
      if (it.col() >= col0 && it.col() < col0 + cols) t.emplace_back(r - row0, it.col() - col0, it.value());
  SparseMatrix out(rows, cols);
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

}  // namespace

NormReport norm_lower(const FockContext& ctx, const FockOperator& x, int n, std::uint64_t seed) {
  if (x.context_id != ctx.id()) throw DomainError("operator belongs to a different Fock context");
  if (n < 0 || n > ctx.max_level())
    throw DomainError("level spread " + std::to_string(n) + " exceeds the truncation level " +
                      std::to_string(ctx.max_level()));
  const auto start = std::chrono::steady_clock::now();
  const int top = ctx.max_level() - n;
  const int domain = ctx.level_offset(top + 1);
  const SparseMatrix restricted = submatrix(x.matrix, 0, ctx.total_dim(), 0, domain);
  const kernels::SigmaEstimate est = kernels::sigma_max(restricted, seed);

  NormReport rep;
  rep.lower = est.sigma;
  rep.max_level = ctx.max_level();
  rep.domain_dim = domain;
  rep.dense = est.dense;
  rep.witness = Vector::Zero(ctx.total_dim());
  if (est.right_vector.size() == domain && domain > 0) rep.witness.head(domain) = est.right_vector;
  // The vacuum always lies in the domain; keep it when it does better than
  // an unconverged iteration.
  const Vector vac = ctx.vacuum().head(domain);
  const double vac_value = domain > 0 ? kernels::apply_norm(restricted, vac / vac.norm()) : 0.0;
  if (vac_value > rep.lower) {
    rep.lower = vac_value;
    rep.witness.setZero();
    rep.witness.head(domain) = vac / vac.norm();
  }
  if (domain > 0) {
    Eigen::Index at = 0;
    rep.witness.cwiseAbs().maxCoeff(&at);
    rep.witness_index = static_cast<int>(at);
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

double block_norm(const FockContext& ctx, const FockOperator& x, int r, int m, std::uint64_t seed) {
  if (x.context_id != ctx.id()) throw DomainError("operator belongs to a different Fock context");
  if (r < 0 || r > ctx.max_level() || m < 0 || m > ctx.max_level())
    throw DomainError("block (" + std::to_string(r) + ", " + std::to_string(m) + ") outside the context");
  const SparseMatrix block =
      submatrix(x.matrix, ctx.level_offset(r), ctx.level_dim(r), ctx.level_offset(m), ctx.level_dim(m));
  if (block.nonZeros() == 0) return 0.0;
  return kernels::sigma_max_value(block, seed);
}

// ---------------------------------------------------------------------------

Word random_word(const FockContext& ctx, const std::vector<int>& indices, std::uint64_t seed) {
  std::vector<CenteredElement> letters;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const AlgebraWithExpectation& spec = ctx.module(indices[i]).source();
    const Matrix a = random_element(spec.algebra(), seed * 1000003ULL + i);
    letters.push_back(center(spec, a, indices[i]));
  }
  return Word(std::move(letters));
}

std::vector<int> random_alternating_indices(const FockContext& ctx, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& pool = ctx.indices();
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<int> out;
  while (static_cast<int>(out.size()) < n) {
    const int k = pool[pick(rng)];
    if (out.empty() || out.back() != k) out.push_back(k);
  }
  return out;
}

WordFamily random_separated_family(const FockContext& ctx, int n, int size, std::uint64_t seed) {
  const auto& pool = ctx.indices();
  if (n < 1) throw DomainError("word length must be positive");
  if (size < 0 || static_cast<std::size_t>(size) > pool.size())
    throw DomainError("a separated family of " + std::to_string(size) + " words needs as many indices");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (;;) {
    std::vector<int> firsts(pool.begin(), pool.end());
    std::vector<int> lasts(pool.begin(), pool.end());
    std::shuffle(firsts.begin(), firsts.end(), rng);
    std::shuffle(lasts.begin(), lasts.end(), rng);
    if (n == 1) lasts = firsts;
    std::vector<std::vector<int>> seqs;
    bool ok = true;
    for (int w = 0; w < size && ok; ++w) {
      std::vector<int> seq(static_cast<std::size_t>(n));
      seq.front() = firsts[static_cast<std::size_t>(w)];
      seq.back() = lasts[static_cast<std::size_t>(w)];
      for (int i = 1; i + 1 < n; ++i) {
        // the middle letter must differ from its left neighbour and, when it
        // is the second to last, from the fixed last index
        int k;
        int guard = 0;
        do {
          k = pool[pick(rng)];
        } while ((k == seq[static_cast<std::size_t>(i) - 1] || (i + 2 == n && k == seq.back())) && ++guard < 1000);
        seq[static_cast<std::size_t>(i)] = k;
      }
      for (int i = 0; i + 1 < n; ++i)
        if (seq[static_cast<std::size_t>(i)] == seq[static_cast<std::size_t>(i) + 1]) ok = false;
      seqs.push_back(std::move(seq));
    }
    if (!ok) continue;
    WordFamily f;
    for (std::size_t w = 0; w < seqs.size(); ++w) f.words.push_back(random_word(ctx, seqs[w], seed + 7919ULL * (w + 1)));
    return f;
  }
}

// ---------------------------------------------------------------------------

nlohmann::json word_to_json(const Word& w) {
  nlohmann::json j;
  j["letters"] = nlohmann::json::array();
  for (const auto& a : w.letters()) j["letters"].push_back({{"index", a.owner}, {"element", matrix_to_json(a.matrix)}});
  return j;
}

Word word_from_json(const nlohmann::json& j, const FockContext& ctx, const std::string& pointer) {
  return word_from_json(
      j, [&ctx](int k) { return ctx.has_index(k) ? &ctx.module(k).source() : nullptr; }, pointer);
}

Word word_from_json(const nlohmann::json& j,
                    const std::function<const AlgebraWithExpectation*(int)>& factor_of,
                    const std::string& pointer) {
  if (!j.is_object() || !j.contains("letters") || !j["letters"].is_array())
    throw ParseError("word needs a \"letters\" array", pointer + "/letters");
  std::vector<CenteredElement> letters;
  for (std::size_t i = 0; i < j["letters"].size(); ++i) {
    const auto& lj = j["letters"][i];
    const std::string lp = pointer + "/letters/" + std::to_string(i);
    if (!lj.is_object() || !lj.contains("index") || !lj["index"].is_number_integer())
      throw ParseError("letter needs an integer \"index\"", lp + "/index");
    const int k = lj["index"].get<int>();
    const AlgebraWithExpectation* spec = factor_of(k);
    if (!spec) throw ParseError("index " + std::to_string(k) + " is not a factor", lp + "/index");
    if (!lj.contains("element")) throw ParseError("letter needs an \"element\"", lp + "/element");
    const Matrix a = matrix_from_json(lj["element"], spec->ambient_dim(), lp + "/element");
    if (!spec->algebra().contains(a)) throw ParseError("element is outside the factor algebra", lp + "/element");
    const bool do_center = lj.value("center", false);
    try {
      letters.push_back(do_center ? center(*spec, a, k) : as_centered(*spec, a, k));
    } catch (const DomainError& e) {
      throw ParseError(e.what(), lp + "/element");
    }
  }
  try {
    return Word(std::move(letters));
  } catch (const DomainError& e) {
    throw ParseError(e.what(), pointer + "/letters");
  }
}

}  // namespace afp
