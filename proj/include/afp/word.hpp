#pragma once

// Words of centered letters acting on the truncated Fock module: the block
// decomposition of P_r w P_m into creation, annihilation and diagonal
// factors, word families and their Haagerup-type norm bounds, and certified
// lower bounds for operator norms.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "afp/errors.hpp"
#include "afp/fock.hpp"

namespace afp {

/// w = a_1 ... a_n with a_i centered in A_{k(i)}; k(i) = letters[i].owner.
class Word {
 public:
  /// DomainError if empty or if two neighbouring letters share an index.
  explicit Word(std::vector<CenteredElement> letters);

  int length() const { return static_cast<int>(letters_.size()); }
  const std::vector<CenteredElement>& letters() const { return letters_; }
  const CenteredElement& letter(int i) const { return letters_[static_cast<std::size_t>(i)]; }
  int index(int i) const { return letters_[static_cast<std::size_t>(i)].owner; }
  std::vector<int> indices() const;
  /// Product of the ambient operator norms of the letters.
  double norm_product() const;

 private:
  std::vector<CenteredElement> letters_;
};

/// Reversed word with starred letters.
Word adjoint_word(const Word& w);

struct WordFamily {
  std::vector<Word> words;

  bool empty() const { return words.empty(); }
  std::size_t size() const { return words.size(); }
  /// Common length; DomainError for mixed lengths, 0 when empty.
  int length() const;
};

/// First pair of distinct words sharing a first index or a last index.
struct SeparationClash {
  std::size_t first = 0;
  std::size_t second = 0;
  bool at_start = true;
};
std::optional<SeparationClash> find_separation_clash(const WordFamily& f);
bool is_separated(const WordFamily& f);

/// lambda_{a_1} ... lambda_{a_n}. DomainError if a letter is not centered
/// for its factor or its index is not in the context.
FockOperator word_operator(const FockContext& ctx, const Word& w);
/// Sum of the word operators; zero for the empty family.
FockOperator family_operator(const FockContext& ctx, const WordFamily& f);

/// psi(a^) and psi((a*)^)* for a centered letter.
FockOperator creation_of(const FockContext& ctx, const CenteredElement& a);
FockOperator annihilation_of(const FockContext& ctx, const CenteredElement& a);

/// The right-hand side of the block formula for P_r w P_m, built only from
/// psi, psi*, rho and level projections. Zero when r > m + n or
/// r < |m - n|. TruncationError if m + n > M; DomainError if m or r is
/// outside 0..M.
FockOperator decompose_block(const FockContext& ctx, const Word& w, int m, int r);

struct BigsumReport {
  int m = 0;
  double residual = 0.0;  // Frobenius norm of w P_m minus the block sum
  double scale = 0.0;     // product of the letter norms
  bool passed = false;    // residual < kBigsumTolerance * scale
};
inline constexpr double kBigsumTolerance = 1e-8;

BigsumReport verify_bigsum(const FockContext& ctx, const Word& w, int m);

/// gamma^2 = sum over words of the product of squared letter norms.
double gamma(const WordFamily& f);
/// (2n + 1) gamma; HypothesisError naming the clashing pair if the family is
/// not separated.
double haagerup_upper(const WordFamily& f);

struct NormReport {
  double lower = 0.0;
  double upper = 0.0;
  int max_level = 0;
  int domain_dim = 0;
  int witness_index = -1;  // basis index of the largest witness entry
  Vector witness;          // unit vector in the full Fock space
  bool dense = false;
  double seconds = 0.0;
};

/// Largest singular value of X restricted to P_{<= M - n}, where X moves
/// levels by at most n. On that domain truncation does not alter X, so the
/// value is a lower bound for the untruncated norm. DomainError if n > M.
NormReport norm_lower(const FockContext& ctx, const FockOperator& x, int n,
                      std::uint64_t seed = kDefaultSeed);

/// Largest singular value of the (r, m) level block of X.
double block_norm(const FockContext& ctx, const FockOperator& x, int r, int m,
                  std::uint64_t seed = kDefaultSeed);

/// Word with the given index sequence and random centered letters.
Word random_word(const FockContext& ctx, const std::vector<int>& indices, std::uint64_t seed);
/// Random alternating index sequence of length n drawn from the context.
std::vector<int> random_alternating_indices(const FockContext& ctx, int n, std::uint64_t seed);
/// Family of `size` random words of length n with distinct first indices
/// and distinct last indices. DomainError if the context has too few
/// indices.
WordFamily random_separated_family(const FockContext& ctx, int n, int size, std::uint64_t seed);

nlohmann::json word_to_json(const Word& w);
/// {"letters": [{"index": k, "element": matrix}, ...]}; each element is
/// centered against the context's factor.
Word word_from_json(const nlohmann::json& j, const FockContext& ctx, const std::string& pointer = "");
/// Same, with the factor of each index supplied by `factor_of` (which
/// returns nullptr for unknown indices).
Word word_from_json(const nlohmann::json& j,
                    const std::function<const AlgebraWithExpectation*(int)>& factor_of,
                    const std::string& pointer = "");

}  // namespace afp
