#pragma once

// Free groups on integer-indexed generators, truncations of the left
// regular representation to Cayley balls, Haagerup's inequality, the shift
// average, the trace, and length-weighted l2 norms.

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "afp/linalg.hpp"

namespace afp {

struct GroupLetter {
  int generator = 0;
  int exponent = 1;  // +1 or -1
  auto operator<=>(const GroupLetter&) const = default;
};

class ReducedWord {
 public:
  ReducedWord() = default;  // the identity
  /// Free reduction of an arbitrary letter sequence.
  static ReducedWord reduce(const std::vector<GroupLetter>& letters);
  static ReducedWord generator(int g, int exponent = 1);
  /// "g0 g1^-1 g0"; "e" or "" for the identity. ConfigurationError on bad syntax.
  static ReducedWord parse(const std::string& text);

  const std::vector<GroupLetter>& letters() const { return letters_; }
  int length() const { return static_cast<int>(letters_.size()); }
  bool is_identity() const { return letters_.empty(); }
  ReducedWord inverse() const;
  /// All generator indices increased by k.
  ReducedWord shifted(int k) const;
  std::string to_string() const;

  friend ReducedWord operator*(const ReducedWord& x, const ReducedWord& y);
  auto operator<=>(const ReducedWord&) const = default;

 private:
  std::vector<GroupLetter> letters_;
};

struct ReducedWordHash {
  std::size_t operator()(const ReducedWord& w) const;
};

/// Finitely supported function on the group, i.e. sum_h f(h) lambda_h.
class GroupFunction {
 public:
  GroupFunction() = default;
  static GroupFunction delta(const ReducedWord& h, cplx c = 1.0);

  void add(const ReducedWord& h, cplx c);
  cplx at(const ReducedWord& h) const;
  /// Ordered by the word order; zero coefficients are dropped.
  const std::map<ReducedWord, cplx>& support() const { return coeffs_; }
  bool empty() const { return coeffs_.empty(); }

  GroupFunction adjoint() const;  // f*(g) = conj f(g^{-1})
  double l2_norm() const;
  int max_length() const;
  /// Lengths present in the support, ascending.
  std::vector<int> lengths() const;
  /// Part of f supported on words of length p.
  GroupFunction homogeneous_part(int p) const;
  GroupFunction scaled(cplx s) const;

  friend GroupFunction operator+(const GroupFunction& f, const GroupFunction& g);
  /// Convolution (f * g)(h) = sum_x f(x) g(x^{-1} h).
  friend GroupFunction convolve(const GroupFunction& f, const GroupFunction& g);

 private:
  std::map<ReducedWord, cplx> coeffs_;
};

/// Coefficient of e.
cplx trace_tau(const GroupFunction& f);
/// (sum_g |f(g)|^2 (1 + |g|)^{2s})^{1/2}.
double rd_norm(const GroupFunction& f, double s);

enum class OrbitKind { fixed, infinite };
/// Orbits of the generator shift: singletons (only e) or infinite.
OrbitKind orbit_classify(const ReducedWord& h);

/// Number of reduced words of length <= radius on r generators.
double ball_count(int generators, int radius);

inline constexpr long kDefaultBallCap = 100000;

/// Reduced words of length <= radius over generators first..last, in
/// breadth-first order: each word of length k - 1 in order, extended on the
/// right by generators ascending, +1 before -1.
class BallBasis {
 public:
  BallBasis(int first_generator, int last_generator, int radius);

  int radius() const { return radius_; }
  int first_generator() const { return first_; }
  int last_generator() const { return last_; }
  int size() const { return static_cast<int>(words_.size()); }
  const std::vector<ReducedWord>& words() const { return words_; }
  /// -1 if the word is outside the ball.
  int index_of(const ReducedWord& w) const;

 private:
  int first_;
  int last_;
  int radius_;
  std::vector<ReducedWord> words_;
  std::unordered_map<ReducedWord, int, ReducedWordHash> index_;
};

/// Left convolution by f from span{delta_g : |g| <= R - p}, restricted to
/// at most `ball_cap` basis vectors, into the span of the image words.
/// The action is exact on this domain, so the largest singular value is a
/// lower bound for ||lambda(f)||.
struct ConvolutionMatrix {
  SparseMatrix matrix;
  int requested_radius = 0;
  int domain_radius = 0;   // effective, after the cap
  int domain_dim = 0;
  int codomain_dim = 0;
  std::vector<ReducedWord> codomain;  // row labels
};

/// Generator window of the support; {0, 0} for functions supported on e.
std::pair<int, int> generator_window(const GroupFunction& f);

/// DomainError if R < max length of the support or f is empty;
/// CapacityError if even the radius-0 domain does not fit.
ConvolutionMatrix convolution_operator(const GroupFunction& f, int radius, long ball_cap = kDefaultBallCap);

struct GroupNormReport {
  int p = 0;
  double lower = 0.0;   // certified
  double l2 = 0.0;      // ||f||_2 = ||f * delta_e||, the delta_e witness
  double upper = 0.0;   // (p + 1) ||f||_2
  int domain_radius = 0;
  int domain_dim = 0;
  bool passed = false;  // l2 <= lower <= upper up to roundoff
  double seconds = 0.0;
};

/// DomainError unless f is supported on words of one length.
GroupNormReport haagerup_check(const GroupFunction& f, int radius, long ball_cap = kDefaultBallCap,
                               std::uint64_t seed = kDefaultSeed);

/// (1/n) sum_{k<n} delta_{beta^k(h)}.
GroupFunction shift_average(const ReducedWord& h, int n);

struct GroupShiftRow {
  int n = 0;
  int p = 0;
  double lower = 0.0;
  double l2 = 0.0;
  double upper = 0.0;  // (p + 1) / sqrt(n), and 1 for h = e
  int domain_radius = 0;
  int domain_dim = 0;
  bool passed = false;
};

GroupShiftRow shift_average_group(const ReducedWord& h, int n, int radius, long ball_cap = kDefaultBallCap,
                                  std::uint64_t seed = kDefaultSeed);

struct RdReport {
  std::vector<GroupNormReport> per_length;
  double lower = 0.0;           // certified lower bound for ||lambda(f)||
  double composed_upper = 0.0;  // sum over lengths of (p + 1) ||f_p||_2
  std::vector<std::pair<double, double>> sobolev;  // (s, rd_norm(f, s))
  bool passed = false;
};

RdReport rd_report(const GroupFunction& f, int radius, const std::vector<double>& s_values,
                   long ball_cap = kDefaultBallCap, std::uint64_t seed = kDefaultSeed);

/// {"terms": [{"word": "g0 g1^-1", "coeff": c}, ...]}.
GroupFunction group_function_from_json(const nlohmann::json& j, const std::string& pointer = "");

}  // namespace afp
