#pragma once

// Free shift on copies of one algebra indexed by the integers, ergodic
// averages of words, their decay bound, and the Cesaro expectation.
//
// Only the window of indices touched by the shifted copies is
// instantiated; the Fock dimension depends on nothing else.

#include <cstdint>
#include <vector>

#include "afp/word.hpp"

namespace afp {

/// Relative slack for floating-point comparisons in inequality checks.
inline constexpr double kInequalitySlack = 1e-12;

/// All indices increased by k; letters unchanged.
Word shift_word(const Word& w, int k);

/// {alpha^k(w) : 0 <= k < n}. n >= 1 (DomainError otherwise).
WordFamily average_family(const Word& w, int n);

/// Smallest window [first, last] holding every shift alpha^k(w), k < n,
/// widened to at least two indices.
std::pair<int, int> shift_window(const Word& w, int n);

struct ShiftExperiment {
  AlgebraWithExpectation algebra;  // the factor placed on every index
  Word prototype;
  int n_max = 1;
  int max_level = 0;
  FockOptions options;
};

struct DecayRow {
  int n = 0;
  double lower = 0.0;        // certified lower bound of ||(1/n) sum_k alpha^k(w)||
  double ell2_vacuum = 0.0;  // ||(1/n) sum_k alpha^k(w) 1_B||
  double paper_bound = 0.0;  // (2p + 1) n^{-1/2} prod ||a_i||
  double ratio = 0.0;        // lower / paper_bound
  int window_first = 0;
  int window_last = 0;
  int fock_dim = 0;
  bool passed = false;
};

struct DecayCurve {
  std::vector<DecayRow> rows;
  bool all_passed() const;
};

/// (2p + 1) n^{-1/2} prod ||a_i||.
double decay_bound(const Word& w, int n);

/// One point of the curve, on its own window. CapacityError (with a
/// suggestion) if the window does not fit under the cap.
DecayRow decay_point(const ShiftExperiment& exp, int n, std::uint64_t seed = kDefaultSeed);
DecayCurve decay_curve(const ShiftExperiment& exp, std::uint64_t seed = kDefaultSeed);

/// a = b + sum_j c_j w_j with b in B and words w_j.
struct Mixture {
  Matrix b;
  std::vector<std::pair<cplx, Word>> words;
};

struct CesaroPoint {
  int n = 0;
  /// Certified lower bound of ||average - phi(a)||, i.e. of the averaged word part.
  double lower = 0.0;
  /// Sum over terms of |c_j| (2p_j + 1) n^{-1/2} prod ||a_i||.
  double upper_envelope = 0.0;
  std::vector<double> term_upper;
};

struct CesaroResult {
  /// b plus the state of the averaged word part.
  Matrix value;
  /// One point per n' = 1..n.
  std::vector<CesaroPoint> trace;
};

/// The B-part of the n-th Cesaro average of a. Terms are averaged separately;
/// b is fixed by the shift and is returned as given.
CesaroResult cesaro_expectation(const AlgebraWithExpectation& algebra, const Mixture& a, int n, int max_level,
                                FockOptions options = {}, std::uint64_t seed = kDefaultSeed);

}  // namespace afp
