#include "afp/ergodic.hpp"

#include <algorithm>
#include <cmath>

namespace afp {

Word shift_word(const Word& w, int k) {
  std::vector<CenteredElement> letters = w.letters();
  for (auto& a : letters) a.owner += k;
  return Word(std::move(letters));
}

WordFamily average_family(const Word& w, int n) {
  if (n < 1) throw DomainError("average length must be positive");
  WordFamily f;
  for (int k = 0; k < n; ++k) f.words.push_back(shift_word(w, k));
  return f;
}

std::pair<int, int> shift_window(const Word& w, int n) {
  const auto idx = w.indices();
  const int first = *std::min_element(idx.begin(), idx.end());
  const int last = *std::max_element(idx.begin(), idx.end()) + std::max(n, 1) - 1;
  return {first, std::max(last, first + 1)};
}

bool DecayCurve::all_passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const DecayRow& r) { return r.passed; });
}

double decay_bound(const Word& w, int n) {
  return (2.0 * w.length() + 1.0) / std::sqrt(static_cast<double>(n)) * w.norm_product();
}

DecayRow decay_point(const ShiftExperiment& exp, int n, std::uint64_t seed) {
  if (exp.max_level < exp.prototype.length())
    throw DomainError("truncation level must be at least the word length");
  const auto [first, last] = shift_window(exp.prototype, n);
  std::vector<int> centered(static_cast<std::size_t>(last - first + 1), 0);
  {
    const GnsModule probe(exp.algebra);
    std::fill(centered.begin(), centered.end(), probe.centered_dim());
    const double need = estimated_fock_dim(centered, probe.unit_dim(), exp.max_level);
    if (need > static_cast<double>(exp.options.max_dim))
      throw CapacityError("window [" + std::to_string(first) + ", " + std::to_string(last) + "] at M = " +
                              std::to_string(exp.max_level) + " needs dimension " +
                              std::to_string(static_cast<long long>(need)) + "; lower n_max or M",
                          need);
  }
  const FockContext ctx = build_fock_copies(exp.algebra, first, last, exp.max_level, exp.options);
  const WordFamily fam = average_family(exp.prototype, n);
  const FockOperator avg = cplx(1.0 / n) * family_operator(ctx, fam);

  DecayRow row;
  row.n = n;
  row.window_first = first;
  row.window_last = last;
  row.fock_dim = ctx.total_dim();
  row.lower = norm_lower(ctx, avg, exp.prototype.length(), seed).lower;
  row.ell2_vacuum = Vector(avg.matrix * ctx.vacuum()).norm();
  row.paper_bound = decay_bound(exp.prototype, n);
  row.ratio = row.paper_bound > 0 ? row.lower / row.paper_bound : 0.0;
  row.passed = row.lower <= row.paper_bound * (1.0 + kInequalitySlack);
  return row;
}

DecayCurve decay_curve(const ShiftExperiment& exp, std::uint64_t seed) {
  if (exp.n_max < 1) throw DomainError("n_max must be positive");
  DecayCurve curve;
  for (int n = 1; n <= exp.n_max; ++n) curve.rows.push_back(decay_point(exp, n, seed + static_cast<std::uint64_t>(n)));
  return curve;
}

CesaroResult cesaro_expectation(const AlgebraWithExpectation& algebra, const Mixture& a, int n, int max_level,
                                FockOptions options, std::uint64_t seed) {
  if (n < 1) throw DomainError("average length must be positive");
  if (!algebra.subalgebra().contains(a.b)) throw DomainError("the B part of the mixture is not in B");
  CesaroResult result;
  result.value = a.b;
  if (a.words.empty()) {
    for (int k = 1; k <= n; ++k) result.trace.push_back({k, 0.0, 0.0, {}});
    return result;
  }
  int spread = 0;
  for (const auto& [c, w] : a.words) spread = std::max(spread, w.length());

  for (int k = 1; k <= n; ++k) {
    int first = 0;
    int last = 0;
    bool init = false;
    for (const auto& [c, w] : a.words) {
      const auto [f, l] = shift_window(w, k);
      first = init ? std::min(first, f) : f;
      last = init ? std::max(last, l) : l;
      init = true;
    }
    const FockContext ctx = build_fock_copies(algebra, first, last, max_level, options);
    FockOperator part = zero_op(ctx);
    CesaroPoint point;
    point.n = k;
    for (const auto& [c, w] : a.words) {
      part = part + cplx(1.0 / k) * c * family_operator(ctx, average_family(w, k));
      point.term_upper.push_back(std::abs(c) * decay_bound(w, k));
    }
    for (double t : point.term_upper) point.upper_envelope += t;
    point.lower = norm_lower(ctx, part, spread, seed + static_cast<std::uint64_t>(k)).lower;
    if (k == n) result.value = a.b + phi_state(ctx, part);
    result.trace.push_back(std::move(point));
  }
  return result;
}

}  // namespace afp
