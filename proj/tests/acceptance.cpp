// Acceptance run: one PASS/FAIL line per criterion.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include "afp/ergodic.hpp"
#include "afp/experiment.hpp"
#include "afp/free_group.hpp"

using namespace afp;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::map<std::string, RunReport> first_runs;

const RunReport& run_preset(const std::string& name) {
  auto it = first_runs.find(name);
  if (it != first_runs.end()) return it->second;
  const Preset* p = find_preset(name);
  if (!p) throw std::runtime_error("missing preset " + name);
  return first_runs.emplace(name, run_experiment(parse_config(p->config))).first->second;
}

bool report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  return ok;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

AlgebraWithExpectation two_point() { return presets::function_algebra_with_state({0.5, 0.5}); }

Word unit_word(const std::vector<int>& indices) {
  Matrix u = Matrix::Zero(2, 2);
  u(0, 0) = 1.0;
  u(1, 1) = -1.0;
  std::vector<CenteredElement> letters;
  for (int i : indices) letters.push_back(as_centered(two_point(), u, i));
  return Word(letters);
}

bool criterion1() {
  const auto t0 = Clock::now();
  std::size_t rows = 0, failed = 0;
  double worst = 0.0;
  bool counts = true;
  for (const char* name : {"two-point-two-factors", "two-point-three-factors", "m2-diagonal"}) {
    const RunReport& r = run_preset(name);
    counts = counts && r.details.value("words", 0) == 100 && r.details["fock"].value("max_level", 0) == 6;
    worst = std::max(worst, r.details.value("worst_relative_residual", 1.0));
    for (const auto& c : r.checks) {
      ++rows;
      failed += c.passed ? 0 : 1;
    }
  }
  const double secs = since(t0);
  return report(1, counts && failed == 0 && rows > 0 && worst < 1e-8 && secs < 60.0,
                "3 contexts x 100 words, " + std::to_string(rows) + " (word, m) rows, " + std::to_string(failed) +
                    " failures, " + fmt("worst residual/prod ||a_i|| %.3g, %.1f s", worst, secs));
}

bool criteria2and3() {
  const auto t0 = Clock::now();
  int families = 0, norm_fail = 0, block_fail = 0;
  double max_ratio = 0.0, max_block_ratio = 0.0;
  for (const char* name : {"haagerup-sweep", "haagerup-sweep-m2"}) {
    const RunReport& r = run_preset(name);
    for (const auto& c : r.checks) {
      const bool is_norm = c.name.find(" norm") != std::string::npos;
      if (is_norm) {
        ++families;
        norm_fail += c.passed ? 0 : 1;
        max_ratio = std::max(max_ratio, c.lower / c.upper);
      } else {
        block_fail += c.passed ? 0 : 1;
        if (c.upper > 0) max_block_ratio = std::max(max_block_ratio, c.lower / c.upper);
      }
    }
  }
  const double secs = since(t0);
  const bool ok2 = report(2, families == 50 && norm_fail == 0 && secs < 120.0,
                          std::to_string(families) + " families, " + std::to_string(norm_fail) +
                              fmt(" violations, max lower/upper %.4f, %.1f s", max_ratio, secs));
  const bool ok3 = report(3, families == 50 && block_fail == 0,
                          std::to_string(block_fail) + fmt(" block violations, max ||P_r f P_m||^2 / gamma^2 %.6f",
                                                           max_block_ratio));
  return ok2 && ok3;
}

bool criterion4() {
  bool ok = true;
  double worst_ell2 = 0.0, max_ratio = 0.0;
  int rows = 0;
  for (const auto& proto : {std::vector<int>{0}, std::vector<int>{0, 1}}) {
    const ShiftExperiment exp{two_point(), unit_word(proto), 16, 3, {}};
    const DecayCurve c = decay_curve(exp);
    ok = ok && c.rows.size() == 16 && c.all_passed();
    const int p = static_cast<int>(proto.size());
    for (const DecayRow& r : c.rows) {
      ++rows;
      ok = ok && r.lower <= (2.0 * p + 1.0) / std::sqrt(r.n) * (1 + kInequalitySlack);
      max_ratio = std::max(max_ratio, r.ratio);
      if (p == 1) worst_ell2 = std::max(worst_ell2, std::abs(r.ell2_vacuum - 1.0 / std::sqrt(r.n)));
    }
  }
  ok = ok && worst_ell2 <= 1e-12;
  return report(4, ok, std::to_string(rows) + fmt(" rows, max lower/bound %.4f, max |ell2 - n^-1/2| %.2g", max_ratio,
                                                   worst_ell2));
}

bool criterion5() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  const ReducedWord g0 = ReducedWord::generator(0);
  for (int n : {1, 4, 9, 16}) {
    const GroupShiftRow r = shift_average_group(g0, n, 8);
    const double lo = 1.0 / std::sqrt(n), hi = 2.0 / std::sqrt(n);
    ok = ok && r.lower >= lo * (1 - kInequalitySlack) && r.lower <= hi * (1 + kInequalitySlack) &&
         std::abs(r.l2 - lo) <= 1e-15;
    detail += fmt("n=%g lower %.4f in [%.4f, ", n, r.lower, lo) + fmt("%.4f]; ", hi);
  }
  const double secs = since(t0);
  ok = ok && secs < 60.0;
  return report(5, ok, detail + fmt("%.1f s", secs));
}

bool criterion6() {
  std::size_t rows = 0, failed = 0;
  double worst = 0.0;
  for (const char* name : {"fock-report", "fock-report-m2"}) {
    const RunReport& r = run_preset(name);
    for (const auto& c : r.checks) {
      ++rows;
      failed += c.passed ? 0 : 1;
      worst = std::max(worst, c.residual);
    }
  }
  return report(6, failed == 0 && rows > 0 && worst <= 1e-9,
                std::to_string(rows) + " identities, " + std::to_string(failed) + fmt(" failures, worst residual %.2g", worst));
}

bool criterion7() {
  bool exact = true;
  Matrix b(2, 2);
  b << 0.375, 0.0, 0.0, 0.375;
  for (int n = 1; n <= 16; ++n) exact = exact && cesaro_expectation(two_point(), Mixture{b, {}}, n, 3).value == b;
  const CesaroResult r = cesaro_expectation(two_point(), Mixture{Matrix::Zero(2, 2), {{1.0, unit_word({0, 1})}}}, 16, 3);
  double worst = 0.0;
  for (int n = 1; 4 * n <= 16; ++n) {
    const double ratio = r.trace[static_cast<std::size_t>(n - 1)].upper_envelope /
                         r.trace[static_cast<std::size_t>(4 * n - 1)].upper_envelope;
    worst = std::max(worst, std::abs(ratio - 2.0));
  }
  const bool word_state = r.value.norm() <= 1e-12;
  return report(7, exact && word_state && worst <= 1e-12,
                std::string(exact ? "b returned exactly" : "b not returned exactly") +
                    fmt(", |phi(word average)| %.2g, max |ratio - 2| %.2g", r.value.norm(), worst));
}

bool criterion8() {
  int presets_checked = 0, mismatches = 0;
  std::string bad;
  const int saved = omp_get_max_threads();
  omp_set_num_threads(saved > 1 ? 1 : 2);
  for (const Preset& p : experiment_presets()) {
    const std::string first = to_csv(run_preset(p.name).table);
    const std::string second = to_csv(run_experiment(parse_config(p.config)).table);
    ++presets_checked;
    if (first != second) {
      ++mismatches;
      bad += " " + p.name;
    }
  }
  omp_set_num_threads(saved);
  return report(8, mismatches == 0 && presets_checked > 0,
                std::to_string(presets_checked) + " presets run twice, " + std::to_string(mismatches) + " differ" + bad);
}

}  // namespace

int main() {
  bool all = true;
  auto guard = [&](int id, bool (*f)()) {
    try {
      all = f() && all;
    } catch (const std::exception& e) {
      report(id, false, std::string("error: ") + e.what());
      all = false;
    }
  };
  guard(1, criterion1);
  guard(2, criteria2and3);
  guard(4, criterion4);
  guard(5, criterion5);
  guard(6, criterion6);
  guard(7, criterion7);
  guard(8, criterion8);
  return all ? 0 : 1;
}
