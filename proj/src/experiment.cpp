#include "afp/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "afp/ergodic.hpp"
#include "afp/errors.hpp"
#include "afp/word.hpp"

namespace afp {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// ---------------------------------------------------------------------------
// JSON helpers

const json& require(const json& j, const std::string& key, const std::string& pointer) {
  if (!j.is_object() || !j.contains(key)) throw ParseError("missing \"" + key + "\"", pointer + "/" + key);
  return j[key];
}

long get_int(const json& j, const std::string& key, const std::string& pointer, std::optional<long> fallback = {},
             long min_value = 0) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ParseError("missing \"" + key + "\"", pointer + "/" + key);
  }
  const json& v = j[key];
  if (!v.is_number_integer()) throw ParseError("\"" + key + "\" must be an integer", pointer + "/" + key);
  const long x = v.get<long>();
  if (x < min_value)
    throw ParseError("\"" + key + "\" must be at least " + std::to_string(min_value), pointer + "/" + key);
  return x;
}

AlgebraWithExpectation parse_algebra(const json& j, const std::string& pointer) {
  try {
    return algebra_from_json(j, pointer);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what(), pointer);
  }
}

// ---------------------------------------------------------------------------
// Fock contexts

struct ContextSpec {
  std::vector<std::pair<int, AlgebraWithExpectation>> factors;
  bool shared = false;  // copies of one algebra
  int max_level = 0;

  const AlgebraWithExpectation* factor(int k) const {
    for (const auto& [i, a] : factors)
      if (i == k) return &a;
    return nullptr;
  }

  FockContext build(long max_dim) const {
    FockOptions opts;
    opts.max_dim = max_dim;
    if (shared) return build_fock_copies(factors.front().second, factors.front().first, factors.back().first,
                                         max_level, opts);
    std::map<int, AlgebraWithExpectation> m;
    for (const auto& [i, a] : factors) m.emplace(i, a);
    return build_fock(m, max_level, opts);
  }
};

ContextSpec parse_context(const json& p, const std::string& pointer) {
  ContextSpec c;
  if (p.contains("copies")) {
    const json& cj = p["copies"];
    const std::string cp = pointer + "/copies";
    if (!cj.is_object()) throw ParseError("\"copies\" must be an object", cp);
    const AlgebraWithExpectation a = parse_algebra(require(cj, "algebra", cp), cp + "/algebra");
    const long first = get_int(cj, "first", cp, 0L, -1000000);
    const long last = get_int(cj, "last", cp, {}, -1000000);
    if (last <= first) throw ParseError("a free product needs at least two indices", cp + "/last");
    for (long i = first; i <= last; ++i) c.factors.emplace_back(static_cast<int>(i), a);
    c.shared = true;
  } else if (p.contains("factors")) {
    const json& fj = p["factors"];
    const std::string fp = pointer + "/factors";
    if (!fj.is_array() || fj.size() < 2) throw ParseError("\"factors\" must list at least two factors", fp);
    for (std::size_t i = 0; i < fj.size(); ++i) {
      const std::string ip = fp + "/" + std::to_string(i);
      const long k = get_int(fj[i], "index", ip, {}, -1000000);
      for (const auto& [existing, a] : c.factors)
        if (existing == k) throw ParseError("duplicate factor index", ip + "/index");
      c.factors.emplace_back(static_cast<int>(k), parse_algebra(require(fj[i], "algebra", ip), ip + "/algebra"));
    }
    std::sort(c.factors.begin(), c.factors.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  } else {
    throw ParseError("parameters need \"copies\" or \"factors\"", pointer + "/factors");
  }
  c.max_level = static_cast<int>(get_int(p, "M", pointer));
  return c;
}

std::function<const AlgebraWithExpectation*(int)> factor_lookup(const ContextSpec& c) {
  return [&c](int k) { return c.factor(k); };
}

// ---------------------------------------------------------------------------
// Parallel item runner: results come back in declared order.

template <typename T, typename F>
std::vector<T> run_items(int count, F&& f) {
  std::vector<std::optional<T>> out(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> result;
  for (auto& o : out) result.push_back(std::move(*o));
  return result;
}

std::string status(bool ok) { return ok ? "pass" : "fail"; }
std::string itos(long long x) { return std::to_string(x); }

constexpr double kIdentityTolerance = 1e-9;

// ---------------------------------------------------------------------------
// validate-algebra

struct ValidateParams {
  std::vector<AlgebraWithExpectation> algebras;
};

ValidateParams parse_validate(const json& p) {
  const std::string ptr = "/parameters";
  const json& a = require(p, "algebras", ptr);
  if (!a.is_array() || a.empty()) throw ParseError("\"algebras\" must be a nonempty list", ptr + "/algebras");
  ValidateParams v;
  for (std::size_t i = 0; i < a.size(); ++i) v.algebras.push_back(parse_algebra(a[i], ptr + "/algebras/" + std::to_string(i)));
  return v;
}

void run_validate(const ValidateParams& v, const ExperimentConfig& cfg, RunReport& rep) {
  rep.table.header = {"algebra", "name", "check", "status", "residual"};
  const auto reports = run_items<ValidationReport>(static_cast<int>(v.algebras.size()), [&](int i) {
    return validate_expectation(v.algebras[static_cast<std::size_t>(i)], cfg.seed + static_cast<std::uint64_t>(i));
  });
  rep.details["algebras"] = json::array();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& name = v.algebras[i].name();
    for (const auto& c : reports[i].checks) {
      rep.table.rows.push_back({itos(static_cast<long long>(i)), name, c.name, status(c.passed), format_double(c.residual)});
      rep.checks.push_back({"algebra " + std::to_string(i) + " " + c.name, c.passed, 0.0, 0.0, c.residual, 0.0});
    }
    rep.details["algebras"].push_back({{"index", i}, {"name", name}, {"valid", reports[i].all_passed()}});
  }
}

// ---------------------------------------------------------------------------
// fock-report

struct IdentityRow {
  std::string check;
  int factor;
  double residual;
  double tolerance;
};

std::vector<IdentityRow> operator_identities(const FockContext& ctx, int k, std::uint64_t seed) {
  const GnsModule& mod = ctx.module(k);
  const AlgebraWithExpectation& spec = mod.source();
  const int big_m = ctx.max_level();
  std::vector<IdentityRow> rows;

  const CenteredElement a = center(spec, random_element(spec.algebra(), seed), k);
  const ModuleVector y = mod.hat(a.matrix);
  const double ynorm = module_norm(mod, y);
  const double scale = std::max(1.0, ynorm * ynorm);
  const FockOperator psi = op_psi(ctx, k, y);
  const FockOperator q = proj_first_index(ctx, k);
  const FockOperator one = identity_op(ctx);
  const FockOperator below = big_m >= 1 ? proj_levels_upto(ctx, big_m - 1) : zero_op(ctx);

  const FockOperator lhs = adjoint(psi) * psi * below;
  const FockOperator rhs = op_left_b(ctx, inner_product(mod, y, y)) * (one - q) * below;
  rows.push_back({"psi*psi = sigma(<y,y>)(1 - Q_k)", k, SparseMatrix(lhs.matrix - rhs.matrix).norm(),
                  kIdentityTolerance * scale});
  if (big_m >= 1) {
    const double pn = norm_lower(ctx, psi, 1, seed).lower;
    rows.push_back({"||psi(y)|| = ||y||", k, std::abs(pn - ynorm), kIdentityTolerance * std::max(1.0, ynorm)});
  }
  const Matrix unit = Matrix::Identity(spec.ambient_dim(), spec.ambient_dim());
  rows.push_back({"rho(1) = Q_k", k, SparseMatrix(op_rho(ctx, k, unit).matrix - q.matrix).norm(), kIdentityTolerance});
  rows.push_back({"lambda(1) = 1", k, SparseMatrix(op_lambda(ctx, k, unit).matrix - one.matrix).norm(),
                  kIdentityTolerance});
  double comm = 0.0;
  for (int m = 0; m <= big_m; ++m) {
    const FockOperator p = proj_level(ctx, m);
    comm = std::max(comm, SparseMatrix((q * p).matrix - (p * q).matrix).norm());
  }
  rows.push_back({"[Q_k, P_m] = 0", k, comm, kIdentityTolerance});
  rows.push_back({"psi(y)* P_0 = 0", k, SparseMatrix((adjoint(psi) * proj_level(ctx, 0)).matrix).norm(),
                  kIdentityTolerance * std::max(1.0, ynorm)});
  return rows;
}

void run_fock_report(const ContextSpec& c, const ExperimentConfig& cfg, RunReport& rep) {
  const FockContext ctx = c.build(cfg.max_dim);
  rep.details["fock"] = ctx.summary();
  rep.table.header = {"check", "factor", "status", "residual", "tolerance"};
  const auto& idx = ctx.indices();
  const auto per = run_items<std::vector<IdentityRow>>(static_cast<int>(idx.size()), [&](int i) {
    return operator_identities(ctx, idx[static_cast<std::size_t>(i)], cfg.seed + static_cast<std::uint64_t>(i));
  });
  for (const auto& rows : per)
    for (const auto& r : rows) {
      const bool ok = r.residual < r.tolerance;
      rep.table.rows.push_back({r.check, itos(r.factor), status(ok), format_double(r.residual), format_double(r.tolerance)});
      rep.checks.push_back({r.check + " (factor " + std::to_string(r.factor) + ")", ok, 0.0, 0.0, r.residual, 0.0});
    }
}

// ---------------------------------------------------------------------------
// lemma-check

struct LemmaParams {
  ContextSpec context;
  std::optional<int> random_words;
  std::vector<json> explicit_words;
  int max_length = 4;
};

LemmaParams parse_lemma(const json& p) {
  const std::string ptr = "/parameters";
  LemmaParams l{parse_context(p, ptr), {}, {}, 4};
  l.max_length = static_cast<int>(get_int(p, "max_length", ptr, 4L, 1));
  const json& w = require(p, "words", ptr);
  if (w.is_number_integer()) {
    if (w.get<long>() < 1) throw ParseError("\"words\" must be positive", ptr + "/words");
    l.random_words = w.get<int>();
  } else if (w.is_array()) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      const std::string wp = ptr + "/words/" + std::to_string(i);
      const Word word = word_from_json(w[i], factor_lookup(l.context), wp);
      if (word.length() > l.context.max_level) throw ParseError("word is longer than M", wp);
      l.explicit_words.push_back(w[i]);
    }
  } else {
    throw ParseError("\"words\" must be a count or a list of words", ptr + "/words");
  }
  if (l.max_length > l.context.max_level) throw ParseError("max_length exceeds M", ptr + "/max_length");
  return l;
}

void run_lemma(const LemmaParams& l, const ExperimentConfig& cfg, RunReport& rep) {
  const FockContext ctx = l.context.build(cfg.max_dim);
  const int count = l.random_words ? *l.random_words : static_cast<int>(l.explicit_words.size());
  std::vector<Word> words;
  for (int i = 0; i < count; ++i) {
    if (l.random_words) {
      const int n = 1 + i % l.max_length;
      const std::uint64_t s = cfg.seed + 2ULL * static_cast<std::uint64_t>(i);
      words.push_back(random_word(ctx, random_alternating_indices(ctx, n, s), s + 1));
    } else {
      words.push_back(word_from_json(l.explicit_words[static_cast<std::size_t>(i)], ctx,
                                     "/parameters/words/" + std::to_string(i)));
    }
  }
  struct Item {
    std::vector<BigsumReport> reports;
    double seconds;
  };
  const auto items = run_items<Item>(count, [&](int i) {
    const auto t0 = Clock::now();
    const Word& w = words[static_cast<std::size_t>(i)];
    Item it;
    for (int m = 0; m + w.length() <= ctx.max_level(); ++m) it.reports.push_back(verify_bigsum(ctx, w, m));
    it.seconds = seconds_since(t0);
    return it;
  });
  rep.table.header = {"word", "n", "indices", "m", "M", "residual", "scale", "status"};
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    const Word& w = words[static_cast<std::size_t>(i)];
    std::string idx;
    for (int k : w.indices()) idx += (idx.empty() ? "" : " ") + std::to_string(k);
    for (const auto& r : items[static_cast<std::size_t>(i)].reports) {
      rep.table.rows.push_back({itos(i), itos(w.length()), idx, itos(r.m), itos(ctx.max_level()), format_double(r.residual),
                                format_double(r.scale), status(r.passed)});
      rep.checks.push_back({"word " + std::to_string(i) + " m=" + std::to_string(r.m), r.passed, 0.0,
                            kBigsumTolerance * r.scale, r.residual,
                            items[static_cast<std::size_t>(i)].seconds / static_cast<double>(items[static_cast<std::size_t>(i)].reports.size())});
      worst = std::max(worst, r.residual / r.scale);
    }
  }
  rep.details["fock"] = {{"total_dim", ctx.total_dim()}, {"max_level", ctx.max_level()}, {"indices", ctx.indices()}};
  rep.details["words"] = count;
  rep.details["worst_relative_residual"] = worst;
}

// ---------------------------------------------------------------------------
// haagerup-sweep

struct SweepParams {
  ContextSpec context;
  std::optional<int> random_families;
  std::vector<json> explicit_families;
  int max_length = 3;
  int max_size = 6;
};

SweepParams parse_sweep(const json& p) {
  const std::string ptr = "/parameters";
  SweepParams s{parse_context(p, ptr), {}, {}, 3, 6};
  s.max_length = static_cast<int>(get_int(p, "max_length", ptr, 3L, 1));
  s.max_size = static_cast<int>(get_int(p, "max_size", ptr, 6L, 1));
  if (s.max_length > s.context.max_level) throw ParseError("max_length exceeds M", ptr + "/max_length");
  const json& f = require(p, "families", ptr);
  if (f.is_number_integer()) {
    if (f.get<long>() < 1) throw ParseError("\"families\" must be positive", ptr + "/families");
    s.random_families = f.get<int>();
  } else if (f.is_array()) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      const std::string fp = ptr + "/families/" + std::to_string(i);
      if (!f[i].is_array() || f[i].empty()) throw ParseError("a family is a nonempty list of words", fp);
      WordFamily fam;
      for (std::size_t k = 0; k < f[i].size(); ++k)
        fam.words.push_back(word_from_json(f[i][k], factor_lookup(s.context), fp + "/" + std::to_string(k)));
      try {
        if (fam.length() > s.context.max_level) throw ParseError("word length exceeds M", fp);
      } catch (const DomainError& e) {
        throw ParseError(e.what(), fp);
      }
      if (auto clash = find_separation_clash(fam)) haagerup_upper(fam);  // throws HypothesisError
      s.explicit_families.push_back(f[i]);
    }
  } else {
    throw ParseError("\"families\" must be a count or a list of families", ptr + "/families");
  }
  return s;
}

struct SweepItem {
  int n = 0;
  int size = 0;
  double lower = 0.0;
  double upper = 0.0;
  double gamma_sq = 0.0;
  double block_max_sq = 0.0;
  int blocks = 0;
  double seconds = 0.0;
};

void run_sweep(const SweepParams& s, const ExperimentConfig& cfg, RunReport& rep) {
  const FockContext ctx = s.context.build(cfg.max_dim);
  const int count = s.random_families ? *s.random_families : static_cast<int>(s.explicit_families.size());
  const int pool = static_cast<int>(ctx.indices().size());
  std::vector<WordFamily> fams;
  for (int i = 0; i < count; ++i) {
    if (s.random_families) {
      const int n = 1 + i % s.max_length;
      const int cap = std::min(s.max_size, pool);
      const int size = 1 + (i / s.max_length + 3 * i) % cap;
      fams.push_back(random_separated_family(ctx, n, size, cfg.seed + static_cast<std::uint64_t>(i)));
    } else {
      WordFamily fam;
      const json& fj = s.explicit_families[static_cast<std::size_t>(i)];
      for (std::size_t k = 0; k < fj.size(); ++k)
        fam.words.push_back(word_from_json(fj[k], ctx, "/parameters/families/" + std::to_string(i) + "/" + std::to_string(k)));
      fams.push_back(std::move(fam));
    }
  }
  const auto items = run_items<SweepItem>(count, [&](int i) {
    const auto t0 = Clock::now();
    const WordFamily& fam = fams[static_cast<std::size_t>(i)];
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    SweepItem it;
    it.n = fam.length();
    it.size = static_cast<int>(fam.size());
    it.upper = haagerup_upper(fam);
    const double g = gamma(fam);
    it.gamma_sq = g * g;
    const FockOperator f = family_operator(ctx, fam);
    it.lower = norm_lower(ctx, f, it.n, seed).lower;
    for (int m = 0; m + it.n <= ctx.max_level(); ++m)
      for (int r = 0; r <= ctx.max_level(); ++r) {
        const double b = block_norm(ctx, f, r, m, seed);
        it.block_max_sq = std::max(it.block_max_sq, b * b);
        ++it.blocks;
      }
    it.seconds = seconds_since(t0);
    return it;
  });
  rep.table.header = {"family", "n", "size", "M", "lower", "upper", "ratio", "gamma_sq", "block_max_sq", "block_ratio",
                      "blocks", "norm_status", "block_status"};
  double worst_ratio = 0.0;
  for (int i = 0; i < count; ++i) {
    const SweepItem& it = items[static_cast<std::size_t>(i)];
    const bool norm_ok = it.lower <= it.upper * (1.0 + kInequalitySlack);
    const bool block_ok = it.block_max_sq <= it.gamma_sq * (1.0 + kInequalitySlack);
    const double ratio = it.upper > 0 ? it.lower / it.upper : 0.0;
    const double bratio = it.gamma_sq > 0 ? it.block_max_sq / it.gamma_sq : 0.0;
    worst_ratio = std::max(worst_ratio, ratio);
    rep.table.rows.push_back({itos(i), itos(it.n), itos(it.size), itos(ctx.max_level()), format_double(it.lower),
                              format_double(it.upper), format_double(ratio), format_double(it.gamma_sq),
                              format_double(it.block_max_sq), format_double(bratio), itos(it.blocks), status(norm_ok),
                              status(block_ok)});
    rep.checks.push_back({"family " + std::to_string(i) + " norm", norm_ok, it.lower, it.upper, 0.0, it.seconds});
    rep.checks.push_back({"family " + std::to_string(i) + " blocks", block_ok, it.block_max_sq, it.gamma_sq, 0.0, 0.0});
  }
  rep.details["fock"] = {{"total_dim", ctx.total_dim()}, {"max_level", ctx.max_level()}, {"indices", ctx.indices()}};
  rep.details["families"] = count;
  rep.details["largest_lower_over_upper"] = worst_ratio;
}

// ---------------------------------------------------------------------------
// ergodic-decay

struct DecayParams {
  AlgebraWithExpectation algebra;
  json prototype;
  int n_max;
  int max_level;
};

Word parse_prototype(const json& j, const AlgebraWithExpectation& a, const std::string& pointer) {
  return word_from_json(j, [&a](int) { return &a; }, pointer);
}

DecayParams parse_decay(const json& p) {
  const std::string ptr = "/parameters";
  DecayParams d{parse_algebra(require(p, "algebra", ptr), ptr + "/algebra"), require(p, "prototype", ptr),
                static_cast<int>(get_int(p, "n_max", ptr, {}, 1)), static_cast<int>(get_int(p, "M", ptr))};
  const Word w = parse_prototype(d.prototype, d.algebra, ptr + "/prototype");
  if (w.length() > d.max_level) throw ParseError("M must be at least the word length", ptr + "/M");
  return d;
}

void run_decay(const DecayParams& d, const ExperimentConfig& cfg, RunReport& rep) {
  ShiftExperiment exp{d.algebra, parse_prototype(d.prototype, d.algebra, "/parameters/prototype"), d.n_max, d.max_level,
                      FockOptions{cfg.max_dim}};
  const auto rows = run_items<std::pair<DecayRow, double>>(d.n_max, [&](int i) {
    const auto t0 = Clock::now();
    DecayRow r = decay_point(exp, i + 1, cfg.seed + static_cast<std::uint64_t>(i));
    return std::make_pair(r, seconds_since(t0));
  });
  rep.table.header = {"n", "lower", "ell2_vacuum", "paper_bound", "ratio", "window_first", "window_last", "fock_dim",
                      "status"};
  for (const auto& [r, secs] : rows) {
    rep.table.rows.push_back({itos(r.n), format_double(r.lower), format_double(r.ell2_vacuum),
                              format_double(r.paper_bound), format_double(r.ratio), itos(r.window_first),
                              itos(r.window_last), itos(r.fock_dim), status(r.passed)});
    rep.checks.push_back({"n=" + std::to_string(r.n), r.passed, r.lower, r.paper_bound, 0.0, secs});
  }
  rep.details["word_length"] = exp.prototype.length();
  rep.details["letter_norm_product"] = exp.prototype.norm_product();
}

// ---------------------------------------------------------------------------
// group kinds

struct GroupHaagerupParams {
  std::vector<GroupFunction> functions;
  int radius;
};

GroupHaagerupParams parse_group_haagerup(const json& p) {
  const std::string ptr = "/parameters";
  GroupHaagerupParams g{{}, static_cast<int>(get_int(p, "R", ptr))};
  const json& f = require(p, "functions", ptr);
  if (!f.is_array() || f.empty()) throw ParseError("\"functions\" must be a nonempty list", ptr + "/functions");
  for (std::size_t i = 0; i < f.size(); ++i) {
    const std::string fp = ptr + "/functions/" + std::to_string(i);
    GroupFunction fn = group_function_from_json(f[i], fp);
    if (fn.empty()) throw ParseError("function is zero", fp);
    if (fn.lengths().size() != 1) throw ParseError("support must have a single word length", fp);
    if (fn.max_length() > g.radius) throw ParseError("R is below the support length", ptr + "/R");
    g.functions.push_back(std::move(fn));
  }
  return g;
}

void run_group_haagerup(const GroupHaagerupParams& g, const ExperimentConfig& cfg, RunReport& rep) {
  const auto reps = run_items<GroupNormReport>(static_cast<int>(g.functions.size()), [&](int i) {
    return haagerup_check(g.functions[static_cast<std::size_t>(i)], g.radius, cfg.ball_cap,
                          cfg.seed + static_cast<std::uint64_t>(i));
  });
  rep.table.header = {"function", "p", "lower", "l2", "upper", "ratio", "R", "domain_radius", "domain_dim", "status"};
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const auto& r = reps[i];
    rep.table.rows.push_back({itos(static_cast<long long>(i)), itos(r.p), format_double(r.lower), format_double(r.l2),
                              format_double(r.upper), format_double(r.lower / r.upper), itos(g.radius),
                              itos(r.domain_radius), itos(r.domain_dim), status(r.passed)});
    rep.checks.push_back({"function " + std::to_string(i), r.passed, r.lower, r.upper, 0.0, r.seconds});
  }
}

struct GroupShiftParams {
  ReducedWord h;
  std::vector<int> ns;
  int radius;
};

GroupShiftParams parse_group_shift(const json& p) {
  const std::string ptr = "/parameters";
  GroupShiftParams g;
  const json& w = require(p, "word", ptr);
  if (!w.is_string()) throw ParseError("\"word\" must be a string", ptr + "/word");
  try {
    g.h = ReducedWord::parse(w.get<std::string>());
  } catch (const ConfigurationError& e) {
    throw ParseError(e.what(), ptr + "/word");
  }
  const json& n = require(p, "n", ptr);
  if (n.is_number_integer()) {
    if (n.get<long>() < 1) throw ParseError("\"n\" must be positive", ptr + "/n");
    for (int k = 1; k <= n.get<int>(); ++k) g.ns.push_back(k);
  } else if (n.is_array() && !n.empty()) {
    for (std::size_t i = 0; i < n.size(); ++i) {
      if (!n[i].is_number_integer() || n[i].get<long>() < 1)
        throw ParseError("averaging lengths must be positive integers", ptr + "/n/" + std::to_string(i));
      g.ns.push_back(n[i].get<int>());
    }
  } else {
    throw ParseError("\"n\" must be a positive integer or a list of them", ptr + "/n");
  }
  g.radius = static_cast<int>(get_int(p, "R", ptr));
  if (g.radius < g.h.length()) throw ParseError("R is below the word length", ptr + "/R");
  return g;
}

void run_group_shift(const GroupShiftParams& g, const ExperimentConfig& cfg, RunReport& rep) {
  const auto rows = run_items<GroupShiftRow>(static_cast<int>(g.ns.size()), [&](int i) {
    return shift_average_group(g.h, g.ns[static_cast<std::size_t>(i)], g.radius, cfg.ball_cap,
                               cfg.seed + static_cast<std::uint64_t>(i));
  });
  rep.table.header = {"n", "p", "lower", "l2", "upper", "ratio", "R", "domain_radius", "domain_dim", "status"};
  for (const auto& r : rows) {
    rep.table.rows.push_back({itos(r.n), itos(r.p), format_double(r.lower), format_double(r.l2), format_double(r.upper),
                              format_double(r.lower / r.upper), itos(g.radius), itos(r.domain_radius),
                              itos(r.domain_dim), status(r.passed)});
    rep.checks.push_back({"n=" + std::to_string(r.n), r.passed, r.lower, r.upper, 0.0, 0.0});
  }
  rep.details["word"] = g.h.to_string();
  rep.details["orbit"] = orbit_classify(g.h) == OrbitKind::fixed ? "fixed" : "infinite";
}

struct RdParams {
  GroupFunction f;
  int radius;
  std::vector<double> s;
};

RdParams parse_rd(const json& p) {
  const std::string ptr = "/parameters";
  RdParams r{group_function_from_json(require(p, "function", ptr), ptr + "/function"),
             static_cast<int>(get_int(p, "R", ptr)), {}};
  if (r.f.empty()) throw ParseError("function is zero", ptr + "/function");
  if (r.f.max_length() > r.radius) throw ParseError("R is below the support length", ptr + "/R");
  if (p.contains("s")) {
    const json& s = p["s"];
    if (!s.is_array()) throw ParseError("\"s\" must be a list", ptr + "/s");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i].is_number() || s[i].get<double>() < 0)
        throw ParseError("Sobolev exponents must be nonnegative numbers", ptr + "/s/" + std::to_string(i));
      r.s.push_back(s[i].get<double>());
    }
  } else {
    r.s = {0.0, 1.0, 2.0};
  }
  return r;
}

void run_rd(const RdParams& r, const ExperimentConfig& cfg, RunReport& rep) {
  const RdReport rd = rd_report(r.f, r.radius, r.s, cfg.ball_cap, cfg.seed);
  rep.table.header = {"part", "p", "s", "lower", "l2", "upper", "value", "status"};
  for (const auto& pl : rd.per_length) {
    rep.table.rows.push_back({"length", itos(pl.p), "", format_double(pl.lower), format_double(pl.l2),
                              format_double(pl.upper), "", status(pl.passed)});
    rep.checks.push_back({"length " + std::to_string(pl.p), pl.passed, pl.lower, pl.upper, 0.0, pl.seconds});
  }
  const bool total_ok = rd.lower <= rd.composed_upper * (1.0 + kInequalitySlack);
  rep.table.rows.push_back({"total", itos(r.f.max_length()), "", format_double(rd.lower), format_double(r.f.l2_norm()),
                            format_double(rd.composed_upper), "", status(total_ok)});
  rep.checks.push_back({"total", total_ok, rd.lower, rd.composed_upper, 0.0, 0.0});
  for (const auto& [s, v] : rd.sobolev)
    rep.table.rows.push_back({"sobolev", "", format_double(s), "", "", "", format_double(v), ""});
  rep.details["trace"] = complex_to_json(trace_tau(r.f));
}

// ---------------------------------------------------------------------------

void check_parameters(const std::string& kind, const json& p) {
  if (kind == "validate-algebra") parse_validate(p);
  else if (kind == "fock-report") parse_context(p, "/parameters");
  else if (kind == "lemma-check") parse_lemma(p);
  else if (kind == "haagerup-sweep") parse_sweep(p);
  else if (kind == "ergodic-decay") parse_decay(p);
  else if (kind == "group-haagerup") parse_group_haagerup(p);
  else if (kind == "group-shift") parse_group_shift(p);
  else if (kind == "rd-report") parse_rd(p);
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::string> experiment_kinds() {
  return {"validate-algebra", "fock-report",  "lemma-check", "haagerup-sweep",
          "ergodic-decay",    "group-haagerup", "group-shift", "rd-report"};
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ParseError("config must be a JSON object", "");
  ExperimentConfig c;
  const json& kind = require(j, "kind", "");
  if (!kind.is_string()) throw ParseError("\"kind\" must be a string", "/kind");
  c.kind = kind.get<std::string>();
  const auto kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end())
    throw ParseError("unknown kind \"" + c.kind + "\"", "/kind");
  c.parameters = require(j, "parameters", "");
  if (!c.parameters.is_object()) throw ParseError("\"parameters\" must be an object", "/parameters");
  c.name = c.kind;
  if (j.contains("output")) {
    const json& o = j["output"];
    if (!o.is_object()) throw ParseError("\"output\" must be an object", "/output");
    if (o.contains("name")) {
      if (!o["name"].is_string() || o["name"].get<std::string>().empty() ||
          o["name"].get<std::string>().find('/') != std::string::npos)
        throw ParseError("output name must be a nonempty file stem", "/output/name");
      c.name = o["name"].get<std::string>();
    }
  }
  if (j.contains("caps")) {
    const json& caps = j["caps"];
    if (!caps.is_object()) throw ParseError("\"caps\" must be an object", "/caps");
    c.max_dim = get_int(caps, "max_dim", "/caps", kDefaultMaxDim, 1);
    c.ball_cap = get_int(caps, "ball_cap", "/caps", kDefaultBallCap, 1);
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
      throw ParseError("\"seed\" must be a nonnegative integer", "/seed");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  check_parameters(c.kind, c.parameters);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), "");
  }
  return parse_config(j);
}

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.passed; });
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  RunReport rep;
  rep.kind = cfg.kind;
  rep.name = cfg.name;
  rep.seed = cfg.seed;
  rep.details = json::object();
  const json& p = cfg.parameters;
  if (cfg.kind == "validate-algebra") run_validate(parse_validate(p), cfg, rep);
  else if (cfg.kind == "fock-report") run_fock_report(parse_context(p, "/parameters"), cfg, rep);
  else if (cfg.kind == "lemma-check") run_lemma(parse_lemma(p), cfg, rep);
  else if (cfg.kind == "haagerup-sweep") run_sweep(parse_sweep(p), cfg, rep);
  else if (cfg.kind == "ergodic-decay") run_decay(parse_decay(p), cfg, rep);
  else if (cfg.kind == "group-haagerup") run_group_haagerup(parse_group_haagerup(p), cfg, rep);
  else if (cfg.kind == "group-shift") run_group_shift(parse_group_shift(p), cfg, rep);
  else if (cfg.kind == "rd-report") run_rd(parse_rd(p), cfg, rep);
  else throw ParseError("unknown kind \"" + cfg.kind + "\"", "/kind");
  rep.seconds = seconds_since(t0);
  return rep;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_csv(const Table& t) {
  auto cell = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::string out;
  auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + cell(row[i]);
    out += "\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

json summary_json(const RunReport& r) {
  json j;
  j["schema"] = kSummarySchema;
  j["kind"] = r.kind;
  j["name"] = r.name;
  j["seed"] = r.seed;
  j["status"] = r.passed() ? "pass" : "fail";
  j["seconds"] = r.seconds;
  j["rows"] = r.table.rows.size();
  j["checks"] = json::array();
  std::size_t failed = 0;
  for (const auto& c : r.checks) {
    j["checks"].push_back({{"name", c.name},
                           {"status", c.passed ? "pass" : "fail"},
                           {"lower", c.lower},
                           {"upper", c.upper},
                           {"residual", c.residual},
                           {"seconds", c.seconds}});
    failed += c.passed ? 0 : 1;
  }
  j["failed"] = failed;
  j["details"] = r.details;
  return j;
}

OutputPaths write_outputs(const RunReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  OutputPaths paths{dir / (r.name + ".csv"), dir / (r.name + ".summary.json")};
  {
    std::ofstream out(paths.csv, std::ios::binary);
    out << to_csv(r.table);
    if (!out) throw ConfigurationError("cannot write " + paths.csv.string());
  }
  {
    std::ofstream out(paths.summary, std::ios::binary);
    out << summary_json(r).dump(2) << "\n";
    if (!out) throw ConfigurationError("cannot write " + paths.summary.string());
  }
  return paths;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

json two_point() { return {{"preset", "function_algebra_with_state"}, {"weights", {0.5, 0.5}}}; }
json m2_diagonal() { return {{"preset", "diagonal_in_matn"}, {"n", 2}}; }

json copies(const json& algebra, int first, int last) {
  return {{"algebra", algebra}, {"first", first}, {"last", last}};
}

// diag(1, -1) at the given index: a centered unitary for the uniform two-point state.
json unit_letter(int index) {
  return {{"index", index}, {"element", json::array({json::array({1.0, 0.0}), json::array({0.0, 0.0}),
                                                     json::array({0.0, 0.0}), json::array({-1.0, 0.0})})}};
}

json config(const std::string& kind, const std::string& name, json params, json extra = json::object()) {
  json c = {{"kind", kind}, {"parameters", std::move(params)}, {"output", {{"name", name}}}};
  for (auto& [k, v] : extra.items()) c[k] = v;
  return c;
}

std::vector<Preset> make_presets() {
  std::vector<Preset> p;
  p.push_back({"two-point-two-factors", "lemma-check",
               "100 random words (n <= 4) on two copies of the uniform two-point algebra, M = 6",
               "block decomposition of P_r w P_m into creation, diagonal and annihilation products",
               config("lemma-check", "two-point-two-factors",
                      {{"copies", copies(two_point(), 0, 1)}, {"M", 6}, {"words", 100}, {"max_length", 4}})});
  p.push_back({"two-point-three-factors", "lemma-check",
               "100 random words (n <= 4) on three copies of the uniform two-point algebra, M = 6",
               "block decomposition of P_r w P_m into creation, diagonal and annihilation products",
               config("lemma-check", "two-point-three-factors",
                      {{"copies", copies(two_point(), 0, 2)}, {"M", 6}, {"words", 100}, {"max_length", 4}})});
  p.push_back({"m2-diagonal", "lemma-check",
               "100 random words (n <= 4) on two copies of M_2 over its diagonal, M = 6",
               "block decomposition of P_r w P_m over a noncommutative-factor, non-scalar B",
               config("lemma-check", "m2-diagonal",
                      {{"copies", copies(m2_diagonal(), 0, 1)}, {"M", 6}, {"words", 100}, {"max_length", 4}})});
  p.push_back({"haagerup-sweep", "haagerup-sweep",
               "40 random separated families (n <= 3, |K| <= 6) on six two-point factors, M = 6",
               "||f|| <= (2n + 1) gamma for separated word families, and the level-block bound gamma^2",
               config("haagerup-sweep", "haagerup-sweep",
                      {{"copies", copies(two_point(), 0, 5)}, {"M", 6}, {"families", 40}, {"max_length", 3},
                       {"max_size", 6}},
                      {{"caps", {{"max_dim", 30000}}}})});
  p.push_back({"haagerup-sweep-m2", "haagerup-sweep",
               "10 random separated families (n <= 3, |K| <= 4) on four copies of M_2 over its diagonal, M = 6",
               "||f|| <= (2n + 1) gamma for separated word families, and the level-block bound gamma^2",
               config("haagerup-sweep", "haagerup-sweep-m2",
                      {{"copies", copies(m2_diagonal(), 0, 3)}, {"M", 6}, {"families", 10}, {"max_length", 3},
                       {"max_size", 4}})});
  p.push_back({"fshift-p1", "ergodic-decay",
               "free shift average of one unit letter, n = 1..16, M = 3",
               "decay of free shift averages of centered words at rate (2p + 1)/sqrt(n)",
               config("ergodic-decay", "fshift-p1",
                      {{"algebra", two_point()}, {"prototype", {{"letters", {unit_letter(0)}}}}, {"n_max", 16}, {"M", 3}})});
  p.push_back({"fshift-p2", "ergodic-decay",
               "free shift average of a two-letter unit word, n = 1..16, M = 3",
               "decay of free shift averages of centered words at rate (2p + 1)/sqrt(n)",
               config("ergodic-decay", "fshift-p2",
                      {{"algebra", two_point()},
                       {"prototype", {{"letters", {unit_letter(0), unit_letter(1)}}}},
                       {"n_max", 16},
                       {"M", 3}})});
  p.push_back({"group-haagerup", "group-haagerup",
               "Haagerup's inequality for single words and a generator orbit average, R = 8",
               "||lambda(f)|| <= (p + 1) ||f||_2 for f supported on words of length p",
               config("group-haagerup", "group-haagerup",
                      {{"R", 8},
                       {"functions",
                        {{{"terms", {{{"word", "g0"}}}}},
                         {{"terms", {{{"word", "g0 g1^-1"}}}}},
                         {{"terms", {{{"word", "g0"}, {"coeff", 0.25}}, {{"word", "g1"}, {"coeff", 0.25}},
                                     {{"word", "g2"}, {"coeff", 0.25}}, {{"word", "g3"}, {"coeff", 0.25}}}}},
                         {{"terms", {{{"word", "g0 g1"}, {"coeff", 0.5}}, {{"word", "g1 g0^-1"}, {"coeff", -0.5}}}}}}}})});
  p.push_back({"group-shift", "group-shift",
               "shift average of g0 on the free group, n in {1, 4, 9, 16}, R = 8",
               "norm of (1/n) sum_k alpha^k(lambda_h) between 1/sqrt(n) and (p + 1)/sqrt(n)",
               config("group-shift", "group-shift", {{"word", "g0"}, {"n", {1, 4, 9, 16}}, {"R", 8}})});
  p.push_back({"rd-report", "rd-report",
               "per-length Haagerup checks and length-weighted l2 norms of a mixed-length function",
               "rapid decay for word length: operator norm against Sobolev-type l2 norms",
               config("rd-report", "rd-report",
                      {{"R", 8},
                       {"s", {0.0, 1.0, 2.0}},
                       {"function",
                        {{"terms", {{{"word", "e"}}, {{"word", "g0"}, {"coeff", 0.5}}, {{"word", "g1^-1"}, {"coeff", 0.5}},
                                    {{"word", "g0 g1"}, {"coeff", 0.25}}}}}}})});
  p.push_back({"fock-report", "fock-report",
               "Fock module dimensions and operator identities on three two-point factors, M = 4",
               "creation, diagonal and projection operator identities on the amalgamated Fock module",
               config("fock-report", "fock-report", {{"copies", copies(two_point(), 0, 2)}, {"M", 4}})});
  p.push_back({"fock-report-m2", "fock-report",
               "Fock module dimensions and operator identities on two copies of M_2 over its diagonal, M = 4",
               "creation, diagonal and projection operator identities over a non-scalar B",
               config("fock-report", "fock-report-m2", {{"copies", copies(m2_diagonal(), 0, 1)}, {"M", 4}})});
  p.push_back({"validate-presets", "validate-algebra",
               "conditional expectation axioms for the shipped algebra presets",
               "conditional expectation onto B: unital, idempotent, bimodular, positive, contractive",
               config("validate-algebra", "validate-presets",
                      {{"algebras",
                        {{{"preset", "scalars_in_matn"}, {"n", 2}},
                         m2_diagonal(),
                         two_point(),
                         {{"preset", "function_algebra_with_state"}, {"weights", {0.25, 0.25, 0.5}}}}}})});
  return p;
}

}  // namespace

const std::vector<Preset>& experiment_presets() {
  static const std::vector<Preset> all = make_presets();
  return all;
}

const Preset* find_preset(const std::string& name) {
  for (const auto& p : experiment_presets())
    if (p.name == name) return &p;
  return nullptr;
}

}  // namespace afp
