#include "afp/free_group.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <regex>
#include <sstream>

#include "afp/errors.hpp"
#include "afp/algebra.hpp"
#include "afp/kernels.hpp"

namespace afp {

// ---------------------------------------------------------------------------
// Words

ReducedWord ReducedWord::reduce(const std::vector<GroupLetter>& letters) {
  ReducedWord w;
  for (const auto& l : letters) {
    if (l.exponent != 1 && l.exponent != -1) throw DomainError("exponents must be +1 or -1");
    if (!w.letters_.empty() && w.letters_.back().generator == l.generator &&
        w.letters_.back().exponent == -l.exponent)
      w.letters_.pop_back();
    else
      w.letters_.push_back(l);
  }
  return w;
}

ReducedWord ReducedWord::generator(int g, int exponent) { return reduce({{g, exponent}}); }

ReducedWord ReducedWord::parse(const std::string& text) {
  static const std::regex token(R"(g(-?\d+)(\^(-1|\+?1))?)");
  std::istringstream in(text);
  std::vector<GroupLetter> letters;
  std::string t;
  while (in >> t) {
    if (t == "e") continue;
    std::smatch m;
    if (!std::regex_match(t, m, token)) throw ConfigurationError("bad group letter \"" + t + "\"");
    letters.push_back({std::stoi(m[1].str()), m[3].matched && m[3].str() == "-1" ? -1 : 1});
  }
  return reduce(letters);
}

ReducedWord ReducedWord::inverse() const {
  ReducedWord w;
  for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) w.letters_.push_back({it->generator, -it->exponent});
  return w;
}

ReducedWord ReducedWord::shifted(int k) const {
  ReducedWord w = *this;
  for (auto& l : w.letters_) l.generator += k;
  return w;
}

std::string ReducedWord::to_string() const {
  if (letters_.empty()) return "e";
  std::string s;
  for (const auto& l : letters_) {
    if (!s.empty()) s += ' ';
    s += "g" + std::to_string(l.generator) + (l.exponent < 0 ? "^-1" : "");
  }
  return s;
}

ReducedWord operator*(const ReducedWord& x, const ReducedWord& y) {
  std::vector<GroupLetter> all = x.letters_;
  all.insert(all.end(), y.letters_.begin(), y.letters_.end());
  return ReducedWord::reduce(all);
}

std::size_t ReducedWordHash::operator()(const ReducedWord& w) const {
  std::size_t h = 0x9e3779b97f4a7c15ULL;
  for (const auto& l : w.letters()) {
    const std::size_t v = static_cast<std::size_t>(static_cast<std::uint32_t>(l.generator)) * 2 + (l.exponent > 0);
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Functions

GroupFunction GroupFunction::delta(const ReducedWord& h, cplx c) {
  GroupFunction f;
  f.add(h, c);
  return f;
}

void GroupFunction::add(const ReducedWord& h, cplx c) {
  auto it = coeffs_.find(h);
  if (it == coeffs_.end()) {
    if (c != cplx(0.0)) coeffs_.emplace(h, c);
    return;
  }
  it->second += c;
  if (it->second == cplx(0.0)) coeffs_.erase(it);
}

cplx GroupFunction::at(const ReducedWord& h) const {
  auto it = coeffs_.find(h);
  return it == coeffs_.end() ? cplx(0.0) : it->second;
}

GroupFunction GroupFunction::adjoint() const {
  GroupFunction f;
  for (const auto& [h, c] : coeffs_) f.add(h.inverse(), std::conj(c));
  return f;
}

double GroupFunction::l2_norm() const {
  double s = 0.0;
  for (const auto& [h, c] : coeffs_) s += std::norm(c);
  return std::sqrt(s);
}

int GroupFunction::max_length() const {
  int p = 0;
  for (const auto& [h, c] : coeffs_) p = std::max(p, h.length());
  return p;
}

std::vector<int> GroupFunction::lengths() const {
  std::vector<int> out;
  for (const auto& [h, c] : coeffs_) out.push_back(h.length());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

GroupFunction GroupFunction::homogeneous_part(int p) const {
  GroupFunction f;
  for (const auto& [h, c] : coeffs_)
    if (h.length() == p) f.add(h, c);
  return f;
}

GroupFunction GroupFunction::scaled(cplx s) const {
  GroupFunction f;
  for (const auto& [h, c] : coeffs_) f.add(h, s * c);
  return f;
}

GroupFunction operator+(const GroupFunction& f, const GroupFunction& g) {
  GroupFunction out = f;
  for (const auto& [h, c] : g.coeffs_) out.add(h, c);
  return out;
}

GroupFunction convolve(const GroupFunction& f, const GroupFunction& g) {
  GroupFunction out;
  for (const auto& [x, a] : f.coeffs_)
    for (const auto& [y, b] : g.coeffs_) out.add(x * y, a * b);
  return out;
}

cplx trace_tau(const GroupFunction& f) { return f.at(ReducedWord()); }

double rd_norm(const GroupFunction& f, double s) {
  double sum = 0.0;
  for (const auto& [h, c] : f.support()) sum += std::norm(c) * std::pow(1.0 + h.length(), 2.0 * s);
  return std::sqrt(sum);
}

OrbitKind orbit_classify(const ReducedWord& h) { return h.is_identity() ? OrbitKind::fixed : OrbitKind::infinite; }

// ---------------------------------------------------------------------------
// Balls

double ball_count(int generators, int radius) {
  if (radius < 0) return 0.0;
  double total = 1.0;
  double sphere = 2.0 * generators;
  for (int k = 1; k <= radius; ++k) {
    total += sphere;
    sphere *= 2.0 * generators - 1.0;
  }
  return total;
}

BallBasis::BallBasis(int first_generator, int last_generator, int radius)
    : first_(first_generator), last_(last_generator), radius_(radius) {
  if (last_ < first_) throw DomainError("empty generator window");
  if (radius_ < 0) throw DomainError("negative radius");
  words_.emplace_back();
  std::size_t level_begin = 0;
  for (int k = 1; k <= radius_; ++k) {
    const std::size_t level_end = words_.size();
    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (int g = first_; g <= last_; ++g)
        for (int e : {1, -1}) {
          const auto& base = words_[i].letters();
          if (!base.empty() && base.back().generator == g && base.back().exponent == -e) continue;
          std::vector<GroupLetter> letters = base;
          letters.push_back({g, e});
          words_.push_back(ReducedWord::reduce(letters));
        }
    }
    level_begin = level_end;
  }
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], static_cast<int>(i));
}

int BallBasis::index_of(const ReducedWord& w) const {
  auto it = index_.find(w);
  return it == index_.end() ? -1 : it->second;
}

std::pair<int, int> generator_window(const GroupFunction& f) {
  bool any = false;
  int lo = 0;
  int hi = 0;
  for (const auto& [h, c] : f.support())
    for (const auto& l : h.letters()) {
      lo = any ? std::min(lo, l.generator) : l.generator;
      hi = any ? std::max(hi, l.generator) : l.generator;
      any = true;
    }
  return {lo, hi};
}

ConvolutionMatrix convolution_operator(const GroupFunction& f, int radius, long ball_cap) {
  if (f.empty()) throw DomainError("convolution by the zero function");
  const int p = f.max_length();
  if (radius < p) throw DomainError("radius " + std::to_string(radius) + " is below the support length " +
                                    std::to_string(p));
  const auto [lo, hi] = generator_window(f);
  const int gens = hi - lo + 1;
  int r = radius - p;
  while (r > 0 && ball_count(gens, r) > static_cast<double>(ball_cap)) --r;
  if (ball_count(gens, r) > static_cast<double>(ball_cap))
    throw CapacityError("ball cap below one word", ball_count(gens, r));

  const BallBasis domain(lo, hi, r);
  ConvolutionMatrix out;
  out.requested_radius = radius;
  out.domain_radius = r;
  out.domain_dim = domain.size();
  std::unordered_map<ReducedWord, int, ReducedWordHash> rows;
  std::vector<Triplet> t;
  for (int col = 0; col < domain.size(); ++col)
    for (const auto& [h, c] : f.support()) {
      const ReducedWord image = h * domain.words()[static_cast<std::size_t>(col)];
      auto [it, inserted] = rows.emplace(image, static_cast<int>(out.codomain.size()));
      if (inserted) out.codomain.push_back(image);
      t.emplace_back(it->second, col, c);
    }
  out.codomain_dim = static_cast<int>(out.codomain.size());
  out.matrix.resize(out.codomain_dim, out.domain_dim);
  out.matrix.setFromTriplets(t.begin(), t.end());
  out.matrix.makeCompressed();
  return out;
}

// ---------------------------------------------------------------------------
// Checks

namespace {

constexpr double kSlack = 1e-12;

struct Certified {
  double lower = 0.0;
  int domain_radius = 0;
  int domain_dim = 0;
};

Certified certified_norm(const GroupFunction& f, int radius, long ball_cap, std::uint64_t seed) {
  const ConvolutionMatrix conv = convolution_operator(f, radius, ball_cap);
  double lower = kernels::sigma_max(conv.matrix, seed).sigma;
  // delta_e is always the first domain vector
  Vector e = Vector::Zero(conv.domain_dim);
  e(0) = 1.0;
  lower = std::max(lower, kernels::apply_norm(conv.matrix, e));
  return {lower, conv.domain_radius, conv.domain_dim};
}

}  // namespace

GroupNormReport haagerup_check(const GroupFunction& f, int radius, long ball_cap, std::uint64_t seed) {
  const auto lengths = f.lengths();
  if (lengths.size() != 1) throw DomainError("Haagerup's inequality is checked per length; support is not homogeneous");
  const auto start = std::chrono::steady_clock::now();
  GroupNormReport rep;
  rep.p = lengths.front();
  const Certified c = certified_norm(f, radius, ball_cap, seed);
  rep.lower = c.lower;
  rep.domain_radius = c.domain_radius;
  rep.domain_dim = c.domain_dim;
  rep.l2 = f.l2_norm();
  rep.upper = (rep.p + 1.0) * rep.l2;
  rep.passed = rep.l2 <= rep.lower * (1.0 + kSlack) && rep.lower <= rep.upper * (1.0 + kSlack);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

GroupFunction shift_average(const ReducedWord& h, int n) {
  if (n < 1) throw DomainError("average length must be positive");
  GroupFunction f;
  for (int k = 0; k < n; ++k) f.add(h.shifted(k), 1.0 / n);
  return f;
}

GroupShiftRow shift_average_group(const ReducedWord& h, int n, int radius, long ball_cap, std::uint64_t seed) {
  const GroupFunction f = shift_average(h, n);
  GroupShiftRow row;
  row.n = n;
  row.p = h.length();
  const Certified c = certified_norm(f, radius, ball_cap, seed);
  row.lower = c.lower;
  row.domain_radius = c.domain_radius;
  row.domain_dim = c.domain_dim;
  row.l2 = f.l2_norm();
  row.upper = h.is_identity() ? 1.0 : (row.p + 1.0) / std::sqrt(static_cast<double>(n));
  row.passed = row.l2 <= row.lower * (1.0 + kSlack) && row.lower <= row.upper * (1.0 + kSlack);
  return row;
}

RdReport rd_report(const GroupFunction& f, int radius, const std::vector<double>& s_values, long ball_cap,
                   std::uint64_t seed) {
  RdReport rep;
  rep.passed = true;
  for (int p : f.lengths()) {
    rep.per_length.push_back(haagerup_check(f.homogeneous_part(p), radius, ball_cap, seed + static_cast<std::uint64_t>(p)));
    rep.composed_upper += rep.per_length.back().upper;
    rep.passed = rep.passed && rep.per_length.back().passed;
  }
  rep.lower = certified_norm(f, radius, ball_cap, seed).lower;
  rep.passed = rep.passed && rep.lower <= rep.composed_upper * (1.0 + kSlack);
  for (double s : s_values) rep.sobolev.emplace_back(s, rd_norm(f, s));
  return rep;
}

GroupFunction group_function_from_json(const nlohmann::json& j, const std::string& pointer) {
  if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array())
    throw ParseError("group function needs a \"terms\" array", pointer + "/terms");
  GroupFunction f;
  for (std::size_t i = 0; i < j["terms"].size(); ++i) {
    const auto& t = j["terms"][i];
    const std::string tp = pointer + "/terms/" + std::to_string(i);
    if (!t.is_object() || !t.contains("word") || !t["word"].is_string())
      throw ParseError("term needs a \"word\" string", tp + "/word");
    ReducedWord w;
    try {
      w = ReducedWord::parse(t["word"].get<std::string>());
    } catch (const ConfigurationError& e) {
      throw ParseError(e.what(), tp + "/word");
    }
    cplx c = 1.0;
    if (t.contains("coeff")) c = complex_from_json(t["coeff"], tp + "/coeff");
    f.add(w, c);
  }
  return f;
}

}  // namespace afp
