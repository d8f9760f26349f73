#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "branchpde/errors.hpp"
#include "branchpde/expression.hpp"
#include "cli.hpp"

namespace branchpde::cli {

using nlohmann::json;

namespace {

template <class T>
T get(const json& j, const char* key, const char* where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: field '{}': {}", where, key, e.what()));
  }
}

template <class T>
void read(const json& j, const char* key, T& target, const char* where = "config") {
  if (j.contains(key) && !j.at(key).is_null()) target = get<T>(j, key, where);
}

template <class T>
void read(const json& j, const char* key, std::optional<T>& target, const char* where = "config") {
  if (j.contains(key) && !j.at(key).is_null()) target = get<T>(j, key, where);
}

void reject_unknown(const json& j, const std::set<std::string>& known, const char* where) {
  if (!j.is_object()) throw ConfigError(fmt::format("{}: expected a JSON object", where));
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError(fmt::format("{}: unknown field '{}'", where, key));
  }
}

InlineModel parse_inline(const json& j) {
  reject_unknown(j, {"name", "m", "terms", "phi", "phi_sup", "phi_lipschitz", "q", "exact"}, "model");
  InlineModel m;
  read(j, "name", m.name, "model");
  read(j, "m", m.m, "model");
  if (!j.contains("terms") || !j.at("terms").is_array() || j.at("terms").empty()) {
    throw ConfigError("model: 'terms' must be a non-empty array");
  }
  for (const auto& t : j.at("terms")) {
    reject_unknown(t, {"l", "c", "sup"}, "model term");
    InlineTerm term;
    term.l = get<MultiIndex>(t, "l", "model term");
    const json& c = t.at("c");
    term.c = c.is_number() ? format_double(c.get<double>()) : get<std::string>(t, "c", "model term");
    read(t, "sup", term.sup, "model term");
    m.terms.push_back(std::move(term));
  }
  if (!j.contains("phi")) throw ConfigError("model: 'phi' is required");
  const json& phi = j.at("phi");
  m.phi = phi.is_number() ? format_double(phi.get<double>()) : get<std::string>(j, "phi", "model");
  read(j, "phi_sup", m.phi_sup, "model");
  read(j, "phi_lipschitz", m.phi_lipschitz, "model");
  read(j, "q", m.q, "model");
  read(j, "exact", m.exact, "model");
  return m;
}

existence::MomentConvention parse_convention(const std::string& s) {
  if (s == "standard") return existence::MomentConvention::Standard;
  if (s == "paper-literal") return existence::MomentConvention::PaperLiteral;
  throw ConfigError(fmt::format("check: convention must be 'standard' or 'paper-literal', got '{}'", s));
}

// Largest |g| over [0, T] x [-2, 2]^d, sampled; used when a config leaves a sup norm out.
double sampled_sup(const ScalarField& g, int d, double T) {
  RngStream rng(0x5eed, 0);
  std::vector<double> x(static_cast<std::size_t>(d));
  double sup = 0.0;
  for (int i = 0; i < 20'000; ++i) {
    const double t = T * rng.uniform();
    for (auto& v : x) v = 4.0 * rng.uniform() - 2.0;
    sup = std::max(sup, std::abs(g(t, x)));
  }
  return sup;
}

}  // namespace

Grid Grid::parse(const std::string& spec) {
  const auto first = spec.find(':');
  const auto second = first == std::string::npos ? first : spec.find(':', first + 1);
  if (second == std::string::npos) throw ConfigError(fmt::format("grid '{}': expected lo:hi:points", spec));
  const auto number = [&](std::string_view s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(std::string(s), &used);
      if (used != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("grid '{}': '{}' is not a number", spec, s));
    }
  };
  Grid g;
  g.lo = number(std::string_view(spec).substr(0, first));
  g.hi = number(std::string_view(spec).substr(first + 1, second - first - 1));
  const std::string_view count = std::string_view(spec).substr(second + 1);
  const auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), g.points);
  if (ec != std::errc() || ptr != count.data() + count.size()) {
    throw ConfigError(fmt::format("grid '{}': point count must be an integer", spec));
  }
  if (g.points < 2) throw ConfigError(fmt::format("grid '{}': need at least 2 points", spec));
  if (!(g.lo < g.hi) || !std::isfinite(g.lo) || !std::isfinite(g.hi)) {
    throw ConfigError(fmt::format("grid '{}': need finite lo < hi", spec));
  }
  return g;
}

std::vector<double> Grid::values() const {
  std::vector<double> v(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return v;
}

void RunConfig::validate() const {
  if (d < 1) throw ConfigError("d must be at least 1");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("T must be positive and finite");
  if (!(t >= 0.0 && t <= T)) throw ConfigError(fmt::format("need 0 <= t <= T, got t = {}, T = {}", t, T));
  if (n_trees < 2) throw ConfigError("n_trees must be at least 2");
  if (workers < 1) throw ConfigError("workers must be positive");
  if (x.size() > static_cast<std::size_t>(d)) {
    throw ConfigError(fmt::format("x has {} coordinates but d = {}", x.size(), d));
  }
  if (mark < 0 || mark > d) throw ConfigError(fmt::format("mark must lie in 0..{}", d));
  budget.validate();
  if (!(check.p >= 1.0)) throw ConfigError("check.p must be >= 1");
  for (const auto& path : {output, json_output, samples_output}) {
    if (!path) continue;
    const auto dir = std::filesystem::path(*path).parent_path();
    if (dir.empty()) continue;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
  }
}

std::vector<double> RunConfig::point() const {
  std::vector<double> p = x;
  p.resize(static_cast<std::size_t>(d), 0.0);
  return p;
}

RunConfig parse_config(const json& doc) {
  reject_unknown(doc,
                 {"model", "d", "alpha", "kappa", "k", "coefficient", "delta", "T", "t", "x", "mark", "grid", "seed",
                  "n_trees", "workers", "budget", "strict", "output", "json_output", "samples_output", "check",
                  "diag", "description"},
                 "config");
  RunConfig c;
  if (doc.contains("model")) {
    const json& m = doc.at("model");
    if (m.is_string()) {
      c.model = m.get<std::string>();
    } else {
      c.inline_model = parse_inline(m);
      c.model = c.inline_model->name;
    }
  }
  read(doc, "d", c.d);
  read(doc, "alpha", c.alpha);
  read(doc, "kappa", c.kappa);
  read(doc, "k", c.k);
  read(doc, "coefficient", c.coefficient);
  read(doc, "delta", c.delta);
  read(doc, "T", c.T);
  read(doc, "t", c.t);
  read(doc, "x", c.x);
  read(doc, "mark", c.mark);
  if (doc.contains("grid")) c.grid = Grid::parse(get<std::string>(doc, "grid", "config"));
  read(doc, "seed", c.seed);
  read(doc, "n_trees", c.n_trees);
  read(doc, "workers", c.workers);
  read(doc, "strict", c.strict);
  read(doc, "output", c.output);
  read(doc, "json_output", c.json_output);
  read(doc, "samples_output", c.samples_output);
  if (doc.contains("budget")) {
    const json& b = doc.at("budget");
    reject_unknown(b, {"max_particles", "max_generation"}, "budget");
    read(b, "max_particles", c.budget.max_particles, "budget");
    read(b, "max_generation", c.budget.max_generation, "budget");
  }
  if (doc.contains("check")) {
    const json& ch = doc.at("check");
    reject_unknown(ch, {"p", "m0", "lambda0", "convention"}, "check");
    read(ch, "p", c.check.p, "check");
    read(ch, "m0", c.check.m0, "check");
    read(ch, "lambda0", c.check.lambda0, "check");
    if (ch.contains("convention")) c.check.convention = parse_convention(get<std::string>(ch, "convention", "check"));
  }
  c.diag.alpha = c.alpha;
  c.diag.kappa = c.kappa;
  if (doc.contains("diag")) {
    const json& dg = doc.at("diag");
    reject_unknown(dg, {"alpha", "t", "kappa", "n"}, "diag");
    read(dg, "alpha", c.diag.alpha, "diag");
    read(dg, "t", c.diag.t, "diag");
    read(dg, "kappa", c.diag.kappa, "diag");
    read(dg, "n", c.diag.n, "diag");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config '{}': {}", path, e.what()));
  }
  return parse_config(doc);
}

std::optional<unsigned> threads_from_env() {
  const char* raw = std::getenv("BRANCHPDE_THREADS");
  if (!raw || !*raw) return std::nullopt;
  unsigned v = 0;
  const std::string_view s(raw);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
    throw ConfigError(fmt::format("BRANCHPDE_THREADS must be a positive integer, got '{}'", s));
  }
  return v;
}

PdeModel resolve_model(const RunConfig& config) {
  if (!config.inline_model) {
    BuiltinParams p;
    p.d = config.d;
    p.alpha = config.alpha;
    p.k = config.k;
    p.kappa = config.kappa;
    p.coefficient = config.coefficient;
    p.T = config.T;
    p.delta = config.delta;
    return builtin_model(config.model, p);
  }

  const InlineModel& im = *config.inline_model;
  const int d = config.d;
  PolynomialNonlinearity f;
  f.d = d;
  f.m = im.m;
  for (const auto& term : im.terms) {
    f.indices.push_back(term.l);
    ScalarField c(expr::Expression::parse(term.c, d));
    if (auto v = c.constant()) c = ScalarField(*v);
    f.coeff_sup.push_back(term.sup ? *term.sup : c.constant() ? std::abs(*c.constant()) : sampled_sup(c, d, config.T));
    f.coeffs.push_back(std::move(c));
  }
  TerminalCondition phi;
  phi.phi = ScalarField(expr::Expression::parse(im.phi, d));
  phi.sup_norm = im.phi_sup ? *im.phi_sup : sampled_sup(phi.phi, d, config.T);
  phi.lipschitz = im.phi_lipschitz;

  if (!(config.kappa > 0.0)) throw ConfigError("kappa must be positive");
  auto eta = config.kappa == 1.0 ? bernstein::LaplaceExponent::stable(config.alpha)
                                 : bernstein::LaplaceExponent::scaled_stable(config.alpha, config.kappa);
  const std::size_t n = f.size();
  BranchingLaw q = im.q.empty() ? BranchingLaw::uniform(n) : BranchingLaw(im.q);
  std::optional<ScalarField> exact;
  if (im.exact) exact = ScalarField(expr::Expression::parse(*im.exact, d));
  PdeModel model{im.name,
                 std::move(f),
                 std::move(phi),
                 std::move(q),
                 LifetimeDensity(config.delta.value_or(default_delta(config.alpha))),
                 std::move(eta),
                 std::move(exact)};
  model.validate();
  return model;
}

}  // namespace branchpde::cli
