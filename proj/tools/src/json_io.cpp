#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "branchpde/errors.hpp"
#include "cli.hpp"

namespace branchpde::cli {

using nlohmann::json;

namespace {

// JSON has no infinities; non-finite values travel as the strings "inf", "-inf", "nan".
json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  const auto s = v.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw ConfigError(fmt::format("field '{}': expected a number, got '{}'", key, s));
}

}  // namespace

std::string format_double(double v) { return fmt::format("{}", v); }

json to_json(const EstimatorResult& r) {
  return {{"mean", number(r.mean)},
          {"std_error", number(r.std_error)},
          {"ci_lo", number(r.ci_lo)},
          {"ci_hi", number(r.ci_hi)},
          {"n_trees", r.n_trees},
          {"truncated_trees", r.truncated_trees},
          {"elapsed_seconds", number(r.elapsed_seconds)},
          {"mean_particles", number(r.mean_particles)},
          {"particles_stderr", number(r.particles_stderr)},
          {"max_particles", r.max_particles},
          {"max_generation", r.max_generation}};
}

EstimatorResult estimator_result_from_json(const json& j) {
  try {
    EstimatorResult r;
    r.mean = number(j, "mean");
    r.std_error = number(j, "std_error");
    r.ci_lo = number(j, "ci_lo");
    r.ci_hi = number(j, "ci_hi");
    r.n_trees = j.at("n_trees").get<std::size_t>();
    r.truncated_trees = j.at("truncated_trees").get<std::size_t>();
    r.elapsed_seconds = number(j, "elapsed_seconds");
    r.mean_particles = number(j, "mean_particles");
    r.particles_stderr = number(j, "particles_stderr");
    r.max_particles = j.at("max_particles").get<std::size_t>();
    r.max_generation = j.at("max_generation").get<std::size_t>();
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("estimator result: ") + e.what());
  }
}

json to_json(const existence::HorizonReport& r) {
  return {{"model", r.model},
          {"p", number(r.p)},
          {"m0", r.m0},
          {"T", number(r.T)},
          {"delta", number(r.delta)},
          {"lambda0", number(r.lambda0)},
          {"convention", r.convention == existence::MomentConvention::Standard ? "standard" : "paper-literal"},
          {"M_p", number(r.M_p)},
          {"cond_rho", r.cond_rho},
          {"cond_rho_value", number(r.cond_rho_value)},
          {"cond_eta", r.cond_eta},
          {"cond_eta_inconclusive", r.cond_eta_inconclusive},
          {"cond_eta_value", number(r.cond_eta_value)},
          {"cd_check", r.cd_check},
          {"cd_inconclusive", r.cd_inconclusive},
          {"cd_value", number(r.cd_value)},
          {"C_circ", number(r.C_circ)},
          {"C_partial", number(r.C_partial)},
          {"C_partial_ratio", number(r.C_partial_ratio)},
          {"C_tilde", number(r.C_tilde)},
          {"t3b_bound", number(r.t3b_bound)},
          {"verdict", existence::to_string(r.verdict)},
          {"notices", r.notices}};
}

existence::HorizonReport horizon_report_from_json(const json& j) {
  try {
    existence::HorizonReport r;
    r.model = j.at("model").get<std::string>();
    r.p = number(j, "p");
    r.m0 = j.at("m0").get<int>();
    r.T = number(j, "T");
    r.delta = number(j, "delta");
    r.lambda0 = number(j, "lambda0");
    const auto convention = j.at("convention").get<std::string>();
    if (convention == "standard") {
      r.convention = existence::MomentConvention::Standard;
    } else if (convention == "paper-literal") {
      r.convention = existence::MomentConvention::PaperLiteral;
    } else {
      throw ConfigError("horizon report: unknown convention '" + convention + "'");
    }
    r.M_p = number(j, "M_p");
    r.cond_rho = j.at("cond_rho").get<bool>();
    r.cond_rho_value = number(j, "cond_rho_value");
    r.cond_eta = j.at("cond_eta").get<bool>();
    r.cond_eta_inconclusive = j.at("cond_eta_inconclusive").get<bool>();
    r.cond_eta_value = number(j, "cond_eta_value");
    r.cd_check = j.at("cd_check").get<bool>();
    r.cd_inconclusive = j.at("cd_inconclusive").get<bool>();
    r.cd_value = number(j, "cd_value");
    r.C_circ = number(j, "C_circ");
    r.C_partial = number(j, "C_partial");
    r.C_partial_ratio = number(j, "C_partial_ratio");
    r.C_tilde = number(j, "C_tilde");
    r.t3b_bound = number(j, "t3b_bound");
    r.verdict = existence::verdict_from_string(j.at("verdict").get<std::string>());
    r.notices = j.at("notices").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("horizon report: ") + e.what());
  }
}

}  // namespace branchpde::cli
