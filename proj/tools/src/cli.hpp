#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "branchpde/engine.hpp"
#include "branchpde/existence.hpp"
#include "branchpde/model.hpp"

namespace branchpde::cli {

enum ExitCode : int { kOk = 0, kBudgetAbort = 2, kConfigError = 3, kUncertified = 4 };

/// x1 grid "lo:hi:points", points >= 2 and evenly spaced, endpoints included.
struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  int points = 0;

  static Grid parse(const std::string& spec);
  std::vector<double> values() const;
};

struct InlineTerm {
  MultiIndex l;
  std::string c;
  std::optional<double> sup;
};

/// A model written out in the config instead of taken from the catalog.
struct InlineModel {
  std::string name = "inline";
  int m = 0;
  std::vector<InlineTerm> terms;
  std::string phi;
  std::optional<double> phi_sup;
  std::optional<double> phi_lipschitz;
  std::vector<double> q;
  std::optional<std::string> exact;
};

struct CheckOptions {
  double p = 2.0;
  std::optional<int> m0;
  double lambda0 = 1.0;
  existence::MomentConvention convention = existence::MomentConvention::Standard;
};

struct DiagOptions {
  double alpha = 1.5;
  double t = 1.0;
  double kappa = 1.0;
  std::size_t n = 1'000'000;
};

struct RunConfig {
  std::string model = "nld";
  std::optional<InlineModel> inline_model;

  int d = 1;
  double alpha = 1.5;
  double kappa = 1.0;
  int k = 0;
  double coefficient = 1.0;
  std::optional<double> delta;
  double T = 1.0;
  double t = 0.9;
  std::vector<double> x;
  int mark = 0;
  std::optional<Grid> grid;

  std::uint64_t seed = 1;
  std::size_t n_trees = 10'000;
  unsigned workers = 1;
  TreeBudget budget;
  bool strict = false;

  std::optional<std::string> output;
  std::optional<std::string> json_output;
  std::optional<std::string> samples_output;

  CheckOptions check;
  DiagOptions diag;

  /// Throws ConfigError for violated invariants (0 <= t <= T, d >= 1, n_trees >= 2, ...).
  void validate() const;
  /// Root point: x padded with zeros to length d.
  std::vector<double> point() const;
};

/// Parses the JSON config document. Unknown keys are a ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

/// BRANCHPDE_THREADS, when set, must be a positive integer.
std::optional<unsigned> threads_from_env();

PdeModel resolve_model(const RunConfig& config);

nlohmann::json to_json(const EstimatorResult& r);
EstimatorResult estimator_result_from_json(const nlohmann::json& j);
nlohmann::json to_json(const existence::HorizonReport& r);
existence::HorizonReport horizon_report_from_json(const nlohmann::json& j);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Command bodies. Machine output (CSV or JSON) goes to the configured file
/// or `out`; progress, warnings and summaries go to `err`. Library errors
/// propagate; run() maps them to exit codes.
int cmd_estimate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sample_diag(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Dispatches by command name and maps exceptions to exit codes.
int run(const std::string& command, const RunConfig& config, std::ostream& out, std::ostream& err);

/// Entry point shared by the executable and the tests.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace branchpde::cli
