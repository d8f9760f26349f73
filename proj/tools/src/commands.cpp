#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "branchpde/errors.hpp"
#include "branchpde/sampling.hpp"
#include "cli.hpp"

namespace branchpde::cli {

namespace {

// Writes through a sibling temporary and renames, so an aborted run never leaves a partial file.
void write_file(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".partial";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError(fmt::format("cannot write '{}'", path));
    f << text;
    if (!f.flush()) {
      std::filesystem::remove(tmp);
      throw ConfigError(fmt::format("cannot write '{}'", path));
    }
  }
  std::filesystem::rename(tmp, path);
}

void emit(const std::optional<std::string>& path, const std::string& text, std::ostream& out) {
  if (path) {
    write_file(*path, text);
  } else {
    out << text;
  }
}

EstimatorOptions estimator_options(const RunConfig& c) {
  EstimatorOptions o;
  o.n_trees = c.n_trees;
  o.seed = c.seed;
  o.workers = c.workers;
  o.budget = c.budget;
  return o;
}

existence::ReportOptions report_options(const RunConfig& c) {
  existence::ReportOptions o;
  o.p = c.check.p;
  o.m0 = c.check.m0;
  o.lambda0 = c.check.lambda0;
  o.convention = c.check.convention;
  return o;
}

// Prints the model audit and the existence verdict. Returns false when --strict
// is set and the verdict is uncertified.
bool preflight(const PdeModel& model, const RunConfig& c, std::ostream& err) {
  for (const auto& w : audit_model(model, c.T).warnings) err << "warning: " << w << '\n';
  const auto report = existence::build_report(model, c.T, report_options(c));
  err << fmt::format("existence check (p = {}): {}\n", report.p, existence::to_string(report.verdict));
  if (c.strict && !report.certified()) {
    err << existence::summarize(report);
    err << "refusing to run: --strict and the existence check is uncertified\n";
    return false;
  }
  return true;
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) row += (i ? "," : "") + cells[i];
  return row + '\n';
}

std::vector<std::string> result_cells(const EstimatorResult& r) {
  return {format_double(r.mean), format_double(r.std_error), format_double(r.ci_lo), format_double(r.ci_hi),
          std::to_string(r.n_trees), std::to_string(r.truncated_trees)};
}

}  // namespace

int cmd_estimate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  c.validate();
  const PdeModel model = resolve_model(c);
  if (!preflight(model, c, err)) return kUncertified;
  const auto x = c.point();
  const EstimatorResult r = estimate(model, c.t, x, c.mark, c.T, estimator_options(c));

  std::vector<std::string> header = {"t"};
  std::vector<std::string> row = {format_double(c.t)};
  for (int j = 0; j < c.d; ++j) {
    header.push_back(fmt::format("x{}", j + 1));
    row.push_back(format_double(x[static_cast<std::size_t>(j)]));
  }
  header.insert(header.end(), {"mark", "mean", "stderr", "ci_lo", "ci_hi", "n", "truncated"});
  row.push_back(std::to_string(c.mark));
  for (auto& cell : result_cells(r)) row.push_back(std::move(cell));
  emit(c.output, csv_row(header) + csv_row(row), out);
  if (c.json_output) write_file(*c.json_output, to_json(r).dump(2) + '\n');
  err << fmt::format("mean {} +- {} ({} trees, {:.2f} s)\n", r.mean, r.std_error, r.n_trees, r.elapsed_seconds);
  return kOk;
}

int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
  c.validate();
  if (!c.grid) throw ConfigError("sweep needs a 'grid' of the form lo:hi:points");
  const PdeModel model = resolve_model(c);
  if (!preflight(model, c, err)) return kUncertified;

  std::string csv = csv_row({"x1", "mean", "stderr", "ci_lo", "ci_hi", "n", "truncated"});
  nlohmann::json results = nlohmann::json::array();
  auto x = c.point();
  for (double x1 : c.grid->values()) {
    x[0] = x1;
    const EstimatorResult r = estimate(model, c.t, x, c.mark, c.T, estimator_options(c));
    std::vector<std::string> row = {format_double(x1)};
    for (auto& cell : result_cells(r)) row.push_back(std::move(cell));
    csv += csv_row(row);
    results.push_back({{"x1", x1}, {"result", to_json(r)}});
    err << fmt::format("x1 = {:8.4f}  mean {:.6f} +- {:.6f}\n", x1, r.mean, r.std_error);
  }
  emit(c.output, csv, out);
  if (c.json_output) write_file(*c.json_output, results.dump(2) + '\n');
  return kOk;
}

int cmd_check(const RunConfig& c, std::ostream& out, std::ostream& err) {
  c.validate();
  const PdeModel model = resolve_model(c);
  const auto report = existence::build_report(model, c.T, report_options(c));
  err << existence::summarize(report);
  emit(c.output, to_json(report).dump(2) + '\n', out);
  return report.certified() ? kOk : kUncertified;
}

int cmd_sample_diag(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const DiagOptions& o = c.diag;
  if (!(o.alpha > 0.0 && o.alpha <= 2.0)) throw DomainError("sample-diag: alpha must lie in (0, 2]");
  if (!(o.t > 0.0) || !std::isfinite(o.t)) throw DomainError("sample-diag: t must be positive");
  if (!(o.kappa > 0.0)) throw DomainError("sample-diag: kappa must be positive");
  if (o.n < 1) throw ConfigError("sample-diag: n must be positive");
  constexpr std::size_t kMinSamples = 1000;
  const bool enough = o.n >= kMinSamples;

  const IncrementSampler sampler(o.alpha, o.kappa);
  RngStream rng(c.seed, 0);
  std::vector<double> s(o.n);
  for (auto& v : s) v = sampler.sample_ds(o.t, rng);

  if (c.samples_output) {
    std::string text = "s\n";
    for (double v : s) text += format_double(v) + '\n';
    write_file(*c.samples_output, text);
  }

  std::string csv = csv_row({"lambda", "empirical", "stderr", "exact", "z", "pass"});
  bool all_pass = true;
  for (double lambda : {0.5, 1.0, 2.0}) {
    RunningStats stats;
    for (double v : s) stats.push(std::exp(-lambda * v));
    const double exact = std::exp(-o.t * o.kappa * std::pow(2.0 * lambda, o.alpha / 2.0));
    const double se = stats.standard_error();
    const double z = se > 0.0 ? (stats.mean() - exact) / se : (stats.mean() == exact ? 0.0 : INFINITY);
    const bool pass = std::abs(z) <= 4.0;
    all_pass = all_pass && pass;
    csv += csv_row({format_double(lambda), format_double(stats.mean()), format_double(se), format_double(exact),
                    format_double(z), enough ? (pass ? "yes" : "no") : "insufficient-n"});
  }
  emit(c.output, csv, out);
  if (!enough) {
    err << fmt::format("insufficient n for test: n = {} < {}\n", o.n, kMinSamples);
  } else {
    err << (all_pass ? "Laplace transform test passed at all three lambda\n"
                     : "Laplace transform test FAILED at some lambda\n");
  }
  return kOk;
}

int run(const std::string& command, const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (command == "estimate") return cmd_estimate(config, out, err);
    if (command == "sweep") return cmd_sweep(config, out, err);
    if (command == "check") return cmd_check(config, out, err);
    if (command == "sample-diag") return cmd_sample_diag(config, out, err);
    err << "error: unknown command '" << command << "'\n";
    return kConfigError;
  } catch (const BudgetExceededError& e) {
    err << "budget exceeded: " << e.what() << " (" << e.completed_trees() << " trees completed)\n";
    return kBudgetAbort;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo solver for nonlocal semilinear PDEs via marked branching trees"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_trees;
  std::optional<unsigned> workers;
  std::optional<std::string> out_path;
  std::optional<std::string> json_path;
  bool strict = false;

  for (const char* name : {"estimate", "sweep", "check", "sample-diag"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--n-trees", n_trees, "number of trees per estimate");
    sub->add_option("--workers", workers, "worker threads");
    sub->add_flag("--strict", strict, "refuse to run when the existence check is uncertified");
    sub->add_option("--out", out_path, "output file (CSV, or JSON for check)");
    sub->add_option("--json", json_path, "JSON result file");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  RunConfig config;
  try {
    config = load_config(config_path);
    if (auto env = threads_from_env()) config.workers = *env;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  if (seed) config.seed = *seed;
  if (n_trees) config.n_trees = *n_trees;
  if (workers) config.workers = *workers;
  if (out_path) config.output = *out_path;
  if (json_path) config.json_output = *json_path;
  if (strict) config.strict = true;
  return run(command, config, out, err);
}

}  // namespace branchpde::cli
