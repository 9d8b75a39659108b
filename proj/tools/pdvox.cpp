// pdvox: vocal-feature classification toolkit.
//
//   pdvox ingest --check [--data PATH]
//   pdvox correlate [--data PATH] [--out PATH]
//   pdvox run --model NAME [options]
//   pdvox compare [options]
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pdvox/dataset.hpp"
#include "pdvox/error.hpp"
#include "pdvox/experiment.hpp"
#include "pdvox/metrics.hpp"

namespace {

constexpr int kUsageError = 2;

std::string default_data_path() {
  if (const char* env = std::getenv("PDVOX_DATA"); env && *env) return env;
  return pdvox::RunConfig{}.data_path;
}

bool parse_switch(const std::string& value) {
  if (value == "on") return true;
  if (value == "off") return false;
  throw CLI::ValidationError("expected 'on' or 'off', got '" + value + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pdvox::IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunOptions {
  std::string data;
  std::string model;
  std::uint64_t seed = 42;
  double test_fraction = 0.2;
  std::string smote = "on";
  std::string smote_before_split = "off";
  std::size_t threads = 1;
  std::string out;
  std::string format = "table";
  std::string config;
  std::vector<std::string> params;
  std::string roc_dir;
};

void add_run_options(CLI::App* cmd, RunOptions& o, bool with_model) {
  cmd->add_option("--data", o.data, "Vocal-feature CSV (default: $PDVOX_DATA or data/parkinsons.data)");
  if (with_model) {
    cmd->add_option("--model", o.model, "lightgbm-like | xgboost-like | adaboost | bagging | svm | all");
  }
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--test-fraction", o.test_fraction, "Hold-out fraction in (0,1)");
  cmd->add_option("--smote", o.smote, "on|off")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--smote-before-split", o.smote_before_split, "on|off")->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--threads", o.threads, "Worker threads (results do not depend on this)");
  cmd->add_option("--out", o.out, "Write the report here instead of stdout");
  cmd->add_option("--format", o.format, "table | csv | structured")
      ->check(CLI::IsMember({"table", "csv", "structured", "json"}));
  cmd->add_option("--config", o.config, "Start from the config embedded in a structured report or config file");
  cmd->add_option("--param", o.params, "Hyperparameter override KEY=VALUE, e.g. lightgbm.rounds=200");
  cmd->add_option("--roc-dir", o.roc_dir, "Also write roc_<model>.csv files into this directory");
}

pdvox::RunConfig resolve_config(const CLI::App* cmd, const RunOptions& o, const std::string& forced_model) {
  pdvox::RunConfig cfg;
  if (!o.config.empty()) cfg = pdvox::config_from_json(read_file(o.config));
  else cfg.data_path = default_data_path();
  auto given = [&](const char* flag) { return cmd->count(flag) > 0; };
  if (given("--data")) cfg.data_path = o.data;
  if (!forced_model.empty()) cfg.model = forced_model;
  else if (given("--model")) cfg.model = o.model;
  if (given("--seed")) cfg.seed = o.seed;
  if (given("--test-fraction")) cfg.test_fraction = o.test_fraction;
  if (given("--smote")) cfg.smote = parse_switch(o.smote);
  if (given("--smote-before-split")) cfg.smote_before_split = parse_switch(o.smote_before_split);
  if (given("--threads")) cfg.threads = o.threads;
  for (const auto& p : o.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--param expects KEY=VALUE, got '" + p + "'");
    cfg.set_param(p.substr(0, eq), p.substr(eq + 1));
  }
  return cfg;
}

int execute_run(const CLI::App* cmd, const RunOptions& o, const std::string& forced_model) {
  pdvox::RunConfig cfg;
  try {
    cfg = resolve_config(cmd, o, forced_model);
    cfg.selected_models();
  } catch (const pdvox::ContractError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  }
  const pdvox::ExperimentReport report = pdvox::run_experiment(cfg);
  const auto format = *pdvox::parse_report_format(o.format);
  if (o.out.empty()) pdvox::emit_comparison(std::cout, report, format);
  else pdvox::emit_comparison(o.out, report, format);
  if (!o.roc_dir.empty()) {
    for (const auto& r : report.results) {
      const std::string path = o.roc_dir + "/roc_" + r.model + ".csv";
      std::ofstream out(path, std::ios::binary);
      if (!out) throw pdvox::IoError("cannot write '" + path + "'");
      pdvox::write_roc_csv(out, r.roc);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pdvox: Parkinson's vocal-feature classification toolkit"};
  app.require_subcommand(1);

  bool check = false;
  std::string ingest_data;
  auto* ingest = app.add_subcommand("ingest", "Validate the data file and print row/class counts");
  ingest->add_flag("--check", check, "Validate schema and values");
  ingest->add_option("--data", ingest_data, "Vocal-feature CSV");

  std::string corr_data;
  std::string corr_out;
  auto* correlate = app.add_subcommand("correlate", "Write the feature correlation matrix as CSV");
  correlate->add_option("--data", corr_data, "Vocal-feature CSV");
  correlate->add_option("--out", corr_out, "Output CSV (default: stdout)");

  RunOptions run_opts;
  run_opts.model = "lightgbm-like";
  auto* run = app.add_subcommand("run", "Train and evaluate one model");
  add_run_options(run, run_opts, true);

  RunOptions compare_opts;
  auto* compare = app.add_subcommand("compare", "Train and evaluate all five models");
  add_run_options(compare, compare_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (ingest->parsed()) {
      const std::string path = ingest_data.empty() ? default_data_path() : ingest_data;
      const pdvox::Dataset data = pdvox::load_dataset(path);
      std::cout << data.size() << " rows, " << data.count_label(1) << " positive, " << data.count_label(0)
                << " negative\n";
      return 0;
    }
    if (correlate->parsed()) {
      const std::string path = corr_data.empty() ? default_data_path() : corr_data;
      const pdvox::Dataset data = pdvox::load_dataset(path);
      const auto corr = pdvox::correlation_matrix(data);
      for (const auto& w : corr.warnings) std::cerr << "warning: " << w << '\n';
      if (corr_out.empty()) {
        pdvox::write_correlation_csv(std::cout, corr, data.feature_names());
      } else {
        std::ofstream out(corr_out, std::ios::binary);
        if (!out) throw pdvox::IoError("cannot write '" + corr_out + "'");
        pdvox::write_correlation_csv(out, corr, data.feature_names());
      }
      return 0;
    }
    if (run->parsed()) {
      if (run->count("--model") == 0 && run_opts.config.empty()) {
        std::cerr << "usage error: run requires --model (or --config)\n";
        return kUsageError;
      }
      return execute_run(run, run_opts, "");
    }
    if (compare->parsed()) return execute_run(compare, compare_opts, "all");
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
