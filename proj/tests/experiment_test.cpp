#include <doctest.h>

#include <regex>
#include <set>
#include <sstream>

#include "pdvox/error.hpp"
#include "pdvox/experiment.hpp"
#include "support/synthetic.hpp"

using namespace pdvox;
using pdvox::testing::uci_shaped;

namespace {

std::string emit(const ExperimentReport& r, ReportFormat f) {
  std::ostringstream out;
  emit_comparison(out, r, f);
  return out.str();
}

RunConfig quick_config() {
  RunConfig cfg;
  cfg.lightgbm.rounds = 20;
  cfg.xgboost.rounds = 20;
  cfg.adaboost.rounds = 20;
  cfg.bagging.n_trees = 15;
  return cfg;
}

}  // namespace

TEST_CASE("model keys") {
  for (ModelKind k : kAllModels) CHECK(parse_model_key(model_key(k)) == k);
  CHECK(!parse_model_key("forest"));
  RunConfig cfg;
  CHECK(cfg.selected_models().size() == 5);
  cfg.model = "svm";
  CHECK(cfg.selected_models() == std::vector<ModelKind>{ModelKind::Svm});
  cfg.model = "nope";
  CHECK_THROWS_AS(cfg.selected_models(), ContractError);
}

TEST_CASE("compare produces five rows with the expected fingerprint") {
  const Dataset data = uci_shaped(1);
  REQUIRE(data.count_label(1) == 147);
  REQUIRE(data.count_label(0) == 48);
  const ExperimentReport r = run_experiment(quick_config(), data, "x");
  REQUIRE(r.results.size() == 5);
  for (std::size_t m = 0; m < 5; ++m) {
    CHECK(r.results[m].model == model_key(kAllModels[m]));
    CHECK(r.results[m].metrics.accuracy);
    CHECK(r.results[m].metrics.sensitivity);
    CHECK(r.results[m].metrics.specificity);
    CHECK(r.results[m].metrics.auc);
    CHECK(r.results[m].confusion.total() == 39);
  }
  CHECK(r.fingerprint.rows == 195);
  CHECK(r.fingerprint.train_rows == 156);
  CHECK(r.fingerprint.test_rows == 39);
  CHECK(r.fingerprint.synthetic_rows == 80);
  CHECK(r.fingerprint.fit_positives == 118);
  CHECK(r.fingerprint.fit_negatives == 118);
  CHECK(r.results[4].threshold == 0.0);

  const std::string csv = emit(r, ReportFormat::Csv);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  CHECK(csv.rfind("model,accuracy,sensitivity,specificity,auc,f1,precision,tp,fn,tn,fp\n", 0) == 0);

  const std::string table = emit(r, ReportFormat::Table);
  const std::string header = table.substr(0, table.find('\n'));
  CHECK(std::regex_replace(header, std::regex(" {2,}"), "  ") ==
        "Model  Accuracy %  Sensitivity %  Specificity %  AUC %  F1-score %");
  CHECK(table.find("LightGBM-like") != std::string::npos);
}

TEST_CASE("reports are deterministic and follow the seed") {
  const Dataset data = uci_shaped(2);
  RunConfig cfg = quick_config();
  const std::string a = emit(run_experiment(cfg, data, "h"), ReportFormat::Structured);
  const std::string b = emit(run_experiment(cfg, data, "h"), ReportFormat::Structured);
  CHECK(a == b);
  cfg.threads = 4;
  CHECK(emit(run_experiment(cfg, data, "h"), ReportFormat::Structured) ==
        std::regex_replace(a, std::regex("\"threads\": 1"), "\"threads\": 4"));
  cfg.threads = 1;
  cfg.seed = 43;
  const ExperimentReport other = run_experiment(cfg, data, "h");
  cfg.seed = 42;
  CHECK(other.fingerprint.test_ids != run_experiment(cfg, data, "h").fingerprint.test_ids);
}

TEST_CASE("structured report round-trips and re-runs from its own config") {
  const Dataset data = uci_shaped(3);
  RunConfig cfg = quick_config();
  cfg.model = "adaboost";
  cfg.set_param("adaboost.rounds", "7");
  const ExperimentReport r = run_experiment(cfg, data, "h");
  const std::string json = report_to_json(r);
  const ExperimentReport back = report_from_json(json);
  CHECK(back == r);
  CHECK(report_to_json(back) == json);
  CHECK(config_from_json(json) == cfg);
  CHECK(run_experiment(config_from_json(json), data, "h") == r);
}

TEST_CASE("set_param") {
  RunConfig cfg;
  cfg.set_param("lightgbm.rounds", "200");
  cfg.set_param("xgboost.learning_rate", "0.05");
  cfg.set_param("svm.C", "3");
  cfg.set_param("svm.gamma", "0.2");
  CHECK(cfg.lightgbm.rounds == 200);
  CHECK(cfg.xgboost.learning_rate == 0.05);
  CHECK(cfg.svm.C == 3.0);
  CHECK(cfg.svm.gamma == 0.2);
  cfg.set_param("svm.gamma", "scale");
  CHECK(!cfg.svm.gamma);
  CHECK_THROWS_AS(cfg.set_param("lightgbm.nope", "1"), ContractError);
  CHECK_THROWS_AS(cfg.set_param("rounds", "1"), ContractError);
  CHECK_THROWS_AS(cfg.set_param("lightgbm.rounds", "many"), ContractError);
}

TEST_CASE("no synthetic row reaches the test partition") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig cfg = quick_config();
    cfg.model = "lightgbm-like";
    cfg.seed = seed;
    const ExperimentReport r = run_experiment(cfg, uci_shaped(seed), "h");
    for (const auto& id : r.fingerprint.test_ids) CHECK(id.rfind("synth-", 0) != 0);
  }
}

TEST_CASE("SMOTE before the split balances the whole table") {
  RunConfig cfg = quick_config();
  cfg.model = "bagging";
  cfg.smote_before_split = true;
  const ExperimentReport r = run_experiment(cfg, uci_shaped(4), "h");
  CHECK(r.fingerprint.synthetic_rows == 99);
  CHECK(r.fingerprint.train_rows + r.fingerprint.test_rows == 294);
  CHECK(r.fingerprint.fit_positives == r.fingerprint.fit_negatives);
}

TEST_CASE("pipeline errors carry their stage") {
  // Two negatives: one lands in test, leaving a single row SMOTE cannot use.
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({static_cast<double>(i), static_cast<double>(i % 3)});
    labels.push_back(i < 2 ? 0 : 1);
  }
  RunConfig cfg = quick_config();
  cfg.test_fraction = 0.5;
  try {
    run_experiment(cfg, pdvox::testing::make_dataset(rows, labels), "h");
    FAIL("expected a pipeline error");
  } catch (const PipelineError& e) {
    CHECK(e.stage() == "smote");
  }
  cfg.data_path = "/nonexistent/file.csv";
  try {
    run_experiment(cfg);
    FAIL("expected a pipeline error");
  } catch (const PipelineError& e) {
    CHECK(e.stage() == "load");
  }
}
