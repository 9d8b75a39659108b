#include "pdvox/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "pdvox/error.hpp"
#include "pdvox/resample.hpp"
#include "pdvox/rng.hpp"

namespace pdvox {

using nlohmann::json;

namespace {

struct ModelInfo {
  ModelKind kind;
  std::string_view key;
  std::string_view label;
};

constexpr std::array<ModelInfo, 5> kModelInfo = {{
    {ModelKind::LightgbmLike, "lightgbm-like", "LightGBM-like"},
    {ModelKind::XgboostLike, "xgboost-like", "XGBoost-like"},
    {ModelKind::AdaBoost, "adaboost", "AdaBoost"},
    {ModelKind::Bagging, "bagging", "Bagging"},
    {ModelKind::Svm, "svm", "SVM"},
}};

const ModelInfo& info(ModelKind kind) {
  for (const auto& m : kModelInfo) {
    if (m.kind == kind) return m;
  }
  throw ContractError("unknown model kind");
}

template <typename F>
auto in_stage(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(stage, e.what());
  }
}

// --- JSON mapping ----------------------------------------------------------

json gbdt_to_json(const GbdtParams& p) {
  return json{{"rounds", p.rounds},
              {"learning_rate", p.learning_rate},
              {"variant", p.variant == GbdtVariant::LeafWise ? "leaf-wise" : "level-wise"},
              {"max_leaves", p.max_leaves},
              {"max_depth", p.max_depth},
              {"lambda", p.lambda},
              {"gamma", p.gamma},
              {"max_bins", p.max_bins},
              {"min_samples_leaf", p.min_samples_leaf}};
}

GbdtParams gbdt_from_json(const json& j) {
  GbdtParams p;
  p.rounds = j.at("rounds").get<std::size_t>();
  p.learning_rate = j.at("learning_rate").get<double>();
  const auto variant = j.at("variant").get<std::string>();
  if (variant == "leaf-wise") p.variant = GbdtVariant::LeafWise;
  else if (variant == "level-wise") p.variant = GbdtVariant::LevelWise;
  else throw ContractError("unknown GBDT variant '" + variant + "'");
  p.max_leaves = j.at("max_leaves").get<std::size_t>();
  p.max_depth = j.at("max_depth").get<std::size_t>();
  p.lambda = j.at("lambda").get<double>();
  p.gamma = j.at("gamma").get<double>();
  p.max_bins = j.at("max_bins").get<std::size_t>();
  p.min_samples_leaf = j.at("min_samples_leaf").get<std::size_t>();
  return p;
}

json config_json(const RunConfig& c) {
  json svm_gamma = c.svm.gamma ? json(*c.svm.gamma) : json("scale");
  return json{
      {"data_path", c.data_path},
      {"model", c.model},
      {"seed", c.seed},
      {"test_fraction", c.test_fraction},
      {"smote", c.smote},
      {"smote_before_split", c.smote_before_split},
      {"smote_k", c.smote_k},
      {"threads", c.threads},
      {"lightgbm", gbdt_to_json(c.lightgbm)},
      {"xgboost", gbdt_to_json(c.xgboost)},
      {"adaboost", {{"rounds", c.adaboost.rounds}}},
      {"bagging", {{"n_trees", c.bagging.n_trees}, {"max_depth", c.bagging.max_depth}, {"bootstrap", c.bagging.bootstrap}}},
      {"svm", {{"C", c.svm.C}, {"gamma", svm_gamma}, {"tolerance", c.svm.tolerance}, {"max_passes", c.svm.max_passes}}},
  };
}

RunConfig config_from(const json& j) {
  RunConfig c;
  c.data_path = j.at("data_path").get<std::string>();
  c.model = j.at("model").get<std::string>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.test_fraction = j.at("test_fraction").get<double>();
  c.smote = j.at("smote").get<bool>();
  c.smote_before_split = j.at("smote_before_split").get<bool>();
  c.smote_k = j.at("smote_k").get<std::size_t>();
  c.threads = j.at("threads").get<std::size_t>();
  c.lightgbm = gbdt_from_json(j.at("lightgbm"));
  c.xgboost = gbdt_from_json(j.at("xgboost"));
  c.adaboost.rounds = j.at("adaboost").at("rounds").get<std::size_t>();
  const json& bag = j.at("bagging");
  c.bagging.n_trees = bag.at("n_trees").get<std::size_t>();
  c.bagging.max_depth = bag.at("max_depth").get<std::size_t>();
  c.bagging.bootstrap = bag.at("bootstrap").get<bool>();
  const json& svm = j.at("svm");
  c.svm.C = svm.at("C").get<double>();
  const json& gamma = svm.at("gamma");
  if (gamma.is_string()) {
    if (gamma.get<std::string>() != "scale") throw ContractError("svm.gamma must be a number or \"scale\"");
    c.svm.gamma.reset();
  } else {
    c.svm.gamma = gamma.get<double>();
  }
  c.svm.tolerance = svm.at("tolerance").get<double>();
  c.svm.max_passes = svm.at("max_passes").get<std::size_t>();
  return c;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json result_json(const ModelResult& r) {
  json roc = json::array();
  for (const auto& pt : r.roc.points) {
    roc.push_back({std::isinf(pt.threshold) ? json(nullptr) : json(pt.threshold), pt.fpr, pt.tpr});
  }
  return json{
      {"model", r.model},
      {"metrics",
       {{"accuracy", optional_json(r.metrics.accuracy)},
        {"sensitivity", optional_json(r.metrics.sensitivity)},
        {"specificity", optional_json(r.metrics.specificity)},
        {"precision", optional_json(r.metrics.precision)},
        {"f1", optional_json(r.metrics.f1)},
        {"auc", optional_json(r.metrics.auc)}}},
      {"confusion", {{"tp", r.confusion.tp}, {"fn", r.confusion.fn}, {"tn", r.confusion.tn}, {"fp", r.confusion.fp}}},
      {"threshold", r.threshold},
      {"roc", roc},
      {"summary", r.summary},
  };
}

ModelResult result_from(const json& j) {
  ModelResult r;
  r.model = j.at("model").get<std::string>();
  const json& m = j.at("metrics");
  r.metrics.accuracy = optional_from(m.at("accuracy"));
  r.metrics.sensitivity = optional_from(m.at("sensitivity"));
  r.metrics.specificity = optional_from(m.at("specificity"));
  r.metrics.precision = optional_from(m.at("precision"));
  r.metrics.f1 = optional_from(m.at("f1"));
  r.metrics.auc = optional_from(m.at("auc"));
  const json& cm = j.at("confusion");
  r.confusion = {cm.at("tp").get<std::size_t>(), cm.at("fn").get<std::size_t>(), cm.at("tn").get<std::size_t>(),
                 cm.at("fp").get<std::size_t>()};
  r.threshold = j.at("threshold").get<double>();
  for (const json& pt : j.at("roc")) {
    const double threshold = pt.at(0).is_null() ? std::numeric_limits<double>::infinity() : pt.at(0).get<double>();
    r.roc.points.push_back({threshold, pt.at(1).get<double>(), pt.at(2).get<double>()});
  }
  r.summary = j.at("summary").get<std::map<std::string, double>>();
  return r;
}

// --- pipeline ----------------------------------------------------------------

ModelResult evaluate(ModelKind kind, const RunConfig& cfg, const Dataset& fit_set, const Dataset& test) {
  ModelResult result;
  result.model = std::string(info(kind).key);
  std::vector<double> scores(test.size());

  switch (kind) {
    case ModelKind::LightgbmLike:
    case ModelKind::XgboostLike: {
      const GbdtParams& params = kind == ModelKind::LightgbmLike ? cfg.lightgbm : cfg.xgboost;
      const GbdtModel model = fit_gbdt(fit_set, params);
      for (std::size_t i = 0; i < test.size(); ++i) scores[i] = model.predict(test.row(i)).probability;
      result.summary = {{"trees", static_cast<double>(model.trees.size())},
                        {"base_score", model.base_score},
                        {"final_training_loss", model.training_loss.back()}};
      break;
    }
    case ModelKind::AdaBoost: {
      const AdaBoostModel model = fit_adaboost(fit_set, cfg.adaboost);
      for (std::size_t i = 0; i < test.size(); ++i) scores[i] = model.predict(test.row(i)).probability;
      result.summary = {{"stumps", static_cast<double>(model.stumps.size())}};
      break;
    }
    case ModelKind::Bagging: {
      BaggingParams params = cfg.bagging;
      params.seed = cfg.seed;
      params.threads = cfg.threads;
      const BaggingModel model = fit_bagging(fit_set, params);
      for (std::size_t i = 0; i < test.size(); ++i) scores[i] = model.predict(test.row(i)).probability;
      result.summary = {{"trees", static_cast<double>(model.trees.size())}};
      break;
    }
    case ModelKind::Svm: {
      const SvmModel model = fit_svm(fit_set, cfg.svm);
      for (std::size_t i = 0; i < test.size(); ++i) scores[i] = decision_function(model, test.row(i));
      result.threshold = 0.0;
      result.summary = {{"support_vectors", static_cast<double>(model.dual_coef.size())},
                        {"dual_objective", model.dual_objective()},
                        {"gamma", model.gamma},
                        {"iterations", static_cast<double>(model.iterations)},
                        {"converged", model.converged ? 1.0 : 0.0}};
      break;
    }
  }

  result.confusion = confusion(scores, test.labels(), result.threshold);
  result.metrics = classification_metrics(result.confusion);
  const RocResult roc = roc_auc(scores, test.labels());
  result.metrics.auc = roc.auc;
  result.roc = roc.curve;
  return result;
}

}  // namespace

std::string_view model_key(ModelKind kind) { return info(kind).key; }
std::string_view model_label(ModelKind kind) { return info(kind).label; }

std::optional<ModelKind> parse_model_key(std::string_view key) {
  for (const auto& m : kModelInfo) {
    if (m.key == key) return m.kind;
  }
  return std::nullopt;
}

std::vector<ModelKind> RunConfig::selected_models() const {
  if (model == "all") return {kAllModels.begin(), kAllModels.end()};
  const auto kind = parse_model_key(model);
  if (!kind) throw ContractError("unknown model '" + model + "'");
  return {*kind};
}

void RunConfig::set_param(std::string_view key, std::string_view value) {
  json j = config_json(*this);
  json* node = &j;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = key.find('.', start);
    const std::string part(key.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (!node->is_object() || !node->contains(part)) {
      throw ContractError("unknown parameter '" + std::string(key) + "'");
    }
    node = &(*node)[part];
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) throw ContractError("parameter '" + std::string(key) + "' is a group");
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded() || parsed.is_structured()) parsed = std::string(value);
  if (node->is_number() && parsed.is_number_float() && !node->is_number_float()) {
    throw ContractError("parameter '" + std::string(key) + "' expects an integer");
  }
  *node = parsed;
  try {
    *this = config_from(j);
  } catch (const json::exception& e) {
    throw ContractError("invalid value '" + std::string(value) + "' for '" + std::string(key) + "': " + e.what());
  }
}

bool operator==(const RunConfig& a, const RunConfig& b) { return config_json(a) == config_json(b); }

bool operator==(const ExperimentReport& a, const ExperimentReport& b) {
  return a.version == b.version && a.config == b.config && a.fingerprint == b.fingerprint && a.results == b.results;
}

std::string content_hash(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

ExperimentReport run_experiment(const RunConfig& cfg) {
  std::string bytes;
  const Dataset data = in_stage("load", [&] {
    std::ifstream in(cfg.data_path, std::ios::binary);
    if (!in) throw IoError("cannot open data file '" + cfg.data_path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    bytes = ss.str();
    std::istringstream parse(bytes);
    return read_dataset(parse);
  });
  return run_experiment(cfg, data, content_hash(bytes));
}

ExperimentReport run_experiment(const RunConfig& cfg, const Dataset& data, std::string hash) {
  const std::vector<ModelKind> models = in_stage("config", [&] { return cfg.selected_models(); });

  ExperimentReport report;
  report.config = cfg;
  auto& fp = report.fingerprint;
  fp.rows = data.size();
  fp.positives = data.count_label(1);
  fp.negatives = data.count_label(0);
  fp.content_hash = std::move(hash);

  const SmoteConfig smote_cfg{cfg.smote_k, cfg.seed};
  Dataset source = data;
  if (cfg.smote && cfg.smote_before_split) {
    source = in_stage("smote", [&] { return smote(data, smote_cfg).data; });
  }
  const SplitPair split = in_stage("split", [&] { return stratified_split(source, cfg.test_fraction, cfg.seed); });
  Dataset fit_set = split.train;
  if (cfg.smote && !cfg.smote_before_split) {
    fit_set = in_stage("smote", [&] { return smote(split.train, smote_cfg).data; });
  }
  fp.train_rows = split.train.size();
  fp.test_rows = split.test.size();
  fp.synthetic_rows = source.size() - data.size() + fit_set.size() - split.train.size();
  fp.fit_rows = fit_set.size();
  fp.fit_positives = fit_set.count_label(1);
  fp.fit_negatives = fit_set.count_label(0);
  fp.test_ids = split.test.ids();

  report.results.resize(models.size());
  auto run_one = [&](std::size_t m) {
    report.results[m] = in_stage("fit", [&] { return evaluate(models[m], cfg, fit_set, split.test); });
  };
  if (cfg.threads > 1 && models.size() > 1) {
    std::vector<std::exception_ptr> errors(models.size());
    {
      std::vector<std::jthread> workers;
      for (std::size_t m = 0; m < models.size(); ++m) {
        workers.emplace_back([&, m] {
          try {
            run_one(m);
          } catch (...) {
            errors[m] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  } else {
    for (std::size_t m = 0; m < models.size(); ++m) run_one(m);
  }
  return report;
}

std::optional<ReportFormat> parse_report_format(std::string_view name) {
  if (name == "table") return ReportFormat::Table;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "structured" || name == "json") return ReportFormat::Structured;
  return std::nullopt;
}

namespace {

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string label_of(const std::string& key) {
  const auto kind = parse_model_key(key);
  return kind ? std::string(model_label(*kind)) : key;
}

void emit_table(std::ostream& out, const ExperimentReport& report) {
  static const std::array<std::string, 5> columns = {"Accuracy %", "Sensitivity %", "Specificity %", "AUC %",
                                                     "F1-score %"};
  std::size_t name_width = 5;
  for (const auto& r : report.results) name_width = std::max(name_width, label_of(r.model).size());
  out << pad_right("Model", name_width);
  for (const auto& c : columns) out << "  " << c;
  out << '\n';
  for (const auto& r : report.results) {
    const std::array<std::string, 5> cells = {format_percent(r.metrics.accuracy), format_percent(r.metrics.sensitivity),
                                              format_percent(r.metrics.specificity), format_percent(r.metrics.auc),
                                              format_percent(r.metrics.f1)};
    out << pad_right(label_of(r.model), name_width);
    for (std::size_t c = 0; c < columns.size(); ++c) out << "  " << pad_left(cells[c], columns[c].size());
    out << '\n';
  }
  const auto& fp = report.fingerprint;
  out << '\n'
      << "seed " << report.config.seed << ", test fraction " << format_double(report.config.test_fraction)
      << ", train " << fp.train_rows << " / test " << fp.test_rows << " of " << fp.rows << " rows";
  if (report.config.smote) {
    out << ", SMOTE " << (report.config.smote_before_split ? "before split" : "on train") << " (+" << fp.synthetic_rows
        << " synthetic)";
  }
  out << '\n';
}

std::string csv_value(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void emit_csv(std::ostream& out, const ExperimentReport& report) {
  out << "model,accuracy,sensitivity,specificity,auc,f1,precision,tp,fn,tn,fp\n";
  for (const auto& r : report.results) {
    const auto& m = r.metrics;
    out << r.model << ',' << csv_value(m.accuracy) << ',' << csv_value(m.sensitivity) << ','
        << csv_value(m.specificity) << ',' << csv_value(m.auc) << ',' << csv_value(m.f1) << ','
        << csv_value(m.precision) << ',' << r.confusion.tp << ',' << r.confusion.fn << ',' << r.confusion.tn << ','
        << r.confusion.fp << '\n';
  }
}

}  // namespace

void emit_comparison(std::ostream& out, const ExperimentReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Table: emit_table(out, report); break;
    case ReportFormat::Csv: emit_csv(out, report); break;
    case ReportFormat::Structured: out << report_to_json(report) << '\n'; break;
  }
}

void emit_comparison(const std::filesystem::path& path, const ExperimentReport& report, ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report to '" + path.string() + "'");
  emit_comparison(out, report, format);
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string config_to_json(const RunConfig& cfg) { return config_json(cfg).dump(2); }

RunConfig config_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    return config_from(j.contains("config") ? j.at("config") : j);
  } catch (const json::exception& e) {
    throw ContractError(std::string("invalid config: ") + e.what());
  }
}

std::string report_to_json(const ExperimentReport& report) {
  const auto& fp = report.fingerprint;
  json results = json::array();
  for (const auto& r : report.results) results.push_back(result_json(r));
  const json j{
      {"version", report.version},
      {"config", config_json(report.config)},
      {"dataset",
       {{"rows", fp.rows},
        {"positives", fp.positives},
        {"negatives", fp.negatives},
        {"content_hash", fp.content_hash},
        {"train_rows", fp.train_rows},
        {"test_rows", fp.test_rows},
        {"synthetic_rows", fp.synthetic_rows},
        {"fit_rows", fp.fit_rows},
        {"fit_positives", fp.fit_positives},
        {"fit_negatives", fp.fit_negatives},
        {"test_ids", fp.test_ids}}},
      {"results", results},
  };
  return j.dump(2);
}

ExperimentReport report_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    ExperimentReport r;
    r.version = j.at("version").get<std::string>();
    r.config = config_from(j.at("config"));
    const json& d = j.at("dataset");
    auto& fp = r.fingerprint;
    fp.rows = d.at("rows").get<std::size_t>();
    fp.positives = d.at("positives").get<std::size_t>();
    fp.negatives = d.at("negatives").get<std::size_t>();
    fp.content_hash = d.at("content_hash").get<std::string>();
    fp.train_rows = d.at("train_rows").get<std::size_t>();
    fp.test_rows = d.at("test_rows").get<std::size_t>();
    fp.synthetic_rows = d.at("synthetic_rows").get<std::size_t>();
    fp.fit_rows = d.at("fit_rows").get<std::size_t>();
    fp.fit_positives = d.at("fit_positives").get<std::size_t>();
    fp.fit_negatives = d.at("fit_negatives").get<std::size_t>();
    fp.test_ids = d.at("test_ids").get<std::vector<std::string>>();
    for (const json& res : j.at("results")) r.results.push_back(result_from(res));
    return r;
  } catch (const json::exception& e) {
    throw ContractError(std::string("invalid report: ") + e.what());
  }
}

}  // namespace pdvox
