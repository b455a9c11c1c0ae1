#include "rumorlens/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <tuple>

#include <json.hpp>

#include "parallel.hpp"
#include "rumorlens/errors.hpp"

namespace rumorlens {

using nlohmann::json;

namespace {

double selection_value(const ExperimentResult& r, SelectionMetric metric) {
  return metric == SelectionMetric::kAccuracy ? r.mean.accuracy : r.mean.f1_pos;
}

json metrics_to_json(const MetricsReport& m) {
  return {{"accuracy", m.accuracy},
          {"precision_pos", m.precision_pos},
          {"recall_pos", m.recall_pos},
          {"f1_pos", m.f1_pos},
          {"precision_macro", m.precision_macro},
          {"recall_macro", m.recall_macro},
          {"f1_macro", m.f1_macro},
          {"precision_pos_undefined", m.precision_pos_undefined},
          {"recall_pos_undefined", m.recall_pos_undefined},
          {"f1_pos_undefined", m.f1_pos_undefined},
          {"macro_undefined", m.macro_undefined}};
}

MetricsReport metrics_from_json(const json& j) {
  MetricsReport m;
  m.accuracy = j.at("accuracy").get<double>();
  m.precision_pos = j.at("precision_pos").get<double>();
  m.recall_pos = j.at("recall_pos").get<double>();
  m.f1_pos = j.at("f1_pos").get<double>();
  m.precision_macro = j.at("precision_macro").get<double>();
  m.recall_macro = j.at("recall_macro").get<double>();
  m.f1_macro = j.at("f1_macro").get<double>();
  m.precision_pos_undefined = j.value("precision_pos_undefined", false);
  m.recall_pos_undefined = j.value("recall_pos_undefined", false);
  m.f1_pos_undefined = j.value("f1_pos_undefined", false);
  m.macro_undefined = j.value("macro_undefined", false);
  return m;
}

json hyper_to_json(const Hyperparams& h) {
  return {{"batch_size", h.batch_size},
          {"epochs", h.epochs},
          {"learning_rate", h.learning_rate},
          {"conv_activation", to_string(h.conv_activation)},
          {"dropout_rate", h.dropout_rate}};
}

Hyperparams hyper_from_json(const json& j) {
  Hyperparams h;
  h.batch_size = j.at("batch_size").get<std::size_t>();
  h.epochs = j.at("epochs").get<std::size_t>();
  h.learning_rate = j.at("learning_rate").get<double>();
  h.conv_activation = parse_activation(j.at("conv_activation").get<std::string>());
  h.dropout_rate = j.at("dropout_rate").get<double>();
  return h;
}

json grid_to_json(const GridSpec& g) {
  json variants = json::array();
  for (Variant v : g.variants) variants.push_back(to_string(v));
  json activations = json::array();
  for (Activation a : g.activations) activations.push_back(to_string(a));
  return {{"variants", variants},
          {"batch_sizes", g.batch_sizes},
          {"epochs", g.epochs},
          {"learning_rates", g.learning_rates},
          {"activations", activations},
          {"dropout_rates", g.dropout_rates}};
}

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  g.variants.clear();
  for (const auto& v : j.at("variants")) g.variants.push_back(parse_variant(v.get<std::string>()));
  g.batch_sizes = j.at("batch_sizes").get<std::vector<std::size_t>>();
  g.epochs = j.at("epochs").get<std::vector<std::size_t>>();
  g.learning_rates = j.at("learning_rates").get<std::vector<double>>();
  g.activations.clear();
  for (const auto& a : j.at("activations")) g.activations.push_back(parse_activation(a.get<std::string>()));
  g.dropout_rates = j.at("dropout_rates").get<std::vector<double>>();
  return g;
}

json result_to_json(const ExperimentResult& r) {
  json folds = json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"fold", f.fold},
                     {"train_size", f.train_size},
                     {"test_size", f.test_size},
                     {"confusion", {{"tp", f.confusion.tp}, {"fp", f.confusion.fp},
                                    {"fn", f.confusion.fn}, {"tn", f.confusion.tn}}},
                     {"metrics", metrics_to_json(f.metrics)}});
  }
  return {{"combination_index", r.combination_index},
          {"rank", r.rank},
          {"variant", to_string(r.variant)},
          {"hyperparams", hyper_to_json(r.hyper)},
          {"status", r.status == RunStatus::kOk ? "ok" : "failed"},
          {"error", r.error},
          {"folds", folds},
          {"mean", metrics_to_json(r.mean)},
          {"seed", r.seed},
          {"wall_seconds", r.wall_seconds},
          {"completed_at", r.completed_at}};
}

ExperimentResult result_from_json(const json& j) {
  ExperimentResult r;
  r.combination_index = j.at("combination_index").get<std::size_t>();
  r.rank = j.at("rank").get<std::size_t>();
  r.variant = parse_variant(j.at("variant").get<std::string>());
  r.hyper = hyper_from_json(j.at("hyperparams"));
  const auto status = j.at("status").get<std::string>();
  if (status != "ok" && status != "failed") throw DataError("unknown result status '" + status + "'");
  r.status = status == "ok" ? RunStatus::kOk : RunStatus::kFailed;
  r.error = j.value("error", "");
  for (const auto& f : j.at("folds")) {
    FoldResult fold;
    fold.fold = f.at("fold").get<std::size_t>();
    fold.train_size = f.at("train_size").get<std::size_t>();
    fold.test_size = f.at("test_size").get<std::size_t>();
    const json& c = f.at("confusion");
    fold.confusion = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(),
                      c.at("fn").get<std::size_t>(), c.at("tn").get<std::size_t>()};
    fold.metrics = metrics_from_json(f.at("metrics"));
    r.folds.push_back(fold);
  }
  r.mean = metrics_from_json(j.at("mean"));
  r.seed = j.at("seed").get<std::uint64_t>();
  r.wall_seconds = j.value("wall_seconds", 0.0);
  r.completed_at = j.value("completed_at", "");
  return r;
}

}  // namespace

void GridSpec::validate() const {
  if (variants.empty() || batch_sizes.empty() || epochs.empty() || learning_rates.empty() ||
      activations.empty() || dropout_rates.empty()) {
    throw ConfigError("grid: every hyperparameter needs at least one candidate value");
  }
  for (const auto& c : combinations()) c.hyper.validate();
}

std::size_t GridSpec::size() const noexcept {
  return variants.size() * batch_sizes.size() * epochs.size() * learning_rates.size() *
         activations.size() * dropout_rates.size();
}

std::vector<GridSpec::Combination> GridSpec::combinations() const {
  std::vector<Combination> out;
  out.reserve(size());
  for (Variant v : variants)
    for (std::size_t b : batch_sizes)
      for (std::size_t e : epochs)
        for (double lr : learning_rates)
          for (Activation a : activations)
            for (double d : dropout_rates) out.push_back({v, Hyperparams{b, e, lr, a, d}});
  return out;
}

std::string to_string(SelectionMetric metric) {
  return metric == SelectionMetric::kAccuracy ? "accuracy" : "f1_pos";
}

SelectionMetric parse_selection_metric(const std::string& name) {
  if (name == "accuracy") return SelectionMetric::kAccuracy;
  if (name == "f1_pos") return SelectionMetric::kF1Pos;
  throw ConfigError("unknown selection metric '" + name + "' (expected accuracy or f1_pos)");
}

void rank_results(std::vector<ExperimentResult>& results, SelectionMetric selection) {
  const auto key = [selection](const ExperimentResult& r) {
    return std::make_tuple(r.status == RunStatus::kOk ? 0 : 1,
                           r.status == RunStatus::kOk ? -selection_value(r, selection) : 0.0,
                           r.status == RunStatus::kOk ? r.hyper.epochs : 0,
                           r.status == RunStatus::kOk ? r.hyper.batch_size : 0,
                           r.status == RunStatus::kOk ? to_string(r.variant) : std::string(),
                           r.status == RunStatus::kOk ? r.hyper.learning_rate : 0.0,
                           r.status == RunStatus::kOk ? to_string(r.hyper.conv_activation) : std::string(),
                           r.status == RunStatus::kOk ? r.hyper.dropout_rate : 0.0,
                           r.combination_index);
  };
  std::sort(results.begin(), results.end(),
            [&](const ExperimentResult& a, const ExperimentResult& b) { return key(a) < key(b); });
  std::size_t rank = 0;
  for (auto& r : results) r.rank = r.status == RunStatus::kOk ? ++rank : 0;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<ExperimentResult> grid_search(const GridSpec& grid, const ModelConfig& base,
                                          const Dataset& dataset, std::size_t k, std::uint64_t seed,
                                          SelectionMetric selection, const GridOptions& options) {
  grid.validate();
  const auto combos = grid.combinations();
  std::vector<ExperimentResult> results(combos.size());

  detail::parallel_for(combos.size(), options.workers, [&](std::size_t index) {
    const auto started = std::chrono::steady_clock::now();
    ExperimentResult& r = results[index];
    r.combination_index = index;
    r.variant = combos[index].variant;
    r.hyper = combos[index].hyper;
    r.seed = seed;
    ModelConfig config = base;
    config.variant = r.variant;
    CvOptions cv = options.cv;
    cv.workers = 1;
    try {
      CvResult cv_result = cross_validate(config, r.hyper, dataset, k, seed, cv);
      r.folds = std::move(cv_result.folds);
      r.mean = cv_result.mean;
    } catch (const Error& e) {
      r.status = RunStatus::kFailed;
      r.error = e.what();
    }
    r.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    r.completed_at = utc_timestamp();
    if (options.on_result) options.on_result(r);
  });

  rank_results(results, selection);
  return results;
}

std::string serialize_results(const ResultsDocument& doc) {
  json results = json::array();
  for (const auto& r : doc.results) results.push_back(result_to_json(r));
  const json j = {{"schema_version", kResultsSchemaVersion},
                  {"grid", grid_to_json(doc.grid)},
                  {"seed", doc.seed},
                  {"k", doc.k},
                  {"selection_metric", to_string(doc.selection)},
                  {"config", doc.config},
                  {"results", results}};
  return j.dump(2) + "\n";
}

ResultsDocument parse_results(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("results file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw DataError("results file has no integer schema_version");
  }
  const auto version = j["schema_version"].get<long long>();
  if (version != kResultsSchemaVersion) {
    throw UnsupportedVersionError("results schema_version " + std::to_string(version) +
                                  " is not supported (this build reads version " +
                                  std::to_string(kResultsSchemaVersion) + ")");
  }
  try {
    ResultsDocument doc;
    doc.grid = grid_from_json(j.at("grid"));
    doc.seed = j.at("seed").get<std::uint64_t>();
    doc.k = j.at("k").get<std::size_t>();
    doc.selection = parse_selection_metric(j.at("selection_metric").get<std::string>());
    doc.config = j.value("config", std::map<std::string, std::string>{});
    for (const auto& r : j.at("results")) doc.results.push_back(result_from_json(r));
    return doc;
  } catch (const json::exception& e) {
    throw DataError(std::string("results file is inconsistent: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("results file is inconsistent: ") + e.what());
  }
}

void save_results(const ResultsDocument& doc, const std::filesystem::path& path) {
  write_file_atomically(path, serialize_results(doc));
}

ResultsDocument load_results(const std::filesystem::path& path) { return parse_results(read_file(path)); }

}  // namespace rumorlens
