#include "rumorlens/dataset_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rumorlens/errors.hpp"
#include "rumorlens/rng.hpp"

namespace rumorlens {

using nlohmann::json;

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || (c >= '\t' && c <= '\r'); };
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string describe_lines(const std::vector<LineError>& errors) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(errors.size(), 20);
  for (std::size_t k = 0; k < shown; ++k) {
    out += (k ? ", " : "") + std::to_string(errors[k].line);
  }
  if (errors.size() > shown) out += ", ...";
  return out;
}

RawRecord parse_record(const std::string& line, std::size_t line_no, bool require_label) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("line is not a JSON object");

  RawRecord record;
  const auto text = j.find("text");
  if (text == j.end() || !text->is_string()) throw DataError("missing string field 'text'");
  record.text = text->get<std::string>();
  if (trim(record.text).empty()) throw DataError("field 'text' is empty");

  const auto label = j.find("label");
  if (label == j.end() || label->is_null()) {
    if (require_label) throw DataError("missing field 'label'");
  } else {
    std::string value;
    if (label->is_string()) {
      value = label->get<std::string>();
    } else if (label->is_number_integer()) {
      value = std::to_string(label->get<long long>());
    } else {
      throw DataError("field 'label' must be a string");
    }
    const auto parsed = parse_label(value);
    if (!parsed) throw DataError("unknown label '" + value + "'");
    record.label = *parsed;
  }

  const auto id = j.find("id");
  if (id != j.end() && id->is_string()) {
    record.id = id->get<std::string>();
  } else if (id != j.end() && id->is_number_integer()) {
    record.id = std::to_string(id->get<long long>());
  } else {
    record.id = "line-" + std::to_string(line_no);
  }
  const auto event = j.find("event");
  record.event = event != j.end() && event->is_string() ? event->get<std::string>() : "unknown";
  return record;
}

json config_to_json(const ModelConfig& c) {
  return {{"variant", to_string(c.variant)},
          {"vocab_size", c.vocab_size},
          {"max_len", c.max_len},
          {"embed_dim", c.embed_dim},
          {"hidden", c.hidden},
          {"dropout_rate", c.dropout_rate},
          {"n_filters", c.n_filters},
          {"kernel_width", c.kernel_width},
          {"pool", c.pool},
          {"conv_activation", to_string(c.conv_activation)},
          {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.variant = parse_variant(j.at("variant").get<std::string>());
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.max_len = j.at("max_len").get<std::size_t>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.n_filters = j.at("n_filters").get<std::size_t>();
  c.kernel_width = j.at("kernel_width").get<std::size_t>();
  c.pool = j.at("pool").get<std::size_t>();
  c.conv_activation = parse_activation(j.at("conv_activation").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

std::optional<int> parse_label(std::string_view label) {
  const std::string value = lowercase(trim(label));
  if (value == "rumour" || value == "rumor" || value == "1") return 1;
  if (value == "non-rumour" || value == "non-rumor" || value == "0") return 0;
  return std::nullopt;
}

Dataset build_dataset(const std::vector<RawRecord>& records, const PipelineOptions& options) {
  Dataset dataset;
  dataset.options = options;
  dataset.tokens.reserve(records.size());
  for (const auto& record : records) dataset.tokens.push_back(tokenize(record.text));
  dataset.vocab = build_vocabulary(dataset.tokens, options.min_count, options.max_vocab);

  dataset.examples.reserve(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    const RawRecord& record = records[k];
    if (record.label != 0 && record.label != 1) {
      throw DataError("record '" + record.id + "' has label " + std::to_string(record.label));
    }
    dataset.examples.push_back(
        {encode_and_pad(dataset.tokens[k], dataset.vocab, options.max_len, options.pad_side),
         record.label, record.event, record.id});
    ++dataset.class_counts[static_cast<std::size_t>(record.label)];
    ++dataset.event_counts[record.event];
  }
  return dataset;
}

Dataset reencode(const Dataset& dataset, const Vocabulary& vocab) {
  Dataset out = dataset;
  out.vocab = vocab;
  for (std::size_t k = 0; k < out.examples.size(); ++k) {
    out.examples[k].indices =
        encode_and_pad(dataset.tokens[k], vocab, dataset.options.max_len, dataset.options.pad_side);
  }
  return out;
}

std::vector<RawRecord> read_jsonl_records(const std::filesystem::path& path, LoadReport& report,
                                          bool require_label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read corpus file '" + path.string() + "'");

  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++report.lines_read;
    try {
      records.push_back(parse_record(line, line_no, require_label));
    } catch (const DataError& e) {
      report.errors.push_back({line_no, e.what()});
    }
  }
  if (in.bad()) throw DataError("I/O error while reading '" + path.string() + "'");

  if (records.empty()) {
    throw DataError("corpus rejected: '" + path.string() + "' contains no usable records" +
                    (report.errors.empty() ? "" : " (malformed lines: " + describe_lines(report.errors) + ")"));
  }
  const double malformed = static_cast<double>(report.errors.size()) /
                           static_cast<double>(report.lines_read);
  if (malformed > kMaxMalformedFraction) {
    throw DataError("corpus rejected: " + std::to_string(report.errors.size()) + " of " +
                    std::to_string(report.lines_read) + " lines are malformed (lines " +
                    describe_lines(report.errors) + "); first error: " + report.errors.front().message);
  }
  return records;
}

Dataset load_jsonl(const std::filesystem::path& path, const PipelineOptions& options,
                   LoadReport* report) {
  LoadReport local;
  LoadReport& r = report ? *report : local;
  return build_dataset(read_jsonl_records(path, r), options);
}

void write_jsonl(const std::filesystem::path& path, const std::vector<RawRecord>& records) {
  std::string content;
  for (const auto& record : records) {
    const json j = {{"id", record.id},
                    {"text", record.text},
                    {"label", record.label == 1 ? "rumour" : "non-rumour"},
                    {"event", record.event}};
    content += j.dump();
    content += '\n';
  }
  write_file_atomically(path, content);
}

std::vector<RawRecord> synthesize_records(std::size_t n, double signal_strength, std::uint64_t seed,
                                          std::size_t max_len) {
  if (n < 20) throw ConfigError("synthesize: n must be >= 20");
  if (!(signal_strength >= 0.5 && signal_strength <= 1.0)) {
    throw ConfigError("synthesize: signal_strength must lie in [0.5, 1.0]");
  }
  if (max_len < 1) throw ConfigError("synthesize: max_len must be >= 1");

  constexpr std::size_t kLexiconSize = 40;
  constexpr std::size_t kSharedSize = 200;
  const auto word = [](const char* prefix, std::size_t k) {
    std::string digits = std::to_string(k);
    if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
    return prefix + digits;
  };

  Rng rng(seed);
  const double own = 2.0 * signal_strength - 1.0;
  const std::size_t min_len = std::min<std::size_t>(5, max_len);

  std::vector<int> labels(n, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n / 2), 1);
  rng.shuffle(std::span<int>(labels));

  std::vector<RawRecord> records;
  records.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const int label = labels[k];
    const std::size_t length = min_len + rng.below(max_len - min_len + 1);
    std::string text;
    for (std::size_t t = 0; t < length; ++t) {
      std::string token;
      if (rng.bernoulli(own)) {
        token = word(label == 1 ? "rum" : "ver", rng.below(kLexiconSize));
      } else {
        token = word("w", rng.below(kSharedSize));
      }
      if (t) text += ' ';
      text += token;
    }
    const auto event = kSyntheticEvents[rng.below(kSyntheticEvents.size())];
    records.push_back({word("syn", k), std::move(text), label, std::string(event)});
  }
  return records;
}

Dataset synthesize_corpus(std::size_t n, double signal_strength, std::uint64_t seed,
                          const PipelineOptions& options) {
  return build_dataset(synthesize_records(n, signal_strength, seed, options.max_len), options);
}

// ---- persistence ------------------------------------------------------------

std::string serialize_model(const Model& model, const Vocabulary& vocab) {
  if (vocab.size() != model.config.vocab_size) {
    throw DimensionError("save_model: vocabulary has " + std::to_string(vocab.size()) +
                         " entries, model expects " + std::to_string(model.config.vocab_size));
  }
  json params = json::array();
  for (const auto& [name, matrix] : model.named_parameters()) {
    if (!all_finite(*matrix)) throw DataError("save_model: parameter " + name + " is not finite");
    params.push_back({{"name", name},
                      {"rows", matrix->rows()},
                      {"cols", matrix->cols()},
                      {"data", std::vector<double>(matrix->data().begin(), matrix->data().end())}});
  }
  const json doc = {{"schema_version", kModelSchemaVersion},
                    {"config", config_to_json(model.config)},
                    {"vocab", vocab.ranked_tokens()},
                    {"parameters", std::move(params)}};
  return doc.dump();
}

void save_model(const Model& model, const Vocabulary& vocab, const std::filesystem::path& path) {
  write_file_atomically(path, serialize_model(model, vocab) + "\n");
}

SavedModel deserialize_model(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw CorruptModelError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema_version") ||
      !doc["schema_version"].is_number_integer()) {
    throw CorruptModelError("model file has no integer schema_version");
  }
  const auto version = doc["schema_version"].get<long long>();
  if (version != kModelSchemaVersion) {
    throw UnsupportedVersionError("model schema_version " + std::to_string(version) +
                                  " is not supported (this build reads version " +
                                  std::to_string(kModelSchemaVersion) + ")");
  }

  try {
    const ModelConfig config = config_from_json(doc.at("config"));
    SavedModel saved{build_model(config),
                     Vocabulary::from_ranked_tokens(doc.at("vocab").get<std::vector<std::string>>())};
    if (saved.vocab.size() != config.vocab_size) {
      throw CorruptModelError("model vocabulary has " + std::to_string(saved.vocab.size()) +
                              " entries but config.vocab_size is " + std::to_string(config.vocab_size));
    }
    std::map<std::string, const json*> stored;
    for (const auto& entry : doc.at("parameters")) {
      stored[entry.at("name").get<std::string>()] = &entry;
    }
    const auto params = saved.model.named_parameters();
    if (stored.size() != params.size()) {
      throw CorruptModelError("model file has " + std::to_string(stored.size()) +
                              " parameter blocks, expected " + std::to_string(params.size()));
    }
    for (const auto& [name, matrix] : params) {
      const auto it = stored.find(name);
      if (it == stored.end()) throw CorruptModelError("model file lacks parameter " + name);
      const json& entry = *it->second;
      const auto rows = entry.at("rows").get<std::size_t>();
      const auto cols = entry.at("cols").get<std::size_t>();
      auto data = entry.at("data").get<std::vector<double>>();
      if (rows != matrix->rows() || cols != matrix->cols() || data.size() != rows * cols) {
        throw CorruptModelError("parameter " + name + " has shape (" + std::to_string(rows) + " x " +
                                std::to_string(cols) + ") with " + std::to_string(data.size()) +
                                " values; config implies " + matrix->shape_string());
      }
      *matrix = Matrix(rows, cols, std::move(data));
      if (!all_finite(*matrix)) throw CorruptModelError("parameter " + name + " is not finite");
    }
    saved.model.mode = Mode::kEval;
    return saved;
  } catch (const json::exception& e) {
    throw CorruptModelError(std::string("model file is inconsistent: ") + e.what());
  } catch (const ConfigError& e) {
    throw CorruptModelError(std::string("model file has an invalid config: ") + e.what());
  } catch (const DataError& e) {
    if (dynamic_cast<const CorruptModelError*>(&e)) throw;
    throw CorruptModelError(std::string("model file is inconsistent: ") + e.what());
  }
}

SavedModel load_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomically(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw DataError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
  }
}

}  // namespace rumorlens
