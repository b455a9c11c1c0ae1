#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rumorlens/model.hpp"
#include "rumorlens/text.hpp"

namespace rumorlens {

/// One tweet as it appears in the JSONL interchange format.
struct RawRecord {
  std::string id;
  std::string text;
  int label = 0;  // 1 = rumour
  std::string event;
};

/// Maps "rumour"/"rumor"/"1" to 1 and "non-rumour"/"non-rumor"/"0" to 0
/// (case-insensitive); anything else is nullopt.
std::optional<int> parse_label(std::string_view label);

struct PipelineOptions {
  std::size_t max_len = kDefaultMaxLen;
  std::size_t min_count = kDefaultMinCount;
  std::size_t max_vocab = kDefaultMaxVocab;
  PadSide pad_side = PadSide::kPre;
};

/// Encoded corpus. `tokens[k]` is the tokenized text behind `examples[k]`,
/// kept so a vocabulary can be rebuilt from a subset (per-fold mode).
struct Dataset {
  std::vector<EncodedExample> examples;
  std::vector<Tokens> tokens;
  Vocabulary vocab;
  PipelineOptions options;
  std::array<std::size_t, 2> class_counts{0, 0};  // [non-rumour, rumour]
  std::map<std::string, std::size_t> event_counts;

  std::size_t size() const noexcept { return examples.size(); }
};

/// Tokenizes every record, builds the vocabulary over all of them, then
/// encodes and pads. Record order is preserved.
Dataset build_dataset(const std::vector<RawRecord>& records, const PipelineOptions& options = {});

/// Re-encodes the dataset's token sequences against another vocabulary.
Dataset reencode(const Dataset& dataset, const Vocabulary& vocab);

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct LoadReport {
  std::size_t lines_read = 0;  // non-blank lines
  std::vector<LineError> errors;
};

/// Corpus files are rejected when more than this fraction of lines is malformed.
inline constexpr double kMaxMalformedFraction = 0.10;

/// Reads JSONL records ({"id","text","label","event"} per line). Blank lines
/// are ignored; malformed lines are skipped and listed in `report`. Throws
/// DataError when the file cannot be read, when no record is usable, or when
/// more than 10% of lines are malformed. With require_label = false a missing
/// label is accepted (it reads as 0).
std::vector<RawRecord> read_jsonl_records(const std::filesystem::path& path, LoadReport& report,
                                          bool require_label = true);

Dataset load_jsonl(const std::filesystem::path& path, const PipelineOptions& options = {},
                   LoadReport* report = nullptr);

void write_jsonl(const std::filesystem::path& path, const std::vector<RawRecord>& records);

/// The five breaking-news events used as event tags for synthetic records.
inline constexpr std::array<std::string_view, 5> kSyntheticEvents = {
    "charliehebdo", "sydneysiege", "ottawashooting", "germanwings-crash", "ferguson"};

/// Balanced synthetic corpus: floor(n/2) rumour records and ceil(n/2)
/// non-rumour records in shuffled order. Each token slot draws from the
/// record's class lexicon with probability 2*signal - 1 and otherwise from a
/// pool shared by both classes, so signal 1.0 gives disjoint vocabularies and
/// signal 0.5 gives identical class distributions. Lengths are uniform in
/// [5, max_len].
std::vector<RawRecord> synthesize_records(std::size_t n, double signal_strength, std::uint64_t seed,
                                          std::size_t max_len = kDefaultMaxLen);

/// synthesize_records followed by build_dataset.
Dataset synthesize_corpus(std::size_t n, double signal_strength, std::uint64_t seed,
                          const PipelineOptions& options = {});

// ---- model persistence ----------------------------------------------------

inline constexpr int kModelSchemaVersion = 1;

struct SavedModel {
  Model model;
  Vocabulary vocab;
};

/// Writes {schema_version, config, vocab, parameters} as one JSON document,
/// atomically. Every double round-trips exactly.
void save_model(const Model& model, const Vocabulary& vocab, const std::filesystem::path& path);
std::string serialize_model(const Model& model, const Vocabulary& vocab);

/// Throws UnsupportedVersionError or CorruptModelError on bad input.
SavedModel load_model(const std::filesystem::path& path);
SavedModel deserialize_model(std::string_view document);

/// Writes to a sibling temp file and renames it over `path`.
void write_file_atomically(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace rumorlens
