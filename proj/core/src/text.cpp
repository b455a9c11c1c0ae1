#include "rumorlens/text.hpp"

#include <algorithm>
#include <map>

#include "rumorlens/errors.hpp"

namespace rumorlens {

namespace {

bool is_ascii_punct(unsigned char c) {
  return (c >= 0x21 && c <= 0x2f) || (c >= 0x3a && c <= 0x40) || (c >= 0x5b && c <= 0x60) ||
         (c >= 0x7b && c <= 0x7e);
}

bool is_ascii_alnum(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// Byte length of the whitespace code point starting at text[pos], or 0.
std::size_t whitespace_length(std::string_view text, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(text[pos]);
  if (b0 == ' ' || (b0 >= 0x09 && b0 <= 0x0d)) return 1;
  const auto at = [&](std::size_t k) {
    return pos + k < text.size() ? static_cast<unsigned char>(text[pos + k]) : 0u;
  };
  if (b0 == 0xc2 && (at(1) == 0x85 || at(1) == 0xa0)) return 2;  // NEL, NBSP
  if (b0 == 0xe1 && at(1) == 0x9a && at(2) == 0x80) return 3;    // U+1680
  if (b0 == 0xe2 && at(1) == 0x80) {
    const unsigned b2 = at(2);
    // U+2000..U+200A, U+2028, U+2029, U+202F
    if ((b2 >= 0x80 && b2 <= 0x8a) || b2 == 0xa8 || b2 == 0xa9 || b2 == 0xaf) return 3;
  }
  if (b0 == 0xe2 && at(1) == 0x81 && at(2) == 0x9f) return 3;  // U+205F
  if (b0 == 0xe3 && at(1) == 0x80 && at(2) == 0x80) return 3;  // U+3000
  return 0;
}

bool is_url(std::string_view token) {
  return token.starts_with("http://") || token.starts_with("https://") ||
         token.starts_with("www.");
}

std::string normalize_token(std::string_view raw) {
  std::string token(raw);
  for (char& c : token) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  if (is_url(token)) return token;

  const bool sigil = token.size() >= 2 && (token[0] == '@' || token[0] == '#') &&
                     is_ascii_alnum(static_cast<unsigned char>(token[1]));
  std::size_t begin = sigil ? 1 : 0;
  std::size_t end = token.size();
  while (begin < end && is_ascii_punct(static_cast<unsigned char>(token[begin]))) ++begin;
  while (end > begin && is_ascii_punct(static_cast<unsigned char>(token[end - 1]))) --end;
  if (begin == end) return {};
  if (sigil) return token.substr(0, 1) + token.substr(begin, end - begin);
  return token.substr(begin, end - begin);
}

const std::string kPadToken = "<pad>";
const std::string kOovToken = "<oov>";

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens tokens;
  std::size_t start = 0;
  std::size_t pos = 0;
  const auto flush = [&](std::size_t end) {
    if (end > start) {
      std::string token = normalize_token(text.substr(start, end - start));
      if (!token.empty()) tokens.push_back(std::move(token));
    }
  };
  while (pos < text.size()) {
    const std::size_t ws = whitespace_length(text, pos);
    if (ws == 0) {
      ++pos;
      continue;
    }
    flush(pos);
    pos += ws;
    start = pos;
  }
  flush(text.size());
  return tokens;
}

Vocabulary::Vocabulary() : index_to_token_{kPadToken, kOovToken} {}

Vocabulary Vocabulary::from_ranked_tokens(const std::vector<std::string>& tokens) {
  Vocabulary vocab;
  for (const auto& token : tokens) {
    const auto index = static_cast<std::uint32_t>(vocab.index_to_token_.size());
    if (token.empty() || !vocab.token_to_index_.emplace(token, index).second) {
      throw DataError("vocabulary: empty or duplicate token '" + token + "'");
    }
    vocab.index_to_token_.push_back(token);
  }
  return vocab;
}

std::uint32_t Vocabulary::index_of(std::string_view token) const {
  const auto it = token_to_index_.find(std::string(token));
  return it == token_to_index_.end() ? kOovIndex : it->second;
}

const std::string& Vocabulary::token_at(std::uint32_t index) const {
  if (index >= index_to_token_.size()) {
    throw EncodingError("vocabulary: index " + std::to_string(index) + " out of range (size " +
                        std::to_string(size()) + ")");
  }
  return index_to_token_[index];
}

std::vector<std::string> Vocabulary::ranked_tokens() const {
  return {index_to_token_.begin() + 2, index_to_token_.end()};
}

Vocabulary build_vocabulary(const std::vector<Tokens>& corpus, std::size_t min_count,
                            std::size_t max_vocab) {
  if (min_count < 1) throw ConfigError("build_vocabulary: min_count must be >= 1");
  if (max_vocab < 2) throw ConfigError("build_vocabulary: max_vocab must be >= 2");

  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus)
    for (const auto& token : doc) ++counts[token];

  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [token, count] : counts) {
    if (count >= min_count) ranked.emplace_back(token, count);
  }
  // std::map iteration is already lexicographic, so a stable sort on count
  // alone yields (count desc, token asc).
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > max_vocab - 2) ranked.resize(max_vocab - 2);

  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& entry : ranked) tokens.push_back(std::move(entry.first));
  return Vocabulary::from_ranked_tokens(tokens);
}

IndexSequence encode_and_pad(const Tokens& tokens, const Vocabulary& vocab, std::size_t max_len,
                             PadSide side) {
  if (max_len < 1) throw ConfigError("encode_and_pad: max_len must be >= 1");
  const std::size_t keep = std::min(tokens.size(), max_len);
  const std::size_t first = tokens.size() - keep;
  IndexSequence out(max_len, kPadIndex);
  const std::size_t offset = side == PadSide::kPre ? max_len - keep : 0;
  for (std::size_t i = 0; i < keep; ++i) out[offset + i] = vocab.index_of(tokens[first + i]);
  return out;
}

}  // namespace rumorlens
