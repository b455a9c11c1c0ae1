#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rumorlens {

using Tokens = std::vector<std::string>;
using IndexSequence = std::vector<std::uint32_t>;

inline constexpr std::uint32_t kPadIndex = 0;
inline constexpr std::uint32_t kOovIndex = 1;

inline constexpr std::size_t kDefaultMaxLen = 30;
inline constexpr std::size_t kDefaultMinCount = 1;
inline constexpr std::size_t kDefaultMaxVocab = 20000;

/// Lowercases, splits on whitespace (ASCII and the Unicode space separators),
/// and trims ASCII punctuation from both ends of each token. URLs keep every
/// character; @mentions and #hashtags keep their leading sigil.
Tokens tokenize(std::string_view text);

/// Token <-> index map. Index 0 is PAD, index 1 is OOV; real tokens start at 2.
class Vocabulary {
 public:
  Vocabulary();

  /// Builds from tokens already in rank order; throws on duplicates.
  static Vocabulary from_ranked_tokens(const std::vector<std::string>& tokens);

  /// Index of `token`, or kOovIndex when unknown.
  std::uint32_t index_of(std::string_view token) const;
  /// Token at `index`; "<pad>" and "<oov>" for the reserved slots.
  const std::string& token_at(std::uint32_t index) const;

  /// Number of indices in use, reserved ones included.
  std::size_t size() const noexcept { return index_to_token_.size(); }

  /// Real tokens in index order (index 2 first).
  std::vector<std::string> ranked_tokens() const;

  bool operator==(const Vocabulary& other) const { return index_to_token_ == other.index_to_token_; }

 private:
  std::unordered_map<std::string, std::uint32_t> token_to_index_;
  std::vector<std::string> index_to_token_;
};

/// Keeps tokens with frequency >= min_count, ranked by (frequency desc,
/// token asc), and assigns indices 2.. up to max_vocab - 1.
Vocabulary build_vocabulary(const std::vector<Tokens>& corpus, std::size_t min_count = kDefaultMinCount,
                            std::size_t max_vocab = kDefaultMaxVocab);

/// One labeled tweet after encoding. label: 1 = rumor, 0 = non-rumor.
struct EncodedExample {
  IndexSequence indices;
  int label = 0;
  std::string event;
  std::string id;
};

enum class PadSide { kPre, kPost };

/// Maps tokens to indices (unknown -> OOV), keeps the last max_len tokens of
/// long sequences and pads short ones with PAD. Pre-padding by default, so the
/// real tokens end the sequence.
IndexSequence encode_and_pad(const Tokens& tokens, const Vocabulary& vocab, std::size_t max_len,
                             PadSide side = PadSide::kPre);

}  // namespace rumorlens
