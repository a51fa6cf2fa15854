#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace transagent::corpus {

using Sentence = std::vector<std::string>;
using TokenId = std::size_t;

inline constexpr TokenId kSosId = 0;
inline constexpr TokenId kEosId = 1;
inline constexpr TokenId kUnkId = 2;
inline constexpr std::string_view kSosToken = "<SOS>";
inline constexpr std::string_view kEosToken = "<EOS>";
inline constexpr std::string_view kUnkToken = "<UNK>";

struct SentencePair {
  Sentence source;
  Sentence target;
  std::size_t line_no = 0;

  bool operator==(const SentencePair&) const = default;
};

enum class Side { Source, Target };

/// Word <-> id dictionary for one language side. Ids 0..2 are SOS, EOS, UNK.
/// Immutable once built; share it read-only.
class Vocabulary {
 public:
  Vocabulary();

  /// Rebuilds a vocabulary from its serialized parts. Throws transagent::Error
  /// when the reserved prefix is wrong or a word repeats.
  static Vocabulary from_parts(std::vector<std::string> index_to_word,
                               std::map<std::string, std::size_t> counts);

  /// Adds one occurrence of `word`, assigning the next id on first sight.
  TokenId add(const std::string& word);

  TokenId id_of(std::string_view word) const;  // kUnkId when absent
  bool contains(std::string_view word) const;
  const std::string& word_of(TokenId id) const;  // throws OutOfRangeError

  std::size_t n_words() const noexcept { return index_to_word_.size(); }
  std::size_t count(std::string_view word) const;

  const std::vector<std::string>& index_to_word() const noexcept { return index_to_word_; }
  const std::map<std::string, std::size_t>& counts() const noexcept { return counts_; }

  bool operator==(const Vocabulary& other) const {
    return index_to_word_ == other.index_to_word_ && counts_ == other.counts_;
  }

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::unordered_map<std::string, TokenId, StringHash, std::equal_to<>> word_to_index_;
  std::vector<std::string> index_to_word_;
  std::map<std::string, std::size_t> counts_;
};

struct CorpusStats {
  std::size_t pairs_read = 0;
  std::size_t pairs_kept = 0;
  std::size_t max_len = 0;
  std::size_t source_vocab_size = 0;
  std::size_t target_vocab_size = 0;
};

struct LoadedCorpus {
  std::vector<SentencePair> pairs;
  CorpusStats stats;
};

/// Folds diacritics, lowercases, isolates `.` `!` `?` as tokens, replaces any
/// other non-letter with a space and collapses whitespace. Letters with no
/// ASCII base form are dropped. Idempotent.
std::string normalize_text(std::string_view raw);

/// normalize_text followed by whitespace splitting.
Sentence tokenize(std::string_view raw);

std::string join(std::span<const std::string> tokens);

/// Reads a TAB-separated parallel corpus. Lines are normalized; pairs with an
/// empty side or more than `max_len` tokens on either side are dropped.
/// `reverse` swaps the two columns.
LoadedCorpus load_pairs(const std::filesystem::path& path, std::size_t max_len, bool reverse);

/// Same as load_pairs but over in-memory text; `origin` names the source in errors.
LoadedCorpus parse_pairs(std::string_view text, std::size_t max_len, bool reverse,
                         std::string_view origin = "<memory>");

Vocabulary build_vocabulary(std::span<const SentencePair> pairs, Side side);

/// Maps tokens to ids (unknown -> UNK) and appends EOS.
std::vector<TokenId> encode_sentence(const Vocabulary& vocab, std::span<const std::string> sentence);

/// Inverse of encode_sentence; SOS and EOS ids are skipped.
Sentence decode_ids(const Vocabulary& vocab, std::span<const TokenId> ids);

}  // namespace transagent::corpus
