#include "transagent/corpus.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "transagent/error.hpp"

namespace transagent::corpus {

namespace {

bool is_kept_punct(UChar32 c) { return c == '.' || c == '!' || c == '?'; }

bool is_combining_mark(UChar32 c) { return (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0; }

void push_space(std::string& out) {
  if (!out.empty() && out.back() != ' ') out.push_back(' ');
}

}  // namespace

std::string normalize_text(std::string_view raw) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfd = icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status)) throw Error(std::string("ICU NFD unavailable: ") + u_errorName(status));

  const auto source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  const icu::UnicodeString decomposed = nfd->normalize(source, status);
  if (U_FAILURE(status)) throw Error(std::string("NFD normalization failed: ") + u_errorName(status));

  std::string out;
  out.reserve(raw.size());
  for (int32_t i = 0; i < decomposed.length(); i = decomposed.moveIndex32(i, 1)) {
    const UChar32 c = decomposed.char32At(i);
    if (c < 0x80 && std::isalpha(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (is_kept_punct(c)) {
      push_space(out);
      out.push_back(static_cast<char>(c));
      out.push_back(' ');
    } else if (is_combining_mark(c) || u_isalpha(c)) {
      // Marks left over from NFD and letters without an ASCII base vanish.
      continue;
    } else {
      push_space(out);
    }
  }
  // Spaces are only ever emitted singly and never first; at most one trails.
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

Sentence tokenize(std::string_view raw) {
  Sentence tokens;
  std::istringstream in(normalize_text(raw));
  for (std::string tok; in >> tok;) tokens.push_back(std::move(tok));
  return tokens;
}

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary() {
  for (auto reserved : {kSosToken, kEosToken, kUnkToken}) {
    word_to_index_.emplace(std::string(reserved), index_to_word_.size());
    index_to_word_.emplace_back(reserved);
  }
}

Vocabulary Vocabulary::from_parts(std::vector<std::string> index_to_word,
                                  std::map<std::string, std::size_t> counts) {
  if (index_to_word.size() < 3 || index_to_word[kSosId] != kSosToken ||
      index_to_word[kEosId] != kEosToken || index_to_word[kUnkId] != kUnkToken) {
    throw Error("vocabulary must start with the reserved tokens <SOS>, <EOS>, <UNK>");
  }
  Vocabulary vocab;
  for (std::size_t i = 3; i < index_to_word.size(); ++i) {
    auto [it, inserted] = vocab.word_to_index_.emplace(index_to_word[i], i);
    if (!inserted) throw Error("duplicate vocabulary entry '" + index_to_word[i] + "'");
    vocab.index_to_word_.push_back(std::move(index_to_word[i]));
  }
  for (const auto& [word, n] : counts) {
    if (!vocab.contains(word)) throw Error("count recorded for unknown word '" + word + "'");
  }
  vocab.counts_ = std::move(counts);
  return vocab;
}

TokenId Vocabulary::add(const std::string& word) {
  ++counts_[word];
  auto [it, inserted] = word_to_index_.emplace(word, index_to_word_.size());
  if (inserted) index_to_word_.push_back(word);
  return it->second;
}

TokenId Vocabulary::id_of(std::string_view word) const {
  auto it = word_to_index_.find(word);
  return it == word_to_index_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view word) const {
  return word_to_index_.find(word) != word_to_index_.end();
}

const std::string& Vocabulary::word_of(TokenId id) const {
  if (id >= index_to_word_.size()) {
    throw OutOfRangeError("token id " + std::to_string(id) + " out of range for vocabulary of " +
                          std::to_string(index_to_word_.size()) + " words");
  }
  return index_to_word_[id];
}

std::size_t Vocabulary::count(std::string_view word) const {
  auto it = counts_.find(std::string(word));
  return it == counts_.end() ? 0 : it->second;
}

// ---------------------------------------------------------------------------
// Loading

LoadedCorpus parse_pairs(std::string_view text, std::size_t max_len, bool reverse,
                         std::string_view origin) {
  LoadedCorpus result;
  result.stats.max_len = max_len;
  std::unordered_set<std::string> source_types;
  std::unordered_set<std::string> target_types;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
      throw CorpusError(CorpusError::Kind::MalformedLine,
                        std::string(origin) + ":" + std::to_string(line_no) +
                            ": expected exactly one TAB between source and target",
                        line_no);
    }
    ++result.stats.pairs_read;

    SentencePair pair{tokenize(line.substr(0, tab)), tokenize(line.substr(tab + 1)), line_no};
    if (reverse) std::swap(pair.source, pair.target);
    if (pair.source.empty() || pair.target.empty()) continue;
    if (pair.source.size() > max_len || pair.target.size() > max_len) continue;

    source_types.insert(pair.source.begin(), pair.source.end());
    target_types.insert(pair.target.begin(), pair.target.end());
    result.pairs.push_back(std::move(pair));
  }
  result.stats.pairs_kept = result.pairs.size();
  result.stats.source_vocab_size = source_types.size() + 3;
  result.stats.target_vocab_size = target_types.size() + 3;
  return result;
}

LoadedCorpus load_pairs(const std::filesystem::path& path, std::size_t max_len, bool reverse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CorpusError(CorpusError::Kind::FileMissing,
                      "cannot open corpus file '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_pairs(buffer.str(), max_len, reverse, path.string());
}

Vocabulary build_vocabulary(std::span<const SentencePair> pairs, Side side) {
  if (pairs.empty()) {
    throw CorpusError(CorpusError::Kind::EmptyCorpus, "cannot build a vocabulary from no pairs");
  }
  Vocabulary vocab;
  for (const auto& pair : pairs) {
    for (const auto& word : side == Side::Source ? pair.source : pair.target) vocab.add(word);
  }
  return vocab;
}

std::vector<TokenId> encode_sentence(const Vocabulary& vocab, std::span<const std::string> sentence) {
  std::vector<TokenId> ids;
  ids.reserve(sentence.size() + 1);
  for (const auto& word : sentence) ids.push_back(vocab.id_of(word));
  ids.push_back(kEosId);
  return ids;
}

Sentence decode_ids(const Vocabulary& vocab, std::span<const TokenId> ids) {
  Sentence words;
  for (TokenId id : ids) {
    const std::string& word = vocab.word_of(id);
    if (id == kSosId || id == kEosId) continue;
    words.push_back(word);
  }
  return words;
}

}  // namespace transagent::corpus
