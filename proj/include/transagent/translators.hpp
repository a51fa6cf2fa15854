#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "transagent/chat_client.hpp"
#include "transagent/error.hpp"
#include "transagent/graph.hpp"
#include "transagent/seq2seq.hpp"

namespace transagent::translators {

enum class LanguageCode { EN, FR, JP };

inline constexpr std::array<LanguageCode, 3> kAllLanguages = {LanguageCode::EN, LanguageCode::FR,
                                                               LanguageCode::JP};

/// "EN", "FR", "JP".
std::string_view to_string(LanguageCode code);
/// "English", "French", "Japanese".
std::string_view language_name(LanguageCode code);
/// Case-insensitive code ("en", "FR", ...). Throws DomainError otherwise.
LanguageCode parse_language(std::string_view code);

inline constexpr std::string_view kAnalyzeNode = "analyze_language";
inline constexpr std::string_view kIntentNode = "determine_intent";
inline constexpr std::string_view kToEnglishNode = "translateToEN";
inline constexpr std::string_view kToFrenchNode = "translateToFrench";
inline constexpr std::string_view kToJapaneseNode = "translateToJP";

/// Node that translates into `code` in the default layout.
std::string_view translator_node(LanguageCode code);

class IntentError : public Error {
 public:
  enum class Kind { Unresolved, Conflict };

  IntentError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// The NMT model's language pair does not match the request.
class DirectionMismatchError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or invalid mock script file.
class MockScriptError : public Error {
 public:
  using Error::Error;
};

/// Rule cascade: kana or CJK ideographs give JP; French diacritics or two
/// French stopwords give FR; anything else is EN. Throws DomainError on blank input.
LanguageCode analyze_language(std::string_view text);

struct Intent {
  LanguageCode target;
  std::string remaining_text;

  bool operator==(const Intent&) const = default;
};

/// Grammar: a leading "to:xx " directive, or a "(translate) to|into
/// english|french|japanese" clause, optionally closed by a colon.
/// Both present and disagreeing is a Conflict; neither present and no
/// default is Unresolved.
Intent determine_intent(std::string_view text,
                        std::optional<LanguageCode> default_target = std::nullopt);

using IntentResolver = std::function<Intent(std::string_view text)>;

IntentResolver rule_intent_resolver(std::optional<LanguageCode> default_target = std::nullopt);

/// Prompt sent to chat models.
std::string translation_prompt(std::string_view text, LanguageCode target);

enum class Engine { Nmt, Llm, Mock };

/// "nmt", "llm", "mock".
std::string_view to_string(Engine engine);

struct TranslationResult {
  std::string output_text;
  Engine engine = Engine::Mock;
  LanguageCode target = LanguageCode::EN;
  std::optional<seq2seq::AttentionMatrix> attention;  // only for Engine::Nmt
};

struct TranslationRequest {
  std::string text;
  LanguageCode target;
  std::optional<LanguageCode> source;  // detected language, when known
};

class Translator {
 public:
  virtual ~Translator() = default;
  virtual TranslationResult translate(const TranslationRequest& request) const = 0;
};

/// Wraps a trained seq2seq model for one language direction.
class NmtTranslator final : public Translator {
 public:
  NmtTranslator(std::shared_ptr<const seq2seq::Seq2SeqModel> model, LanguageCode source,
                LanguageCode target);

  /// Throws DirectionMismatchError when the request's target (or known source)
  /// differs from the model's, OverLengthError for long input.
  TranslationResult translate(const TranslationRequest& request) const override;

  LanguageCode source() const noexcept { return source_; }
  LanguageCode target() const noexcept { return target_; }

 private:
  std::shared_ptr<const seq2seq::Seq2SeqModel> model_;
  LanguageCode source_;
  LanguageCode target_;
};

class LlmTranslator final : public Translator {
 public:
  explicit LlmTranslator(std::shared_ptr<const chat::ChatClient> client);

  TranslationResult translate(const TranslationRequest& request) const override;

 private:
  std::shared_ptr<const chat::ChatClient> client_;
};

/// Scripted stand-in for a chat model. Keys are matched after trimming,
/// collapsing whitespace and lowercasing ASCII letters.
class MockScript {
 public:
  static constexpr std::string_view kDefaultFallback = "[{lang}] {text}";

  MockScript() = default;

  void add(std::string_view text, LanguageCode target, std::string output);
  void set_fallback(std::string fallback) { fallback_ = std::move(fallback); }
  const std::string& fallback() const noexcept { return fallback_; }

  /// Scripted output, or the fallback with {lang} and {text} substituted.
  std::string lookup(std::string_view text, LanguageCode target) const;
  std::optional<std::string> find(std::string_view text, LanguageCode target) const;
  std::size_t size() const noexcept { return entries_.size(); }

  /// {"entries":[{"text","target","output"}], "fallback"}. Throws MockScriptError.
  static MockScript from_json(std::string_view json);
  static MockScript load(const std::filesystem::path& path);

  static std::string normalize_key(std::string_view text);

 private:
  std::map<std::pair<std::string, LanguageCode>, std::string> entries_;
  std::string fallback_{kDefaultFallback};
};

class MockTranslator final : public Translator {
 public:
  explicit MockTranslator(MockScript script);

  TranslationResult translate(const TranslationRequest& request) const override;

 private:
  MockScript script_;
};

/// Maps the resolved intent onto a translator node.
struct RoutingTable {
  std::map<LanguageCode, std::string> routes;

  static RoutingTable defaults();
  /// Throws DomainError unless every language maps onto a translator node.
  void validate() const;
  const std::string& at(LanguageCode code) const;
};

using EngineMap = std::map<LanguageCode, std::shared_ptr<const Translator>>;

struct GraphOptions {
  std::optional<LanguageCode> default_target;
  /// Overrides the rule grammar when set.
  IntentResolver intent_resolver;
};

/// START -> analyze_language -> determine_intent -> (routing) -> translateToXX -> END.
/// The node translateToXX uses engines[XX]. Throws DomainError for a partial
/// engine map or bad routing table; graph compile errors propagate.
graph::CompiledGraph build_translation_graph(const EngineMap& engines,
                                             const RoutingTable& routing = RoutingTable::defaults(),
                                             GraphOptions options = {});

}  // namespace transagent::translators
