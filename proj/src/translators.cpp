#include "transagent/translators.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>
#include <unicode/utf8.h>

#include "transagent/corpus.hpp"

namespace transagent::translators {

namespace {

using json = nlohmann::json;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
  return out;
}

// Collapses ASCII whitespace runs into one space and trims both ends.
std::string squeeze(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

bool is_japanese(UChar32 c) {
  return (c >= 0x3040 && c <= 0x309F) || (c >= 0x30A0 && c <= 0x30FF) ||
         (c >= 0x4E00 && c <= 0x9FFF);
}

bool is_french_diacritic(UChar32 c) {
  switch (c) {
    case 0x00E0: case 0x00E2: case 0x00E7: case 0x00E9: case 0x00E8: case 0x00EA: case 0x00EB:
    case 0x00EE: case 0x00EF: case 0x00F4: case 0x00F9: case 0x00FB: case 0x00FC: case 0x0153:
    case 0x00C0: case 0x00C2: case 0x00C7: case 0x00C9: case 0x00C8: case 0x00CA: case 0x00CB:
    case 0x00CE: case 0x00CF: case 0x00D4: case 0x00D9: case 0x00DB: case 0x00DC: case 0x0152:
      return true;
    default:
      return false;
  }
}

constexpr std::array<std::string_view, 12> kFrenchStopwords = {
    "le", "la", "les", "un", "une", "des", "est", "je", "vous", "et", "ne", "pas"};

std::optional<LanguageCode> language_from_word(std::string_view word) {
  const std::string w = lower(word);
  if (w == "english") return LanguageCode::EN;
  if (w == "french") return LanguageCode::FR;
  if (w == "japanese") return LanguageCode::JP;
  return std::nullopt;
}

const std::regex& prefix_pattern() {
  static const std::regex re(R"(^to:(en|fr|jp)(\s+|$))", std::regex::icase);
  return re;
}

const std::regex& keyword_pattern() {
  static const std::regex re(R"(\b(translate\s+)?(in)?to\s+(english|french|japanese)\b(\s*:)?)",
                             std::regex::icase);
  return re;
}

LanguageCode language_of_node(std::string_view node) {
  for (LanguageCode code : kAllLanguages) {
    if (translator_node(code) == node) return code;
  }
  throw DomainError("not a translator node: '" + std::string(node) + "'");
}

}  // namespace

std::string_view to_string(LanguageCode code) {
  switch (code) {
    case LanguageCode::EN: return "EN";
    case LanguageCode::FR: return "FR";
    case LanguageCode::JP: return "JP";
  }
  return "?";
}

std::string_view language_name(LanguageCode code) {
  switch (code) {
    case LanguageCode::EN: return "English";
    case LanguageCode::FR: return "French";
    case LanguageCode::JP: return "Japanese";
  }
  return "?";
}

LanguageCode parse_language(std::string_view code) {
  const std::string c = lower(code);
  if (c == "en") return LanguageCode::EN;
  if (c == "fr") return LanguageCode::FR;
  if (c == "jp") return LanguageCode::JP;
  throw DomainError("unknown language code '" + std::string(code) + "' (expected EN, FR or JP)");
}

std::string_view translator_node(LanguageCode code) {
  switch (code) {
    case LanguageCode::EN: return kToEnglishNode;
    case LanguageCode::FR: return kToFrenchNode;
    case LanguageCode::JP: return kToJapaneseNode;
  }
  return {};
}

LanguageCode analyze_language(std::string_view text) {
  if (squeeze(text).empty()) throw DomainError("cannot detect the language of empty text");

  bool diacritic = false;
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  for (int32_t i = 0; i < length;) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) continue;
    if (is_japanese(c)) return LanguageCode::JP;
    diacritic = diacritic || is_french_diacritic(c);
  }
  if (diacritic) return LanguageCode::FR;

  std::istringstream words{std::string(text)};
  int hits = 0;
  for (std::string w; words >> w;) {
    if (std::find(kFrenchStopwords.begin(), kFrenchStopwords.end(), lower(w)) !=
        kFrenchStopwords.end()) {
      ++hits;
    }
  }
  return hits >= 2 ? LanguageCode::FR : LanguageCode::EN;
}

Intent determine_intent(std::string_view text, std::optional<LanguageCode> default_target) {
  std::string rest = squeeze(text);
  if (rest.empty()) throw DomainError("cannot determine the intent of empty text");

  std::optional<LanguageCode> directive;
  std::smatch m;
  if (std::regex_search(rest, m, prefix_pattern())) {
    directive = parse_language(m[1].str());
    rest = rest.substr(static_cast<std::size_t>(m.length(0)));
  }

  std::optional<LanguageCode> keyword;
  if (std::regex_search(rest, m, keyword_pattern())) {
    keyword = language_from_word(m[3].str());
    const auto begin = static_cast<std::size_t>(m.position(0));
    const auto end = begin + static_cast<std::size_t>(m.length(0));
    if (m[4].matched) {
      rest = rest.substr(end);
    } else {
      rest = rest.substr(0, begin) + " " + rest.substr(end);
    }
    rest = squeeze(rest);
  }

  if (directive && keyword && *directive != *keyword) {
    throw IntentError(IntentError::Kind::Conflict,
                      "directive asks for " + std::string(to_string(*directive)) +
                          " but the text asks for " + std::string(to_string(*keyword)));
  }
  if (directive) return {*directive, rest};
  if (keyword) return {*keyword, rest};
  if (default_target) return {*default_target, rest};
  throw IntentError(IntentError::Kind::Unresolved,
                    "no target language in input and no default target configured");
}

IntentResolver rule_intent_resolver(std::optional<LanguageCode> default_target) {
  return [default_target](std::string_view text) { return determine_intent(text, default_target); };
}

std::string translation_prompt(std::string_view text, LanguageCode target) {
  return "Translate the following text into " + std::string(language_name(target)) +
         ". Reply with only the translation.\n\n" + std::string(text);
}

std::string_view to_string(Engine engine) {
  switch (engine) {
    case Engine::Nmt: return "nmt";
    case Engine::Llm: return "llm";
    case Engine::Mock: return "mock";
  }
  return "?";
}

// NMT

NmtTranslator::NmtTranslator(std::shared_ptr<const seq2seq::Seq2SeqModel> model,
                             LanguageCode source, LanguageCode target)
    : model_(std::move(model)), source_(source), target_(target) {
  if (!model_) throw DomainError("NMT translator needs a model");
}

TranslationResult NmtTranslator::translate(const TranslationRequest& request) const {
  if (request.target != target_ || (request.source && *request.source != source_)) {
    const std::string asked = request.source
                                  ? std::string(to_string(*request.source)) + "->" +
                                        std::string(to_string(request.target))
                                  : "?->" + std::string(to_string(request.target));
    throw DirectionMismatchError("model translates " + std::string(to_string(source_)) + "->" +
                                 std::string(to_string(target_)) + ", request is " + asked);
  }
  seq2seq::Translation t = seq2seq::translate(*model_, request.text);
  return {corpus::join(t.tokens), Engine::Nmt, target_, std::move(t.attention)};
}

// LLM

LlmTranslator::LlmTranslator(std::shared_ptr<const chat::ChatClient> client)
    : client_(std::move(client)) {
  if (!client_) throw DomainError("LLM translator needs a chat client");
}

TranslationResult LlmTranslator::translate(const TranslationRequest& request) const {
  if (squeeze(request.text).empty()) throw DomainError("nothing to translate");
  return {client_->complete(translation_prompt(request.text, request.target)), Engine::Llm,
          request.target, std::nullopt};
}

// Mock

std::string MockScript::normalize_key(std::string_view text) { return lower(squeeze(text)); }

void MockScript::add(std::string_view text, LanguageCode target, std::string output) {
  entries_[{normalize_key(text), target}] = std::move(output);
}

std::optional<std::string> MockScript::find(std::string_view text, LanguageCode target) const {
  if (auto it = entries_.find({normalize_key(text), target}); it != entries_.end()) {
    return it->second;
  }
  return std::nullopt;
}

std::string MockScript::lookup(std::string_view text, LanguageCode target) const {
  if (auto hit = find(text, target)) return *hit;
  std::string out;
  const std::string_view tmpl = fallback_;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl.substr(i, 6) == "{lang}") {
      out += to_string(target);
      i += 6;
    } else if (tmpl.substr(i, 6) == "{text}") {
      out += text;
      i += 6;
    } else {
      out.push_back(tmpl[i++]);
    }
  }
  return out;
}

MockScript MockScript::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw MockScriptError(std::string("mock script is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw MockScriptError("mock script must be a JSON object");

  MockScript script;
  if (doc.contains("fallback")) {
    if (!doc["fallback"].is_string()) throw MockScriptError("mock script 'fallback' must be a string");
    script.set_fallback(doc["fallback"].get<std::string>());
  }
  if (!doc.contains("entries")) return script;
  if (!doc["entries"].is_array()) throw MockScriptError("mock script 'entries' must be an array");

  std::size_t index = 0;
  for (const json& e : doc["entries"]) {
    const std::string where = "mock script entry " + std::to_string(index++);
    if (!e.is_object()) throw MockScriptError(where + " is not an object");
    for (const char* field : {"text", "target", "output"}) {
      if (!e.contains(field) || !e[field].is_string()) {
        throw MockScriptError(where + " needs a string '" + field + "'");
      }
    }
    LanguageCode target;
    try {
      target = parse_language(e["target"].get<std::string>());
    } catch (const DomainError& err) {
      throw MockScriptError(where + ": " + err.what());
    }
    script.add(e["text"].get<std::string>(), target, e["output"].get<std::string>());
  }
  return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MockScriptError("cannot read mock script " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

MockTranslator::MockTranslator(MockScript script) : script_(std::move(script)) {}

TranslationResult MockTranslator::translate(const TranslationRequest& request) const {
  if (squeeze(request.text).empty()) throw DomainError("nothing to translate");
  return {script_.lookup(request.text, request.target), Engine::Mock, request.target, std::nullopt};
}

// Routing and graph

RoutingTable RoutingTable::defaults() {
  RoutingTable table;
  for (LanguageCode code : kAllLanguages) table.routes[code] = std::string(translator_node(code));
  return table;
}

void RoutingTable::validate() const {
  for (LanguageCode code : kAllLanguages) {
    auto it = routes.find(code);
    if (it == routes.end()) {
      throw DomainError("routing table has no entry for " + std::string(to_string(code)));
    }
    language_of_node(it->second);
  }
}

const std::string& RoutingTable::at(LanguageCode code) const {
  auto it = routes.find(code);
  if (it == routes.end()) {
    throw DomainError("routing table has no entry for " + std::string(to_string(code)));
  }
  return it->second;
}

graph::CompiledGraph build_translation_graph(const EngineMap& engines, const RoutingTable& routing,
                                             GraphOptions options) {
  for (LanguageCode code : kAllLanguages) {
    auto it = engines.find(code);
    if (it == engines.end() || !it->second) {
      throw DomainError("no translator engine for " + std::string(to_string(code)));
    }
  }
  routing.validate();

  IntentResolver resolver = options.intent_resolver
                                ? std::move(options.intent_resolver)
                                : rule_intent_resolver(options.default_target);

  graph::StateGraph g;
  g.add_node(std::string(kAnalyzeNode), [](graph::GraphState s) {
    s.detected_language = std::string(to_string(analyze_language(s.input_text)));
    return s;
  });
  g.add_node(std::string(kIntentNode), [resolver](graph::GraphState s) {
    Intent intent = resolver(s.input_text);
    s.metadata["original_input"] = s.input_text;
    s.intent = std::string(to_string(intent.target));
    s.input_text = std::move(intent.remaining_text);
    return s;
  });

  std::set<std::string> targets;
  for (LanguageCode code : kAllLanguages) {
    const std::string node(translator_node(code));
    targets.insert(node);
    std::shared_ptr<const Translator> engine = engines.at(code);
    g.add_node(node, [engine, code](graph::GraphState s) {
      TranslationRequest request{s.input_text, code, std::nullopt};
      if (s.detected_language) request.source = parse_language(*s.detected_language);
      TranslationResult result = engine->translate(request);
      s.metadata["engine"] = std::string(to_string(result.engine));
      s.output_text = std::move(result.output_text);
      return s;
    });
    g.add_edge(node, std::string(graph::kEnd));
  }

  g.add_edge(std::string(graph::kStart), std::string(kAnalyzeNode));
  g.add_edge(std::string(kAnalyzeNode), std::string(kIntentNode));
  g.add_conditional_edge(
      std::string(kIntentNode),
      [routing](const graph::GraphState& s) -> std::string {
        if (!s.intent) throw DomainError("no intent in state");
        return routing.at(parse_language(*s.intent));
      },
      targets);
  return g.compile();
}

}  // namespace transagent::translators
