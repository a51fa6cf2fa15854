#include <doctest.h>

#include "support.hpp"
#include "transagent/corpus.hpp"
#include "transagent/error.hpp"
#include "transagent/graph.hpp"
#include "transagent/translators.hpp"

using namespace transagent;
using namespace transagent::translators;

namespace {

class RecordingTransport final : public chat::HttpTransport {
 public:
  mutable std::vector<chat::HttpRequest> requests;
  std::string reply;

  chat::HttpResponse post(const chat::HttpRequest& request) const override {
    requests.push_back(request);
    return {200, R"({"choices":[{"message":{"role":"assistant","content":")" + reply + R"("}}]})"};
  }
};

MockScript demo_script() {
  MockScript s;
  s.add("hello", LanguageCode::FR, "bonjour");
  s.add("bonjour", LanguageCode::EN, "hello");
  s.add("good morning", LanguageCode::JP, "おはようございます");
  return s;
}

EngineMap mock_engines(const MockScript& script) {
  auto engine = std::make_shared<MockTranslator>(script);
  return {{LanguageCode::EN, engine}, {LanguageCode::FR, engine}, {LanguageCode::JP, engine}};
}

const seq2seq::Seq2SeqModel& toy_model() {
  static const seq2seq::Seq2SeqModel model = [] {
    const auto pairs = corpus::parse_pairs(support::kToyCorpus, 10, false).pairs;
    seq2seq::Hyperparams h;
    h.hidden_size = 64;
    h.embedding_size = 64;
    h.iterations = 3000;
    auto m = seq2seq::init_model(h, corpus::build_vocabulary(pairs, corpus::Side::Source),
                                 corpus::build_vocabulary(pairs, corpus::Side::Target), h.seed);
    seq2seq::train(m, pairs, h);
    return m;
  }();
  return model;
}

}  // namespace

TEST_CASE("language codes") {
  CHECK(to_string(LanguageCode::FR) == "FR");
  CHECK(language_name(LanguageCode::JP) == "Japanese");
  CHECK(parse_language("en") == LanguageCode::EN);
  CHECK(parse_language("Jp") == LanguageCode::JP);
  CHECK_THROWS_AS(parse_language("de"), DomainError);
  CHECK(translator_node(LanguageCode::FR) == "translateToFrench");
}

TEST_CASE("analyze_language rule cascade") {
  CHECK(analyze_language("こんにちは") == LanguageCode::JP);
  CHECK(analyze_language("カタカナ") == LanguageCode::JP);
  CHECK(analyze_language("日本語") == LanguageCode::JP);
  CHECK(analyze_language("où est la gare ?") == LanguageCode::FR);
  CHECK(analyze_language("ÉCOLE") == LanguageCode::FR);
  CHECK(analyze_language("je suis la") == LanguageCode::FR);
  CHECK(analyze_language("LE chat EST noir") == LanguageCode::FR);
  CHECK(analyze_language("la vida") == LanguageCode::EN);
  CHECK(analyze_language("hello world") == LanguageCode::EN);
  CHECK(analyze_language("café 東京") == LanguageCode::JP);
  CHECK_THROWS_AS(analyze_language(""), DomainError);
  CHECK_THROWS_AS(analyze_language("  \t"), DomainError);
}

TEST_CASE("adding Japanese text always yields JP") {
  numkit::SplitMix64 rng(1);
  for (int i = 0; i < 500; ++i) {
    const std::string base = support::random_unicode(rng, 20) + "x";
    const LanguageCode before = analyze_language(base);
    CHECK(analyze_language(base) == before);
    const std::string jp = support::utf8(0x3041 + static_cast<char32_t>(rng.below(80)));
    const std::size_t at = base.find('x');
    CHECK(analyze_language(base.substr(0, at) + jp + base.substr(at)) == LanguageCode::JP);
  }
}

TEST_CASE("determine_intent grammar") {
  CHECK(determine_intent("to:fr hello") == Intent{LanguageCode::FR, "hello"});
  CHECK(determine_intent("TO:JP  hi there") == Intent{LanguageCode::JP, "hi there"});
  CHECK(determine_intent("translate to Japanese: good morning") ==
        Intent{LanguageCode::JP, "good morning"});
  CHECK(determine_intent("Please translate into French: the cat") ==
        Intent{LanguageCode::FR, "the cat"});
  CHECK(determine_intent("good night, translate to english") ==
        Intent{LanguageCode::EN, "good night,"});
  CHECK(determine_intent("to:fr translate into french: hi") == Intent{LanguageCode::FR, "hi"});
  CHECK(determine_intent("bonjour", LanguageCode::EN) == Intent{LanguageCode::EN, "bonjour"});

  try {
    determine_intent("bonjour");
    FAIL("expected unresolved intent");
  } catch (const IntentError& e) {
    CHECK(e.kind() == IntentError::Kind::Unresolved);
  }
  try {
    determine_intent("to:fr translate to japanese: hi");
    FAIL("expected a conflict");
  } catch (const IntentError& e) {
    CHECK(e.kind() == IntentError::Kind::Conflict);
  }
  CHECK_THROWS_AS(determine_intent(""), DomainError);
  CHECK_THROWS_AS(determine_intent("to:de hello"), IntentError);
}

TEST_CASE("determine_intent only ever yields a known code") {
  numkit::SplitMix64 rng(2);
  const char* pieces[] = {"to:en ", "to:fr ", "to:jp ", "translate to english ", "into french: ",
                          "to japanese ", "hello ", "こんにちは ", "to: ", "tojapanese "};
  for (int i = 0; i < 1000; ++i) {
    std::string text;
    for (std::size_t k = 0, n = 1 + rng.below(4); k < n; ++k) text += pieces[rng.below(10)];
    try {
      const Intent intent = determine_intent(text);
      CHECK((intent.target == LanguageCode::EN || intent.target == LanguageCode::FR ||
             intent.target == LanguageCode::JP));
    } catch (const IntentError&) {
    }
  }
}

TEST_CASE("prompt wording") {
  CHECK(translation_prompt("hello", LanguageCode::FR) ==
        "Translate the following text into French. Reply with only the translation.\n\nhello");
}

TEST_CASE("mock script lookups and fallback") {
  const MockScript s = demo_script();
  CHECK(s.lookup("hello", LanguageCode::FR) == "bonjour");
  CHECK(s.lookup("  HeLLo ", LanguageCode::FR) == "bonjour");
  CHECK(s.lookup("bye", LanguageCode::JP) == "[JP] bye");
  CHECK(s.lookup("hello", LanguageCode::JP) == "[JP] hello");
  CHECK_FALSE(s.find("bye", LanguageCode::JP).has_value());

  MockScript custom;
  custom.set_fallback("<{text}|{lang}|{lang}>");
  CHECK(custom.lookup("x", LanguageCode::EN) == "<x|EN|EN>");

  const MockTranslator t(s);
  const TranslationResult r = t.translate({"hello", LanguageCode::FR, std::nullopt});
  CHECK(r.output_text == "bonjour");
  CHECK(r.engine == Engine::Mock);
  CHECK(r.target == LanguageCode::FR);
  CHECK_FALSE(r.attention.has_value());
}

TEST_CASE("mock script JSON") {
  const MockScript s = MockScript::from_json(
      R"({"entries":[{"text":"hello","target":"FR","output":"bonjour"}],"fallback":"?{text}"})");
  CHECK(s.size() == 1);
  CHECK(s.lookup("hello", LanguageCode::FR) == "bonjour");
  CHECK(s.lookup("bye", LanguageCode::FR) == "?bye");
  CHECK(MockScript::from_json("{}").fallback() == "[{lang}] {text}");

  CHECK_THROWS_AS(MockScript::from_json("[1,2]"), MockScriptError);
  CHECK_THROWS_AS(MockScript::from_json("{"), MockScriptError);
  CHECK_THROWS_AS(MockScript::from_json(R"({"entries":[{"text":"a","target":"DE","output":"b"}]})"),
                  MockScriptError);
  CHECK_THROWS_AS(MockScript::from_json(R"({"entries":[{"text":"a","output":"b"}]})"), MockScriptError);
  CHECK_THROWS_AS(MockScript::load("/nonexistent/script.json"), MockScriptError);
}

TEST_CASE("NMT translator") {
  auto model = std::make_shared<const seq2seq::Seq2SeqModel>(toy_model());
  const NmtTranslator nmt(model, LanguageCode::EN, LanguageCode::FR);
  const TranslationResult r = nmt.translate({"go .", LanguageCode::FR, LanguageCode::EN});
  CHECK(r.output_text == "va !");
  CHECK(r.engine == Engine::Nmt);
  REQUIRE(r.attention.has_value());
  CHECK(r.attention->weights.rows() == 3);
  CHECK(r.attention->weights.cols() == 3);

  CHECK_THROWS_AS(nmt.translate({"go .", LanguageCode::EN, std::nullopt}), DirectionMismatchError);
  CHECK_THROWS_AS(nmt.translate({"go .", LanguageCode::FR, LanguageCode::JP}), DirectionMismatchError);
  CHECK_THROWS_AS(nmt.translate({"a b c d e f g h i j k", LanguageCode::FR, std::nullopt}),
                  OverLengthError);
}

TEST_CASE("LLM translator sends the prompt through the chat client") {
  auto transport = std::make_shared<RecordingTransport>();
  transport->reply = "  bonjour  ";
  auto client = std::make_shared<const chat::ChatClient>(
      chat::ChatClientConfig{"http://llm.test", "demo-model"}, transport);
  const LlmTranslator llm(client);
  const TranslationResult r = llm.translate({"hello", LanguageCode::FR, std::nullopt});
  CHECK(r.output_text == "bonjour");
  CHECK(r.engine == Engine::Llm);
  CHECK_FALSE(r.attention.has_value());
  REQUIRE(transport->requests.size() == 1);
  CHECK(transport->requests[0].body.find("into French. Reply with only the translation.") !=
        std::string::npos);
  CHECK_THROWS_AS(llm.translate({"  ", LanguageCode::FR, std::nullopt}), DomainError);
}

TEST_CASE("routing table") {
  const RoutingTable d = RoutingTable::defaults();
  CHECK(d.at(LanguageCode::EN) == "translateToEN");
  CHECK(d.at(LanguageCode::FR) == "translateToFrench");
  CHECK(d.at(LanguageCode::JP) == "translateToJP");
  CHECK_NOTHROW(d.validate());

  RoutingTable partial = d;
  partial.routes.erase(LanguageCode::JP);
  CHECK_THROWS_AS(partial.validate(), DomainError);
  RoutingTable bogus = d;
  bogus.routes[LanguageCode::EN] = "translateToKlingon";
  CHECK_THROWS_AS(bogus.validate(), DomainError);
  CHECK_THROWS_AS(build_translation_graph(mock_engines(demo_script()), bogus), DomainError);
}

TEST_CASE("translation graph follows the analyze, intent, translate flow") {
  const graph::CompiledGraph g = build_translation_graph(mock_engines(demo_script()));
  CHECK(g.entry() == "analyze_language");

  const struct {
    const char* input;
    const char* node;
    const char* output;
  } cases[] = {
      {"to:en bonjour", "translateToEN", "hello"},
      {"to:fr hello", "translateToFrench", "bonjour"},
      {"translate to Japanese: good morning", "translateToJP", "おはようございます"},
  };
  for (const auto& c : cases) {
    graph::GraphState init;
    init.input_text = c.input;
    const graph::RunResult r = g.run(init);
    CHECK(r.trace.completed());
    CHECK(r.trace.node_order() ==
          std::vector<std::string>{"analyze_language", "determine_intent", c.node});
    CHECK(r.state.output_text == std::optional<std::string>(c.output));
    CHECK(r.state.metadata.at("engine") == "mock");
  }

  graph::GraphState fr;
  fr.input_text = "to:en le chat est noir";
  const graph::RunResult r = g.run(fr);
  CHECK(r.state.detected_language == std::optional<std::string>("FR"));
  CHECK(r.state.intent == std::optional<std::string>("EN"));
  CHECK(r.state.input_text == "le chat est noir");
  CHECK(r.state.metadata.at("original_input") == "to:en le chat est noir");
  CHECK(r.trace.visits[0].state.output_text == std::nullopt);
  CHECK(graph::trace_to_jsonl(g.run(fr).trace) == graph::trace_to_jsonl(r.trace));
}

TEST_CASE("unresolved intent fails the run at determine_intent") {
  const graph::CompiledGraph g = build_translation_graph(mock_engines(demo_script()));
  graph::GraphState init;
  init.input_text = "bonjour";
  const graph::RunResult r = g.run(init);
  REQUIRE_FALSE(r.trace.completed());
  const auto& failed = std::get<graph::Failed>(r.trace.status);
  CHECK(failed.node == "determine_intent");
  CHECK_THROWS_AS(std::rethrow_exception(failed.cause), IntentError);

  GraphOptions with_default;
  with_default.default_target = LanguageCode::JP;
  const graph::RunResult ok = build_translation_graph(mock_engines(demo_script()),
                                                      RoutingTable::defaults(), with_default)
                                  .run(init);
  CHECK(ok.trace.node_order().back() == "translateToJP");
  CHECK(ok.state.output_text == std::optional<std::string>("[JP] bonjour"));
}

TEST_CASE("routing totality under arbitrary routing tables") {
  numkit::SplitMix64 rng(3);
  const char* prefixes[] = {"to:en ", "to:fr ", "to:jp "};
  for (int trial = 0; trial < 60; ++trial) {
    RoutingTable routing;
    for (LanguageCode code : kAllLanguages) {
      routing.routes[code] = std::string(translator_node(kAllLanguages[rng.below(3)]));
    }
    const graph::CompiledGraph g = build_translation_graph(mock_engines(demo_script()), routing);
    const std::size_t pick = rng.below(3);
    graph::GraphState init;
    init.input_text = std::string(prefixes[pick]) + "text " + std::to_string(trial);
    const graph::RunResult r = g.run(init);
    const auto order = r.trace.node_order();
    REQUIRE(order.size() == 3);
    CHECK(order[2] == routing.at(kAllLanguages[pick]));
  }
}

TEST_CASE("custom intent resolver and engine checks") {
  GraphOptions options;
  options.intent_resolver = [](std::string_view text) {
    return Intent{LanguageCode::JP, std::string(text)};
  };
  const graph::CompiledGraph g =
      build_translation_graph(mock_engines(demo_script()), RoutingTable::defaults(), options);
  graph::GraphState init;
  init.input_text = "to:fr hello";
  CHECK(g.run(init).trace.node_order().back() == "translateToJP");

  EngineMap missing = mock_engines(demo_script());
  missing.erase(LanguageCode::EN);
  CHECK_THROWS_AS(build_translation_graph(missing), DomainError);
}
