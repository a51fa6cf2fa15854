#include "transagent/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "transagent/bleu.hpp"
#include "transagent/chat_client.hpp"
#include "transagent/corpus.hpp"
#include "transagent/error.hpp"
#include "transagent/graph.hpp"
#include "transagent/seq2seq.hpp"
#include "transagent/translators.hpp"

namespace transagent::cli {

namespace {

using translators::LanguageCode;

/// Bad flag values found after parsing; never touches the filesystem.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path + " for writing");
  file << text;
  if (!file.flush()) throw IoError("failed writing " + path);
}

struct TrainArgs {
  std::string corpus;
  std::string out;
  std::size_t hidden = 256;
  std::size_t iters = 75000;
  std::size_t max_len = 10;
  double lr = 0.01;
  double tf = 0.5;
  std::uint64_t seed = 42;
  bool reverse = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  seq2seq::Hyperparams hyper;
  hyper.hidden_size = a.hidden;
  hyper.embedding_size = a.hidden;
  hyper.max_length = a.max_len;
  hyper.learning_rate = a.lr;
  hyper.teacher_forcing_ratio = a.tf;
  hyper.iterations = a.iters;
  hyper.seed = a.seed;
  try {
    hyper.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  if (!(a.lr > 0.0)) throw UsageError("--lr must be positive");

  const corpus::LoadedCorpus data = corpus::load_pairs(a.corpus, a.max_len, a.reverse);
  auto src = corpus::build_vocabulary(data.pairs, corpus::Side::Source);
  auto tgt = corpus::build_vocabulary(data.pairs, corpus::Side::Target);
  seq2seq::Seq2SeqModel model = seq2seq::init_model(hyper, std::move(src), std::move(tgt), a.seed);

  seq2seq::TrainOptions options;
  options.on_checkpoint = [&out](const seq2seq::Checkpoint& cp, std::size_t total) {
    out << "iter " << cp.iteration << '/' << total << " (" << fixed(cp.percent_complete, 0)
        << "%) avg_loss " << fixed(cp.average_loss, 4) << '\n';
  };
  seq2seq::train(model, data.pairs, hyper, options);
  seq2seq::save_model(model, a.out);
  return kOk;
}

struct TranslateArgs {
  std::string model;
  std::string text;
  std::string attention;
  std::string format = "csv";
};

int cmd_translate(const TranslateArgs& a, std::ostream& out) {
  const auto format =
      a.format == "pgm" ? seq2seq::AttentionFormat::Pgm : seq2seq::AttentionFormat::Csv;
  const seq2seq::Seq2SeqModel model = seq2seq::load_model(a.model);
  const seq2seq::Translation t = seq2seq::translate(model, a.text);
  if (!a.attention.empty()) seq2seq::export_attention(t.attention, a.attention, format);
  out << corpus::join(t.tokens) << '\n';
  return kOk;
}

struct BleuArgs {
  std::string model;
  std::string test;
  std::size_t max_n = 4;
  bool reverse = false;
};

int cmd_bleu(const BleuArgs& a, std::ostream& out) {
  if (a.max_n == 0) throw UsageError("--max-n must be at least 1");
  const seq2seq::Seq2SeqModel model = seq2seq::load_model(a.model);
  const corpus::LoadedCorpus data =
      corpus::load_pairs(a.test, model.hyper.max_length, a.reverse);
  if (data.pairs.empty()) {
    throw CorpusError(CorpusError::Kind::EmptyCorpus, "no usable pairs in " + a.test);
  }

  std::vector<corpus::Sentence> hypotheses;
  std::vector<corpus::Sentence> references;
  for (const auto& pair : data.pairs) {
    hypotheses.push_back(seq2seq::translate(model, corpus::join(pair.source)).tokens);
    references.push_back(pair.target);
  }
  const bleu::BleuReport report = bleu::bleu(hypotheses, references, a.max_n);
  for (std::size_t n = 1; n <= a.max_n; ++n) {
    out << "BLEU" << n << ' ' << fixed(report.score[n - 1], 4) << '\n';
  }
  out << "BP " << fixed(report.brevity_penalty, 4) << '\n';
  return kOk;
}

struct RouteArgs {
  std::string input;
  std::string mock;
  std::vector<std::string> nmt;  // {path, direction}
  std::string trace;
  std::string default_target;
};

std::pair<LanguageCode, LanguageCode> parse_direction(const std::string& text) {
  const auto dash = text.find('-');
  if (dash == std::string::npos) {
    throw UsageError("language direction must look like en-fr, got '" + text + "'");
  }
  try {
    return {translators::parse_language(text.substr(0, dash)),
            translators::parse_language(text.substr(dash + 1))};
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

std::optional<chat::ChatClientConfig> live_config_from_env() {
  const char* endpoint = std::getenv("TRANSAGENT_LLM_ENDPOINT");
  if (!endpoint || !*endpoint) return std::nullopt;
  chat::ChatClientConfig config;
  config.endpoint = endpoint;
  if (const char* model = std::getenv("TRANSAGENT_LLM_MODEL")) config.model = model;
  if (const char* timeout = std::getenv("TRANSAGENT_LLM_TIMEOUT"); timeout && *timeout) {
    char* end = nullptr;
    const double seconds = std::strtod(timeout, &end);
    if (end == timeout || *end != '\0' || !(seconds > 0.0)) {
      throw chat::ConfigError("TRANSAGENT_LLM_TIMEOUT must be a positive number of seconds");
    }
    config.timeout = std::chrono::milliseconds(static_cast<long long>(seconds * 1000.0));
  }
  config.validate();
  return config;
}

int cmd_route(const RouteArgs& a, std::ostream& out) {
  std::optional<LanguageCode> default_target;
  if (!a.default_target.empty()) {
    try {
      default_target = translators::parse_language(a.default_target);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
  std::optional<std::pair<LanguageCode, LanguageCode>> direction;
  if (!a.nmt.empty()) direction = parse_direction(a.nmt[1]);
  const auto live = live_config_from_env();
  if (a.mock.empty() && !direction && !live) {
    throw UsageError(
        "no translation engine: pass --mock or --nmt-model, or set TRANSAGENT_LLM_ENDPOINT");
  }

  translators::EngineMap engines;
  if (direction) {
    auto model = std::make_shared<const seq2seq::Seq2SeqModel>(seq2seq::load_model(a.nmt[0]));
    engines[direction->second] =
        std::make_shared<translators::NmtTranslator>(model, direction->first, direction->second);
  }
  std::shared_ptr<const translators::Translator> shared;
  if (!a.mock.empty()) {
    shared = std::make_shared<translators::MockTranslator>(translators::MockScript::load(a.mock));
  } else if (live) {
    shared = std::make_shared<translators::LlmTranslator>(
        std::make_shared<const chat::ChatClient>(*live));
  } else {
    shared = std::make_shared<translators::MockTranslator>(translators::MockScript{});
  }
  for (LanguageCode code : translators::kAllLanguages) engines.try_emplace(code, shared);

  translators::GraphOptions options;
  options.default_target = default_target;
  const graph::CompiledGraph g =
      translators::build_translation_graph(engines, translators::RoutingTable::defaults(), options);

  graph::GraphState initial;
  initial.input_text = a.input;
  const graph::RunResult result = g.run(std::move(initial));
  if (!a.trace.empty()) write_text(a.trace, graph::trace_to_jsonl(result.trace));

  if (const auto* failed = std::get_if<graph::Failed>(&result.trace.status)) {
    if (failed->cause) std::rethrow_exception(failed->cause);
    throw Error("node " + failed->node + " failed: " + failed->error);
  }
  out << result.state.output_text.value_or("") << '\n';
  return kOk;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const translators::IntentError*>(&e) ||
      dynamic_cast<const chat::ConfigError*>(&e)) {
    return kUsage;
  }
  if (dynamic_cast<const chat::RemoteError*>(&e)) return kRemote;
  if (dynamic_cast<const ModelError*>(&e) || dynamic_cast<const DivergenceError*>(&e) ||
      dynamic_cast<const translators::DirectionMismatchError*>(&e)) {
    return kModel;
  }
  return kData;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attention seq2seq translation and agent routing"};
  app.name("transagent");
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a TSV corpus");
  train_cmd->add_option("--corpus", train.corpus, "Tab-separated sentence pairs")->required();
  train_cmd->add_option("--out", train.out, "Model file to write")->required();
  train_cmd->add_option("--hidden", train.hidden, "Hidden and embedding size")->capture_default_str();
  train_cmd->add_option("--iters", train.iters, "Training iterations")->capture_default_str();
  train_cmd->add_option("--max-len", train.max_len, "Longest sentence kept")->capture_default_str();
  train_cmd->add_option("--lr", train.lr, "Learning rate")->capture_default_str();
  train_cmd->add_option("--tf", train.tf, "Teacher forcing ratio")->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "Random seed")->capture_default_str();
  train_cmd->add_flag("--reverse", train.reverse, "Swap source and target columns");

  TranslateArgs translate;
  auto* translate_cmd = app.add_subcommand("translate", "Translate one sentence");
  translate_cmd->add_option("--model", translate.model, "Model file")->required();
  translate_cmd->add_option("--text", translate.text, "Sentence to translate")->required();
  translate_cmd->add_option("--attention", translate.attention, "Write the attention matrix here");
  translate_cmd->add_option("--attention-format", translate.format, "csv or pgm")
      ->check(CLI::IsMember({"csv", "pgm"}))
      ->capture_default_str();

  BleuArgs bleu_args;
  auto* bleu_cmd = app.add_subcommand("bleu", "Score a model on a TSV test set");
  bleu_cmd->add_option("--model", bleu_args.model, "Model file")->required();
  bleu_cmd->add_option("--test", bleu_args.test, "Tab-separated test pairs")->required();
  bleu_cmd->add_option("--max-n", bleu_args.max_n, "Highest n-gram order")->capture_default_str();
  bleu_cmd->add_flag("--reverse", bleu_args.reverse, "Swap source and target columns");

  RouteArgs route;
  auto* route_cmd = app.add_subcommand("route", "Run the agent translation graph");
  route_cmd->add_option("--input", route.input, "Request text")->required();
  route_cmd->add_option("--mock", route.mock, "Mock chat script (JSON)");
  route_cmd->add_option("--nmt-model", route.nmt, "Model file and direction, e.g. en-fr")
      ->expected(2);
  route_cmd->add_option("--trace", route.trace, "Write the execution trace (JSONL)");
  route_cmd->add_option("--default-target", route.default_target,
                        "Target language when the input names none");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train, out);
    if (*translate_cmd) return cmd_translate(translate, out);
    if (*bleu_cmd) return cmd_bleu(bleu_args, out);
    return cmd_route(route, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace transagent::cli
