#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "transagent/bleu.hpp"
#include "transagent/chat_client.hpp"
#include "transagent/corpus.hpp"
#include "transagent/graph.hpp"
#include "transagent/seq2seq.hpp"
#include "transagent/translators.hpp"

namespace py = pybind11;
using namespace transagent;

namespace {

using PairList = std::vector<std::pair<corpus::Sentence, corpus::Sentence>>;

PairList to_tuples(const std::vector<corpus::SentencePair>& pairs) {
  PairList out;
  for (const auto& p : pairs) out.emplace_back(p.source, p.target);
  return out;
}

std::vector<corpus::SentencePair> from_tuples(const PairList& pairs) {
  std::vector<corpus::SentencePair> out;
  for (const auto& [s, t] : pairs) out.push_back({s, t});
  return out;
}

py::dict attention_dict(const seq2seq::AttentionMatrix& a) {
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 0; r < a.weights.rows(); ++r) {
    const auto row = a.weights.row(r);
    rows.emplace_back(row.begin(), row.end());
  }
  py::dict d;
  d["target_tokens"] = a.target_tokens;
  d["source_tokens"] = a.source_tokens;
  d["weights"] = rows;
  return d;
}

seq2seq::Seq2SeqModel fresh_model(const PairList& pairs, const seq2seq::Hyperparams& hyper) {
  const auto native = from_tuples(pairs);
  return seq2seq::init_model(hyper, corpus::build_vocabulary(native, corpus::Side::Source),
                             corpus::build_vocabulary(native, corpus::Side::Target), hyper.seed);
}

py::dict route(const std::string& text, const std::string& mock_script,
               std::optional<std::string> default_target) {
  translators::MockScript script =
      mock_script.empty() ? translators::MockScript{} : translators::MockScript::from_json(mock_script);
  auto engine = std::make_shared<translators::MockTranslator>(std::move(script));
  translators::EngineMap engines;
  for (auto code : translators::kAllLanguages) engines[code] = engine;
  translators::GraphOptions options;
  if (default_target) options.default_target = translators::parse_language(*default_target);
  const auto g = translators::build_translation_graph(engines, translators::RoutingTable::defaults(),
                                                      options);
  graph::GraphState init;
  init.input_text = text;
  const graph::RunResult r = g.run(init);
  if (const auto* failed = std::get_if<graph::Failed>(&r.trace.status)) {
    if (failed->cause) std::rethrow_exception(failed->cause);
    throw Error("node " + failed->node + " failed: " + failed->error);
  }
  py::dict d;
  d["output"] = r.state.output_text.value_or("");
  d["nodes"] = r.trace.node_order();
  d["detected_language"] = r.state.detected_language;
  d["intent"] = r.state.intent;
  d["trace_jsonl"] = graph::trace_to_jsonl(r.trace);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Attention seq2seq translation and agent routing";

  auto base = py::register_exception<Error>(m, "TransagentError", PyExc_RuntimeError);
  py::register_exception<CorpusError>(m, "CorpusError", base.ptr());
  py::register_exception<ModelError>(m, "ModelError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<OverLengthError>(m, "OverLengthError", base.ptr());
  py::register_exception<translators::IntentError>(m, "IntentError", base.ptr());
  py::register_exception<translators::MockScriptError>(m, "MockScriptError", base.ptr());

  m.def("normalize_text", &corpus::normalize_text, py::arg("text"));
  m.def("tokenize", &corpus::tokenize, py::arg("text"));
  m.def(
      "parse_pairs",
      [](const std::string& text, std::size_t max_len, bool reverse) {
        return to_tuples(corpus::parse_pairs(text, max_len, reverse).pairs);
      },
      py::arg("text"), py::arg("max_len") = 10, py::arg("reverse") = false);
  m.def(
      "load_pairs",
      [](const std::filesystem::path& path, std::size_t max_len, bool reverse) {
        return to_tuples(corpus::load_pairs(path, max_len, reverse).pairs);
      },
      py::arg("path"), py::arg("max_len") = 10, py::arg("reverse") = false);

  m.def(
      "bleu",
      [](const std::vector<bleu::Sentence>& hyps, const std::vector<bleu::Sentence>& refs,
         std::size_t max_n) {
        const bleu::BleuReport r = bleu::bleu(hyps, refs, max_n);
        py::dict d;
        d["precision"] = r.precision;
        d["score"] = r.score;
        d["brevity_penalty"] = r.brevity_penalty;
        d["candidate_length"] = r.candidate_length;
        d["reference_length"] = r.reference_length;
        return d;
      },
      py::arg("hypotheses"), py::arg("references"), py::arg("max_n") = 4);

  py::class_<seq2seq::Hyperparams>(m, "Hyperparams")
      .def(py::init<>())
      .def_readwrite("hidden_size", &seq2seq::Hyperparams::hidden_size)
      .def_readwrite("embedding_size", &seq2seq::Hyperparams::embedding_size)
      .def_readwrite("max_length", &seq2seq::Hyperparams::max_length)
      .def_readwrite("learning_rate", &seq2seq::Hyperparams::learning_rate)
      .def_readwrite("teacher_forcing_ratio", &seq2seq::Hyperparams::teacher_forcing_ratio)
      .def_readwrite("iterations", &seq2seq::Hyperparams::iterations)
      .def_readwrite("seed", &seq2seq::Hyperparams::seed)
      .def("__eq__", [](const seq2seq::Hyperparams& a, const seq2seq::Hyperparams& b) { return a == b; });

  py::class_<seq2seq::Seq2SeqModel>(m, "Model")
      .def(py::init(&fresh_model), py::arg("pairs"), py::arg("hyper"))
      .def_readonly("hyper", &seq2seq::Seq2SeqModel::hyper)
      .def(
          "train",
          [](seq2seq::Seq2SeqModel& self, const PairList& pairs) {
            const auto native = from_tuples(pairs);
            py::gil_scoped_release release;
            const auto report = seq2seq::train(self, native, self.hyper);
            std::vector<std::pair<std::size_t, double>> out;
            for (const auto& cp : report.checkpoints) out.emplace_back(cp.iteration, cp.average_loss);
            return out;
          },
          py::arg("pairs"), "Runs hyper.iterations SGD steps; returns (iteration, avg_loss) checkpoints.")
      .def(
          "translate",
          [](const seq2seq::Seq2SeqModel& self, const std::string& text) {
            const seq2seq::Translation t = seq2seq::translate(self, text);
            return py::make_tuple(corpus::join(t.tokens), attention_dict(t.attention));
          },
          py::arg("text"))
      .def("save", [](const seq2seq::Seq2SeqModel& self, const std::filesystem::path& p) {
        seq2seq::save_model(self, p);
      })
      .def_static("load", &seq2seq::load_model, py::arg("path"))
      .def("to_json", &seq2seq::model_to_json)
      .def_static("from_json", &seq2seq::model_from_json, py::arg("text"))
      .def("__eq__", [](const seq2seq::Seq2SeqModel& a, const seq2seq::Seq2SeqModel& b) { return a == b; });

  m.def(
      "analyze_language",
      [](const std::string& text) { return std::string(translators::to_string(translators::analyze_language(text))); },
      py::arg("text"));
  m.def(
      "determine_intent",
      [](const std::string& text, std::optional<std::string> default_target) {
        std::optional<translators::LanguageCode> fallback;
        if (default_target) fallback = translators::parse_language(*default_target);
        const auto intent = translators::determine_intent(text, fallback);
        return py::make_tuple(std::string(translators::to_string(intent.target)), intent.remaining_text);
      },
      py::arg("text"), py::arg("default_target") = py::none());
  m.def("route", &route, py::arg("text"), py::arg("mock_script") = "",
        py::arg("default_target") = py::none(),
        "Runs the analyze/intent/translate graph with a scripted mock engine.");
}
