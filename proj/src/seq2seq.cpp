#include "transagent/seq2seq.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "transagent/error.hpp"

namespace transagent::seq2seq {

using numkit::Tape;
using json = nlohmann::json;

void Hyperparams::validate() const {
  if (hidden_size == 0) throw DomainError("hidden_size must be at least 1");
  if (embedding_size == 0) throw DomainError("embedding_size must be at least 1");
  if (max_length == 0) throw DomainError("max_length must be at least 1");
  if (!(teacher_forcing_ratio >= 0.0 && teacher_forcing_ratio <= 1.0)) {
    throw DomainError("teacher_forcing_ratio must lie in [0, 1]");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw DomainError("learning_rate must be a finite non-negative number");
  }
}

std::vector<NamedParam> Seq2SeqModel::parameters() {
  return {
      {"encoder.embedding", &encoder.embedding}, {"encoder.W_hx", &encoder.W_hx},
      {"encoder.W_hh", &encoder.W_hh},           {"encoder.b_h", &encoder.b_h},
      {"decoder.embedding", &decoder.embedding}, {"decoder.W_hx", &decoder.W_hx},
      {"decoder.W_hh", &decoder.W_hh},           {"decoder.b_h", &decoder.b_h},
      {"decoder.W_q", &decoder.W_q},             {"decoder.W_k", &decoder.W_k},
      {"decoder.v_a", &decoder.v_a},             {"decoder.W_c", &decoder.W_c},
      {"decoder.W_yt", &decoder.W_yt},           {"decoder.b_y", &decoder.b_y},
  };
}

std::vector<Matrix*> Seq2SeqModel::parameter_ptrs() {
  std::vector<Matrix*> out;
  for (auto& p : parameters()) out.push_back(p.value);
  return out;
}

// ---------------------------------------------------------------------------
// Initialization

double init_bound(std::size_t rows, std::size_t cols) {
  return 4.0 * std::sqrt(6.0 / static_cast<double>(rows + cols));
}

Seq2SeqModel init_model(const Hyperparams& hyper, corpus::Vocabulary src_vocab,
                        corpus::Vocabulary tgt_vocab, std::uint64_t seed) {
  hyper.validate();
  const std::size_t h = hyper.hidden_size;
  const std::size_t e = hyper.embedding_size;
  const std::size_t vs = src_vocab.n_words();
  const std::size_t vt = tgt_vocab.n_words();
  numkit::SplitMix64 rng(seed);

  auto filled = [&](std::size_t rows, std::size_t cols) {
    const double bound = init_bound(rows, cols);
    Matrix m(rows, cols);
    for (double& x : m.data()) x = rng.uniform(-bound, bound);
    return m;
  };

  Seq2SeqModel model;
  model.hyper = hyper;
  model.encoder.embedding = filled(vs, e);
  model.encoder.W_hx = filled(h, e);
  model.encoder.W_hh = filled(h, h);
  model.encoder.b_h = Matrix(h, 1);
  model.decoder.embedding = filled(vt, e);
  model.decoder.W_hx = filled(h, e);
  model.decoder.W_hh = filled(h, h);
  model.decoder.b_h = Matrix(h, 1);
  model.decoder.W_q = filled(h, h);
  model.decoder.W_k = filled(h, h);
  model.decoder.v_a = filled(h, 1);
  model.decoder.W_c = filled(e, e + h);
  model.decoder.W_yt = filled(vt, h);
  model.decoder.b_y = Matrix(vt, 1);
  model.src_vocab = std::move(src_vocab);
  model.tgt_vocab = std::move(tgt_vocab);
  return model;
}

// ---------------------------------------------------------------------------
// Taped network

namespace taped {

Tape::Var encoder_step(Tape& tape, const EncoderParams& params, Tape::Var x_t, Tape::Var h_prev) {
  const Tape::Var input = tape.matvec(tape.parameter(params.W_hx), x_t);
  const Tape::Var recurrent = tape.matvec(tape.parameter(params.W_hh), h_prev);
  return tape.sigmoid(tape.add(tape.add(input, recurrent), tape.parameter(params.b_h)));
}

Encoded encode(Tape& tape, const Seq2SeqModel& model, std::span<const TokenId> source_ids) {
  if (source_ids.empty()) throw ShapeError("cannot encode an empty source sequence");
  if (source_ids.size() > model.hyper.max_length + 1) {
    throw OverLengthError("source of " + std::to_string(source_ids.size() - 1) +
                          " tokens exceeds max_length " + std::to_string(model.hyper.max_length));
  }
  const Tape::Var embedding = tape.parameter(model.encoder.embedding);
  const Tape::Var W_k = tape.parameter(model.decoder.W_k);

  Encoded enc{{}, {}, tape.constant(Vector(model.hyper.hidden_size, 0.0))};
  for (TokenId id : source_ids) {
    enc.final_hidden = encoder_step(tape, model.encoder, tape.row(embedding, id), enc.final_hidden);
    enc.outputs.push_back(enc.final_hidden);
    enc.keys.push_back(tape.matvec(W_k, enc.final_hidden));
  }
  return enc;
}

Step decoder_step(Tape& tape, const DecoderParams& params, TokenId y_prev, Tape::Var h_prev,
                  const Encoded& encoded) {
  if (encoded.outputs.empty()) throw ShapeError("attention over no encoder outputs");

  const Tape::Var query = tape.matvec(tape.parameter(params.W_q), h_prev);
  const Tape::Var v_a = tape.parameter(params.v_a);
  std::vector<Tape::Var> scores;
  scores.reserve(encoded.keys.size());
  for (Tape::Var key : encoded.keys) {
    scores.push_back(tape.dot(v_a, tape.tanh(tape.add(query, key))));
  }
  const Tape::Var weights = tape.softmax(tape.stack(scores));
  const Tape::Var context = tape.weighted_sum(weights, encoded.outputs);

  const Tape::Var embedded = tape.row(tape.parameter(params.embedding), y_prev);
  const Tape::Var combined =
      tape.tanh(tape.matvec(tape.parameter(params.W_c), tape.concat(embedded, context)));

  const Tape::Var input = tape.matvec(tape.parameter(params.W_hx), combined);
  const Tape::Var recurrent = tape.matvec(tape.parameter(params.W_hh), h_prev);
  const Tape::Var hidden =
      tape.sigmoid(tape.add(tape.add(input, recurrent), tape.parameter(params.b_h)));

  const Tape::Var logits =
      tape.add(tape.matvec(tape.parameter(params.W_yt), hidden), tape.parameter(params.b_y));
  return Step{tape.softmax(logits), hidden, weights, logits};
}

Tape::Var sequence_loss(Tape& tape, const Seq2SeqModel& model,
                        std::span<const TokenId> source_ids,
                        std::span<const TokenId> target_ids,
                        const std::function<bool(std::size_t)>& feed_gold) {
  if (target_ids.empty()) throw ShapeError("cannot score an empty target sequence");
  const Encoded encoded = encode(tape, model, source_ids);

  std::vector<Tape::Var> losses;
  losses.reserve(target_ids.size());
  Tape::Var hidden = encoded.final_hidden;
  TokenId input = corpus::kSosId;
  for (std::size_t t = 0; t < target_ids.size(); ++t) {
    const Step step = decoder_step(tape, model.decoder, input, hidden, encoded);
    losses.push_back(tape.nll(step.probabilities, target_ids[t]));
    hidden = step.hidden;
    input = feed_gold(t) ? target_ids[t] : numkit::argmax(tape.value(step.probabilities));
  }
  return tape.mean(losses);
}

}  // namespace taped

// ---------------------------------------------------------------------------
// Untaped entry points

Vector encoder_step(const EncoderParams& params, std::span<const double> x_t,
                    std::span<const double> h_prev) {
  Tape tape;
  const auto h = taped::encoder_step(tape, params, tape.constant(Vector(x_t.begin(), x_t.end())),
                                     tape.constant(Vector(h_prev.begin(), h_prev.end())));
  return tape.value(h);
}

EncoderOutput encode_sequence(const Seq2SeqModel& model, std::span<const TokenId> source_ids) {
  Tape tape;
  const taped::Encoded enc = taped::encode(tape, model, source_ids);
  EncoderOutput out;
  for (auto v : enc.outputs) out.outputs.push_back(tape.value(v));
  out.final_hidden = tape.value(enc.final_hidden);
  return out;
}

namespace {

taped::Encoded constant_encoding(Tape& tape, const DecoderParams& params,
                                 std::span<const Vector> encoder_outputs) {
  if (encoder_outputs.empty()) throw ShapeError("attention over no encoder outputs");
  taped::Encoded enc{{}, {}, Tape::Var{}};
  const Tape::Var W_k = tape.parameter(params.W_k);
  for (const Vector& h : encoder_outputs) {
    enc.outputs.push_back(tape.constant(h));
    enc.keys.push_back(tape.matvec(W_k, enc.outputs.back()));
  }
  enc.final_hidden = enc.outputs.back();
  return enc;
}

}  // namespace

Vector attention_weights(const DecoderParams& params, std::span<const double> dec_hidden_prev,
                         std::span<const Vector> encoder_outputs) {
  Tape tape;
  const taped::Encoded enc = constant_encoding(tape, params, encoder_outputs);
  const Tape::Var query = tape.matvec(tape.parameter(params.W_q),
                                      tape.constant(Vector(dec_hidden_prev.begin(), dec_hidden_prev.end())));
  const Tape::Var v_a = tape.parameter(params.v_a);
  std::vector<Tape::Var> scores;
  for (Tape::Var key : enc.keys) scores.push_back(tape.dot(v_a, tape.tanh(tape.add(query, key))));
  return tape.value(tape.softmax(tape.stack(scores)));
}

DecoderStep decoder_step(const DecoderParams& params, TokenId y_prev,
                         std::span<const double> dec_hidden_prev,
                         std::span<const Vector> encoder_outputs) {
  Tape tape;
  const taped::Encoded enc = constant_encoding(tape, params, encoder_outputs);
  const taped::Step step = taped::decoder_step(
      tape, params, y_prev, tape.constant(Vector(dec_hidden_prev.begin(), dec_hidden_prev.end())),
      enc);
  return DecoderStep{tape.value(step.logits), tape.value(step.probabilities),
                     tape.value(step.hidden), tape.value(step.weights)};
}

// ---------------------------------------------------------------------------
// Training

TrainReport train(Seq2SeqModel& model, std::span<const corpus::SentencePair> pairs,
                  const Hyperparams& hyper, const TrainOptions& options) {
  hyper.validate();
  if (pairs.empty()) {
    throw CorpusError(CorpusError::Kind::EmptyCorpus, "cannot train on an empty corpus");
  }

  struct Encoded {
    std::vector<TokenId> source;
    std::vector<TokenId> target;
  };
  std::vector<Encoded> data;
  data.reserve(pairs.size());
  for (const auto& pair : pairs) {
    if (pair.source.size() > model.hyper.max_length || pair.target.size() > model.hyper.max_length) {
      throw OverLengthError("pair from line " + std::to_string(pair.line_no) +
                            " exceeds max_length " + std::to_string(model.hyper.max_length));
    }
    data.push_back({corpus::encode_sentence(model.src_vocab, pair.source),
                    corpus::encode_sentence(model.tgt_vocab, pair.target)});
  }

  TrainReport report;
  const std::size_t total = hyper.iterations;
  if (total == 0) return report;
  const std::size_t interval =
      options.checkpoint_interval > 0 ? options.checkpoint_interval : std::max<std::size_t>(1, total / 20);

  numkit::SplitMix64 rng(hyper.seed);
  const std::vector<Matrix*> params = model.parameter_ptrs();
  const auto started = std::chrono::steady_clock::now();
  double loss_since_checkpoint = 0.0;
  std::size_t since_checkpoint = 0;

  for (std::size_t iter = 1; iter <= total; ++iter) {
    const Encoded& sample = data[rng.below(data.size())];
    Tape tape;
    Tape::Var loss;
    try {
      loss = taped::sequence_loss(tape, model, sample.source, sample.target,
                                  [&](std::size_t) { return rng.uniform() < hyper.teacher_forcing_ratio; });
    } catch (const DomainError& e) {
      throw DivergenceError("training diverged at iteration " + std::to_string(iter) + ": " + e.what());
    }
    const double value = tape.scalar(loss);
    if (!std::isfinite(value)) {
      throw DivergenceError("training loss became non-finite at iteration " + std::to_string(iter));
    }
    numkit::sgd_step(params, tape.backward(loss), hyper.learning_rate);

    loss_since_checkpoint += value;
    ++since_checkpoint;
    if (iter % interval == 0 || iter == total) {
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
      Checkpoint cp{iter, loss_since_checkpoint / static_cast<double>(since_checkpoint),
                    elapsed.count(), 100.0 * static_cast<double>(iter) / static_cast<double>(total)};
      report.checkpoints.push_back(cp);
      if (options.on_checkpoint) options.on_checkpoint(cp, total);
      loss_since_checkpoint = 0.0;
      since_checkpoint = 0;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Decoding

Translation translate(const Seq2SeqModel& model, std::string_view sentence, std::size_t max_out) {
  const corpus::Sentence tokens = corpus::tokenize(sentence);
  if (tokens.size() > model.hyper.max_length) {
    throw OverLengthError("input has " + std::to_string(tokens.size()) +
                          " tokens, model max_length is " + std::to_string(model.hyper.max_length));
  }
  const std::vector<TokenId> ids = corpus::encode_sentence(model.src_vocab, tokens);

  Tape tape;
  const taped::Encoded encoded = taped::encode(tape, model, ids);

  Translation out;
  out.attention.source_tokens = tokens;
  out.attention.source_tokens.emplace_back(corpus::kEosToken);
  std::vector<double> rows;

  Tape::Var hidden = encoded.final_hidden;
  TokenId input = corpus::kSosId;
  for (std::size_t step = 0; step < max_out; ++step) {
    const taped::Step s = taped::decoder_step(tape, model.decoder, input, hidden, encoded);
    const Vector& w = tape.value(s.weights);
    rows.insert(rows.end(), w.begin(), w.end());
    const TokenId best = numkit::argmax(tape.value(s.probabilities));
    const std::string& word = model.tgt_vocab.word_of(best);
    out.attention.target_tokens.push_back(word);
    if (best == corpus::kEosId) break;
    out.tokens.push_back(word);
    input = best;
    hidden = s.hidden;
  }
  out.attention.weights =
      Matrix(out.attention.target_tokens.size(), out.attention.source_tokens.size(), std::move(rows));
  return out;
}

Translation translate(const Seq2SeqModel& model, std::string_view sentence) {
  return translate(model, sentence, model.hyper.max_length + 1);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(json(std::vector<double>(row.begin(), row.end())));
  }
  return rows;
}

json column_to_json(const Matrix& m) {
  return json(std::vector<double>(m.data().begin(), m.data().end()));
}

[[noreturn]] void corrupt(const std::string& what) {
  throw ModelError(ModelError::Kind::Corrupt, "corrupt model file: " + what);
}

Matrix matrix_from_json(const json& j, const char* name, std::size_t rows, std::size_t cols) {
  if (!j.is_array() || j.size() != rows) corrupt(std::string(name) + " has the wrong row count");
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != cols) corrupt(std::string(name) + " has a ragged row");
    for (const auto& x : row) {
      if (!x.is_number()) corrupt(std::string(name) + " holds a non-number");
      data.push_back(x.get<double>());
    }
  }
  return Matrix(rows, cols, std::move(data));
}

Matrix column_from_json(const json& j, const char* name, std::size_t rows) {
  if (!j.is_array() || j.size() != rows) corrupt(std::string(name) + " has the wrong length");
  std::vector<double> data;
  data.reserve(rows);
  for (const auto& x : j) {
    if (!x.is_number()) corrupt(std::string(name) + " holds a non-number");
    data.push_back(x.get<double>());
  }
  return Matrix(rows, 1, std::move(data));
}

json vocab_to_json(const corpus::Vocabulary& v) {
  return {{"index_to_word", v.index_to_word()}, {"counts", v.counts()}};
}

corpus::Vocabulary vocab_from_json(const json& j) {
  try {
    return corpus::Vocabulary::from_parts(j.at("index_to_word").get<std::vector<std::string>>(),
                                          j.at("counts").get<std::map<std::string, std::size_t>>());
  } catch (const ModelError&) {
    throw;
  } catch (const std::exception& e) {
    corrupt(std::string("vocabulary: ") + e.what());
  }
}

}  // namespace

std::string model_to_json(const Seq2SeqModel& model) {
  const Hyperparams& h = model.hyper;
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["hyper"] = {{"hidden_size", h.hidden_size},
                  {"max_length", h.max_length},
                  {"embedding_size", h.embedding_size},
                  {"learning_rate", h.learning_rate},
                  {"teacher_forcing_ratio", h.teacher_forcing_ratio},
                  {"iterations", h.iterations},
                  {"seed", h.seed}};
  doc["src_vocab"] = vocab_to_json(model.src_vocab);
  doc["tgt_vocab"] = vocab_to_json(model.tgt_vocab);
  const EncoderParams& e = model.encoder;
  doc["encoder"] = {{"embedding", matrix_to_json(e.embedding)},
                    {"W_hx", matrix_to_json(e.W_hx)},
                    {"W_hh", matrix_to_json(e.W_hh)},
                    {"b_h", column_to_json(e.b_h)}};
  const DecoderParams& d = model.decoder;
  doc["decoder"] = {{"embedding", matrix_to_json(d.embedding)},
                    {"W_hx", matrix_to_json(d.W_hx)},
                    {"W_hh", matrix_to_json(d.W_hh)},
                    {"b_h", column_to_json(d.b_h)},
                    {"W_q", matrix_to_json(d.W_q)},
                    {"W_k", matrix_to_json(d.W_k)},
                    {"v_a", column_to_json(d.v_a)},
                    {"W_c", matrix_to_json(d.W_c)},
                    {"W_yt", matrix_to_json(d.W_yt)},
                    {"b_y", column_to_json(d.b_y)}};
  return doc.dump() + "\n";
}

Seq2SeqModel model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    corrupt(e.what());
  }
  if (!doc.is_object() || !doc.contains("format_version")) corrupt("missing format_version");
  if (!doc["format_version"].is_number_integer()) corrupt("format_version is not an integer");
  const auto version = doc["format_version"].get<long long>();
  if (version != kFormatVersion) {
    throw ModelError(ModelError::Kind::VersionMismatch,
                     "unsupported model format_version " + std::to_string(version) + " (expected " +
                         std::to_string(kFormatVersion) + ")");
  }

  Seq2SeqModel model;
  try {
    const json& h = doc.at("hyper");
    model.hyper.hidden_size = h.at("hidden_size").get<std::size_t>();
    model.hyper.max_length = h.at("max_length").get<std::size_t>();
    model.hyper.embedding_size = h.at("embedding_size").get<std::size_t>();
    model.hyper.learning_rate = h.at("learning_rate").get<double>();
    model.hyper.teacher_forcing_ratio = h.at("teacher_forcing_ratio").get<double>();
    model.hyper.iterations = h.at("iterations").get<std::size_t>();
    model.hyper.seed = h.at("seed").get<std::uint64_t>();
    model.hyper.validate();
  } catch (const json::exception& e) {
    corrupt(std::string("hyper: ") + e.what());
  } catch (const DomainError& e) {
    corrupt(std::string("hyper: ") + e.what());
  }
  if (!doc.contains("src_vocab") || !doc.contains("tgt_vocab")) corrupt("missing vocabulary");
  model.src_vocab = vocab_from_json(doc["src_vocab"]);
  model.tgt_vocab = vocab_from_json(doc["tgt_vocab"]);

  const std::size_t hs = model.hyper.hidden_size;
  const std::size_t es = model.hyper.embedding_size;
  const std::size_t vs = model.src_vocab.n_words();
  const std::size_t vt = model.tgt_vocab.n_words();
  try {
    const json& e = doc.at("encoder");
    model.encoder.embedding = matrix_from_json(e.at("embedding"), "encoder.embedding", vs, es);
    model.encoder.W_hx = matrix_from_json(e.at("W_hx"), "encoder.W_hx", hs, es);
    model.encoder.W_hh = matrix_from_json(e.at("W_hh"), "encoder.W_hh", hs, hs);
    model.encoder.b_h = column_from_json(e.at("b_h"), "encoder.b_h", hs);
    const json& d = doc.at("decoder");
    model.decoder.embedding = matrix_from_json(d.at("embedding"), "decoder.embedding", vt, es);
    model.decoder.W_hx = matrix_from_json(d.at("W_hx"), "decoder.W_hx", hs, es);
    model.decoder.W_hh = matrix_from_json(d.at("W_hh"), "decoder.W_hh", hs, hs);
    model.decoder.b_h = column_from_json(d.at("b_h"), "decoder.b_h", hs);
    model.decoder.W_q = matrix_from_json(d.at("W_q"), "decoder.W_q", hs, hs);
    model.decoder.W_k = matrix_from_json(d.at("W_k"), "decoder.W_k", hs, hs);
    model.decoder.v_a = column_from_json(d.at("v_a"), "decoder.v_a", hs);
    model.decoder.W_c = matrix_from_json(d.at("W_c"), "decoder.W_c", es, es + hs);
    model.decoder.W_yt = matrix_from_json(d.at("W_yt"), "decoder.W_yt", vt, hs);
    model.decoder.b_y = column_from_json(d.at("b_y"), "decoder.b_y", vt);
  } catch (const json::exception& e) {
    corrupt(e.what());
  }
  return model;
}

void save_model(const Seq2SeqModel& model, const std::filesystem::path& path) {
  const std::string text = model_to_json(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ModelError(ModelError::Kind::Io, "cannot write model file '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) throw ModelError(ModelError::Kind::Io, "failed writing model file '" + path.string() + "'");
}

Seq2SeqModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError(ModelError::Kind::Io, "cannot open model file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

// ---------------------------------------------------------------------------
// Attention export

namespace {

void check_attention_shape(const AttentionMatrix& m) {
  if (m.weights.rows() != m.target_tokens.size() || m.weights.cols() != m.source_tokens.size()) {
    throw ShapeError("attention matrix is " + std::to_string(m.weights.rows()) + "x" +
                     std::to_string(m.weights.cols()) + " but labels are " +
                     std::to_string(m.target_tokens.size()) + "x" +
                     std::to_string(m.source_tokens.size()));
  }
}

}  // namespace

std::string attention_to_csv(const AttentionMatrix& matrix) {
  check_attention_shape(matrix);
  std::string out;
  for (const auto& tok : matrix.source_tokens) out += "," + tok;
  out += "\n";
  char cell[32];
  for (std::size_t r = 0; r < matrix.weights.rows(); ++r) {
    out += matrix.target_tokens[r];
    for (double w : matrix.weights.row(r)) {
      std::snprintf(cell, sizeof cell, ",%.6f", w);
      out += cell;
    }
    out += "\n";
  }
  return out;
}

std::string attention_to_pgm(const AttentionMatrix& matrix) {
  check_attention_shape(matrix);
  std::ostringstream out;
  out << "P2\n" << matrix.weights.cols() << ' ' << matrix.weights.rows() << "\n255\n";
  for (std::size_t r = 0; r < matrix.weights.rows(); ++r) {
    const auto row = matrix.weights.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      const long pixel = std::clamp(std::lround(row[c] * 255.0), 0L, 255L);
      out << (c ? " " : "") << pixel;
    }
    out << '\n';
  }
  return out.str();
}

void export_attention(const AttentionMatrix& matrix, const std::filesystem::path& path,
                      AttentionFormat format) {
  const std::string text =
      format == AttentionFormat::Csv ? attention_to_csv(matrix) : attention_to_pgm(matrix);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write attention file '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing attention file '" + path.string() + "'");
}

}  // namespace transagent::seq2seq
