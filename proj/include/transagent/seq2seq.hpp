#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "transagent/corpus.hpp"
#include "transagent/numkit.hpp"

namespace transagent::seq2seq {

using corpus::TokenId;
using numkit::Matrix;
using numkit::Vector;

inline constexpr int kFormatVersion = 1;

struct Hyperparams {
  std::size_t hidden_size = 256;
  std::size_t max_length = 10;
  std::size_t embedding_size = 256;
  double learning_rate = 0.01;
  double teacher_forcing_ratio = 0.5;
  std::size_t iterations = 75000;
  std::uint64_t seed = 42;

  /// Throws DomainError on hidden_size/max_length/embedding_size of 0 or a
  /// teacher forcing ratio outside [0, 1].
  void validate() const;

  bool operator==(const Hyperparams&) const = default;
};

struct EncoderParams {
  Matrix embedding;  // src_vocab x embedding
  Matrix W_hx;       // hidden x embedding
  Matrix W_hh;       // hidden x hidden
  Matrix b_h;        // hidden x 1

  bool operator==(const EncoderParams&) const = default;
};

struct DecoderParams {
  Matrix embedding;  // tgt_vocab x embedding
  Matrix W_hx;       // hidden x embedding
  Matrix W_hh;       // hidden x hidden
  Matrix b_h;        // hidden x 1
  Matrix W_q;        // hidden x hidden, attention query
  Matrix W_k;        // hidden x hidden, attention key
  Matrix v_a;        // hidden x 1, attention score vector
  Matrix W_c;        // embedding x (embedding + hidden), input combiner
  Matrix W_yt;       // tgt_vocab x hidden
  Matrix b_y;        // tgt_vocab x 1

  bool operator==(const DecoderParams&) const = default;
};

struct NamedParam {
  std::string name;
  Matrix* value;
};

struct Seq2SeqModel {
  Hyperparams hyper;
  EncoderParams encoder;
  DecoderParams decoder;
  corpus::Vocabulary src_vocab;
  corpus::Vocabulary tgt_vocab;

  /// Every learned matrix, encoder first, in a fixed order.
  std::vector<NamedParam> parameters();
  std::vector<Matrix*> parameter_ptrs();

  bool operator==(const Seq2SeqModel&) const = default;
};

/// Target x source attention weights; one row per decode step.
struct AttentionMatrix {
  std::vector<std::string> target_tokens;
  std::vector<std::string> source_tokens;
  Matrix weights;
};

struct Checkpoint {
  std::size_t iteration = 0;
  double average_loss = 0.0;
  double elapsed_seconds = 0.0;
  double percent_complete = 0.0;
};

struct TrainReport {
  std::vector<Checkpoint> checkpoints;
};

struct EncoderOutput {
  std::vector<Vector> outputs;  // h_1..h_T
  Vector final_hidden;          // h_T
};

struct DecoderStep {
  Vector logits;
  Vector probabilities;
  Vector hidden;
  Vector weights;
};

struct Translation {
  corpus::Sentence tokens;  // emitted words, EOS excluded
  AttentionMatrix attention;
};

/// Half-width of the uniform init range for a rows x cols matrix:
/// 4 * sqrt(6 / (rows + cols)), the Glorot bound scaled for sigmoid units.
double init_bound(std::size_t rows, std::size_t cols);

/// Every learned matrix drawn i.i.d. uniform on [-init_bound, init_bound] from
/// splitmix64(seed) in parameters() order; biases b_h and b_y start at zero.
Seq2SeqModel init_model(const Hyperparams& hyper, corpus::Vocabulary src_vocab,
                        corpus::Vocabulary tgt_vocab, std::uint64_t seed);

/// h_t = sigmoid(W_hx x_t + W_hh h_{t-1} + b_h).
Vector encoder_step(const EncoderParams& params, std::span<const double> x_t,
                    std::span<const double> h_prev);

/// Runs the encoder from a zero state over `source_ids`. The ids are expected
/// to end in EOS, so up to max_length + 1 of them are accepted.
EncoderOutput encode_sequence(const Seq2SeqModel& model, std::span<const TokenId> source_ids);

/// softmax_i(v_a . tanh(W_q h_prev + W_k enc_i)).
Vector attention_weights(const DecoderParams& params, std::span<const double> dec_hidden_prev,
                         std::span<const Vector> encoder_outputs);

DecoderStep decoder_step(const DecoderParams& params, TokenId y_prev,
                         std::span<const double> dec_hidden_prev,
                         std::span<const Vector> encoder_outputs);

// Tape-level building blocks, shared by training, inference and gradient checks.
namespace taped {

using numkit::Tape;

Tape::Var encoder_step(Tape& tape, const EncoderParams& params, Tape::Var x_t, Tape::Var h_prev);

struct Encoded {
  std::vector<Tape::Var> outputs;
  std::vector<Tape::Var> keys;  // W_k h_i, computed once per sequence
  Tape::Var final_hidden;
};

Encoded encode(Tape& tape, const Seq2SeqModel& model, std::span<const TokenId> source_ids);

struct Step {
  Tape::Var probabilities;
  Tape::Var hidden;
  Tape::Var weights;
  Tape::Var logits;
};

Step decoder_step(Tape& tape, const DecoderParams& params, TokenId y_prev, Tape::Var h_prev,
                  const Encoded& encoded);

/// Mean NLL of `target_ids` (EOS included). `feed_gold(step)` decides per
/// step whether the next input is the gold token or the decoder's argmax.
Tape::Var sequence_loss(Tape& tape, const Seq2SeqModel& model,
                        std::span<const TokenId> source_ids,
                        std::span<const TokenId> target_ids,
                        const std::function<bool(std::size_t)>& feed_gold);

}  // namespace taped

struct TrainOptions {
  /// Iterations between checkpoints; 0 means max(1, iterations / 20).
  std::size_t checkpoint_interval = 0;
  std::function<void(const Checkpoint&, std::size_t total)> on_checkpoint;
};

/// Teacher-forced SGD over uniformly sampled pairs. Mutates `model`.
/// Throws CorpusError on an empty pair list, OverLengthError on pairs longer
/// than max_length, DivergenceError on a non-finite loss.
TrainReport train(Seq2SeqModel& model, std::span<const corpus::SentencePair> pairs,
                  const Hyperparams& hyper, const TrainOptions& options = {});

/// Greedy decoding from SOS until EOS or `max_out` steps. Throws
/// OverLengthError when the normalized sentence exceeds max_length tokens.
Translation translate(const Seq2SeqModel& model, std::string_view sentence, std::size_t max_out);

/// translate with max_out = max_length + 1.
Translation translate(const Seq2SeqModel& model, std::string_view sentence);

std::string model_to_json(const Seq2SeqModel& model);
Seq2SeqModel model_from_json(std::string_view text);
void save_model(const Seq2SeqModel& model, const std::filesystem::path& path);
Seq2SeqModel load_model(const std::filesystem::path& path);

enum class AttentionFormat { Csv, Pgm };

std::string attention_to_csv(const AttentionMatrix& matrix);
std::string attention_to_pgm(const AttentionMatrix& matrix);
void export_attention(const AttentionMatrix& matrix, const std::filesystem::path& path,
                      AttentionFormat format);

}  // namespace transagent::seq2seq
