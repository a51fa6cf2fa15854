#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace transagent::bleu {

using Sentence = std::vector<std::string>;

struct NgramCounts {
  std::size_t clipped_matches = 0;
  std::size_t candidate_total = 0;

  bool operator==(const NgramCounts&) const = default;
};

/// Corpus-level BLEU, single reference per hypothesis, no smoothing.
struct BleuReport {
  std::size_t max_n = 0;
  std::vector<NgramCounts> counts;  // index n-1
  std::vector<double> precision;    // p_n; 0 when the denominator is 0
  std::vector<double> score;        // BLEU-n
  double brevity_penalty = 0.0;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;

  bool operator==(const BleuReport&) const = default;
};

/// Clipped n-gram matches and candidate n-gram count summed over the corpus.
/// Throws transagent::Error on mismatched list lengths or n == 0.
NgramCounts modified_precision(std::span<const Sentence> hypotheses,
                               std::span<const Sentence> references, std::size_t n);

/// 1 if c > r, exp(1 - r/c) otherwise, 0 when c == 0.
double brevity_penalty(std::size_t candidate_length, std::size_t reference_length);

BleuReport bleu(std::span<const Sentence> hypotheses, std::span<const Sentence> references,
                std::size_t max_n = 4);

}  // namespace transagent::bleu
