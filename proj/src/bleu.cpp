#include "transagent/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "transagent/error.hpp"

namespace transagent::bleu {

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> ngram_counts(const Sentence& s, std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  if (s.size() < n) return counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    ++counts[Ngram(s.begin() + static_cast<std::ptrdiff_t>(i),
                   s.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

void require_parallel(std::size_t hyps, std::size_t refs) {
  if (hyps != refs) {
    throw Error("BLEU needs one reference per hypothesis: got " + std::to_string(hyps) +
                " hypotheses and " + std::to_string(refs) + " references");
  }
}

}  // namespace

NgramCounts modified_precision(std::span<const Sentence> hypotheses,
                               std::span<const Sentence> references, std::size_t n) {
  require_parallel(hypotheses.size(), references.size());
  if (n == 0) throw DomainError("n-gram order must be at least 1");

  NgramCounts total;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto hyp = ngram_counts(hypotheses[s], n);
    const auto ref = ngram_counts(references[s], n);
    for (const auto& [gram, count] : hyp) {
      total.candidate_total += count;
      if (auto it = ref.find(gram); it != ref.end()) {
        total.clipped_matches += std::min(count, it->second);
      }
    }
  }
  return total;
}

double brevity_penalty(std::size_t candidate_length, std::size_t reference_length) {
  if (candidate_length == 0) return 0.0;
  if (candidate_length > reference_length) return 1.0;
  return std::exp(1.0 - static_cast<double>(reference_length) /
                            static_cast<double>(candidate_length));
}

BleuReport bleu(std::span<const Sentence> hypotheses, std::span<const Sentence> references,
                std::size_t max_n) {
  require_parallel(hypotheses.size(), references.size());
  if (hypotheses.empty()) throw Error("BLEU over an empty corpus");
  if (max_n == 0) throw DomainError("max_n must be at least 1");

  BleuReport report;
  report.max_n = max_n;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    report.candidate_length += hypotheses[s].size();
    report.reference_length += references[s].size();
  }
  report.brevity_penalty = brevity_penalty(report.candidate_length, report.reference_length);

  double log_sum = 0.0;
  bool zeroed = false;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const NgramCounts c = modified_precision(hypotheses, references, n);
    report.counts.push_back(c);
    const double p = c.candidate_total == 0
                         ? 0.0
                         : static_cast<double>(c.clipped_matches) /
                               static_cast<double>(c.candidate_total);
    report.precision.push_back(p);
    if (p == 0.0) zeroed = true;
    if (!zeroed) log_sum += std::log(p);
    report.score.push_back(zeroed ? 0.0
                                  : report.brevity_penalty *
                                        std::exp(log_sum / static_cast<double>(n)));
  }
  return report;
}

}  // namespace transagent::bleu
