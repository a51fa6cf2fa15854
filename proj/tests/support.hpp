#pragma once

// Generators and independent oracles shared by the test suites and the
// acceptance binary. Nothing here calls into the code under test except for
// reading model parameters.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "transagent/corpus.hpp"
#include "transagent/numkit.hpp"
#include "transagent/seq2seq.hpp"

namespace support {

using transagent::numkit::Matrix;
using transagent::numkit::SplitMix64;
using Vec = std::vector<double>;
using Tokens = std::vector<std::string>;

inline std::string utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return out;
}

// Mixed-script text: ASCII, whitespace, sentence punctuation, Latin-1 and
// Latin Extended-A letters, bare combining marks, Greek, kana, CJK, emoji.
inline std::string random_unicode(SplitMix64& rng, std::size_t max_len) {
  const std::size_t n = rng.below(max_len + 1);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    char32_t cp = 0;
    switch (rng.below(10)) {
      case 0: cp = U' ' + static_cast<char32_t>(rng.below(95)); break;
      case 1: cp = U"abcXYZ"[rng.below(6)]; break;
      case 2: cp = U" \t\n\r\f\v"[rng.below(6)]; break;
      case 3: cp = U".!?,;'-"[rng.below(7)]; break;
      case 4: cp = 0x00C0 + static_cast<char32_t>(rng.below(0x180 - 0xC0)); break;
      case 5: cp = 0x0300 + static_cast<char32_t>(rng.below(0x70)); break;
      case 6: cp = 0x0391 + static_cast<char32_t>(rng.below(0x30)); break;
      case 7: cp = 0x3041 + static_cast<char32_t>(rng.below(0xBE)); break;
      case 8: cp = 0x4E00 + static_cast<char32_t>(rng.below(0x5000)); break;
      default: cp = 0x1F600 + static_cast<char32_t>(rng.below(0x40)); break;
    }
    s += utf8(cp);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Brute-force BLEU: n-grams enumerated by position, multiplicities found by
// linear rescans, no hashing or ordered containers.

struct BruteBleu {
  std::vector<std::size_t> matches;
  std::vector<std::size_t> totals;
  std::vector<double> precision;
  std::vector<double> score;
  double bp = 0.0;
  std::size_t c = 0;
  std::size_t r = 0;
};

inline std::size_t occurrences(const Tokens& s, const Tokens& gram) {
  std::size_t k = 0;
  const std::size_t n = gram.size();
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    if (std::equal(gram.begin(), gram.end(), s.begin() + static_cast<std::ptrdiff_t>(i))) ++k;
  }
  return k;
}

inline BruteBleu brute_bleu(const std::vector<Tokens>& hyps, const std::vector<Tokens>& refs,
                            std::size_t max_n) {
  BruteBleu out;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    out.c += hyps[s].size();
    out.r += refs[s].size();
  }
  if (out.c == 0) {
    out.bp = 0.0;
  } else if (out.c > out.r) {
    out.bp = 1.0;
  } else {
    out.bp = std::exp(1.0 - static_cast<double>(out.r) / static_cast<double>(out.c));
  }

  for (std::size_t n = 1; n <= max_n; ++n) {
    std::size_t match = 0;
    std::size_t total = 0;
    for (std::size_t s = 0; s < hyps.size(); ++s) {
      const Tokens& h = hyps[s];
      std::vector<Tokens> seen;
      for (std::size_t i = 0; i + n <= h.size(); ++i) {
        ++total;
        Tokens gram(h.begin() + static_cast<std::ptrdiff_t>(i),
                    h.begin() + static_cast<std::ptrdiff_t>(i + n));
        if (std::find(seen.begin(), seen.end(), gram) != seen.end()) continue;
        seen.push_back(gram);
        match += std::min(occurrences(h, gram), occurrences(refs[s], gram));
      }
    }
    out.matches.push_back(match);
    out.totals.push_back(total);
    out.precision.push_back(total == 0 ? 0.0
                                       : static_cast<double>(match) / static_cast<double>(total));
  }

  for (std::size_t n = 1; n <= max_n; ++n) {
    bool zero = false;
    double logs = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (out.precision[k] == 0.0) zero = true;
      if (!zero) logs += std::log(out.precision[k]);
    }
    out.score.push_back(zero ? 0.0 : out.bp * std::exp(logs / static_cast<double>(n)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Straight-line seq2seq forward pass written from the model equations.

inline double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec mul(const Matrix& m, const Vec& v) {
  Vec out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out[r] += m(r, c) * v[c];
  }
  return out;
}

inline Vec embed(const Matrix& table, std::size_t id) {
  Vec out(table.cols());
  for (std::size_t c = 0; c < table.cols(); ++c) out[c] = table(id, c);
  return out;
}

inline Vec cell(const Matrix& W_hx, const Matrix& W_hh, const Matrix& b, const Vec& x,
                const Vec& h) {
  const Vec a = mul(W_hx, x);
  const Vec r = mul(W_hh, h);
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = sigm(a[i] + r[i] + b(i, 0));
  return out;
}

inline Vec softmax(const Vec& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  Vec e(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) sum += (e[i] = std::exp(z[i] - mx));
  for (double& x : e) x /= sum;
  return e;
}

inline std::vector<Vec> ref_encode(const transagent::seq2seq::Seq2SeqModel& m,
                                   const std::vector<std::size_t>& ids) {
  std::vector<Vec> hs;
  Vec h(m.hyper.hidden_size, 0.0);
  for (std::size_t id : ids) {
    h = cell(m.encoder.W_hx, m.encoder.W_hh, m.encoder.b_h, embed(m.encoder.embedding, id), h);
    hs.push_back(h);
  }
  return hs;
}

struct RefStep {
  Vec weights;
  Vec hidden;
  Vec logits;
  Vec probs;
};

inline RefStep ref_decoder_step(const transagent::seq2seq::DecoderParams& d, std::size_t y_prev,
                                const Vec& h_prev, const std::vector<Vec>& enc) {
  RefStep out;
  const Vec q = mul(d.W_q, h_prev);
  Vec scores;
  for (const Vec& e : enc) {
    const Vec k = mul(d.W_k, e);
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += d.v_a(i, 0) * std::tanh(q[i] + k[i]);
    scores.push_back(s);
  }
  out.weights = softmax(scores);

  Vec ctx(h_prev.size(), 0.0);
  for (std::size_t t = 0; t < enc.size(); ++t) {
    for (std::size_t i = 0; i < ctx.size(); ++i) ctx[i] += out.weights[t] * enc[t][i];
  }
  Vec joined = embed(d.embedding, y_prev);
  joined.insert(joined.end(), ctx.begin(), ctx.end());
  Vec u = mul(d.W_c, joined);
  for (double& x : u) x = std::tanh(x);

  out.hidden = cell(d.W_hx, d.W_hh, d.b_h, u, h_prev);
  out.logits = mul(d.W_yt, out.hidden);
  for (std::size_t i = 0; i < out.logits.size(); ++i) out.logits[i] += d.b_y(i, 0);
  out.probs = softmax(out.logits);
  return out;
}

// Mean NLL with the gold token always fed back.
inline double ref_teacher_forced_loss(const transagent::seq2seq::Seq2SeqModel& m,
                                      const std::vector<std::size_t>& src,
                                      const std::vector<std::size_t>& tgt) {
  const std::vector<Vec> enc = ref_encode(m, src);
  Vec h = enc.back();
  std::size_t y = transagent::corpus::kSosId;
  double total = 0.0;
  for (std::size_t g : tgt) {
    const RefStep s = ref_decoder_step(m.decoder, y, h, enc);
    total += -std::log(s.probs[g]);
    h = s.hidden;
    y = g;
  }
  return total / static_cast<double>(tgt.size());
}

struct RefGreedy {
  std::vector<std::size_t> ids;  // emitted, EOS included when reached
  std::vector<Vec> weights;
};

inline RefGreedy ref_greedy(const transagent::seq2seq::Seq2SeqModel& m,
                            const std::vector<std::size_t>& src, std::size_t max_out) {
  const std::vector<Vec> enc = ref_encode(m, src);
  RefGreedy out;
  Vec h = enc.back();
  std::size_t y = transagent::corpus::kSosId;
  for (std::size_t step = 0; step < max_out; ++step) {
    const RefStep s = ref_decoder_step(m.decoder, y, h, enc);
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.probs.size(); ++i) {
      if (s.probs[i] > s.probs[best]) best = i;
    }
    out.ids.push_back(best);
    out.weights.push_back(s.weights);
    if (best == transagent::corpus::kEosId) break;
    y = best;
    h = s.hidden;
  }
  return out;
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return a.size() == b.size() ? d : INFINITY;
}

// ---------------------------------------------------------------------------
// Small fixtures.

inline const char* kToyCorpus =
    "Go.\tVa !\n"
    "Run!\tCours !\n"
    "Wow!\tÇa alors !\n"
    "Fire!\tAu feu !\n"
    "Help!\tÀ l'aide !\n"
    "Stop!\tArrête-toi !\n"
    "Wait!\tAttends !\n"
    "Hello!\tSalut !\n"
    "I see.\tJe comprends.\n"
    "Thanks.\tMerci !\n";

// Vocabularies with `n` ordinary words named <prefix>a, <prefix>b, ...
// Letters only, so the words survive normalize_text.
inline std::string synthetic_word(const std::string& prefix, std::size_t i) {
  std::string tail;
  do {
    tail.insert(tail.begin(), static_cast<char>('a' + i % 26));
    i /= 26;
  } while (i > 0);
  return prefix + tail;
}

inline transagent::corpus::Vocabulary synthetic_vocab(const std::string& prefix, std::size_t n) {
  transagent::corpus::Vocabulary v;
  for (std::size_t i = 0; i < n; ++i) v.add(synthetic_word(prefix, i));
  return v;
}

}  // namespace support
