#include "fairaes/synthcorpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "fairaes/error.hpp"
#include "fairaes/random.hpp"

namespace fairaes {

void SynthConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, "synth: " + msg); };
  if (n_native < 10 || n_esl < 10) fail("n_native and n_esl must be >= 10");
  if (!(noise_sd >= 0.0 && noise_sd <= 0.2)) fail("noise_sd must lie in [0, 0.2]");
  if (!(esl_quality_shift <= 0.0 && esl_quality_shift > -0.5)) fail("esl_quality_shift must lie in (-0.5, 0]");
  if (!(marker_sentence_stretch >= 1.0)) fail("marker_sentence_stretch must be >= 1");
  if (quality_tokens == 0) fail("quality_tokens must be >= 1");
  if (quality_tokens + marker_tokens >= vocab_size) fail("vocab_size must exceed quality_tokens + marker_tokens");
  if (!(marker_rate >= 0.0 && marker_rate < 1.0)) fail("marker_rate must lie in [0, 1)");
  if (!(quality_rate_low >= 0.0 && quality_rate_low <= quality_rate_high && quality_rate_high + marker_rate < 1.0)) {
    fail("quality rates must satisfy 0 <= low <= high and high + marker_rate < 1");
  }
  if (!(comma_rate >= 0.0 && comma_rate < 1.0)) fail("comma_rate must lie in [0, 1)");
  if (sentences_min < 1 || sentences_max < sentences_min) fail("sentence count range is empty");
  if (!(runon_length >= 0.0)) fail("runon_length must be >= 0");
  if (sentence_length_min < 1 || sentence_length_max < sentence_length_min) fail("sentence length range is empty");
}

std::vector<std::string> synth_vocabulary(const SynthConfig& config) {
  static constexpr std::string_view kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p",
                                                 "r", "s", "t", "v", "z", "br", "tr", "st", "pl"};
  static constexpr std::string_view kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
  Rng rng(derive_seed(config.seed, "synth/vocabulary"));
  std::vector<std::string> words;
  std::unordered_set<std::string> seen;
  while (words.size() < config.vocab_size) {
    // Quality words are long (3-4 syllables, >= 7 characters); markers and
    // filler have 1-2 syllables and are mostly short.
    const bool quality = words.size() < config.quality_tokens;
    const auto syllables = quality ? 3 + rng.below(2) : 1 + rng.below(2);
    std::string w;
    for (std::uint64_t s = 0; s < syllables; ++s) {
      w += kOnsets[rng.below(std::size(kOnsets))];
      w += kVowels[rng.below(std::size(kVowels))];
    }
    if (quality && w.size() < 7) continue;
    if (seen.insert(w).second) words.push_back(std::move(w));
  }
  return words;
}

SynthCorpus generate(const SynthConfig& config) {
  config.validate();
  const auto vocab = synth_vocabulary(config);
  const std::size_t n_quality = config.quality_tokens;
  const std::size_t n_marker = config.marker_tokens;
  const std::size_t n_filler = config.vocab_size - n_quality - n_marker;

  // u^k with E[u^k] = 1 / (k + 1) = 0.5 + shift: the ESL mean moves by the
  // shift while the support stays [0, 1], so high-quality ESL essays exist.
  const double esl_exponent = 1.0 / (0.5 + config.esl_quality_shift) - 1.0;

  SynthCorpus out;
  out.manifest.config = config;
  const std::size_t total = config.n_native + config.n_esl;
  for (std::size_t i = 0; i < total; ++i) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(i)));
    const Group group = i < config.n_native ? Group::Native : Group::ESL;
    const bool esl = group == Group::ESL;
    double q = rng.uniform();
    if (esl) q = std::clamp(std::pow(q, esl_exponent), 0.0, 1.0);
    const double p_quality = config.quality_rate_low + (config.quality_rate_high - config.quality_rate_low) * q;
    const double p_marker = esl && n_marker > 0 ? config.marker_rate : 0.0;
    // Each ESL essay draws its own stretch in [1, 2*stretch - 1], independent of q.
    const double stretch = esl ? 1.0 + (config.marker_sentence_stretch - 1.0) * 2.0 * rng.uniform() : 1.0;

    SynthEssayTruth truth;
    char id[32];
    std::snprintf(id, sizeof id, "syn-%05zu", i);
    truth.id = id;
    truth.group = group;
    truth.quality = q;

    std::string text;
    const auto n_sentences = config.sentences_min +
        static_cast<int>(rng.below(static_cast<std::uint64_t>(config.sentences_max - config.sentences_min + 1)));
    for (int s = 0; s < n_sentences; ++s) {
      const auto base_len = config.sentence_length_min +
          static_cast<int>(rng.below(static_cast<std::uint64_t>(config.sentence_length_max - config.sentence_length_min + 1)));
      const double runon = config.runon_length * (1.0 - q);
      const auto len = std::max(1, static_cast<int>(std::lround((base_len + runon) * stretch)));
      for (int t = 0; t < len; ++t) {
        const double u = rng.uniform();
        std::string word;
        if (u < p_marker) {
          word = vocab[n_quality + rng.below(n_marker)];
          ++truth.n_marker_tokens;
        } else if (u < p_marker + p_quality) {
          word = vocab[rng.below(n_quality)];
          ++truth.n_quality_tokens;
        } else {
          word = vocab[n_quality + n_marker + rng.below(n_filler)];
        }
        if (t == 0) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
        if (!text.empty()) text += ' ';
        text += word;
        ++truth.n_tokens;
        if (t + 1 < len && rng.bernoulli(config.comma_rate)) text += ',';
      }
      text += '.';
    }
    truth.human = std::clamp(q + (config.noise_sd > 0.0 ? rng.normal(0.0, config.noise_sd) : 0.0), 0.0, 1.0);

    Essay e;
    e.id = truth.id;
    e.text = std::move(text);
    e.raw_score = truth.human;
    e.score_norm = truth.human;
    e.group = group;
    e.source = Source::Synthetic;
    out.corpus.push_back(std::move(e));
    out.manifest.essays.push_back(std::move(truth));
  }

  for (Group g : kGroups) {
    SynthGroupSummary sum;
    double tokens = 0.0, markers = 0.0, quality = 0.0;
    for (const auto& t : out.manifest.essays) {
      if (t.group != g) continue;
      ++sum.count;
      sum.mean_quality += t.quality;
      sum.mean_human += t.human;
      tokens += static_cast<double>(t.n_tokens);
      markers += static_cast<double>(t.n_marker_tokens);
      quality += static_cast<double>(t.n_quality_tokens);
    }
    sum.mean_quality /= static_cast<double>(sum.count);
    sum.mean_human /= static_cast<double>(sum.count);
    sum.marker_rate = markers / tokens;
    sum.quality_rate = quality / tokens;
    (g == Group::Native ? out.manifest.native : out.manifest.esl) = sum;
  }
  return out;
}

}  // namespace fairaes
