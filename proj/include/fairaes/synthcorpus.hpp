#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairaes/corpus.hpp"

namespace fairaes {

// Token-soup essays with a latent quality q. Quality tokens (long words) get
// more frequent as q rises, and weak writers produce run-on sentences. ESL
// essays also carry marker tokens and sentences stretched by a per-essay
// factor drawn independently of q, and their q distribution is skewed down.
// In the pooled data, long sentences therefore predict low scores, and that
// rule misfires on ESL writers.
struct SynthConfig {
  std::size_t n_native = 2000;
  std::size_t n_esl = 600;
  std::size_t vocab_size = 400;
  std::size_t quality_tokens = 40;
  std::size_t marker_tokens = 20;
  double esl_quality_shift = -0.15;
  double marker_sentence_stretch = 1.6;
  double noise_sd = 0.05;
  std::uint64_t seed = 42;

  double marker_rate = 0.08;       // per-token marker probability in ESL text
  double quality_rate_low = 0.02;  // quality-token probability at q = 0
  double quality_rate_high = 0.22; // ... and at q = 1
  double comma_rate = 0.08;        // per-token chance of a trailing comma
  int sentences_min = 6;
  int sentences_max = 11;
  int sentence_length_min = 5;
  int sentence_length_max = 12;
  double runon_length = 6.0;       // extra tokens per sentence at q = 0, fading to none at q = 1

  void validate() const;
};

struct SynthEssayTruth {
  std::string id;
  Group group = Group::Native;
  double quality = 0.0;  // latent q
  double human = 0.0;
  std::size_t n_tokens = 0;
  std::size_t n_marker_tokens = 0;
  std::size_t n_quality_tokens = 0;
};

struct SynthGroupSummary {
  std::size_t count = 0;
  double mean_quality = 0.0;
  double mean_human = 0.0;
  double marker_rate = 0.0;   // marker tokens / tokens
  double quality_rate = 0.0;  // quality tokens / tokens
};

struct SynthManifest {
  SynthConfig config;
  std::vector<SynthEssayTruth> essays;
  SynthGroupSummary native;
  SynthGroupSummary esl;
};

struct SynthCorpus {
  Corpus corpus;
  SynthManifest manifest;
};

// Vocabulary words in index order: quality tokens, then marker tokens, then filler.
std::vector<std::string> synth_vocabulary(const SynthConfig& config);

// Essay i draws everything from the stream (seed, i); natives come first.
SynthCorpus generate(const SynthConfig& config);

}  // namespace fairaes
