#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairaes/corpus.hpp"
#include "fairaes/fairness_eval.hpp"

namespace fairaes {

inline constexpr std::uint32_t kAbbreviationListVersion = 1;
// Words that end in "." without ending a sentence (compared case-insensitively).
inline constexpr std::array<std::string_view, 6> kAbbreviations = {"mr.", "mrs.", "dr.", "etc.", "e.g.", "i.e."};

struct TextStats {
  double n_tokens = 0.0;
  double n_sentences = 0.0;
  double mean_sentence_length = 0.0;
  double sentence_length_variance = 0.0;  // population variance
  double comma_rate = 0.0;                // commas per sentence
  double long_word_rate = 0.0;            // tokens of >= 7 characters
  double type_token_ratio = 0.0;
};

inline constexpr std::array<std::string_view, 7> kTextStatNames = {
    "n_tokens",       "n_sentences",    "mean_sentence_length", "sentence_length_variance",
    "comma_rate",     "long_word_rate", "type_token_ratio"};

std::array<double, 7> stat_values(const TextStats& stats);

// Sentences end at a whitespace-delimited word whose last character (ignoring
// closing quotes and brackets) is '.', '!' or '?', unless the word is a
// guarded abbreviation. Tokens are whitespace words with punctuation stripped.
TextStats sentence_stats(std::string_view text);

// Sample Pearson correlation; throws UndefinedCorrelation on zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct FeatureCorrelation {
  std::string feature;
  std::optional<double> with_prediction;
  std::optional<double> with_residual;
  std::string error;  // set when a correlation is undefined
};

struct CorrelationTable {
  Group group = Group::ESL;
  std::size_t n_essays = 0;
  std::vector<FeatureCorrelation> rows;

  const FeatureCorrelation& row(std::string_view feature) const;
};

// Correlates every TextStats feature with predictions and residuals within one
// group. Undefined correlations are recorded per feature, not thrown.
CorrelationTable complexity_correlation(std::span<const ScoredPrediction> predictions, const Corpus& corpus,
                                        Group group);

struct LiftReport {
  double min_lift = 0.05;
  std::size_t n_esl = 0;
  std::vector<std::string> lifted_ids;
  std::vector<std::string> complement_ids;
  std::optional<TextStats> lifted_mean;
  std::optional<TextStats> complement_mean;
};

// ESL essays whose contrastive prediction exceeds the baseline one by at least
// `min_lift`, with mean text statistics of the subset and its complement.
LiftReport lift_analysis(std::span<const ScoredPrediction> baseline, std::span<const ScoredPrediction> contrastive,
                         const Corpus& corpus, double min_lift = 0.05);

}  // namespace fairaes
