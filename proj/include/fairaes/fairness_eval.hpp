#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairaes/corpus.hpp"
#include "fairaes/encoder.hpp"

namespace fairaes {

struct EvalConfig {
  int n_bins = 6;
  double hiprof_threshold = 0.8;  // strict: human > threshold

  void validate() const;
};

struct ScoredPrediction {
  std::string essay_id;
  double human = 0.0;
  double predicted = 0.0;
  Group group = Group::Native;

  // Clamps the raw head output into [0, 1].
  static ScoredPrediction make(std::string essay_id, double human, double raw_prediction, Group group);
  double residual() const { return predicted - human; }
};

// Throws Compatibility when the head does not match the model's embedding size.
std::vector<ScoredPrediction> predict_all(const EmbeddingModel& model, const RegressionHead& head,
                                          const Corpus& essays);

// Equal-width bin over [0, 1]: min(floor(s * n_bins), n_bins - 1).
int score_bin(double score, int n_bins);

// Quadratic weighted kappa between binned human and predicted scores.
double qwk(std::span<const ScoredPrediction> predictions, int n_bins);

struct StratumResidual {
  std::size_t count = 0;
  std::optional<double> mean_residual;  // empty stratum -> nullopt
};

struct FairnessReport {
  std::optional<double> qwk;
  int n_bins = 6;
  double hiprof_threshold = 0.8;
  std::size_t n_predictions = 0;
  StratumResidual overall;
  StratumResidual native;
  StratumResidual esl;
  StratumResidual hiprof_native;
  StratumResidual hiprof_esl;
  // |hiprof_native - hiprof_esl|; nullopt when either hi-prof stratum is empty.
  std::optional<double> hiprof_gap;
};

// Residual = predicted - human, averaged per group over all essays and over
// the hi-prof stratum (human > threshold).
FairnessReport residual_report(std::span<const ScoredPrediction> predictions, double hiprof_threshold);

// residual_report plus QWK. A degenerate QWK is left empty rather than thrown.
FairnessReport evaluate(std::span<const ScoredPrediction> predictions, const EvalConfig& config);

// 100 * (baseline - mitigated) / baseline.
double gap_reduction(double baseline_gap, double mitigated_gap);

}  // namespace fairaes
