#pragma once

#include <cstdint>
#include <vector>

#include "fairaes/ablation.hpp"
#include "fairaes/corpus.hpp"
#include "fairaes/encoder.hpp"
#include "fairaes/fairness_eval.hpp"
#include "fairaes/training.hpp"
#include "fairaes/triplet_miner.hpp"

namespace fairaes {

// Named per-stage streams expanded from one global seed.
struct StageSeeds {
  std::uint64_t split = 0;
  std::uint64_t mine = 0;
  std::uint64_t base = 0;
  std::uint64_t adapter = 0;
  std::uint64_t train = 0;

  static StageSeeds derive(std::uint64_t global_seed);
};

struct ExperimentConfig {
  std::uint64_t seed = 42;
  double split_ratio = 0.8;
  MinerConfig miner;   // seed is overwritten from the stage seeds
  ModelConfig model;   // base/adapter seeds are overwritten likewise
  TrainConfig train;   // margin is set per run; seed from the stage seeds
  EvalConfig eval;
  double min_lift = 0.05;
};

// Split, training/test subsets, surface z-score fitted on training text only,
// and the mined triplets.
struct PreparedData {
  SplitManifest split;
  Corpus train;
  Corpus test;
  ZScore zscore;
  MiningResult mined;
  ModelConfig model;
  TrainConfig train_config;
};

// Stage configs with their seeds filled in from the global seed.
MinerConfig seeded_miner(const ExperimentConfig& config);
ModelConfig seeded_model(const ExperimentConfig& config);
TrainConfig seeded_train(const ExperimentConfig& config);
ZScore fit_zscore(const Corpus& train);

PreparedData prepare(const Corpus& corpus, const ExperimentConfig& config);

struct TrainedModel {
  EmbeddingModel model;
  RegressionHead head;
  TrainTrace trace;       // baseline joint training, or the contrastive phase
  TrainTrace head_trace;  // contrastive runs only
  std::uint64_t base_checksum_before = 0;
  std::uint64_t adapter_checksum_before_head = 0;  // contrastive runs only
};

TrainedModel run_baseline(const PreparedData& data);
// Contrastive adapter training at margin `alpha`, then a head on the frozen result.
TrainedModel run_contrastive(const PreparedData& data, double alpha);

// One contrastive pipeline per alpha against a single shared baseline.
AblationTable ablate(std::span<const double> alphas, const PreparedData& data, const TrainedModel& baseline,
                     const EvalConfig& eval);

}  // namespace fairaes
