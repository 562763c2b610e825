#include "fairaes/experiment.hpp"

#include "fairaes/error.hpp"
#include "fairaes/random.hpp"

namespace fairaes {

StageSeeds StageSeeds::derive(std::uint64_t global_seed) {
  return {derive_seed(global_seed, "stage/split"), derive_seed(global_seed, "stage/mine"),
          derive_seed(global_seed, "stage/encoder-base"), derive_seed(global_seed, "stage/encoder-adapter"),
          derive_seed(global_seed, "stage/train")};
}

MinerConfig seeded_miner(const ExperimentConfig& config) {
  MinerConfig miner = config.miner;
  miner.seed = StageSeeds::derive(config.seed).mine;
  return miner;
}

ModelConfig seeded_model(const ExperimentConfig& config) {
  const auto seeds = StageSeeds::derive(config.seed);
  ModelConfig model = config.model;
  model.base_seed = seeds.base;
  model.adapter_seed = seeds.adapter;
  return model;
}

TrainConfig seeded_train(const ExperimentConfig& config) {
  TrainConfig train = config.train;
  train.seed = StageSeeds::derive(config.seed).train;
  return train;
}

ZScore fit_zscore(const Corpus& train) {
  std::vector<std::string> texts;
  texts.reserve(train.size());
  for (const auto& e : train) texts.push_back(e.text);
  return ZScore::fit(texts);
}

PreparedData prepare(const Corpus& corpus, const ExperimentConfig& config) {
  PreparedData data{stratified_split(corpus, config.split_ratio, StageSeeds::derive(config.seed).split), {}, {}, {},
                    {}, seeded_model(config), seeded_train(config)};
  data.train = select(corpus, data.split.train_ids);
  data.test = select(corpus, data.split.test_ids);
  data.zscore = fit_zscore(data.train);
  data.mined = mine_triplets(data.train, seeded_miner(config));
  return data;
}

TrainedModel run_baseline(const PreparedData& data) {
  TrainedModel out{EmbeddingModel(data.model, data.zscore), RegressionHead::zeros(data.model.dim), {}, {}, 0, 0};
  out.base_checksum_before = out.model.base_checksum();
  out.trace = train_baseline(out.model, out.head, data.train, data.train_config);
  return out;
}

TrainedModel run_contrastive(const PreparedData& data, double alpha) {
  TrainConfig config = data.train_config;
  config.margin = alpha;
  TrainedModel out{EmbeddingModel(data.model, data.zscore), RegressionHead::zeros(data.model.dim), {}, {}, 0, 0};
  out.base_checksum_before = out.model.base_checksum();
  out.trace = train_contrastive(out.model, data.mined.triplets, data.train, config);
  out.adapter_checksum_before_head = out.model.adapter_checksum();
  auto fit = fit_head(out.model, data.train, config);
  out.head = std::move(fit.head);
  out.head_trace = std::move(fit.trace);
  return out;
}

AblationTable ablate(std::span<const double> alphas, const PreparedData& data, const TrainedModel& baseline,
                     const EvalConfig& eval) {
  if (alphas.empty()) throw Error(ErrorKind::Config, "ablation needs at least one alpha");
  AblationTable table;
  const auto base_report = evaluate(predict_all(baseline.model, baseline.head, data.test), eval);
  table.baseline = {"Baseline", std::nullopt, base_report, std::nullopt};
  for (double alpha : alphas) {
    const auto run = run_contrastive(data, alpha);
    table.rows.push_back(compare_to_baseline(contrastive_label(alpha), alpha,
                                             evaluate(predict_all(run.model, run.head, data.test), eval), base_report));
  }
  return table;
}

}  // namespace fairaes
