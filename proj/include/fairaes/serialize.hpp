#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "fairaes/ablation.hpp"
#include "fairaes/corpus.hpp"
#include "fairaes/encoder.hpp"
#include "fairaes/fairness_eval.hpp"
#include "fairaes/linguistics.hpp"
#include "fairaes/synthcorpus.hpp"
#include "fairaes/training.hpp"
#include "fairaes/triplet_miner.hpp"

namespace fairaes {

using Json = nlohmann::json;

inline constexpr int kCheckpointFormatVersion = 1;

std::string hex64(std::uint64_t value);

Json to_json(const SplitManifest& split);
SplitManifest split_from_json(const Json& j);

Json to_json(const Triplet& t);
Triplet triplet_from_json(const Json& j);
void write_triplets_jsonl(std::ostream& out, std::span<const Triplet> triplets);
std::vector<Triplet> read_triplets_jsonl(std::istream& in);
Json mining_summary(const MiningResult& result, const MinerConfig& config);

Json to_json(const MinerConfig& config);
Json to_json(const TrainConfig& config);
Json to_json(const FeatureConfig& config);
Json to_json(const SynthConfig& config);

// Checkpoint: feature config, W0 seed and checksum, zscore, A and B. W0 is
// regenerated on load and must reproduce the stored checksum.
Json to_json(const EmbeddingModel& model);
EmbeddingModel model_from_json(const Json& j);

Json to_json(const RegressionHead& head);
RegressionHead head_from_json(const Json& j);

// Wall time is left out so traces stay byte-stable across runs.
Json to_json(const TrainTrace& trace);

Json to_json(const ScoredPrediction& p);
ScoredPrediction prediction_from_json(const Json& j);
void write_predictions_jsonl(std::ostream& out, std::span<const ScoredPrediction> predictions);
std::vector<ScoredPrediction> read_predictions_jsonl(std::istream& in);

Json to_json(const FairnessReport& report);
FairnessReport report_from_json(const Json& j);

Json to_json(const ModelRow& row);
Json to_json(const AblationTable& table);

Json to_json(const TextStats& stats);
Json to_json(const CorrelationTable& table);
Json to_json(const LiftReport& report);

Json to_json(const SynthManifest& manifest);

// Stable text form: two-space indent, trailing newline.
std::string dump(const Json& j);

// Writes through a sibling temporary and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Reads a whole file and records the path in the process-wide access log.
std::string read_file(const std::filesystem::path& path);
std::vector<std::filesystem::path> access_log();
void clear_access_log();

}  // namespace fairaes
