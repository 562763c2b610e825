#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fairaes/corpus.hpp"
#include "fairaes/experiment.hpp"
#include "fairaes/synthcorpus.hpp"

namespace fairaes {

struct InputSpec {
  std::filesystem::path path;
  IngestOptions options;
};

struct PipelineConfig {
  std::filesystem::path workdir = "work";
  std::vector<InputSpec> inputs;
  SynthConfig synth;
  ExperimentConfig experiment;
  std::vector<double> alphas{1.0, 2.0};

  void validate() const;
};

// YAML; relative paths resolve against `base_dir`. Unknown keys are config errors.
PipelineConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

// Hash of the data-lineage settings (seed, inputs, synth, split, miner,
// feature config). Training hyperparameters are excluded so models trained
// with different learning rates or margins stay comparable.
std::string config_hash(const PipelineConfig& config);

struct StageOptions {
  std::string name;                // model directory under models/
  std::vector<std::string> models; // evaluate / analyze inputs
  bool force = false;              // accept artifacts from another config hash
};

// File-per-stage runner. Each stage reads its upstream artifacts from the work
// directory, writes its own, and records runs/<stage>.json.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  const PipelineConfig& config() const noexcept { return config_; }
  const std::string& hash() const noexcept { return hash_; }
  std::filesystem::path path(const std::string& relative) const { return config_.workdir / relative; }

  void synth();
  void ingest();
  void split(const StageOptions& options);
  void mine(const StageOptions& options);
  void train_baseline(const StageOptions& options);
  void train_contrastive(const StageOptions& options, double alpha);
  void fit_head(const StageOptions& options);
  void evaluate(const StageOptions& options);
  void ablate(const StageOptions& options);
  void analyze(const StageOptions& options);

 private:
  PipelineConfig config_;
  std::string hash_;
};

}  // namespace fairaes
