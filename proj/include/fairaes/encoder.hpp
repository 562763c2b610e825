#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace fairaes {

using FeatureVector = Eigen::VectorXd;
using Embedding = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::size_t kSurfaceStatCount = 5;
inline constexpr std::uint32_t kFeatureHashVersion = 1;

struct FeatureConfig {
  std::size_t n_buckets = 4096;
  // Bigrams are only hashed for texts with at least this many tokens.
  std::size_t min_tokens_for_bigrams = 3;
  std::uint32_t hash_version = kFeatureHashVersion;

  // Hashed n-gram block followed by the surface-statistic block.
  std::size_t dimension() const { return n_buckets + kSurfaceStatCount; }

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

// Lowercased word tokens (alphanumerics, apostrophes, non-ASCII bytes) with
// every other non-space character emitted as its own one-character token.
std::vector<std::string> tokenize(std::string_view text);

// Surface statistics over encoder tokens. Sentences end at ".", "!" or "?"
// tokens; a trailing unterminated run counts as a sentence.
struct SurfaceStats {
  double token_count = 0.0;
  double mean_sentence_length = 0.0;
  double sentence_length_variance = 0.0;
  double comma_rate = 0.0;
  double long_word_rate = 0.0;

  std::array<double, kSurfaceStatCount> values() const {
    return {token_count, mean_sentence_length, sentence_length_variance, comma_rate, long_word_rate};
  }
};

SurfaceStats surface_stats(std::span<const std::string> tokens);
SurfaceStats surface_stats(std::string_view text);

// Standardization constants for the surface block, fitted on training text.
struct ZScore {
  std::array<double, kSurfaceStatCount> mean{};
  std::array<double, kSurfaceStatCount> scale{1.0, 1.0, 1.0, 1.0, 1.0};

  static ZScore identity() { return {}; }
  static ZScore fit(std::span<const std::string> texts);

  friend bool operator==(const ZScore&, const ZScore&) = default;
};

// Bucket index of every emitted n-gram: all unigrams, then all bigrams.
std::vector<std::size_t> ngram_buckets(std::string_view text, const FeatureConfig& config);

FeatureVector extract_features(std::string_view text, const FeatureConfig& config,
                               const ZScore& zscore = ZScore::identity());

// Columns are essays.
Eigen::MatrixXd extract_features(std::span<const std::string> texts, const FeatureConfig& config,
                                 const ZScore& zscore);

struct ModelConfig {
  FeatureConfig features;
  std::size_t dim = 64;
  std::size_t rank = 16;
  std::uint64_t base_seed = 0;
  std::uint64_t adapter_seed = 1;
  double adapter_init_scale = 0.01;
};

// h = W0 x + B (A x). W0 is a frozen seeded Gaussian projection regenerated
// from its seed; A (rank x F) and B (dim x rank) form the trainable adapter,
// stored contiguously as A then B, both row-major.
class EmbeddingModel {
 public:
  EmbeddingModel(const ModelConfig& config, const ZScore& zscore);
  // Hand-built model (W0 is d x F, A is r x F, B is d x r). Without `features`
  // it only embeds raw feature vectors; with them F must equal their dimension.
  // Never checkpointable by seed.
  static EmbeddingModel from_matrices(const Eigen::MatrixXd& base, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                      std::optional<FeatureConfig> features = std::nullopt,
                                      const ZScore& zscore = ZScore::identity());

  const ModelConfig& config() const noexcept { return config_; }
  const FeatureConfig& features() const noexcept { return config_.features; }
  const ZScore& zscore() const noexcept { return zscore_; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }
  std::size_t dim() const noexcept { return config_.dim; }
  std::size_t rank() const noexcept { return config_.rank; }

  Embedding embed(const FeatureVector& fv) const;
  // Columns of `features` are feature vectors; result columns are embeddings.
  Eigen::MatrixXd embed_batch(const Eigen::MatrixXd& features) const;
  FeatureVector featurize(std::string_view text) const {
    return extract_features(text, config_.features, zscore_);
  }

  const Eigen::MatrixXd& base() const noexcept { return base_; }
  Eigen::Map<const RowMatrix> adapter_a() const;
  Eigen::Map<const RowMatrix> adapter_b() const;
  Eigen::Map<RowMatrix> adapter_a();
  Eigen::Map<RowMatrix> adapter_b();
  // Write-through view of every trainable parameter; W0 is not included.
  std::span<double> adapter_parameters() noexcept { return adapter_; }
  std::span<const double> adapter_parameters() const noexcept { return adapter_; }
  void set_adapter(std::span<const double> values);

  std::uint64_t base_checksum() const;
  std::uint64_t adapter_checksum() const;

 private:
  EmbeddingModel() = default;

  ModelConfig config_;
  ZScore zscore_;
  std::size_t feature_dim_ = 0;
  Eigen::MatrixXd base_;
  std::vector<double> adapter_;
};

struct RegressionHead {
  Eigen::VectorXd w;
  double b = 0.0;

  static RegressionHead zeros(std::size_t dim) { return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)), 0.0}; }
  // Unclamped; clamping happens only when predictions are reported.
  double predict(const Embedding& h) const { return w.dot(h) + b; }
};

}  // namespace fairaes
