#include "fairaes/encoder.hpp"

#include <cmath>

#include "fairaes/error.hpp"
#include "fairaes/hashing.hpp"
#include "fairaes/random.hpp"

namespace fairaes {

namespace {

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c == '\'' || c >= 0x80;
}

bool is_sentence_end(const std::string& token) {
  return token == "." || token == "!" || token == "?";
}

bool is_word(const std::string& token) {
  return !token.empty() && is_word_byte(static_cast<unsigned char>(token.front()));
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
      continue;
    }
    if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
    if (!std::isspace(c)) tokens.emplace_back(1, static_cast<char>(c));
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

SurfaceStats surface_stats(std::span<const std::string> tokens) {
  SurfaceStats s;
  if (tokens.empty()) return s;
  std::vector<double> lengths;
  double run = 0.0;
  double commas = 0.0;
  double words = 0.0;
  double long_words = 0.0;
  for (const auto& t : tokens) {
    run += 1.0;
    if (t == ",") commas += 1.0;
    if (is_word(t)) {
      words += 1.0;
      if (t.size() >= 7) long_words += 1.0;
    }
    if (is_sentence_end(t)) {
      lengths.push_back(run);
      run = 0.0;
    }
  }
  if (run > 0.0) lengths.push_back(run);
  const double n = static_cast<double>(lengths.size());
  s.token_count = static_cast<double>(tokens.size());
  s.mean_sentence_length = s.token_count / n;
  double ss = 0.0;
  for (double len : lengths) ss += (len - s.mean_sentence_length) * (len - s.mean_sentence_length);
  s.sentence_length_variance = ss / n;
  s.comma_rate = commas / n;
  s.long_word_rate = words > 0.0 ? long_words / words : 0.0;
  return s;
}

SurfaceStats surface_stats(std::string_view text) {
  auto tokens = tokenize(text);
  return surface_stats(tokens);
}

ZScore ZScore::fit(std::span<const std::string> texts) {
  ZScore z;
  if (texts.empty()) throw Error(ErrorKind::EmptyInput, "cannot fit surface statistics on no text");
  std::array<double, kSurfaceStatCount> sum{};
  std::array<double, kSurfaceStatCount> sum_sq{};
  std::vector<std::array<double, kSurfaceStatCount>> rows;
  rows.reserve(texts.size());
  for (const auto& t : texts) rows.push_back(surface_stats(t).values());
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < kSurfaceStatCount; ++k) sum[k] += r[k];
  }
  for (std::size_t k = 0; k < kSurfaceStatCount; ++k) z.mean[k] = sum[k] / n;
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < kSurfaceStatCount; ++k) sum_sq[k] += (r[k] - z.mean[k]) * (r[k] - z.mean[k]);
  }
  for (std::size_t k = 0; k < kSurfaceStatCount; ++k) {
    double sd = std::sqrt(sum_sq[k] / n);
    z.scale[k] = sd > 0.0 ? sd : 1.0;
  }
  return z;
}

std::vector<std::size_t> ngram_buckets(std::string_view text, const FeatureConfig& config) {
  if (config.hash_version != kFeatureHashVersion) {
    throw Error(ErrorKind::Compatibility, "unsupported feature hash version " +
                                              std::to_string(config.hash_version));
  }
  auto tokens = tokenize(text);
  std::vector<std::size_t> buckets;
  const auto n = static_cast<std::uint64_t>(config.n_buckets);
  for (const auto& t : tokens) buckets.push_back(static_cast<std::size_t>(fnv1a64(t) % n));
  if (tokens.size() >= config.min_tokens_for_bigrams) {
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
      // Tokens never contain spaces, so the joined key is unambiguous.
      std::uint64_t h = fnv1a64(tokens[i + 1], fnv1a64(" ", fnv1a64(tokens[i])));
      buckets.push_back(static_cast<std::size_t>(h % n));
    }
  }
  return buckets;
}

FeatureVector extract_features(std::string_view text, const FeatureConfig& config,
                               const ZScore& zscore) {
  if (text.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos) {
    throw Error(ErrorKind::EmptyInput, "cannot featurize empty text");
  }
  if (config.n_buckets == 0) throw Error(ErrorKind::Config, "feature config needs n_buckets > 0");
  FeatureVector fv = FeatureVector::Zero(static_cast<Eigen::Index>(config.dimension()));
  for (std::size_t b : ngram_buckets(text, config)) fv[static_cast<Eigen::Index>(b)] += 1.0;
  auto block = fv.head(static_cast<Eigen::Index>(config.n_buckets));
  const double norm = block.norm();
  if (norm > 0.0) block /= norm;
  const auto stats = surface_stats(text).values();
  for (std::size_t k = 0; k < kSurfaceStatCount; ++k) {
    fv[static_cast<Eigen::Index>(config.n_buckets + k)] = (stats[k] - zscore.mean[k]) / zscore.scale[k];
  }
  return fv;
}

Eigen::MatrixXd extract_features(std::span<const std::string> texts, const FeatureConfig& config,
                                 const ZScore& zscore) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(config.dimension()), static_cast<Eigen::Index>(texts.size()));
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = extract_features(texts[i], config, zscore);
  }
  return out;
}

EmbeddingModel::EmbeddingModel(const ModelConfig& config, const ZScore& zscore)
    : config_(config), zscore_(zscore), feature_dim_(config.features.dimension()) {
  if (config.dim == 0 || config.rank == 0) {
    throw Error(ErrorKind::Config, "embedding dim and adapter rank must be positive");
  }
  const auto d = static_cast<Eigen::Index>(config.dim);
  const auto f = static_cast<Eigen::Index>(feature_dim_);
  base_.resize(d, f);
  Rng base_rng(derive_seed(config.base_seed, "encoder/W0"));
  const double scale = 1.0 / std::sqrt(static_cast<double>(feature_dim_));
  for (Eigen::Index c = 0; c < f; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) base_(r, c) = base_rng.normal() * scale;
  }
  const std::size_t a_size = config.rank * feature_dim_;
  adapter_.assign(a_size + config.dim * config.rank, 0.0);
  Rng adapter_rng(derive_seed(config.adapter_seed, "encoder/A"));
  for (std::size_t i = 0; i < a_size; ++i) adapter_[i] = adapter_rng.normal() * config.adapter_init_scale;
}

EmbeddingModel EmbeddingModel::from_matrices(const Eigen::MatrixXd& base, const Eigen::MatrixXd& a,
                                             const Eigen::MatrixXd& b, std::optional<FeatureConfig> features,
                                             const ZScore& zscore) {
  if (base.size() == 0 || a.cols() != base.cols() || b.rows() != base.rows() || b.cols() != a.rows() || a.rows() == 0) {
    throw Error(ErrorKind::Shape, "inconsistent W0/A/B shapes");
  }
  if (features && features->dimension() != static_cast<std::size_t>(base.cols())) {
    throw Error(ErrorKind::Shape, "W0 has " + std::to_string(base.cols()) + " columns, features need " +
                                      std::to_string(features->dimension()));
  }
  EmbeddingModel m;
  m.zscore_ = zscore;
  m.config_.dim = static_cast<std::size_t>(base.rows());
  m.config_.rank = static_cast<std::size_t>(a.rows());
  m.config_.features = features.value_or(FeatureConfig{});
  if (!features) m.config_.features.n_buckets = 0;
  m.feature_dim_ = static_cast<std::size_t>(base.cols());
  m.base_ = base;
  m.adapter_.resize(static_cast<std::size_t>(a.size() + b.size()));
  m.adapter_a() = a;
  m.adapter_b() = b;
  return m;
}

Eigen::Map<const RowMatrix> EmbeddingModel::adapter_a() const {
  return {adapter_.data(), static_cast<Eigen::Index>(config_.rank), static_cast<Eigen::Index>(feature_dim_)};
}

Eigen::Map<const RowMatrix> EmbeddingModel::adapter_b() const {
  return {adapter_.data() + config_.rank * feature_dim_, static_cast<Eigen::Index>(config_.dim),
          static_cast<Eigen::Index>(config_.rank)};
}

Eigen::Map<RowMatrix> EmbeddingModel::adapter_a() {
  return {adapter_.data(), static_cast<Eigen::Index>(config_.rank), static_cast<Eigen::Index>(feature_dim_)};
}

Eigen::Map<RowMatrix> EmbeddingModel::adapter_b() {
  return {adapter_.data() + config_.rank * feature_dim_, static_cast<Eigen::Index>(config_.dim),
          static_cast<Eigen::Index>(config_.rank)};
}

void EmbeddingModel::set_adapter(std::span<const double> values) {
  if (values.size() != adapter_.size()) {
    throw Error(ErrorKind::Shape, "adapter has " + std::to_string(adapter_.size()) +
                                      " parameters, got " + std::to_string(values.size()));
  }
  std::copy(values.begin(), values.end(), adapter_.begin());
}

Embedding EmbeddingModel::embed(const FeatureVector& fv) const {
  if (static_cast<std::size_t>(fv.size()) != feature_dim_) {
    throw Error(ErrorKind::Shape, "feature vector has dimension " + std::to_string(fv.size()) +
                                      ", model expects " + std::to_string(feature_dim_));
  }
  Eigen::VectorXd low = adapter_a() * fv;
  return base_ * fv + adapter_b() * low;
}

Eigen::MatrixXd EmbeddingModel::embed_batch(const Eigen::MatrixXd& features) const {
  if (static_cast<std::size_t>(features.rows()) != feature_dim_) {
    throw Error(ErrorKind::Shape, "feature matrix has " + std::to_string(features.rows()) +
                                      " rows, model expects " + std::to_string(feature_dim_));
  }
  Eigen::MatrixXd low = adapter_a() * features;
  Eigen::MatrixXd out = base_ * features;
  out.noalias() += adapter_b() * low;
  return out;
}

std::uint64_t EmbeddingModel::base_checksum() const {
  return checksum(std::span<const double>(base_.data(), static_cast<std::size_t>(base_.size())));
}

std::uint64_t EmbeddingModel::adapter_checksum() const { return checksum(adapter_); }

}  // namespace fairaes
