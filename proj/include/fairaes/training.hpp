#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fairaes/corpus.hpp"
#include "fairaes/encoder.hpp"
#include "fairaes/triplet_miner.hpp"

namespace fairaes {

struct TrainConfig {
  double margin = 1.0;
  double learning_rate = 0.05;  // 0 is allowed and leaves every parameter in place
  int epochs_contrastive = 2;
  int epochs_head = 5;
  int epochs_baseline = 5;
  int batch_size = 32;
  std::uint64_t seed = 0;
  double epsilon_dist = 1e-9;

  void validate() const;
};

struct TrainTrace {
  std::vector<double> epoch_loss;
  // Fraction of training items with non-zero loss in each epoch.
  std::vector<double> active_fraction;
  double wall_time_seconds = 0.0;
};

using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

double euclidean_distance(const VectorRef& u, const VectorRef& v);

// max(0, d(A, P) - d(A, N) + margin)
double triplet_loss(const VectorRef& anchor, const VectorRef& positive, const VectorRef& negative,
                    double margin);

struct TripletGradient {
  double loss = 0.0;
  Eigen::VectorXd anchor;
  Eigen::VectorXd positive;
  Eigen::VectorXd negative;
};

// Subgradient of triplet_loss; distances in the denominators are clamped below
// by epsilon_dist so coincident embeddings give bounded gradients.
TripletGradient triplet_loss_grad(const VectorRef& anchor, const VectorRef& positive,
                                  const VectorRef& negative, double margin, double epsilon_dist);

struct MseTerm {
  double loss = 0.0;
  double grad = 0.0;  // d loss / d predicted
};

MseTerm mse_loss(double predicted, double human);

// Batch gradients. Columns of the feature matrices are essays; the adapter
// gradient uses the layout of EmbeddingModel::adapter_parameters().
struct MseGradient {
  double loss = 0.0;  // mean squared error over the batch
  std::size_t n_nonzero = 0;
  std::vector<double> adapter;
  Eigen::VectorXd w;
  double b = 0.0;
};

MseGradient mse_gradient(const EmbeddingModel& model, const RegressionHead& head,
                         const Eigen::MatrixXd& features, std::span<const double> targets);

struct TripletBatchGradient {
  double loss = 0.0;  // mean triplet loss over the batch
  double active_fraction = 0.0;
  std::vector<double> adapter;
};

TripletBatchGradient triplet_gradient(const EmbeddingModel& model, const Eigen::MatrixXd& anchors,
                                      const Eigen::MatrixXd& positives, const Eigen::MatrixXd& negatives,
                                      double margin, double epsilon_dist);

// Joint adapter + head training on squared error against score_norm.
TrainTrace train_baseline(EmbeddingModel& model, RegressionHead& head, const Corpus& train,
                          const TrainConfig& config);

// Adapter-only training on the triplet margin loss; every triplet id must
// resolve in `corpus`.
TrainTrace train_contrastive(EmbeddingModel& model, std::span<const Triplet> triplets,
                             const Corpus& corpus, const TrainConfig& config);

struct HeadFit {
  RegressionHead head;
  TrainTrace trace;
};

// Linear head on frozen embeddings; throws FrozenViolation if the adapter
// checksum moves during the call.
HeadFit fit_head(const EmbeddingModel& model, const Corpus& train, const TrainConfig& config);

// Same procedure over precomputed embeddings (columns) and targets.
HeadFit fit_head_on_embeddings(const Eigen::MatrixXd& embeddings, std::span<const double> targets,
                               const TrainConfig& config);

}  // namespace fairaes
