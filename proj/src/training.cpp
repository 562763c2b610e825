#include "fairaes/training.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "fairaes/error.hpp"
#include "fairaes/random.hpp"

namespace fairaes {

namespace {

using Index = Eigen::Index;

Eigen::Map<RowMatrix> grad_a(std::vector<double>& g, const EmbeddingModel& m) {
  return {g.data(), static_cast<Index>(m.rank()), static_cast<Index>(m.feature_dim())};
}

Eigen::Map<RowMatrix> grad_b(std::vector<double>& g, const EmbeddingModel& m) {
  return {g.data() + m.rank() * m.feature_dim(), static_cast<Index>(m.dim()), static_cast<Index>(m.rank())};
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& m, std::span<const std::size_t> cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = m.col(static_cast<Index>(cols[k]));
  return out;
}

std::vector<std::string> texts_of(const Corpus& corpus) {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& e : corpus) texts.push_back(e.text);
  return texts;
}

// Shuffled visiting order for one epoch, driven only by (seed, stage, epoch).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::string_view stage, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, std::string(stage) + "/epoch/" + std::to_string(epoch)));
  rng.shuffle(std::span(order));
  return order;
}

void check_finite(double loss, std::string_view stage, int epoch, std::size_t batch) {
  if (!std::isfinite(loss)) {
    throw Error(ErrorKind::Divergence, std::string(stage) + ": non-finite loss at epoch " +
                                           std::to_string(epoch + 1) + ", batch " + std::to_string(batch + 1));
  }
}

void apply_step(std::span<double> params, const std::vector<double>& grad, double lr) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
}

// Mean squared error gradient for one batch given the cached base embeddings.
MseGradient mse_batch(const EmbeddingModel& model, const RegressionHead& head, const Eigen::MatrixXd& x,
                      const Eigen::MatrixXd& base_h, std::span<const double> y) {
  const auto n = static_cast<double>(y.size());
  const Eigen::MatrixXd low = model.adapter_a() * x;
  Eigen::MatrixXd h = base_h;
  h.noalias() += model.adapter_b() * low;
  Eigen::RowVectorXd g(static_cast<Index>(y.size()));
  MseGradient out;
  for (Index k = 0; k < g.size(); ++k) {
    auto term = mse_loss(head.predict(h.col(k)), y[static_cast<std::size_t>(k)]);
    out.loss += term.loss;
    out.n_nonzero += term.loss > 0.0 ? 1 : 0;
    g[k] = term.grad / n;
  }
  out.loss /= n;
  out.w = h * g.transpose();
  out.b = g.sum();
  const Eigen::MatrixXd dh = head.w * g;  // d x n
  out.adapter.assign(model.adapter_parameters().size(), 0.0);
  grad_b(out.adapter, model).noalias() = dh * low.transpose();
  grad_a(out.adapter, model).noalias() = (model.adapter_b().transpose() * dh) * x.transpose();
  return out;
}

TripletBatchGradient triplet_batch(const EmbeddingModel& model, const Eigen::MatrixXd* x[3],
                                   const Eigen::MatrixXd* base_h[3], double margin, double eps) {
  const Index n = x[0]->cols();
  Eigen::MatrixXd low[3];
  Eigen::MatrixXd h[3];
  for (int r = 0; r < 3; ++r) {
    low[r] = model.adapter_a() * *x[r];
    h[r] = *base_h[r];
    h[r].noalias() += model.adapter_b() * low[r];
  }
  Eigen::MatrixXd dh[3];
  for (auto& m : dh) m = Eigen::MatrixXd::Zero(static_cast<Index>(model.dim()), n);
  TripletBatchGradient out;
  std::size_t active = 0;
  for (Index k = 0; k < n; ++k) {
    auto tg = triplet_loss_grad(h[0].col(k), h[1].col(k), h[2].col(k), margin, eps);
    out.loss += tg.loss;
    if (tg.loss > 0.0) {
      ++active;
      dh[0].col(k) = tg.anchor / static_cast<double>(n);
      dh[1].col(k) = tg.positive / static_cast<double>(n);
      dh[2].col(k) = tg.negative / static_cast<double>(n);
    }
  }
  out.loss /= static_cast<double>(n);
  out.active_fraction = static_cast<double>(active) / static_cast<double>(n);
  out.adapter.assign(model.adapter_parameters().size(), 0.0);
  auto ga = grad_a(out.adapter, model);
  auto gb = grad_b(out.adapter, model);
  for (int r = 0; r < 3; ++r) {
    gb.noalias() += dh[r] * low[r].transpose();
    ga.noalias() += (model.adapter_b().transpose() * dh[r]) * x[r]->transpose();
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void TrainConfig::validate() const {
  if (!(margin > 0.0)) throw Error(ErrorKind::Config, "margin must be > 0");
  if (!(learning_rate >= 0.0)) throw Error(ErrorKind::Config, "learning_rate must be >= 0");
  if (epochs_contrastive < 1 || epochs_head < 1 || epochs_baseline < 1) {
    throw Error(ErrorKind::Config, "epoch counts must be >= 1");
  }
  if (batch_size < 1) throw Error(ErrorKind::Config, "batch_size must be >= 1");
  if (!(epsilon_dist > 0.0)) throw Error(ErrorKind::Config, "epsilon_dist must be > 0");
}

double euclidean_distance(const VectorRef& u, const VectorRef& v) {
  if (u.size() != v.size()) {
    throw Error(ErrorKind::Shape, "distance between vectors of dimension " + std::to_string(u.size()) +
                                      " and " + std::to_string(v.size()));
  }
  return (u - v).norm();
}

double triplet_loss(const VectorRef& anchor, const VectorRef& positive, const VectorRef& negative,
                    double margin) {
  return std::max(0.0, euclidean_distance(anchor, positive) - euclidean_distance(anchor, negative) + margin);
}

TripletGradient triplet_loss_grad(const VectorRef& anchor, const VectorRef& positive,
                                  const VectorRef& negative, double margin, double epsilon_dist) {
  TripletGradient g;
  const double d_ap = euclidean_distance(anchor, positive);
  const double d_an = euclidean_distance(anchor, negative);
  g.loss = std::max(0.0, d_ap - d_an + margin);
  const auto d = anchor.size();
  if (g.loss == 0.0) {
    g.anchor = g.positive = g.negative = Eigen::VectorXd::Zero(d);
    return g;
  }
  const Eigen::VectorXd to_pos = (anchor - positive) / std::max(d_ap, epsilon_dist);
  const Eigen::VectorXd to_neg = (anchor - negative) / std::max(d_an, epsilon_dist);
  g.anchor = to_pos - to_neg;
  g.positive = -to_pos;
  g.negative = to_neg;
  return g;
}

MseTerm mse_loss(double predicted, double human) {
  const double r = predicted - human;
  return {r * r, 2.0 * r};
}

MseGradient mse_gradient(const EmbeddingModel& model, const RegressionHead& head,
                         const Eigen::MatrixXd& features, std::span<const double> targets) {
  if (static_cast<std::size_t>(features.cols()) != targets.size()) {
    throw Error(ErrorKind::Shape, "feature columns and targets differ in count");
  }
  if (static_cast<std::size_t>(head.w.size()) != model.dim()) {
    throw Error(ErrorKind::Shape, "head dimension does not match embedding dimension");
  }
  return mse_batch(model, head, features, model.base() * features, targets);
}

TripletBatchGradient triplet_gradient(const EmbeddingModel& model, const Eigen::MatrixXd& anchors,
                                      const Eigen::MatrixXd& positives, const Eigen::MatrixXd& negatives,
                                      double margin, double epsilon_dist) {
  if (anchors.cols() != positives.cols() || anchors.cols() != negatives.cols() || anchors.cols() == 0) {
    throw Error(ErrorKind::Shape, "triplet batches need equal, non-zero column counts");
  }
  const Eigen::MatrixXd h0[3] = {model.base() * anchors, model.base() * positives, model.base() * negatives};
  const Eigen::MatrixXd* x[3] = {&anchors, &positives, &negatives};
  const Eigen::MatrixXd* h[3] = {&h0[0], &h0[1], &h0[2]};
  return triplet_batch(model, x, h, margin, epsilon_dist);
}

TrainTrace train_baseline(EmbeddingModel& model, RegressionHead& head, const Corpus& train,
                          const TrainConfig& config) {
  config.validate();
  if (train.empty()) throw Error(ErrorKind::EmptyInput, "baseline training needs a non-empty training set");
  if (static_cast<std::size_t>(head.w.size()) != model.dim()) {
    throw Error(ErrorKind::Shape, "head dimension does not match embedding dimension");
  }
  const auto start = std::chrono::steady_clock::now();
  const auto texts = texts_of(train);
  const Eigen::MatrixXd x = extract_features(texts, model.features(), model.zscore());
  const Eigen::MatrixXd base_h = model.base() * x;
  std::vector<double> y;
  for (const auto& e : train) y.push_back(e.score_norm);

  TrainTrace trace;
  const auto batch = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 0; epoch < config.epochs_baseline; ++epoch) {
    const auto order = epoch_order(train.size(), config.seed, "train-baseline", epoch);
    double loss_sum = 0.0;
    std::size_t nonzero = 0;
    for (std::size_t start_i = 0, b = 0; start_i < order.size(); start_i += batch, ++b) {
      std::span<const std::size_t> cols(order.data() + start_i, std::min(batch, order.size() - start_i));
      std::vector<double> yb;
      for (std::size_t c : cols) yb.push_back(y[c]);
      auto g = mse_batch(model, head, gather(x, cols), gather(base_h, cols), yb);
      check_finite(g.loss, "train-baseline", epoch, b);
      loss_sum += g.loss * static_cast<double>(cols.size());
      nonzero += g.n_nonzero;
      apply_step(model.adapter_parameters(), g.adapter, config.learning_rate);
      head.w -= config.learning_rate * g.w;
      head.b -= config.learning_rate * g.b;
    }
    trace.epoch_loss.push_back(loss_sum / static_cast<double>(train.size()));
    trace.active_fraction.push_back(static_cast<double>(nonzero) / static_cast<double>(train.size()));
  }
  trace.wall_time_seconds = seconds_since(start);
  return trace;
}

TrainTrace train_contrastive(EmbeddingModel& model, std::span<const Triplet> triplets, const Corpus& corpus,
                             const TrainConfig& config) {
  config.validate();
  if (triplets.empty()) throw Error(ErrorKind::EmptyInput, "contrastive training needs at least one triplet");
  const auto start = std::chrono::steady_clock::now();
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < corpus.size(); ++i) index.emplace(corpus[i].id, i);
  auto resolve = [&](const std::string& id) {
    auto it = index.find(id);
    if (it == index.end()) throw Error(ErrorKind::Integrity, "triplet references unknown essay '" + id + "'");
    return it->second;
  };
  std::vector<std::array<std::size_t, 3>> roles;
  roles.reserve(triplets.size());
  for (const auto& t : triplets) roles.push_back({resolve(t.anchor_id), resolve(t.positive_id), resolve(t.negative_id)});

  const auto texts = texts_of(corpus);
  const Eigen::MatrixXd x = extract_features(texts, model.features(), model.zscore());
  const Eigen::MatrixXd base_h = model.base() * x;

  TrainTrace trace;
  const auto batch = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 0; epoch < config.epochs_contrastive; ++epoch) {
    const auto order = epoch_order(roles.size(), config.seed, "train-contrastive", epoch);
    double loss_sum = 0.0;
    double active_sum = 0.0;
    for (std::size_t start_i = 0, b = 0; start_i < order.size(); start_i += batch, ++b) {
      const std::size_t n = std::min(batch, order.size() - start_i);
      Eigen::MatrixXd xs[3];
      Eigen::MatrixXd hs[3];
      for (int r = 0; r < 3; ++r) {
        std::vector<std::size_t> cols(n);
        for (std::size_t k = 0; k < n; ++k) cols[k] = roles[order[start_i + k]][static_cast<std::size_t>(r)];
        xs[r] = gather(x, cols);
        hs[r] = gather(base_h, cols);
      }
      const Eigen::MatrixXd* xp[3] = {&xs[0], &xs[1], &xs[2]};
      const Eigen::MatrixXd* hp[3] = {&hs[0], &hs[1], &hs[2]};
      auto g = triplet_batch(model, xp, hp, config.margin, config.epsilon_dist);
      check_finite(g.loss, "train-contrastive", epoch, b);
      loss_sum += g.loss * static_cast<double>(n);
      active_sum += g.active_fraction * static_cast<double>(n);
      if (g.active_fraction > 0.0) apply_step(model.adapter_parameters(), g.adapter, config.learning_rate);
    }
    trace.epoch_loss.push_back(loss_sum / static_cast<double>(roles.size()));
    trace.active_fraction.push_back(active_sum / static_cast<double>(roles.size()));
  }
  trace.wall_time_seconds = seconds_since(start);
  return trace;
}

HeadFit fit_head_on_embeddings(const Eigen::MatrixXd& embeddings, std::span<const double> targets,
                               const TrainConfig& config) {
  config.validate();
  if (targets.empty()) throw Error(ErrorKind::EmptyInput, "head fitting needs a non-empty training set");
  if (static_cast<std::size_t>(embeddings.cols()) != targets.size()) {
    throw Error(ErrorKind::Shape, "embedding columns and targets differ in count");
  }
  const auto start = std::chrono::steady_clock::now();
  HeadFit fit{RegressionHead::zeros(static_cast<std::size_t>(embeddings.rows())), {}};
  const auto batch = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 0; epoch < config.epochs_head; ++epoch) {
    const auto order = epoch_order(targets.size(), config.seed, "fit-head", epoch);
    double loss_sum = 0.0;
    std::size_t nonzero = 0;
    for (std::size_t start_i = 0, b = 0; start_i < order.size(); start_i += batch, ++b) {
      const std::size_t n = std::min(batch, order.size() - start_i);
      Eigen::VectorXd dw = Eigen::VectorXd::Zero(embeddings.rows());
      double db = 0.0;
      double loss = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const auto c = static_cast<Index>(order[start_i + k]);
        auto term = mse_loss(fit.head.predict(embeddings.col(c)), targets[static_cast<std::size_t>(c)]);
        loss += term.loss;
        nonzero += term.loss > 0.0 ? 1 : 0;
        dw += (term.grad / static_cast<double>(n)) * embeddings.col(c);
        db += term.grad / static_cast<double>(n);
      }
      check_finite(loss, "fit-head", epoch, b);
      loss_sum += loss;
      fit.head.w -= config.learning_rate * dw;
      fit.head.b -= config.learning_rate * db;
    }
    fit.trace.epoch_loss.push_back(loss_sum / static_cast<double>(targets.size()));
    fit.trace.active_fraction.push_back(static_cast<double>(nonzero) / static_cast<double>(targets.size()));
  }
  fit.trace.wall_time_seconds = seconds_since(start);
  return fit;
}

HeadFit fit_head(const EmbeddingModel& model, const Corpus& train, const TrainConfig& config) {
  if (train.empty()) throw Error(ErrorKind::EmptyInput, "head fitting needs a non-empty training set");
  const auto before = model.adapter_checksum();
  const auto texts = texts_of(train);
  const Eigen::MatrixXd h = model.embed_batch(extract_features(texts, model.features(), model.zscore()));
  std::vector<double> y;
  for (const auto& e : train) y.push_back(e.score_norm);
  auto fit = fit_head_on_embeddings(h, y, config);
  if (model.adapter_checksum() != before) {
    throw Error(ErrorKind::FrozenViolation, "adapter changed while fitting the head");
  }
  return fit;
}

}  // namespace fairaes
