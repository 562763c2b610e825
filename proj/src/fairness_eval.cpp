#include "fairaes/fairness_eval.hpp"

#include <algorithm>
#include <cmath>

#include "fairaes/error.hpp"

namespace fairaes {

void EvalConfig::validate() const {
  if (n_bins < 2) throw Error(ErrorKind::Config, "n_bins must be >= 2");
  if (!(hiprof_threshold >= 0.0 && hiprof_threshold < 1.0)) {
    throw Error(ErrorKind::Config, "hiprof_threshold must lie in [0, 1)");
  }
}

ScoredPrediction ScoredPrediction::make(std::string essay_id, double human, double raw_prediction, Group group) {
  if (!(human >= 0.0 && human <= 1.0)) {
    throw Error(ErrorKind::OutOfRange, "human score of '" + essay_id + "' outside [0, 1]");
  }
  if (!std::isfinite(raw_prediction)) {
    throw Error(ErrorKind::Divergence, "non-finite prediction for '" + essay_id + "'");
  }
  return {std::move(essay_id), human, std::clamp(raw_prediction, 0.0, 1.0), group};
}

std::vector<ScoredPrediction> predict_all(const EmbeddingModel& model, const RegressionHead& head,
                                          const Corpus& essays) {
  if (static_cast<std::size_t>(head.w.size()) != model.dim()) {
    throw Error(ErrorKind::Compatibility, "head expects " + std::to_string(head.w.size()) +
                                              "-dim embeddings, model produces " + std::to_string(model.dim()));
  }
  std::vector<ScoredPrediction> out;
  out.reserve(essays.size());
  if (essays.empty()) return out;
  std::vector<std::string> texts;
  for (const auto& e : essays) texts.push_back(e.text);
  const Eigen::MatrixXd h = model.embed_batch(extract_features(texts, model.features(), model.zscore()));
  for (std::size_t i = 0; i < essays.size(); ++i) {
    const auto& e = essays[i];
    out.push_back(ScoredPrediction::make(e.id, e.score_norm, head.predict(h.col(static_cast<Eigen::Index>(i))), e.group));
  }
  return out;
}

int score_bin(double score, int n_bins) {
  const int bin = static_cast<int>(std::floor(score * n_bins));
  return std::clamp(bin, 0, n_bins - 1);
}

double qwk(std::span<const ScoredPrediction> predictions, int n_bins) {
  if (n_bins < 2) throw Error(ErrorKind::Config, "qwk needs n_bins >= 2");
  if (predictions.size() < 2) throw Error(ErrorKind::EmptyInput, "qwk needs at least 2 predictions");
  const auto k = static_cast<std::size_t>(n_bins);
  std::vector<double> observed(k * k, 0.0);
  std::vector<double> human_hist(k, 0.0);
  std::vector<double> pred_hist(k, 0.0);
  for (const auto& p : predictions) {
    const auto i = static_cast<std::size_t>(score_bin(p.human, n_bins));
    const auto j = static_cast<std::size_t>(score_bin(p.predicted, n_bins));
    observed[i * k + j] += 1.0;
    human_hist[i] += 1.0;
    pred_hist[j] += 1.0;
  }
  const double total = static_cast<double>(predictions.size());
  const double norm = static_cast<double>((n_bins - 1) * (n_bins - 1));
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double d = static_cast<double>(i) - static_cast<double>(j);
      const double w = d * d / norm;
      num += w * observed[i * k + j];
      den += w * human_hist[i] * pred_hist[j] / total;
    }
  }
  if (den == 0.0) {
    throw Error(ErrorKind::DegenerateAgreement, "both raters put all mass in one bin; kappa is undefined");
  }
  return 1.0 - num / den;
}

namespace {

struct Accumulator {
  std::size_t count = 0;
  double sum = 0.0;

  void add(double r) {
    ++count;
    sum += r;
  }
  StratumResidual finish() const {
    StratumResidual s;
    s.count = count;
    if (count > 0) s.mean_residual = sum / static_cast<double>(count);
    return s;
  }
};

}  // namespace

FairnessReport residual_report(std::span<const ScoredPrediction> predictions, double hiprof_threshold) {
  FairnessReport report;
  report.hiprof_threshold = hiprof_threshold;
  report.n_predictions = predictions.size();
  Accumulator overall, native, esl, hi_native, hi_esl;
  for (const auto& p : predictions) {
    const double r = p.residual();
    overall.add(r);
    const bool hi = p.human > hiprof_threshold;
    if (p.group == Group::Native) {
      native.add(r);
      if (hi) hi_native.add(r);
    } else {
      esl.add(r);
      if (hi) hi_esl.add(r);
    }
  }
  report.overall = overall.finish();
  report.native = native.finish();
  report.esl = esl.finish();
  report.hiprof_native = hi_native.finish();
  report.hiprof_esl = hi_esl.finish();
  if (report.hiprof_native.mean_residual && report.hiprof_esl.mean_residual) {
    report.hiprof_gap = std::abs(*report.hiprof_native.mean_residual - *report.hiprof_esl.mean_residual);
  }
  return report;
}

FairnessReport evaluate(std::span<const ScoredPrediction> predictions, const EvalConfig& config) {
  config.validate();
  auto report = residual_report(predictions, config.hiprof_threshold);
  report.n_bins = config.n_bins;
  try {
    report.qwk = qwk(predictions, config.n_bins);
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::DegenerateAgreement) throw;
  }
  return report;
}

double gap_reduction(double baseline_gap, double mitigated_gap) {
  if (!(baseline_gap > 0.0)) {
    throw Error(ErrorKind::UndefinedReduction, "baseline gap must be > 0 to compute a reduction");
  }
  return 100.0 * (baseline_gap - mitigated_gap) / baseline_gap;
}

}  // namespace fairaes
