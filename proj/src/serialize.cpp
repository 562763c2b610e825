#include "fairaes/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>

#include "fairaes/error.hpp"

namespace fairaes {

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> opt_double(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Schema, std::string(what) + ": " + e.what());
  }
}

std::uint64_t parse_hex64(const std::string& text) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(text, &used, 16);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error(ErrorKind::Schema, "bad checksum string '" + text + "'");
  return v;
}

Json stratum(const StratumResidual& s) { return {{"count", s.count}, {"mean_residual", opt(s.mean_residual)}}; }

StratumResidual stratum_from_json(const Json& j) {
  return {j.at("count").get<std::size_t>(), opt_double(j.at("mean_residual"))};
}

template <class T, class F>
std::vector<T> read_jsonl(std::istream& in, const char* what, F&& parse) {
  std::vector<T> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(Json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Parse, std::string(what) + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::mutex g_log_mutex;
std::vector<std::filesystem::path> g_access_log;

}  // namespace

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

Json to_json(const SplitManifest& split) {
  return {{"seed", split.seed}, {"ratio", split.ratio}, {"train_ids", split.train_ids}, {"test_ids", split.test_ids}};
}

SplitManifest split_from_json(const Json& j) {
  return guarded("split manifest", [&] {
    return SplitManifest{j.at("train_ids").get<std::vector<std::string>>(), j.at("test_ids").get<std::vector<std::string>>(),
                         j.at("seed").get<std::uint64_t>(), j.at("ratio").get<double>()};
  });
}

Json to_json(const Triplet& t) {
  return {{"anchor", t.anchor_id}, {"positive", t.positive_id}, {"negative", t.negative_id}, {"anchor_score", t.anchor_score}};
}

Triplet triplet_from_json(const Json& j) {
  return {j.at("anchor").get<std::string>(), j.at("positive").get<std::string>(), j.at("negative").get<std::string>(),
          j.at("anchor_score").get<double>()};
}

void write_triplets_jsonl(std::ostream& out, std::span<const Triplet> triplets) {
  for (const auto& t : triplets) out << to_json(t).dump() << '\n';
}

std::vector<Triplet> read_triplets_jsonl(std::istream& in) {
  return read_jsonl<Triplet>(in, "triplets", triplet_from_json);
}

Json mining_summary(const MiningResult& result, const MinerConfig& config) {
  return {{"config", to_json(config)},
          {"n_triplets", result.triplets.size()},
          {"n_anchors", result.n_anchors},
          {"n_emitting", result.n_emitting},
          {"n_skipped_no_positive", result.n_skipped_no_positive},
          {"n_skipped_no_negative", result.n_skipped_no_negative}};
}

Json to_json(const MinerConfig& c) {
  return {{"eps_pos", c.eps_pos},
          {"eps_neg", c.eps_neg},
          {"seed", c.seed},
          {"max_triplets_per_anchor", c.max_triplets_per_anchor},
          {"negative_band", std::string(to_string(c.negative_band))}};
}

Json to_json(const TrainConfig& c) {
  return {{"margin", c.margin},
          {"learning_rate", c.learning_rate},
          {"epochs_contrastive", c.epochs_contrastive},
          {"epochs_head", c.epochs_head},
          {"epochs_baseline", c.epochs_baseline},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"epsilon_dist", c.epsilon_dist},
          {"optimizer", "sgd"}};
}

Json to_json(const FeatureConfig& c) {
  return {{"n_buckets", c.n_buckets}, {"min_tokens_for_bigrams", c.min_tokens_for_bigrams}, {"hash_version", c.hash_version}};
}

Json to_json(const SynthConfig& c) {
  return {{"n_native", c.n_native},
          {"n_esl", c.n_esl},
          {"vocab_size", c.vocab_size},
          {"quality_tokens", c.quality_tokens},
          {"marker_tokens", c.marker_tokens},
          {"esl_quality_shift", c.esl_quality_shift},
          {"marker_sentence_stretch", c.marker_sentence_stretch},
          {"noise_sd", c.noise_sd},
          {"seed", c.seed},
          {"marker_rate", c.marker_rate},
          {"quality_rate_low", c.quality_rate_low},
          {"quality_rate_high", c.quality_rate_high},
          {"comma_rate", c.comma_rate},
          {"sentences_min", c.sentences_min},
          {"sentences_max", c.sentences_max},
          {"sentence_length_min", c.sentence_length_min},
          {"sentence_length_max", c.sentence_length_max},
          {"runon_length", c.runon_length}};
}

Json to_json(const EmbeddingModel& model) {
  const auto& c = model.config();
  const auto params = model.adapter_parameters();
  const auto a_size = c.rank * model.feature_dim();
  return {{"format_version", kCheckpointFormatVersion},
          {"features", to_json(c.features)},
          {"feature_dim", model.feature_dim()},
          {"dim", c.dim},
          {"rank", c.rank},
          {"base_seed", c.base_seed},
          {"base_checksum", hex64(model.base_checksum())},
          {"adapter_seed", c.adapter_seed},
          {"adapter_init_scale", c.adapter_init_scale},
          {"adapter_checksum", hex64(model.adapter_checksum())},
          {"zscore", {{"mean", model.zscore().mean}, {"scale", model.zscore().scale}}},
          {"A", std::vector<double>(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(a_size))},
          {"B", std::vector<double>(params.begin() + static_cast<std::ptrdiff_t>(a_size), params.end())}};
}

EmbeddingModel model_from_json(const Json& j) {
  return guarded("checkpoint", [&] {
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw Error(ErrorKind::Compatibility, "checkpoint format " + std::to_string(version) + " is not supported");
    }
    ModelConfig c;
    const auto& f = j.at("features");
    c.features.n_buckets = f.at("n_buckets").get<std::size_t>();
    c.features.min_tokens_for_bigrams = f.at("min_tokens_for_bigrams").get<std::size_t>();
    c.features.hash_version = f.at("hash_version").get<std::uint32_t>();
    if (c.features.hash_version != kFeatureHashVersion) {
      throw Error(ErrorKind::Compatibility, "checkpoint uses feature hash version " +
                                                std::to_string(c.features.hash_version));
    }
    c.dim = j.at("dim").get<std::size_t>();
    c.rank = j.at("rank").get<std::size_t>();
    c.base_seed = j.at("base_seed").get<std::uint64_t>();
    c.adapter_seed = j.at("adapter_seed").get<std::uint64_t>();
    c.adapter_init_scale = j.at("adapter_init_scale").get<double>();
    ZScore z;
    z.mean = j.at("zscore").at("mean").get<std::array<double, kSurfaceStatCount>>();
    z.scale = j.at("zscore").at("scale").get<std::array<double, kSurfaceStatCount>>();

    EmbeddingModel model(c, z);
    if (j.at("feature_dim").get<std::size_t>() != model.feature_dim()) {
      throw Error(ErrorKind::Shape, "checkpoint feature_dim disagrees with its feature config");
    }
    if (parse_hex64(j.at("base_checksum").get<std::string>()) != model.base_checksum()) {
      throw Error(ErrorKind::Integrity, "regenerated W0 does not match the checkpoint checksum");
    }
    auto params = j.at("A").get<std::vector<double>>();
    const auto b = j.at("B").get<std::vector<double>>();
    if (params.size() != c.rank * model.feature_dim() || b.size() != c.dim * c.rank) {
      throw Error(ErrorKind::Shape, "checkpoint adapter has the wrong size");
    }
    params.insert(params.end(), b.begin(), b.end());
    model.set_adapter(params);
    if (parse_hex64(j.at("adapter_checksum").get<std::string>()) != model.adapter_checksum()) {
      throw Error(ErrorKind::Integrity, "checkpoint adapter checksum mismatch");
    }
    return model;
  });
}

Json to_json(const RegressionHead& head) {
  return {{"dim", head.w.size()}, {"w", std::vector<double>(head.w.data(), head.w.data() + head.w.size())}, {"b", head.b}};
}

RegressionHead head_from_json(const Json& j) {
  return guarded("head", [&] {
    const auto w = j.at("w").get<std::vector<double>>();
    if (w.size() != j.at("dim").get<std::size_t>()) throw Error(ErrorKind::Shape, "head weight count disagrees with dim");
    RegressionHead head = RegressionHead::zeros(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) head.w[static_cast<Eigen::Index>(i)] = w[i];
    head.b = j.at("b").get<double>();
    return head;
  });
}

Json to_json(const TrainTrace& trace) {
  return {{"epoch_loss", trace.epoch_loss}, {"active_fraction", trace.active_fraction}};
}

Json to_json(const ScoredPrediction& p) {
  return {{"id", p.essay_id}, {"human", p.human}, {"predicted", p.predicted}, {"group", std::string(to_string(p.group))}};
}

ScoredPrediction prediction_from_json(const Json& j) {
  return ScoredPrediction::make(j.at("id").get<std::string>(), j.at("human").get<double>(),
                                j.at("predicted").get<double>(), parse_group(j.at("group").get<std::string>()));
}

void write_predictions_jsonl(std::ostream& out, std::span<const ScoredPrediction> predictions) {
  for (const auto& p : predictions) out << to_json(p).dump() << '\n';
}

std::vector<ScoredPrediction> read_predictions_jsonl(std::istream& in) {
  return read_jsonl<ScoredPrediction>(in, "predictions", prediction_from_json);
}

Json to_json(const FairnessReport& r) {
  return {{"qwk", opt(r.qwk)},
          {"n_bins", r.n_bins},
          {"hiprof_threshold", r.hiprof_threshold},
          {"n_predictions", r.n_predictions},
          {"overall", stratum(r.overall)},
          {"native", stratum(r.native)},
          {"esl", stratum(r.esl)},
          {"hiprof_native", stratum(r.hiprof_native)},
          {"hiprof_esl", stratum(r.hiprof_esl)},
          {"hiprof_gap", opt(r.hiprof_gap)},
          {"embedding_normalization", "none"},
          {"optimizer", "sgd"}};
}

FairnessReport report_from_json(const Json& j) {
  return guarded("fairness report", [&] {
    FairnessReport r;
    r.qwk = opt_double(j.at("qwk"));
    r.n_bins = j.at("n_bins").get<int>();
    r.hiprof_threshold = j.at("hiprof_threshold").get<double>();
    r.n_predictions = j.at("n_predictions").get<std::size_t>();
    r.overall = stratum_from_json(j.at("overall"));
    r.native = stratum_from_json(j.at("native"));
    r.esl = stratum_from_json(j.at("esl"));
    r.hiprof_native = stratum_from_json(j.at("hiprof_native"));
    r.hiprof_esl = stratum_from_json(j.at("hiprof_esl"));
    r.hiprof_gap = opt_double(j.at("hiprof_gap"));
    return r;
  });
}

Json to_json(const ModelRow& row) {
  return {{"label", row.label}, {"alpha", opt(row.alpha)}, {"report", to_json(row.report)}, {"reduction", opt(row.reduction)}};
}

Json to_json(const AblationTable& table) {
  Json rows = Json::array();
  for (const auto& r : table.rows) rows.push_back(to_json(r));
  return {{"baseline", to_json(table.baseline)}, {"rows", rows}};
}

Json to_json(const TextStats& s) {
  Json j = Json::object();
  const auto values = stat_values(s);
  for (std::size_t i = 0; i < values.size(); ++i) j[std::string(kTextStatNames[i])] = values[i];
  return j;
}

Json to_json(const CorrelationTable& table) {
  Json rows = Json::array();
  for (const auto& r : table.rows) {
    Json row = {{"feature", r.feature}, {"with_prediction", opt(r.with_prediction)}, {"with_residual", opt(r.with_residual)}};
    if (!r.error.empty()) row["error"] = r.error;
    rows.push_back(std::move(row));
  }
  return {{"group", std::string(to_string(table.group))},
          {"n_essays", table.n_essays},
          {"measure", "pearson"},
          {"operationalization", "signed Pearson correlation of surface text statistics"},
          {"rows", rows}};
}

Json to_json(const LiftReport& r) {
  return {{"min_lift", r.min_lift},
          {"n_esl", r.n_esl},
          {"n_lifted", r.lifted_ids.size()},
          {"lifted_ids", r.lifted_ids},
          {"complement_ids", r.complement_ids},
          {"lifted_mean", r.lifted_mean ? to_json(*r.lifted_mean) : Json(nullptr)},
          {"complement_mean", r.complement_mean ? to_json(*r.complement_mean) : Json(nullptr)}};
}

Json to_json(const SynthManifest& m) {
  auto summary = [](const SynthGroupSummary& s) {
    return Json{{"count", s.count},
                {"mean_quality", s.mean_quality},
                {"mean_human", s.mean_human},
                {"marker_rate", s.marker_rate},
                {"quality_rate", s.quality_rate}};
  };
  Json essays = Json::array();
  for (const auto& e : m.essays) {
    essays.push_back({{"id", e.id},
                      {"group", std::string(to_string(e.group))},
                      {"quality", e.quality},
                      {"human", e.human},
                      {"n_tokens", e.n_tokens},
                      {"n_marker_tokens", e.n_marker_tokens},
                      {"n_quality_tokens", e.n_quality_tokens}});
  }
  return {{"config", to_json(m.config)}, {"native", summary(m.native)}, {"esl", summary(m.esl)}, {"essays", essays}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  {
    std::lock_guard lock(g_log_mutex);
    g_access_log.push_back(path);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::filesystem::path> access_log() {
  std::lock_guard lock(g_log_mutex);
  return g_access_log;
}

void clear_access_log() {
  std::lock_guard lock(g_log_mutex);
  g_access_log.clear();
}

}  // namespace fairaes
