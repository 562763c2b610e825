#include "fairaes/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fairaes/error.hpp"
#include "fairaes/hashing.hpp"
#include "fairaes/linguistics.hpp"
#include "fairaes/serialize.hpp"
#include "fairaes/version.hpp"

namespace fairaes {

namespace fs = std::filesystem;

namespace {

// ---- config parsing ------------------------------------------------------

[[noreturn]] void config_fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::Config, where + ": " + what);
}

void check_keys(const YAML::Node& node, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!node.IsMap()) config_fail(where, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) config_fail(where, "unknown key '" + key + "' (line " + std::to_string(kv.first.Mark().line + 1) + ")");
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
  const auto v = node[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    config_fail(where + "." + key, "bad value (line " + std::to_string(v.Mark().line + 1) + ")");
  }
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

InputSpec parse_input(const YAML::Node& node, const fs::path& base, const std::string& where) {
  check_keys(node, {"path", "format", "scale", "default_group", "source"}, where);
  InputSpec spec;
  std::string path, format = "jsonl", source = "datasetA", group;
  read(node, "path", path, where);
  if (path.empty()) config_fail(where, "path is required");
  spec.path = resolve(path, base);
  read(node, "format", format, where);
  read(node, "source", source, where);
  read(node, "default_group", group, where);
  double lo = 1.0, hi = 6.0;
  if (const auto scale = node["scale"]) {
    check_keys(scale, {"min", "max"}, where + ".scale");
    read(scale, "min", lo, where + ".scale");
    read(scale, "max", hi, where + ".scale");
  }
  try {
    spec.options.format = parse_format(format);
    spec.options.source = parse_source(source);
    if (!group.empty()) spec.options.default_group = parse_group(group);
    spec.options.scale = ScoreScale(lo, hi);
  } catch (const Error& e) {
    config_fail(where, e.what());
  }
  return spec;
}

// ---- artifact helpers ----------------------------------------------------

struct RunLog {
  std::string stage;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

Json lineage_json(const PipelineConfig& c) {
  Json inputs = Json::array();
  for (const auto& in : c.inputs) {
    inputs.push_back({{"path", in.path.generic_string()},
                      {"format", in.options.format == FileFormat::Csv ? "csv" : "jsonl"},
                      {"scale", {in.options.scale.min(), in.options.scale.max()}},
                      {"default_group", in.options.default_group ? Json(std::string(to_string(*in.options.default_group)))
                                                                 : Json(nullptr)},
                      {"source", std::string(to_string(in.options.source))}});
  }
  MinerConfig miner = c.experiment.miner;
  miner.seed = 0;  // covered by the global seed
  return {{"seed", c.experiment.seed},
          {"inputs", inputs},
          {"synth", to_json(c.synth)},
          {"split_ratio", c.experiment.split_ratio},
          {"miner", to_json(miner)},
          {"features", to_json(c.experiment.model.features)}};
}

Json config_echo(const PipelineConfig& c) {
  Json j = lineage_json(c);
  j["model"] = {{"dim", c.experiment.model.dim},
                {"rank", c.experiment.model.rank},
                {"adapter_init_scale", c.experiment.model.adapter_init_scale}};
  j["train"] = to_json(c.experiment.train);
  j["eval"] = {{"n_bins", c.experiment.eval.n_bins}, {"hiprof_threshold", c.experiment.eval.hiprof_threshold}};
  j["alphas"] = c.alphas;
  j["min_lift"] = c.experiment.min_lift;
  return j;
}

std::string alpha_text(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", alpha);
  return buf;
}

}  // namespace

// ---- config --------------------------------------------------------------

void PipelineConfig::validate() const {
  if (workdir.empty()) throw Error(ErrorKind::Config, "workdir must not be empty");
  if (!(experiment.split_ratio > 0.0 && experiment.split_ratio < 1.0)) {
    throw Error(ErrorKind::Config, "split ratio must lie in (0, 1)");
  }
  synth.validate();
  experiment.miner.validate();
  experiment.train.validate();
  // a zero step is legal for the library but never useful in a pipeline run
  if (!(experiment.train.learning_rate > 0.0)) throw Error(ErrorKind::Config, "learning_rate must be > 0");
  experiment.eval.validate();
  if (experiment.model.dim == 0 || experiment.model.rank == 0 || experiment.model.features.n_buckets == 0) {
    throw Error(ErrorKind::Config, "model dim, rank and n_buckets must be positive");
  }
  if (alphas.empty()) throw Error(ErrorKind::Config, "ablation needs at least one alpha");
  for (double a : alphas) {
    if (!(a > 0.0)) throw Error(ErrorKind::Config, "ablation alphas must be > 0");
  }
  if (!(experiment.min_lift >= 0.0)) throw Error(ErrorKind::Config, "min_lift must be >= 0");
}

PipelineConfig parse_config(const std::string& yaml_text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorKind::Config, std::string("config does not parse: ") + e.what());
  }
  PipelineConfig c;
  if (root.IsNull()) return c;
  check_keys(root, {"seed", "workdir", "inputs", "synth", "split", "miner", "model", "train", "eval", "ablation", "analysis"},
             "config");
  read(root, "seed", c.experiment.seed, "config");
  std::string workdir;
  read(root, "workdir", workdir, "config");
  if (!workdir.empty()) c.workdir = resolve(workdir, base_dir);

  if (const auto inputs = root["inputs"]) {
    if (!inputs.IsSequence()) config_fail("inputs", "expected a list");
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      c.inputs.push_back(parse_input(inputs[i], base_dir, "inputs[" + std::to_string(i) + "]"));
    }
  }
  if (const auto n = root["synth"]) {
    auto& s = c.synth;
    check_keys(n, {"n_native", "n_esl", "vocab_size", "quality_tokens", "marker_tokens", "esl_quality_shift",
                   "marker_sentence_stretch", "noise_sd", "seed", "marker_rate", "quality_rate_low", "quality_rate_high",
                   "comma_rate", "sentences_min", "sentences_max", "sentence_length_min", "sentence_length_max",
                   "runon_length"},
               "synth");
    read(n, "n_native", s.n_native, "synth");
    read(n, "n_esl", s.n_esl, "synth");
    read(n, "vocab_size", s.vocab_size, "synth");
    read(n, "quality_tokens", s.quality_tokens, "synth");
    read(n, "marker_tokens", s.marker_tokens, "synth");
    read(n, "esl_quality_shift", s.esl_quality_shift, "synth");
    read(n, "marker_sentence_stretch", s.marker_sentence_stretch, "synth");
    read(n, "noise_sd", s.noise_sd, "synth");
    read(n, "seed", s.seed, "synth");
    read(n, "marker_rate", s.marker_rate, "synth");
    read(n, "quality_rate_low", s.quality_rate_low, "synth");
    read(n, "quality_rate_high", s.quality_rate_high, "synth");
    read(n, "comma_rate", s.comma_rate, "synth");
    read(n, "sentences_min", s.sentences_min, "synth");
    read(n, "sentences_max", s.sentences_max, "synth");
    read(n, "sentence_length_min", s.sentence_length_min, "synth");
    read(n, "sentence_length_max", s.sentence_length_max, "synth");
    read(n, "runon_length", s.runon_length, "synth");
  }
  if (const auto n = root["split"]) {
    check_keys(n, {"ratio"}, "split");
    read(n, "ratio", c.experiment.split_ratio, "split");
  }
  if (const auto n = root["miner"]) {
    auto& m = c.experiment.miner;
    check_keys(n, {"eps_pos", "eps_neg", "max_triplets_per_anchor", "negative_band"}, "miner");
    read(n, "eps_pos", m.eps_pos, "miner");
    read(n, "eps_neg", m.eps_neg, "miner");
    read(n, "max_triplets_per_anchor", m.max_triplets_per_anchor, "miner");
    std::string band;
    read(n, "negative_band", band, "miner");
    if (!band.empty()) {
      try {
        m.negative_band = parse_negative_band(band);
      } catch (const Error& e) {
        config_fail("miner.negative_band", e.what());
      }
    }
  }
  if (const auto n = root["model"]) {
    auto& m = c.experiment.model;
    check_keys(n, {"n_buckets", "min_tokens_for_bigrams", "dim", "rank", "adapter_init_scale"}, "model");
    read(n, "n_buckets", m.features.n_buckets, "model");
    read(n, "min_tokens_for_bigrams", m.features.min_tokens_for_bigrams, "model");
    read(n, "dim", m.dim, "model");
    read(n, "rank", m.rank, "model");
    read(n, "adapter_init_scale", m.adapter_init_scale, "model");
  }
  if (const auto n = root["train"]) {
    auto& t = c.experiment.train;
    check_keys(n, {"margin", "learning_rate", "epochs_contrastive", "epochs_head", "epochs_baseline", "batch_size",
                   "epsilon_dist"},
               "train");
    read(n, "margin", t.margin, "train");
    read(n, "learning_rate", t.learning_rate, "train");
    read(n, "epochs_contrastive", t.epochs_contrastive, "train");
    read(n, "epochs_head", t.epochs_head, "train");
    read(n, "epochs_baseline", t.epochs_baseline, "train");
    read(n, "batch_size", t.batch_size, "train");
    read(n, "epsilon_dist", t.epsilon_dist, "train");
  }
  if (const auto n = root["eval"]) {
    check_keys(n, {"n_bins", "hiprof_threshold"}, "eval");
    read(n, "n_bins", c.experiment.eval.n_bins, "eval");
    read(n, "hiprof_threshold", c.experiment.eval.hiprof_threshold, "eval");
  }
  if (const auto n = root["ablation"]) {
    check_keys(n, {"alphas"}, "ablation");
    read(n, "alphas", c.alphas, "ablation");
  }
  if (const auto n = root["analysis"]) {
    check_keys(n, {"min_lift"}, "analysis");
    read(n, "min_lift", c.experiment.min_lift, "analysis");
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    throw Error(ErrorKind::Config, "cannot read config file " + path.string());
  }
  return parse_config(text, path.parent_path());
}

std::string config_hash(const PipelineConfig& config) {
  return hex64(fnv1a64(lineage_json(config).dump()));
}

// ---- stages --------------------------------------------------------------

namespace {

class StageContext {
 public:
  StageContext(const Pipeline& p, std::string stage, bool force) : p_(p), force_(force) { log_.stage = std::move(stage); }

  fs::path require(const std::string& relative, const std::string& producer) {
    const auto full = p_.path(relative);
    if (!fs::exists(full)) {
      throw Error(ErrorKind::Dependency,
                  log_.stage + " needs " + relative + "; run `" + producer + "` first");
    }
    return full;
  }

  std::string read(const std::string& relative, const std::string& producer) {
    const auto full = require(relative, producer);
    log_.inputs.push_back(relative);
    return read_file(full);
  }

  // Reads a JSON artifact and rejects it if another config produced it.
  Json read_json(const std::string& relative, const std::string& producer) {
    Json j;
    try {
      j = Json::parse(read(relative, producer));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Parse, relative + ": " + e.what());
    }
    const auto hash = j.value("config_hash", std::string());
    if (hash != p_.hash()) {
      if (!force_) {
        throw Error(ErrorKind::Conflict, relative + " was produced under config " + hash + ", current config is " +
                                             p_.hash() + " (pass --force to accept)");
      }
      mixed_.push_back(relative);
    }
    return j;
  }

  Corpus read_corpus(const std::string& relative, const std::string& producer) {
    std::istringstream in(read(relative, producer));
    return read_corpus_jsonl(in);
  }

  void write(const std::string& relative, const std::string& content) {
    write_file_atomic(p_.path(relative), content);
    log_.outputs.push_back(relative);
  }

  void write_json(const std::string& relative, Json body) {
    Json j = {{"config_hash", p_.hash()}};
    j.update(body);
    write(relative, dump(j));
  }

  void finish(Json extra = Json::object()) {
    const auto& c = p_.config();
    const auto seeds = StageSeeds::derive(c.experiment.seed);
    Json run = {{"stage", log_.stage},
                {"config_hash", p_.hash()},
                {"versions",
                 {{"fairaes", kVersion},
                  {"checkpoint_format", kCheckpointFormatVersion},
                  {"feature_hash", kFeatureHashVersion},
                  {"abbreviation_list", kAbbreviationListVersion}}},
                {"seed", c.experiment.seed},
                {"stage_seeds",
                 {{"split", seeds.split}, {"mine", seeds.mine}, {"encoder_base", seeds.base},
                  {"encoder_adapter", seeds.adapter}, {"train", seeds.train}}},
                {"config", config_echo(c)},
                {"inputs", log_.inputs},
                {"outputs", log_.outputs},
                {"forced_inputs", mixed_},
                {"wall_time_seconds",
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - log_.start).count()}};
    run.update(extra);
    write_file_atomic(p_.path("runs/" + log_.stage + ".json"), dump(run));
  }

 private:
  const Pipeline& p_;
  bool force_;
  RunLog log_;
  std::vector<std::string> mixed_;
};

std::string model_dir(const std::string& name) {
  if (name.empty() || name.find_first_of("/\\") != std::string::npos || name == "." || name == "..") {
    throw Error(ErrorKind::Config, "model name '" + name + "' is not a plain directory name");
  }
  return "models/" + name + "/";
}

void write_corpus(StageContext& ctx, const Corpus& corpus, const std::string& relative) {
  std::ostringstream out;
  write_corpus_jsonl(out, corpus);
  ctx.write(relative, out.str());
}

struct LoadedModel {
  std::string name;
  Json meta;
  EmbeddingModel model;
  RegressionHead head;
};

std::string pick(const std::string& value, const char* fallback) { return value.empty() ? fallback : value; }

}  // namespace

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
  config_.validate();
  hash_ = config_hash(config_);
}

void Pipeline::synth() {
  StageContext ctx(*this, "synth", false);
  const auto generated = generate(config_.synth);
  write_corpus(ctx, generated.corpus, "corpus.jsonl");
  ctx.write_json("corpus.json", {{"origin", "synth"}, {"n_essays", generated.corpus.size()}});
  ctx.write_json("manifest.json", to_json(generated.manifest));
  ctx.finish();
}

void Pipeline::ingest() {
  StageContext ctx(*this, "ingest", false);
  if (config_.inputs.empty()) throw Error(ErrorKind::Config, "ingest needs at least one entry under `inputs`");
  std::vector<Corpus> parts;
  Json counts = Json::array();
  for (const auto& in : config_.inputs) {
    std::istringstream stream(read_file(in.path));
    try {
      parts.push_back(in.options.format == FileFormat::Csv ? parse_csv(stream, in.options)
                                                           : parse_jsonl(stream, in.options));
    } catch (const Error& e) {
      throw Error(e.kind(), in.path.string() + ": " + e.what());
    }
    counts.push_back({{"path", in.path.generic_string()}, {"n_essays", parts.back().size()}});
  }
  const auto corpus = merge(std::move(parts));
  write_corpus(ctx, corpus, "corpus.jsonl");
  ctx.write_json("corpus.json", {{"origin", "ingest"}, {"n_essays", corpus.size()}, {"inputs", counts}});
  ctx.finish();
}

void Pipeline::split(const StageOptions& options) {
  StageContext ctx(*this, "split", options.force);
  ctx.read_json("corpus.json", "synth` or `ingest");
  const auto corpus = ctx.read_corpus("corpus.jsonl", "synth` or `ingest");
  const auto manifest =
      stratified_split(corpus, config_.experiment.split_ratio, StageSeeds::derive(config_.experiment.seed).split);
  write_corpus(ctx, select(corpus, manifest.train_ids), "train.jsonl");
  write_corpus(ctx, select(corpus, manifest.test_ids), "test.jsonl");
  ctx.write_json("split.json", to_json(manifest));
  ctx.finish();
}

void Pipeline::mine(const StageOptions& options) {
  StageContext ctx(*this, "mine", options.force);
  ctx.read_json("split.json", "split");
  const auto train = ctx.read_corpus("train.jsonl", "split");
  const auto miner = seeded_miner(config_.experiment);
  const auto result = mine_triplets(train, miner);
  std::ostringstream out;
  write_triplets_jsonl(out, result.triplets);
  ctx.write("triplets.jsonl", out.str());
  ctx.write_json("triplets.json", mining_summary(result, miner));
  ctx.finish();
}

void Pipeline::train_baseline(const StageOptions& options) {
  const auto name = pick(options.name, "baseline");
  StageContext ctx(*this, "train-baseline", options.force);
  ctx.read_json("split.json", "split");
  PreparedData data;
  data.train = ctx.read_corpus("train.jsonl", "split");
  data.zscore = fit_zscore(data.train);
  data.model = seeded_model(config_.experiment);
  data.train_config = seeded_train(config_.experiment);
  const auto run = run_baseline(data);
  if (run.model.base_checksum() != run.base_checksum_before) {
    throw Error(ErrorKind::FrozenViolation, "W0 changed during baseline training");
  }
  const auto dir = model_dir(name);
  ctx.write_json(dir + "model.json", {{"name", name}, {"kind", "baseline"}, {"alpha", nullptr},
                                      {"train_config", to_json(data.train_config)}, {"checkpoint", to_json(run.model)}});
  ctx.write_json(dir + "head.json", {{"name", name}, {"head", to_json(run.head)}});
  ctx.write_json(dir + "trace.json", {{"name", name}, {"phase", "baseline"}, {"trace", to_json(run.trace)}});
  ctx.finish({{"wall_time_training_seconds", run.trace.wall_time_seconds}});
}

void Pipeline::train_contrastive(const StageOptions& options, double alpha) {
  const auto name = pick(options.name, "contrastive");
  StageContext ctx(*this, "train-contrastive", options.force);
  ctx.read_json("split.json", "split");
  const auto train = ctx.read_corpus("train.jsonl", "split");
  ctx.read_json("triplets.json", "mine");
  std::istringstream stream(ctx.read("triplets.jsonl", "mine"));
  const auto triplets = read_triplets_jsonl(stream);

  auto config = seeded_train(config_.experiment);
  config.margin = alpha;
  EmbeddingModel model(seeded_model(config_.experiment), fit_zscore(train));
  const auto w0 = model.base_checksum();
  const auto trace = fairaes::train_contrastive(model, triplets, train, config);
  if (model.base_checksum() != w0) throw Error(ErrorKind::FrozenViolation, "W0 changed during contrastive training");

  const auto dir = model_dir(name);
  const auto stale_head = path(dir + "head.json");
  if (fs::exists(stale_head)) fs::remove(stale_head);
  ctx.write_json(dir + "model.json", {{"name", name}, {"kind", "contrastive"}, {"alpha", alpha},
                                      {"train_config", to_json(config)}, {"checkpoint", to_json(model)}});
  ctx.write_json(dir + "trace.json", {{"name", name}, {"phase", "contrastive"}, {"trace", to_json(trace)}});
  ctx.finish({{"wall_time_training_seconds", trace.wall_time_seconds}});
}

void Pipeline::fit_head(const StageOptions& options) {
  const auto name = pick(options.name, "contrastive");
  const auto dir = model_dir(name);
  StageContext ctx(*this, "fit-head", options.force);
  const auto meta = ctx.read_json(dir + "model.json", "train-contrastive --name " + name);
  const auto model = model_from_json(meta.at("checkpoint"));
  ctx.read_json("split.json", "split");
  const auto train = ctx.read_corpus("train.jsonl", "split");
  const auto fit = fairaes::fit_head(model, train, seeded_train(config_.experiment));
  ctx.write_json(dir + "head.json", {{"name", name}, {"head", to_json(fit.head)}});
  ctx.write_json(dir + "head_trace.json", {{"name", name}, {"phase", "head"}, {"trace", to_json(fit.trace)}});
  ctx.finish({{"wall_time_training_seconds", fit.trace.wall_time_seconds}});
}

void Pipeline::evaluate(const StageOptions& options) {
  const auto names = options.models.empty() ? std::vector<std::string>{"baseline", "contrastive"} : options.models;
  StageContext ctx(*this, "evaluate", options.force);

  std::vector<LoadedModel> models;
  for (const auto& name : names) {
    const auto dir = model_dir(name);
    auto meta = ctx.read_json(dir + "model.json", "train-baseline` or `train-contrastive --name " + name);
    auto model = model_from_json(meta.at("checkpoint"));
    const auto head_json = ctx.read_json(dir + "head.json", "fit-head --name " + name);
    models.push_back({name, std::move(meta), std::move(model), head_from_json(head_json.at("head"))});
  }
  ctx.read_json("split.json", "split");
  const auto test = ctx.read_corpus("test.jsonl", "split");

  const auto& eval = config_.experiment.eval;
  AblationTable table;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& m = models[i];
    const auto preds = predict_all(m.model, m.head, test);
    const auto report = fairaes::evaluate(preds, eval);
    std::ostringstream out;
    write_predictions_jsonl(out, preds);
    ctx.write("reports/predictions/" + m.name + ".jsonl", out.str());
    ctx.write_json("reports/" + m.name + ".json",
                   {{"model", m.name}, {"kind", m.meta.at("kind")}, {"alpha", m.meta.at("alpha")}, {"report", to_json(report)}});

    const auto alpha = m.meta.at("alpha").is_null() ? std::optional<double>() : m.meta.at("alpha").get<double>();
    std::string label = m.name;
    if (m.meta.at("kind") == "baseline") label = i == 0 ? "Baseline" : "Baseline (" + m.name + ")";
    if (m.meta.at("kind") == "contrastive" && alpha) label = contrastive_label(*alpha);
    if (i == 0) {
      table.baseline = {label, alpha, report, std::nullopt};
    } else {
      table.rows.push_back(compare_to_baseline(label, alpha, report, table.baseline.report));
    }
  }
  ctx.write_json("reports/summary.json", {{"models", names}, {"table", to_json(table)}});
  ctx.write("reports/summary.md", render_markdown(table));
  ctx.finish();
}

void Pipeline::ablate(const StageOptions& options) {
  const auto base_name = pick(options.name, "baseline");
  const auto dir = model_dir(base_name);
  StageContext ctx(*this, "ablate", options.force);
  const auto meta = ctx.read_json(dir + "model.json", "train-baseline");
  const auto head = ctx.read_json(dir + "head.json", "train-baseline");
  TrainedModel baseline{model_from_json(meta.at("checkpoint")), head_from_json(head.at("head")), {}, {}, 0, 0};

  ctx.read_json("split.json", "split");
  PreparedData data;
  data.train = ctx.read_corpus("train.jsonl", "split");
  data.test = ctx.read_corpus("test.jsonl", "split");
  ctx.read_json("triplets.json", "mine");
  std::istringstream stream(ctx.read("triplets.jsonl", "mine"));
  data.mined.triplets = read_triplets_jsonl(stream);
  data.zscore = fit_zscore(data.train);
  data.model = seeded_model(config_.experiment);
  data.train_config = seeded_train(config_.experiment);

  const auto table = fairaes::ablate(config_.alphas, data, baseline, config_.experiment.eval);
  ctx.write_json("reports/ablation.json", {{"baseline_model", base_name}, {"alphas", config_.alphas}, {"table", to_json(table)}});
  ctx.write("reports/ablation.md", render_markdown(table));
  ctx.write("reports/pareto.csv", render_pareto_csv(table));
  ctx.finish();
}

void Pipeline::analyze(const StageOptions& options) {
  const auto names = options.models.empty() ? std::vector<std::string>{"baseline", "contrastive"} : options.models;
  if (names.size() != 2) throw Error(ErrorKind::Config, "analyze compares exactly two models: baseline,contrastive");
  StageContext ctx(*this, "analyze", options.force);
  std::vector<std::vector<ScoredPrediction>> preds;
  for (const auto& name : names) {
    model_dir(name);
    ctx.read_json("reports/" + name + ".json", "evaluate");
    std::istringstream in(ctx.read("reports/predictions/" + name + ".jsonl", "evaluate"));
    preds.push_back(read_predictions_jsonl(in));
  }
  ctx.read_json("split.json", "split");
  const auto test = ctx.read_corpus("test.jsonl", "split");

  Json correlations = Json::object();
  std::ostringstream md;
  md << "ESL sentence statistics vs. predicted score (Pearson r)\n\n";
  md << "| Feature | " << names[0] << " | " << names[1] << " |\n|---|---|---|\n";
  std::vector<CorrelationTable> esl;
  for (std::size_t i = 0; i < names.size(); ++i) {
    Json per_group = Json::object();
    for (Group g : kGroups) {
      auto table = complexity_correlation(preds[i], test, g);
      per_group[std::string(to_string(g))] = to_json(table);
      if (g == Group::ESL) esl.push_back(std::move(table));
    }
    correlations[names[i]] = per_group;
  }
  auto cell = [](const FeatureCorrelation& r) {
    if (!r.with_prediction) return std::string("undefined");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *r.with_prediction);
    return std::string(buf);
  };
  for (std::size_t k = 0; k < esl[0].rows.size(); ++k) {
    md << "| " << esl[0].rows[k].feature << " | " << cell(esl[0].rows[k]) << " | " << cell(esl[1].rows[k]) << " |\n";
  }
  const auto lift = lift_analysis(preds[0], preds[1], test, config_.experiment.min_lift);
  md << "\nESL essays lifted by >= " << alpha_text(lift.min_lift) << ": " << lift.lifted_ids.size() << " of "
     << lift.n_esl << "\n";
  if (lift.lifted_mean && lift.complement_mean) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "mean sentence length: lifted %.2f, rest %.2f\n", lift.lifted_mean->mean_sentence_length,
                  lift.complement_mean->mean_sentence_length);
    md << buf;
  }
  ctx.write_json("reports/analysis.json",
                 {{"models", names}, {"correlations", correlations}, {"lift", to_json(lift)}});
  ctx.write("reports/analysis.md", md.str());
  ctx.finish();
}

}  // namespace fairaes
