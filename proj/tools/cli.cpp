#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "fairaes/error.hpp"
#include "fairaes/pipeline.hpp"
#include "fairaes/serialize.hpp"

namespace fairaes {

namespace {

struct Flags {
  std::string config;
  std::string workdir;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<double> alpha;
  std::string name;
  std::vector<std::string> models;
  bool force = false;
};

PipelineConfig build_config(const Flags& f, const std::string& stage) {
  PipelineConfig c = f.config.empty() ? PipelineConfig{} : load_config(f.config);
  if (!f.workdir.empty()) c.workdir = f.workdir;
  if (f.seed) c.experiment.seed = *f.seed;
  auto& t = c.experiment.train;
  if (f.lr) t.learning_rate = *f.lr;
  if (f.batch_size) t.batch_size = *f.batch_size;
  if (f.epochs) {
    if (stage == "train-baseline") t.epochs_baseline = *f.epochs;
    else if (stage == "fit-head") t.epochs_head = *f.epochs;
    else t.epochs_contrastive = *f.epochs;
  }
  if (f.alpha) {
    t.margin = *f.alpha;
    if (stage == "ablate") c.alphas = {*f.alpha};
  }
  c.validate();
  return c;
}

void print_file(const Pipeline& p, const std::string& relative, std::ostream& out) {
  std::ifstream in(p.path(relative));
  out << in.rdbuf();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fairness-aware essay scoring pipeline", "fairaes"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "YAML pipeline config")->check(CLI::ExistingFile);
  app.add_option("--workdir", f.workdir, "Artifact directory (overrides the config)");
  app.add_option("--seed", f.seed, "Global seed (overrides the config)");
  app.add_option("--lr", f.lr, "SGD learning rate");
  app.add_option("--epochs", f.epochs, "Epoch count of the stage being run")->check(CLI::PositiveNumber);
  app.add_option("--batch-size", f.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  app.add_flag("--force", f.force, "Accept artifacts produced under a different config hash");

  const std::pair<const char*, const char*> stages[] = {
      {"synth", "Generate the synthetic planted-bias corpus"},
      {"ingest", "Read the configured input files into corpus.jsonl"},
      {"split", "Stratified train/test split"},
      {"mine", "Mine fairness triplets from the training split"},
      {"train-baseline", "Joint adapter and head training on squared error"},
      {"train-contrastive", "Adapter training on the triplet margin loss"},
      {"fit-head", "Linear head on a frozen contrastive model"},
      {"evaluate", "Score the test split and write fairness reports"},
      {"ablate", "Contrastive runs for every configured alpha against one baseline"},
      {"analyze", "Sentence statistics vs. predictions and the lifted ESL subset"},
  };
  for (const auto& [name, help] : stages) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    const std::string s = name;
    if (s == "train-contrastive" || s == "ablate") {
      sub->add_option("--alpha", f.alpha, "Triplet margin")->check(CLI::PositiveNumber);
    }
    if (s == "train-baseline" || s == "train-contrastive" || s == "fit-head" || s == "ablate") {
      sub->add_option("--name", f.name, "Model name under models/");
    }
    if (s == "evaluate" || s == "analyze") {
      sub->add_option("--models", f.models, "Model names; the first is the reference row")->delimiter(',');
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
    return 2;
  }
  const std::string stage = app.get_subcommands().front()->get_name();

  try {
    Pipeline p(build_config(f, stage));
    StageOptions options{f.name, f.models, f.force};
    if (stage == "synth") p.synth();
    else if (stage == "ingest") p.ingest();
    else if (stage == "split") p.split(options);
    else if (stage == "mine") p.mine(options);
    else if (stage == "train-baseline") p.train_baseline(options);
    else if (stage == "train-contrastive") p.train_contrastive(options, p.config().experiment.train.margin);
    else if (stage == "fit-head") p.fit_head(options);
    else if (stage == "evaluate") p.evaluate(options);
    else if (stage == "ablate") p.ablate(options);
    else if (stage == "analyze") p.analyze(options);

    out << stage << ": ok (config " << p.hash() << ", workdir " << p.config().workdir.string() << ")\n";
    if (stage == "evaluate") print_file(p, "reports/summary.md", out);
    if (stage == "ablate") print_file(p, "reports/ablation.md", out);
    if (stage == "analyze") print_file(p, "reports/analysis.md", out);
    return 0;
  } catch (const Error& e) {
    err << e.what() << "\n";
    if (e.kind() == ErrorKind::Config) {
      err << "run with --help for usage\n";
      return 2;
    }
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fairaes
