#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fairaes/error.hpp"
#include "fairaes/experiment.hpp"
#include "fairaes/linguistics.hpp"
#include "fairaes/pipeline.hpp"
#include "fairaes/serialize.hpp"
#include "fairaes/synthcorpus.hpp"
#include "fairaes/version.hpp"

namespace py = pybind11;
using namespace fairaes;

namespace {

py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::dict essay_dict(const Essay& e) {
  py::dict d;
  d["id"] = e.id;
  d["text"] = e.text;
  d["score"] = e.score_norm;
  d["group"] = std::string(to_string(e.group));
  return d;
}

// Essays as dicts with id, text, score in [0, 1] and group.
Corpus corpus_from(const py::list& essays) {
  Corpus c;
  for (const auto& item : essays) {
    const auto d = item.cast<py::dict>();
    Essay e;
    e.id = d["id"].cast<std::string>();
    e.text = d.contains("text") ? d["text"].cast<std::string>() : std::string();
    e.score_norm = e.raw_score = d["score"].cast<double>();
    e.group = parse_group(d["group"].cast<std::string>());
    c.push_back(std::move(e));
  }
  return c;
}

std::vector<ScoredPrediction> predictions_from(const std::vector<double>& human, const std::vector<double>& predicted,
                                               const std::vector<std::string>& groups) {
  if (human.size() != predicted.size() || (!groups.empty() && groups.size() != human.size())) {
    throw Error(ErrorKind::Shape, "human, predicted and groups must have equal lengths");
  }
  std::vector<ScoredPrediction> out;
  for (std::size_t i = 0; i < human.size(); ++i) {
    const Group g = groups.empty() ? Group::Native : parse_group(groups[i]);
    out.push_back(ScoredPrediction::make(std::to_string(i), human[i], predicted[i], g));
  }
  return out;
}

SynthConfig synth_config(const py::kwargs& kw) {
  SynthConfig c;
  for (const auto& [key, value] : kw) {
    const auto k = key.cast<std::string>();
    if (k == "n_native") c.n_native = value.cast<std::size_t>();
    else if (k == "n_esl") c.n_esl = value.cast<std::size_t>();
    else if (k == "seed") c.seed = value.cast<std::uint64_t>();
    else if (k == "esl_quality_shift") c.esl_quality_shift = value.cast<double>();
    else if (k == "marker_sentence_stretch") c.marker_sentence_stretch = value.cast<double>();
    else if (k == "marker_tokens") c.marker_tokens = value.cast<std::size_t>();
    else if (k == "noise_sd") c.noise_sd = value.cast<double>();
    else if (k == "vocab_size") c.vocab_size = value.cast<std::size_t>();
    else throw Error(ErrorKind::Config, "unknown synth option '" + k + "'");
  }
  return c;
}

}  // namespace

PYBIND11_MODULE(_fairaes, m) {
  m.doc() = "Bindings for the fairaes essay-scoring library";
  m.attr("__version__") = std::string(kVersion);

  static py::exception<Error> error(m, "FairaesError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error.ptr())(e.what());
      exc.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  m.def("tokenize", &tokenize, py::arg("text"));
  m.def(
      "sentence_stats", [](const std::string& text) { return to_python(to_json(sentence_stats(text))); },
      py::arg("text"));
  m.def(
      "pearson", [](const std::vector<double>& x, const std::vector<double>& y) { return pearson(x, y); }, py::arg("xs"),
      py::arg("ys"));
  m.def(
      "qwk",
      [](const std::vector<double>& human, const std::vector<double>& predicted, int n_bins) {
        return qwk(predictions_from(human, predicted, {}), n_bins);
      },
      py::arg("human"), py::arg("predicted"), py::arg("n_bins") = 6);
  m.def(
      "residual_report",
      [](const std::vector<double>& human, const std::vector<double>& predicted, const std::vector<std::string>& groups,
         double threshold) { return to_python(to_json(residual_report(predictions_from(human, predicted, groups), threshold))); },
      py::arg("human"), py::arg("predicted"), py::arg("groups"), py::arg("hiprof_threshold") = 0.8);
  m.def("gap_reduction", &gap_reduction, py::arg("baseline_gap"), py::arg("mitigated_gap"));

  m.def(
      "triplet_loss",
      [](const Eigen::VectorXd& a, const Eigen::VectorXd& p, const Eigen::VectorXd& n, double margin) {
        return triplet_loss(a, p, n, margin);
      },
      py::arg("anchor"), py::arg("positive"), py::arg("negative"), py::arg("margin") = 1.0);
  m.def(
      "triplet_loss_grad",
      [](const Eigen::VectorXd& a, const Eigen::VectorXd& p, const Eigen::VectorXd& n, double margin, double eps) {
        const auto g = triplet_loss_grad(a, p, n, margin, eps);
        return py::make_tuple(g.loss, g.anchor, g.positive, g.negative);
      },
      py::arg("anchor"), py::arg("positive"), py::arg("negative"), py::arg("margin") = 1.0,
      py::arg("epsilon_dist") = 1e-9);

  m.def(
      "generate_synth",
      [](const py::kwargs& kw) {
        const auto out = generate(synth_config(kw));
        py::list essays;
        for (const auto& e : out.corpus) essays.append(essay_dict(e));
        return py::make_tuple(essays, to_python(to_json(out.manifest)));
      },
      "Synthetic corpus as (essays, manifest); keywords override SynthConfig fields");

  m.def(
      "mine_triplets",
      [](const py::list& essays, double eps_pos, double eps_neg, std::uint64_t seed, std::size_t per_anchor,
         const std::string& band) {
        MinerConfig cfg;
        cfg.eps_pos = eps_pos;
        cfg.eps_neg = eps_neg;
        cfg.seed = seed;
        cfg.max_triplets_per_anchor = per_anchor;
        cfg.negative_band = parse_negative_band(band);
        const auto r = mine_triplets(corpus_from(essays), cfg);
        py::list out;
        for (const auto& t : r.triplets) out.append(to_python(to_json(t)));
        return out;
      },
      py::arg("essays"), py::arg("eps_pos") = 0.02, py::arg("eps_neg") = 0.20, py::arg("seed") = 0,
      py::arg("max_triplets_per_anchor") = 1, py::arg("negative_band") = "outside");

  m.def(
      "run_experiment",
      [](std::uint64_t seed, const std::vector<double>& alphas, const py::kwargs& synth) {
        ExperimentConfig cfg;
        cfg.seed = seed;
        const auto synth_cfg = synth_config(synth);
        AblationTable table;
        {
          py::gil_scoped_release release;
          const auto data = prepare(generate(synth_cfg).corpus, cfg);
          table = ablate(alphas, data, run_baseline(data), cfg.eval);
        }
        py::dict out;
        out["table"] = to_python(to_json(table));
        out["markdown"] = render_markdown(table);
        out["pareto_csv"] = render_pareto_csv(table);
        return out;
      },
      py::arg("seed") = 42, py::arg("alphas") = std::vector<double>{1.0, 2.0},
      "Baseline plus one contrastive run per alpha on a synthetic corpus; keywords override SynthConfig fields");

  py::class_<Pipeline>(m, "Pipeline")
      .def(py::init([](const std::optional<std::filesystem::path>& config, const std::optional<std::filesystem::path>& workdir) {
             PipelineConfig c = config ? load_config(*config) : PipelineConfig{};
             if (workdir) c.workdir = *workdir;
             return Pipeline(std::move(c));
           }),
           py::arg("config") = py::none(), py::arg("workdir") = py::none())
      .def_property_readonly("hash", &Pipeline::hash)
      .def_property_readonly("workdir", [](const Pipeline& p) { return p.config().workdir; })
      .def(
          "run",
          [](Pipeline& p, const std::string& stage, const std::string& name, const std::vector<std::string>& models,
             bool force, std::optional<double> alpha) {
            StageOptions o{name, models, force};
            py::gil_scoped_release release;
            if (stage == "synth") p.synth();
            else if (stage == "ingest") p.ingest();
            else if (stage == "split") p.split(o);
            else if (stage == "mine") p.mine(o);
            else if (stage == "train-baseline") p.train_baseline(o);
            else if (stage == "train-contrastive") p.train_contrastive(o, alpha.value_or(p.config().experiment.train.margin));
            else if (stage == "fit-head") p.fit_head(o);
            else if (stage == "evaluate") p.evaluate(o);
            else if (stage == "ablate") p.ablate(o);
            else if (stage == "analyze") p.analyze(o);
            else throw Error(ErrorKind::Config, "unknown stage '" + stage + "'");
          },
          py::arg("stage"), py::arg("name") = "", py::arg("models") = std::vector<std::string>{}, py::arg("force") = false,
          py::arg("alpha") = py::none());
}
