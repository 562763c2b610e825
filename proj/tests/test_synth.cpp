#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

#include "fairaes/error.hpp"
#include "fairaes/linguistics.hpp"
#include "fairaes/random.hpp"
#include "fairaes/serialize.hpp"
#include "fairaes/synthcorpus.hpp"

using namespace fairaes;

namespace {

std::string corpus_bytes(const Corpus& c) {
  std::ostringstream out;
  write_corpus_jsonl(out, c);
  return out.str();
}

}  // namespace

TEST_CASE("exchangeable groups when nothing is planted") {
  SynthConfig c;
  c.n_native = 500;
  c.n_esl = 500;
  c.esl_quality_shift = 0.0;
  c.marker_tokens = 0;
  c.marker_sentence_stretch = 1.0;
  const auto corpus = generate(c).corpus;
  std::vector<double> scores;
  std::vector<int> esl;
  for (const auto& e : corpus) {
    scores.push_back(e.score_norm);
    esl.push_back(e.group == Group::ESL);
  }
  auto mean_diff = [&](const std::vector<int>& labels) {
    double sn = 0, se = 0, nn = 0, ne = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (labels[i]) {
        se += scores[i];
        ++ne;
      } else {
        sn += scores[i];
        ++nn;
      }
    }
    return se / ne - sn / nn;
  };
  const double observed = mean_diff(esl);
  Rng r(5);
  std::vector<double> null;
  auto labels = esl;
  for (int t = 0; t < 1000; ++t) {
    r.shuffle(std::span<int>(labels));
    null.push_back(mean_diff(labels));
  }
  const double mu = std::accumulate(null.begin(), null.end(), 0.0) / null.size();
  double var = 0;
  for (double v : null) var += (v - mu) * (v - mu) / (null.size() - 1);
  CHECK(std::abs(observed - mu) <= 3.0 * std::sqrt(var));

  for (const auto& e : corpus) {
    const auto s = sentence_stats(e.text);
    CHECK(s.n_tokens > 0);
  }
}

TEST_CASE("noiseless human scores equal latent quality") {
  SynthConfig c;
  c.n_native = 50;
  c.n_esl = 50;
  c.noise_sd = 0.0;
  const auto out = generate(c);
  REQUIRE(out.manifest.essays.size() == 100);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(out.manifest.essays[i].human == out.manifest.essays[i].quality);
    CHECK(out.corpus[i].score_norm == out.manifest.essays[i].quality);
    CHECK(out.corpus[i].id == out.manifest.essays[i].id);
  }
}

TEST_CASE("default seed-42 summary matches the frozen manifest") {
  const auto out = generate(SynthConfig{});
  std::ifstream in(test::data_path("synth_seed42_summary.json"));
  REQUIRE(in);
  const auto golden = Json::parse(in);
  const auto got = to_json(out.manifest);
  for (const char* group : {"native", "esl"}) {
    const auto& g = golden.at(group);
    const auto& m = got.at(group);
    CHECK(m.at("count").get<std::size_t>() == g.at("count").get<std::size_t>());
    for (const char* key : {"mean_quality", "mean_human", "marker_rate", "quality_rate"}) {
      INFO(group << "." << key);
      CHECK(m.at(key).get<double>() == doctest::Approx(g.at(key).get<double>()).epsilon(1e-12));
    }
  }
  CHECK(out.corpus.size() == 2600);
  CHECK(out.manifest.esl.mean_quality < out.manifest.native.mean_quality);
  CHECK(out.manifest.native.marker_rate == 0.0);
  CHECK(out.manifest.esl.marker_rate > 0.0);
}

TEST_CASE("planted shortcut and quality signal") {
  const auto out = generate(SynthConfig{});
  std::vector<double> human, marker, quality;
  for (const auto& t : out.manifest.essays) {
    human.push_back(t.human);
    marker.push_back(static_cast<double>(t.n_marker_tokens) / static_cast<double>(t.n_tokens));
    quality.push_back(static_cast<double>(t.n_quality_tokens) / static_cast<double>(t.n_tokens));
  }
  CHECK(pearson(marker, human) < -0.1);
  CHECK(pearson(quality, human) > 0.3);

  // ESL sentences run longer on average
  double native_msl = 0, esl_msl = 0;
  for (const auto& e : out.corpus) {
    const double m = sentence_stats(e.text).mean_sentence_length;
    (e.group == Group::ESL ? esl_msl : native_msl) += m;
  }
  CHECK(esl_msl / 600 > native_msl / 2000);
}

TEST_CASE("generation is deterministic per seed") {
  SynthConfig c;
  c.n_native = 40;
  c.n_esl = 20;
  const auto a = generate(c), b = generate(c);
  CHECK(corpus_bytes(a.corpus) == corpus_bytes(b.corpus));
  CHECK(dump(to_json(a.manifest)) == dump(to_json(b.manifest)));
  c.seed = 43;
  CHECK(corpus_bytes(generate(c).corpus) != corpus_bytes(a.corpus));
}

TEST_CASE("vocabulary layout") {
  const SynthConfig c;
  const auto vocab = synth_vocabulary(c);
  REQUIRE(vocab.size() == c.vocab_size);
  for (std::size_t i = 0; i < c.quality_tokens; ++i) CHECK(vocab[i].size() >= 7);
  std::set<std::string> unique(vocab.begin(), vocab.end());
  CHECK(unique.size() == vocab.size());
}

TEST_CASE("synth config errors") {
  auto expect_config_error = [](SynthConfig c) {
    try {
      generate(c);
      FAIL("expected a config error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Config);
    }
  };
  SynthConfig c;
  c.n_esl = 9;
  expect_config_error(c);
  c = SynthConfig{};
  c.noise_sd = 0.3;
  expect_config_error(c);
  c = SynthConfig{};
  c.esl_quality_shift = 0.1;
  expect_config_error(c);
  c = SynthConfig{};
  c.esl_quality_shift = -0.5;
  expect_config_error(c);
  c = SynthConfig{};
  c.marker_sentence_stretch = 0.9;
  expect_config_error(c);
  c = SynthConfig{};
  c.vocab_size = 60;
  expect_config_error(c);
}
