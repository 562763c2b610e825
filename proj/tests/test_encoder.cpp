#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

#include "fairaes/encoder.hpp"
#include "fairaes/error.hpp"

using namespace fairaes;

namespace {

ModelConfig small_config(std::size_t buckets = 64, std::size_t dim = 8, std::size_t rank = 3) {
  ModelConfig c;
  c.features.n_buckets = buckets;
  c.dim = dim;
  c.rank = rank;
  c.base_seed = 17;
  c.adapter_seed = 18;
  return c;
}

// Explicit loops, no Eigen products: h_i = sum_j W0_ij x_j + sum_k B_ik sum_j A_kj x_j.
Eigen::VectorXd embed_by_hand(const EmbeddingModel& m, const Eigen::VectorXd& x) {
  const auto& w0 = m.base();
  const auto a = m.adapter_a();
  const auto b = m.adapter_b();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(w0.rows());
  for (Eigen::Index i = 0; i < w0.rows(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < w0.cols(); ++j) acc += w0(i, j) * x[j];
    for (Eigen::Index k = 0; k < a.rows(); ++k) {
      double ax = 0.0;
      for (Eigen::Index j = 0; j < a.cols(); ++j) ax += a(k, j) * x[j];
      acc += b(i, k) * ax;
    }
    h[i] = acc;
  }
  return h;
}

}  // namespace

TEST_CASE("tokenizer") {
  CHECK(tokenize("The cat sat. The cat ran.") ==
        std::vector<std::string>{"the", "cat", "sat", ".", "the", "cat", "ran", "."});
  CHECK(tokenize("  It's  fine, OK?") == std::vector<std::string>{"it's", "fine", ",", "ok", "?"});
  CHECK(tokenize("").empty());
}

TEST_CASE("hashed buckets match the golden file") {
  std::ifstream in(test::data_path("golden_buckets.tsv"));
  REQUIRE(in);
  FeatureConfig cfg;
  CHECK(cfg.hash_version == 1);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    const auto text = line.substr(0, tab);
    std::istringstream nums(line.substr(tab + 1));
    std::vector<std::size_t> expected;
    for (std::size_t b; nums >> b;) expected.push_back(b);
    auto got = ngram_buckets(text, cfg);
    if (got.size() > 8) got.resize(8);
    CHECK_MESSAGE(got == expected, text);
    ++rows;
  }
  CHECK(rows >= 5);
}

TEST_CASE("bigrams need three tokens") {
  FeatureConfig cfg;
  CHECK(ngram_buckets("one two", cfg).size() == 2);
  CHECK(ngram_buckets("one two three", cfg).size() == 5);
}

TEST_CASE("feature extraction") {
  FeatureConfig cfg;
  cfg.n_buckets = 256;
  const auto a = extract_features("Some text, here.", cfg);
  const auto b = extract_features("Some text, here.", cfg);
  CHECK(a.size() == static_cast<Eigen::Index>(cfg.dimension()));
  CHECK((a.array() == b.array()).all());
  CHECK(a.allFinite());
  CHECK(a.head(256).norm() == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("single repeated token") {
    const auto v = extract_features("word word word word", cfg);
    const auto block = v.head(256);
    CHECK(block.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const auto active = (block.array() != 0.0).count();
    CHECK(active <= 2);  // the unigram plus its own bigram
  }
  CHECK_THROWS_AS(extract_features("   ", cfg), Error);
  CHECK_THROWS_AS(extract_features("", cfg), Error);
}

TEST_CASE("surface stats hand count") {
  const auto s = surface_stats(std::string_view("The cat sat. The cat ran."));
  CHECK(s.token_count == 8);
  CHECK(s.mean_sentence_length == 4);
  CHECK(s.sentence_length_variance == 0);
  CHECK(s.comma_rate == 0);
  CHECK(s.long_word_rate == 0);

  const auto t = surface_stats(std::string_view("Wonderful, marvellous day. Yes"));
  // tokens: wonderful , marvellous day . yes -> sentences of 5 and 1
  CHECK(t.token_count == 6);
  CHECK(t.mean_sentence_length == 3);
  CHECK(t.sentence_length_variance == 4);
  CHECK(t.comma_rate == 0.5);
  CHECK(t.long_word_rate == doctest::Approx(2.0 / 4.0));
}

TEST_CASE("z-score fit") {
  const std::vector<std::string> texts{"a b c.", "a b c d e.", "a."};
  const auto z = ZScore::fit(texts);
  CHECK(z.mean[0] == doctest::Approx((4 + 6 + 2) / 3.0));
  CHECK(z.scale[0] == doctest::Approx(std::sqrt(8.0 / 3.0)));
  CHECK(z.scale[4] == 1.0);  // no long words anywhere: zero spread maps to 1
  const auto v = extract_features("a b c.", FeatureConfig{}, z);
  CHECK(v[static_cast<Eigen::Index>(FeatureConfig{}.n_buckets)] == doctest::Approx(0.0));
}

TEST_CASE("embedding model") {
  const EmbeddingModel m(small_config(), ZScore::identity());
  const auto x = m.featurize("a small essay, with words. and another sentence.");

  CHECK(m.adapter_b().isZero());
  const Eigen::VectorXd base_only = m.base() * x;
  CHECK((m.embed(x).array() == base_only.array()).all());

  SUBCASE("W0 is regenerated from its seed") {
    const EmbeddingModel again(small_config(), ZScore::identity());
    CHECK(again.base_checksum() == m.base_checksum());
    CHECK(again.adapter_checksum() == m.adapter_checksum());
    auto other = small_config();
    other.base_seed = 99;
    CHECK(EmbeddingModel(other, ZScore::identity()).base_checksum() != m.base_checksum());
  }
  SUBCASE("columns are scaled by 1/sqrt(F)") {
    const EmbeddingModel big(small_config(4096, 64, 4), ZScore::identity());
    const double var = big.base().array().square().mean();
    CHECK(var * static_cast<double>(big.feature_dim()) == doctest::Approx(1.0).epsilon(0.02));
  }
  SUBCASE("linearity and hand oracle") {
    EmbeddingModel n(small_config(), ZScore::identity());
    Rng r(1);
    for (auto& p : n.adapter_parameters()) p = r.normal();
    CHECK((n.embed(2.0 * x) - 2.0 * n.embed(x)).norm() <= 1e-12 * n.embed(x).norm());
    CHECK((n.embed(x) - embed_by_hand(n, x)).norm() <= 1e-12 * (1.0 + n.embed(x).norm()));
    Eigen::MatrixXd xs(x.size(), 2);
    xs.col(0) = x;
    xs.col(1) = 0.5 * x;
    const auto hs = n.embed_batch(xs);
    CHECK((hs.col(0) - n.embed(x)).norm() <= 1e-12 * (1.0 + hs.col(0).norm()));
    const Eigen::MatrixXd delta = n.adapter_b() * n.adapter_a();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(delta);
    CHECK(lu.rank() <= static_cast<Eigen::Index>(n.rank()));
  }
  SUBCASE("shape errors") {
    CHECK_THROWS_AS(m.embed(Eigen::VectorXd::Zero(3)), Error);
    CHECK_THROWS_AS(m.embed_batch(Eigen::MatrixXd::Zero(3, 2)), Error);
  }
}

TEST_CASE("two by two hand model") {
  Eigen::MatrixXd w0(2, 2), a(1, 2), b(2, 1);
  w0 << 1, 0, 0, 1;
  a << 0, 1;
  b << 1, 0;
  const auto m = EmbeddingModel::from_matrices(w0, a, b);
  const auto h = m.embed(Eigen::Vector2d(1, 1));
  CHECK(h[0] == 2.0);
  CHECK(h[1] == 1.0);
}

TEST_CASE("adapter parameter view") {
  ModelConfig c;
  c.features.n_buckets = 995;  // F = 1000 with the surface block
  c.dim = 64;
  c.rank = 16;
  EmbeddingModel m(c, ZScore::identity());
  REQUIRE(m.feature_dim() == 1000);
  CHECK(m.adapter_parameters().size() == 17024);

  const auto x = m.featurize("Probe text for the adapter view, nothing more.");
  Rng r(8);
  for (auto& p : m.adapter_parameters()) p = r.normal(0.0, 0.1);

  SUBCASE("finite-difference probe of one A entry") {
    const std::size_t k = 3, j = 123;  // A(k, j)
    const double step = 1e-5;
    auto params = m.adapter_parameters();
    const double orig = params[k * m.feature_dim() + j];
    params[k * m.feature_dim() + j] = orig + step;
    const Eigen::VectorXd hp = m.embed(x);
    params[k * m.feature_dim() + j] = orig - step;
    const Eigen::VectorXd hm = m.embed(x);
    params[k * m.feature_dim() + j] = orig;
    const Eigen::VectorXd fd = (hp - hm) / (2 * step);
    const Eigen::VectorXd analytic = m.adapter_b().col(static_cast<Eigen::Index>(k)) * x[static_cast<Eigen::Index>(j)];
    CHECK((fd - analytic).norm() <= 1e-6 * (1.0 + analytic.norm()));
  }
  SUBCASE("zeroing the view leaves the base model") {
    for (auto& p : m.adapter_parameters()) p = 0.0;
    CHECK((m.embed(x) - m.base() * x).norm() == 0.0);
  }
  CHECK_THROWS_AS(m.set_adapter(std::vector<double>(5, 0.0)), Error);
}
