#include <algorithm>
#include <chrono>
#include <map>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

#include "fairaes/error.hpp"
#include "fairaes/synthcorpus.hpp"
#include "fairaes/triplet_miner.hpp"

using namespace fairaes;
using fairaes::test::essay;

using fairaes::test::brute_force;


TEST_CASE("only one legal assignment") {
  Corpus c{essay("a", 0.50, Group::Native), essay("p", 0.51, Group::ESL), essay("n", 0.90, Group::Native)};
  MinerConfig cfg;
  const auto r = mine_triplets(c, cfg);
  REQUIRE(r.triplets.size() == 1);
  CHECK(r.triplets[0] == Triplet{"a", "p", "n", 0.50});
  // the 0.90 essay is an anchor too, but has no positive
  CHECK(r.n_skipped_no_positive == 1);
}

TEST_CASE("no ESL essays means no positives") {
  Corpus c;
  for (int i = 0; i < 6; ++i) c.push_back(essay("n" + std::to_string(i), 0.1 * i, Group::Native));
  const auto r = mine_triplets(c, MinerConfig{});
  CHECK(r.triplets.empty());
  CHECK(r.n_skipped_no_positive == 6);
}

TEST_CASE("anchor without a distant negative is skipped") {
  Corpus c{essay("a", 0.50, Group::Native), essay("p", 0.51, Group::ESL), essay("q", 0.55, Group::Native)};
  const auto r = mine_triplets(c, MinerConfig{});
  CHECK(r.triplets.empty());
  CHECK(r.n_skipped_no_negative == 1);
  CHECK(r.n_skipped_no_positive == 1);
}

TEST_CASE("500-essay synthetic corpus against the brute-force oracle") {
  SynthConfig sc;
  sc.n_native = 385;
  sc.n_esl = 115;
  sc.seed = 5;
  const auto corpus = generate(sc).corpus;
  MinerConfig cfg;
  cfg.seed = 77;
  const auto r = mine_triplets(corpus, cfg);
  const auto oracle = brute_force(corpus, cfg);
  CHECK(r.triplets.size() == oracle.eligible_anchors);
  CHECK(r.n_emitting == oracle.eligible_anchors);
  CHECK(validate_triplets(r.triplets, corpus, cfg).total() == 0);
}

TEST_CASE("triplet constraints hold on random corpora") {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(31337);
  std::size_t total = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const bool snap = trial % 2 == 0;  // grid scores land exactly on band edges
    const auto c = test::random_corpus(rng, 5 + rng.below(80), rng.below(40), snap);
    MinerConfig cfg;
    cfg.seed = rng.next();
    cfg.eps_pos = snap ? 0.02 : rng.uniform(0.01, 0.08);
    cfg.eps_neg = snap ? 0.20 : rng.uniform(0.1, 0.5);
    if (trial % 5 == 4) cfg.negative_band = NegativeBand::Inside;
    const auto r = mine_triplets(c, cfg);
    const auto v = validate_triplets(r.triplets, c, cfg);
    CHECK(v.total() == 0);
    for (const auto& t : r.triplets) {
      CHECK(t.anchor_id != t.positive_id);
      CHECK(t.anchor_id != t.negative_id);
      CHECK(t.positive_id != t.negative_id);
    }
    const auto oracle = brute_force(c, cfg);
    CHECK(r.triplets.size() == oracle.eligible_anchors);
    std::size_t natives = 0;
    for (const auto& e : c) natives += e.group == Group::Native ? 1 : 0;
    CHECK(r.n_emitting + r.n_skipped_no_positive + r.n_skipped_no_negative == natives);
    total += r.triplets.size();
  }
  CHECK(total > 0);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(30));
}

TEST_CASE("several triplets per anchor use distinct positives") {
  Rng rng(12);
  const auto c = test::random_corpus(rng, 60, 60);
  MinerConfig cfg;
  cfg.max_triplets_per_anchor = 3;
  cfg.eps_pos = 0.05;
  const auto r = mine_triplets(c, cfg);
  const auto oracle = brute_force(c, cfg);
  std::map<std::string, std::set<std::string>> seen;
  for (const auto& t : r.triplets) {
    CHECK(seen[t.anchor_id].insert(t.positive_id).second);
  }
  for (const auto& [anchor, n_pos] : oracle.positives) {
    const auto got = seen.count(anchor) ? seen[anchor].size() : 0;
    CHECK(got == std::min<std::size_t>(3, n_pos));
  }
}

TEST_CASE("mining is deterministic and order independent") {
  Rng rng(8);
  auto c = test::random_corpus(rng, 70, 30);
  MinerConfig cfg;
  cfg.seed = 4;
  const auto a = mine_triplets(c, cfg);
  CHECK(a.triplets == mine_triplets(c, cfg).triplets);
  rng.shuffle(std::span<Essay>(c));
  CHECK(a.triplets == mine_triplets(c, cfg).triplets);
  CHECK(std::is_sorted(a.triplets.begin(), a.triplets.end(),
                       [](const Triplet& x, const Triplet& y) { return x.anchor_id < y.anchor_id; }));
  cfg.seed = 5;
  CHECK(a.triplets.size() == mine_triplets(c, cfg).triplets.size());
}

TEST_CASE("validation counts hand-built violations") {
  Corpus c{essay("a", 0.50, Group::Native), essay("p", 0.55, Group::ESL), essay("n", 0.60, Group::Native),
           essay("far", 0.95, Group::ESL), essay("close", 0.51, Group::ESL)};
  MinerConfig cfg;
  const std::vector<Triplet> wide_positive{{"a", "p", "far", 0.5}};
  auto v = validate_triplets(wide_positive, c, cfg);
  CHECK(v.positive_band_violations == 1);
  CHECK(v.total() == 1);
  const std::vector<Triplet> near_negative{{"a", "close", "n", 0.5}};
  v = validate_triplets(near_negative, c, cfg);
  CHECK(v.negative_band_violations == 1);
  CHECK(v.total() == 1);
  const std::vector<Triplet> swapped{{"p", "a", "far", 0.55}};
  CHECK(validate_triplets(swapped, c, cfg).group_violations == 1);
  const std::vector<Triplet> unknown{{"a", "ghost", "far", 0.5}};
  CHECK_THROWS_AS(validate_triplets(unknown, c, cfg), Error);
}

TEST_CASE("miner config errors") {
  MinerConfig cfg;
  cfg.eps_pos = 0.3;
  Corpus c{essay("a", 0.5, Group::Native)};
  CHECK_THROWS_AS(mine_triplets(c, cfg), Error);
  CHECK_THROWS_AS(mine_triplets(Corpus{}, MinerConfig{}), Error);
  CHECK(parse_negative_band("inside") == NegativeBand::Inside);
  CHECK_THROWS_AS(parse_negative_band("sideways"), Error);
}
