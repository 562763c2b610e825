#include <fstream>
#include <functional>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

#include "fairaes/error.hpp"
#include "fairaes/serialize.hpp"

using namespace fairaes;

namespace {

EmbeddingModel small_model() {
  ModelConfig c;
  c.features.n_buckets = 64;
  c.dim = 8;
  c.rank = 3;
  c.base_seed = 11;
  c.adapter_seed = 12;
  ZScore z;
  z.mean = {1, 2, 3, 4, 5};
  z.scale = {0.5, 0.25, 2, 3, 1.5};
  EmbeddingModel m(c, z);
  Rng r(3);
  for (auto& p : m.adapter_parameters()) p = r.normal() / 3.0;
  return m;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("hex64") {
  CHECK(hex64(0) == "0000000000000000");
  CHECK(hex64(0xcbf29ce484222325ull) == "cbf29ce484222325");
}

TEST_CASE("split and triplets round trip") {
  const SplitManifest s{{"a", "b"}, {"c"}, 99, 0.75};
  const auto back = split_from_json(to_json(s));
  CHECK(back.train_ids == s.train_ids);
  CHECK(back.test_ids == s.test_ids);
  CHECK(back.seed == 99);
  CHECK(back.ratio == 0.75);

  const std::vector<Triplet> t{{"a", "p", "n", 0.125}, {"b", "q", "m", 1.0 / 3.0}};
  std::stringstream io;
  write_triplets_jsonl(io, t);
  CHECK(read_triplets_jsonl(io) == t);

  std::stringstream bad("{\"anchor\": 1}\n");
  CHECK(kind_of([&] { read_triplets_jsonl(bad); }) == ErrorKind::Parse);
}

TEST_CASE("model checkpoint") {
  const auto m = small_model();
  const auto j = to_json(m);
  CHECK(j.at("format_version") == kCheckpointFormatVersion);
  CHECK(j.at("A").size() == 3 * m.feature_dim());
  CHECK(j.at("B").size() == 24);

  SUBCASE("round trip is exact") {
    const auto back = model_from_json(Json::parse(j.dump()));
    CHECK(back.adapter_checksum() == m.adapter_checksum());
    CHECK(back.base_checksum() == m.base_checksum());
    CHECK(back.zscore() == m.zscore());
    CHECK(back.features() == m.features());
    CHECK(dump(to_json(back)) == dump(j));
  }
  SUBCASE("tampered W0 seed") {
    auto bad = j;
    bad["base_seed"] = 12345;
    CHECK(kind_of([&] { model_from_json(bad); }) == ErrorKind::Integrity);
  }
  SUBCASE("tampered adapter value") {
    auto bad = j;
    bad["A"][0] = bad["A"][0].get<double>() + 1e-9;
    CHECK(kind_of([&] { model_from_json(bad); }) == ErrorKind::Integrity);
  }
  SUBCASE("wrong adapter size") {
    auto bad = j;
    bad["B"].erase(bad["B"].size() - 1);
    CHECK(kind_of([&] { model_from_json(bad); }) == ErrorKind::Shape);
  }
  SUBCASE("future format") {
    auto bad = j;
    bad["format_version"] = 2;
    CHECK(kind_of([&] { model_from_json(bad); }) == ErrorKind::Compatibility);
  }
  SUBCASE("other hash version") {
    auto bad = j;
    bad["features"]["hash_version"] = 999;
    CHECK(kind_of([&] { model_from_json(bad); }) == ErrorKind::Compatibility);
  }
  SUBCASE("feature_dim mismatch") {
    auto bad = j;
    bad["feature_dim"] = 7;
    CHECK(kind_of([&] { model_from_json(bad); }) == ErrorKind::Shape);
  }
  SUBCASE("missing key") {
    auto bad = j;
    bad.erase("zscore");
    CHECK(kind_of([&] { model_from_json(bad); }) == ErrorKind::Schema);
  }
}

TEST_CASE("head and predictions round trip") {
  RegressionHead h{Eigen::Vector3d(0.1, -0.2, 1.0 / 7.0), 0.3};
  const auto back = head_from_json(Json::parse(to_json(h).dump()));
  CHECK(back.w == h.w);
  CHECK(back.b == h.b);
  auto bad = to_json(h);
  bad["dim"] = 4;
  CHECK(kind_of([&] { head_from_json(bad); }) == ErrorKind::Shape);

  const std::vector<ScoredPrediction> p{ScoredPrediction::make("a", 0.5, 0.25, Group::ESL),
                                        ScoredPrediction::make("b", 1.0, 1.0 / 3.0, Group::Native)};
  std::stringstream io;
  write_predictions_jsonl(io, p);
  const auto got = read_predictions_jsonl(io);
  REQUIRE(got.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(got[i].essay_id == p[i].essay_id);
    CHECK(got[i].human == p[i].human);
    CHECK(got[i].predicted == p[i].predicted);
    CHECK(got[i].group == p[i].group);
  }
}

TEST_CASE("fairness report round trip keeps nulls") {
  FairnessReport r;
  r.qwk = 0.5;
  r.n_predictions = 3;
  r.native = {2, -0.1};
  r.esl = {1, 0.2};
  r.hiprof_native = {1, -0.05};
  r.hiprof_esl = {0, std::nullopt};
  const auto j = to_json(r);
  CHECK(j.at("hiprof_gap").is_null());
  const auto back = report_from_json(j);
  CHECK(*back.qwk == 0.5);
  CHECK_FALSE(back.hiprof_gap.has_value());
  CHECK_FALSE(back.hiprof_esl.mean_residual.has_value());
  CHECK(back.native.count == 2);
  CHECK(*back.esl.mean_residual == 0.2);
  CHECK(dump(to_json(back)) == dump(j));
}

TEST_CASE("trace omits wall time") {
  TrainTrace t{{1.0, 0.5}, {0.9, 0.4}, 12.5};
  const auto j = to_json(t);
  CHECK_FALSE(j.contains("wall_time_seconds"));
  CHECK(j.at("epoch_loss").size() == 2);
}

TEST_CASE("dump format") {
  CHECK(dump(Json{{"b", 1}, {"a", 2}}) == "{\n  \"a\": 2,\n  \"b\": 1\n}\n");
}

TEST_CASE("atomic write and access log") {
  test::TempDir dir("serialize");
  const auto path = dir.path() / "nested" / "file.json";
  write_file_atomic(path, "first\n");
  write_file_atomic(path, "second\n");
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  clear_access_log();
  CHECK(read_file(path) == "second\n");
  const auto log = access_log();
  REQUIRE(log.size() == 1);
  CHECK(log[0] == path);
  CHECK(kind_of([&] { read_file(dir.path() / "missing.json"); }) == ErrorKind::Io);
}
