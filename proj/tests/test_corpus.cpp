#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

#include "fairaes/corpus.hpp"
#include "fairaes/error.hpp"

using namespace fairaes;
using fairaes::test::essay;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

IngestOptions csv(double lo = 1, double hi = 6) {
  IngestOptions o;
  o.format = FileFormat::Csv;
  o.scale = ScoreScale(lo, hi);
  return o;
}

}  // namespace

TEST_CASE("normalize_score examples") {
  CHECK(normalize_score(6, ScoreScale(1, 6)) == 1.0);
  CHECK(normalize_score(1, ScoreScale(1, 6)) == 0.0);
  CHECK(normalize_score(3, ScoreScale(1, 5)) == 0.5);
  CHECK(kind_of([] { normalize_score(7, ScoreScale(1, 6), "x"); }) == ErrorKind::OutOfRange);
  CHECK(kind_of([] { ScoreScale(3, 3); }) == ErrorKind::Config);
}

TEST_CASE("normalization round-trips and is monotone") {
  Rng r(11);
  const ScoreScale s(1, 5);
  double prev = -1;
  for (int i = 0; i <= 100; ++i) {
    const double raw = 1 + 4.0 * i / 100.0;
    const double n = normalize_score(raw, s);
    CHECK(n > prev);
    prev = n;
    CHECK(std::abs(s.denormalize(n) - raw) <= 1e-12);
  }
  for (int i = 0; i < 200; ++i) {
    const double raw = r.uniform(1, 5);
    CHECK(std::abs(s.denormalize(normalize_score(raw, s)) - raw) <= 1e-12);
  }
}

TEST_CASE("csv ingestion") {
  SUBCASE("three well-formed rows") {
    std::istringstream in("id,text,score,group\na,hello there,6,native\nb,\"quoted, text\nwith newline\",1,esl\nc,x,3.5,Native\n");
    const auto c = parse_csv(in, csv());
    REQUIRE(c.size() == 3);
    CHECK(c[0].score_norm == 1.0);
    CHECK(c[1].score_norm == 0.0);
    CHECK(c[1].text == "quoted, text\nwith newline");
    CHECK(c[1].group == Group::ESL);
    CHECK(c[2].score_norm == doctest::Approx(0.5));
    CHECK(c[2].raw_score == 3.5);
  }
  SUBCASE("out-of-range score names the row") {
    std::istringstream in("id,text,score,group\na,ok,2,native\nb,bad,7,native\n");
    try {
      parse_csv(in, csv());
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::OutOfRange);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("default group fills a missing group column") {
    std::istringstream in("id,text,score\na,t,1\nb,t,5\n");
    auto o = csv(1, 5);
    o.default_group = Group::ESL;
    const auto c = parse_csv(in, o);
    REQUIRE(c.size() == 2);
    for (const auto& e : c) CHECK(e.group == Group::ESL);
  }
  SUBCASE("missing group column without a default is a schema error") {
    std::istringstream in("id,text,score\na,t,1\n");
    CHECK(kind_of([&] { parse_csv(in, csv()); }) == ErrorKind::Schema);
  }
  SUBCASE("missing score column") {
    std::istringstream in("id,text,group\na,t,esl\n");
    CHECK(kind_of([&] { parse_csv(in, csv()); }) == ErrorKind::Schema);
  }
  SUBCASE("duplicate ids conflict") {
    std::istringstream in("id,text,score,group\na,t,1,esl\na,u,2,esl\n");
    CHECK(kind_of([&] { parse_csv(in, csv()); }) == ErrorKind::Conflict);
  }
  SUBCASE("unknown group label is rejected") {
    std::istringstream in("id,text,score,group\na,t,1,martian\n");
    CHECK(kind_of([&] { parse_csv(in, csv()); }) == ErrorKind::Schema);
  }
  SUBCASE("unterminated quote is a parse error") {
    std::istringstream in("id,text,score,group\na,\"never closed,1,esl\n");
    CHECK(kind_of([&] { parse_csv(in, csv()); }) == ErrorKind::Parse);
  }
  SUBCASE("blank text is rejected") {
    std::istringstream in("id,text,score,group\na,   ,1,esl\n");
    CHECK_THROWS_AS(parse_csv(in, csv()), Error);
  }
}

TEST_CASE("jsonl ingestion and canonical round trip") {
  std::istringstream in(R"({"id":"a","text":"line one\nline two","score":4,"group":"esl"}
{"id":"b","text":"t","score":2}
)");
  IngestOptions o;
  o.scale = ScoreScale(1, 5);
  o.default_group = Group::Native;
  o.source = Source::DatasetB;
  const auto c = parse_jsonl(in, o);
  REQUIRE(c.size() == 2);
  CHECK(c[0].group == Group::ESL);
  CHECK(c[1].group == Group::Native);
  CHECK(c[0].score_norm == 0.75);

  std::ostringstream out;
  write_corpus_jsonl(out, c);
  std::istringstream back(out.str());
  const auto d = read_corpus_jsonl(back);
  REQUIRE(d.size() == 2);
  CHECK(d[0].text == c[0].text);
  CHECK(d[0].raw_score == c[0].raw_score);
  CHECK(d[1].source == Source::DatasetB);

  std::istringstream broken("{\"id\": \"a\",\n");
  CHECK(kind_of([&] { parse_jsonl(broken, o); }) == ErrorKind::Parse);
}

TEST_CASE("merge rejects ids shared across inputs") {
  Corpus a{essay("x", 0.1, Group::Native)};
  Corpus b{essay("x", 0.2, Group::ESL)};
  CHECK(kind_of([&] { merge({a, b}); }) == ErrorKind::Conflict);
  Corpus c{essay("y", 0.2, Group::ESL)};
  CHECK(merge({a, c}).size() == 2);
}

TEST_CASE("stratified split examples") {
  SUBCASE("80 native / 20 esl") {
    Corpus c;
    for (int i = 0; i < 80; ++i) c.push_back(essay("n" + std::to_string(i), 0.5, Group::Native));
    for (int i = 0; i < 20; ++i) c.push_back(essay("e" + std::to_string(i), 0.5, Group::ESL));
    const auto m = stratified_split(c, 0.8, 42);
    const auto test = select(c, m.test_ids);
    const auto n_esl = std::count_if(test.begin(), test.end(), [](const Essay& e) { return e.group == Group::ESL; });
    CHECK(test.size() == 20);
    CHECK(n_esl == 4);
    CHECK(m.train_ids.size() == 80);
  }
  SUBCASE("single stratum") {
    Corpus c;
    for (int i = 0; i < 10; ++i) c.push_back(essay("n" + std::to_string(i), 0.5, Group::Native));
    const auto m = stratified_split(c, 0.8, 1);
    CHECK(m.train_ids.size() == 8);
    CHECK(m.test_ids.size() == 2);
  }
  SUBCASE("determinism") {
    Rng r(4);
    const auto c = test::random_corpus(r, 37, 13);
    const auto a = stratified_split(c, 0.8, 9), b = stratified_split(c, 0.8, 9);
    CHECK(a.train_ids == b.train_ids);
    CHECK(a.test_ids == b.test_ids);
    CHECK(stratified_split(c, 0.8, 10).test_ids != a.test_ids);
  }
  SUBCASE("a group with a single essay") {
    Corpus c{essay("n0", 0.1, Group::Native), essay("n1", 0.1, Group::Native), essay("e0", 0.1, Group::ESL)};
    CHECK(kind_of([&] { stratified_split(c, 0.8, 1); }) == ErrorKind::Stratification);
  }
  SUBCASE("select needs every id") {
    Corpus c{essay("a", 0.1, Group::Native)};
    CHECK(kind_of([&] { select(c, {"zzz"}); }) == ErrorKind::Integrity);
  }
}

TEST_CASE("split is a stratified partition on random corpora") {
  Rng r(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n_native = 2 + r.below(60), n_esl = 2 + r.below(30);
    const auto c = test::random_corpus(r, n_native, n_esl);
    const double ratio = r.uniform(0.3, 0.95);
    const auto m = stratified_split(c, ratio, r.next());

    std::multiset<std::string> all(m.train_ids.begin(), m.train_ids.end());
    all.insert(m.test_ids.begin(), m.test_ids.end());
    std::multiset<std::string> expected;
    for (const auto& e : c) expected.insert(e.id);
    REQUIRE(all == expected);

    const auto test = select(c, m.test_ids);
    if (test.empty()) continue;
    for (Group g : kGroups) {
      auto in = [g](const Corpus& x) {
        return static_cast<double>(std::count_if(x.begin(), x.end(), [g](const Essay& e) { return e.group == g; })) /
               static_cast<double>(x.size());
      };
      CHECK(std::abs(in(test) - in(c)) <= 1.0 / static_cast<double>(test.size()) + 1e-12);
    }
  }
}
