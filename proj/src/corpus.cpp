#include "fairaes/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "fairaes/error.hpp"
#include "fairaes/random.hpp"
#include "json.hpp"

namespace fairaes {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n\f\v";
  auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::string at_line(std::size_t line) { return "line " + std::to_string(line); }

double parse_number(std::string_view text, std::size_t line) {
  auto t = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty() || !std::isfinite(value)) {
    throw Error(ErrorKind::Parse, at_line(line) + ": score '" + std::string(text) + "' is not a number");
  }
  return value;
}

struct RawRecord {
  std::string id;
  std::string text;
  double score;
  std::optional<std::string> group;
  std::size_t line;
};

Essay make_essay(RawRecord rec, const IngestOptions& options) {
  if (rec.id.empty()) throw Error(ErrorKind::Schema, at_line(rec.line) + ": empty id");
  if (trim(rec.text).empty()) {
    throw Error(ErrorKind::Schema, at_line(rec.line) + ": essay '" + rec.id + "' has empty text");
  }
  Essay e;
  e.raw_score = rec.score;
  try {
    e.score_norm = normalize_score(rec.score, options.scale, rec.id);
  } catch (const Error& err) {
    throw Error(ErrorKind::OutOfRange, at_line(rec.line) + ": " + err.what());
  }
  if (rec.group && !trim(*rec.group).empty()) {
    try {
      e.group = parse_group(trim(*rec.group));
    } catch (const Error& err) {
      throw Error(ErrorKind::Schema, at_line(rec.line) + ": " + err.what());
    }
  } else if (options.default_group) {
    e.group = *options.default_group;
  } else {
    throw Error(ErrorKind::Schema, at_line(rec.line) + ": essay '" + rec.id +
                                       "' has no group and no default group was given");
  }
  e.id = std::move(rec.id);
  e.text = std::move(rec.text);
  e.source = options.source;
  return e;
}

void reject_duplicates(const Corpus& corpus) {
  std::unordered_set<std::string_view> seen;
  for (const auto& e : corpus) {
    if (!seen.insert(e.id).second) {
      throw Error(ErrorKind::Conflict, "duplicate essay id '" + e.id + "'");
    }
  }
}

// One RFC-4180 record; returns false at EOF. Quoted fields may span lines.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line,
                     std::size_t& record_line) {
  fields.clear();
  int c = in.get();
  if (c == EOF) return false;
  ++line;
  record_line = line;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  while (true) {
    if (c == EOF) {
      if (quoted) throw Error(ErrorKind::Parse, at_line(record_line) + ": unterminated quoted field");
      fields.push_back(std::move(field));
      return true;
    }
    char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
    } else if (ch == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (ch == '"') {
      throw Error(ErrorKind::Parse, at_line(line) + ": stray quote inside unquoted field");
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && in.peek() == '\n') in.get();
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(ch);
      field_started = true;
    }
    c = in.get();
  }
}

}  // namespace

std::string_view to_string(Group group) {
  return group == Group::Native ? "Native" : "ESL";
}

std::string_view to_string(Source source) {
  switch (source) {
    case Source::DatasetA: return "datasetA";
    case Source::DatasetB: return "datasetB";
    case Source::Synthetic: return "synthetic";
  }
  return "synthetic";
}

Group parse_group(std::string_view text) {
  auto l = lower(text);
  if (l == "native") return Group::Native;
  if (l == "esl") return Group::ESL;
  throw Error(ErrorKind::Schema, "unknown group label '" + std::string(text) + "'");
}

Source parse_source(std::string_view text) {
  auto l = lower(text);
  if (l == "dataseta") return Source::DatasetA;
  if (l == "datasetb") return Source::DatasetB;
  if (l == "synthetic") return Source::Synthetic;
  throw Error(ErrorKind::Schema, "unknown source tag '" + std::string(text) + "'");
}

FileFormat parse_format(std::string_view text) {
  auto l = lower(text);
  if (l == "csv") return FileFormat::Csv;
  if (l == "jsonl") return FileFormat::Jsonl;
  throw Error(ErrorKind::Config, "unknown corpus format '" + std::string(text) + "'");
}

ScoreScale::ScoreScale(double min, double max) : min_(min), max_(max) {
  if (!(max > min) || !std::isfinite(min) || !std::isfinite(max)) {
    throw Error(ErrorKind::Config, "score scale requires max > min");
  }
}

double normalize_score(double raw, const ScoreScale& scale, std::string_view id) {
  if (!(raw >= scale.min() && raw <= scale.max())) {
    std::string who = id.empty() ? std::string("score") : "essay '" + std::string(id) + "'";
    throw Error(ErrorKind::OutOfRange, who + ": raw score " + std::to_string(raw) +
                                           " outside [" + std::to_string(scale.min()) + ", " +
                                           std::to_string(scale.max()) + "]");
  }
  return (raw - scale.min()) / (scale.max() - scale.min());
}

Corpus parse_csv(std::istream& in, const IngestOptions& options) {
  std::vector<std::string> fields;
  std::size_t line = 0;
  std::size_t record_line = 0;
  if (!read_csv_record(in, fields, line, record_line)) {
    throw Error(ErrorKind::Schema, "CSV input has no header");
  }
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < fields.size(); ++i) column[lower(trim(fields[i]))] = i;
  for (const char* required : {"id", "text", "score"}) {
    if (!column.contains(required)) {
      throw Error(ErrorKind::Schema, std::string("CSV header is missing column '") + required + "'");
    }
  }
  const auto group_col = column.contains("group") ? std::optional(column["group"]) : std::nullopt;
  const std::size_t width = fields.size();

  Corpus corpus;
  while (read_csv_record(in, fields, line, record_line)) {
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() != width) {
      throw Error(ErrorKind::Parse, at_line(record_line) + ": expected " + std::to_string(width) +
                                        " fields, found " + std::to_string(fields.size()));
    }
    RawRecord rec{std::string(trim(fields[column["id"]])), fields[column["text"]],
                  parse_number(fields[column["score"]], record_line),
                  group_col ? std::optional(fields[*group_col]) : std::nullopt, record_line};
    corpus.push_back(make_essay(std::move(rec), options));
  }
  reject_duplicates(corpus);
  return corpus;
}

Corpus parse_jsonl(std::istream& in, const IngestOptions& options) {
  Corpus corpus;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& err) {
      throw Error(ErrorKind::Parse, at_line(line) + ": " + err.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::Parse, at_line(line) + ": expected a JSON object");
    for (const char* required : {"id", "text", "score"}) {
      if (!j.contains(required)) {
        throw Error(ErrorKind::Schema, at_line(line) + ": missing key '" + required + "'");
      }
    }
    RawRecord rec;
    rec.line = line;
    const auto& id = j["id"];
    if (id.is_string()) {
      rec.id = id.get<std::string>();
    } else if (id.is_number_integer()) {
      rec.id = std::to_string(id.get<long long>());
    } else {
      throw Error(ErrorKind::Schema, at_line(line) + ": id must be a string or integer");
    }
    if (!j["text"].is_string()) throw Error(ErrorKind::Schema, at_line(line) + ": text must be a string");
    rec.text = j["text"].get<std::string>();
    if (!j["score"].is_number()) throw Error(ErrorKind::Schema, at_line(line) + ": score must be a number");
    rec.score = j["score"].get<double>();
    if (j.contains("group") && !j["group"].is_null()) {
      if (!j["group"].is_string()) throw Error(ErrorKind::Schema, at_line(line) + ": group must be a string");
      rec.group = j["group"].get<std::string>();
    }
    corpus.push_back(make_essay(std::move(rec), options));
  }
  reject_duplicates(corpus);
  return corpus;
}

Corpus ingest(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open corpus file " + path.string());
  return options.format == FileFormat::Csv ? parse_csv(in, options) : parse_jsonl(in, options);
}

Corpus merge(std::vector<Corpus> parts) {
  Corpus out;
  for (auto& part : parts) {
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  reject_duplicates(out);
  return out;
}

void write_corpus_jsonl(std::ostream& out, const Corpus& corpus) {
  for (const auto& e : corpus) {
    nlohmann::json j{{"id", e.id},
                     {"text", e.text},
                     {"score", e.raw_score},
                     {"score_norm", e.score_norm},
                     {"group", to_string(e.group)},
                     {"source", to_string(e.source)}};
    out << j.dump() << '\n';
  }
}

Corpus read_corpus_jsonl(std::istream& in) {
  Corpus corpus;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    try {
      auto j = nlohmann::json::parse(text);
      Essay e;
      e.id = j.at("id").get<std::string>();
      e.text = j.at("text").get<std::string>();
      e.raw_score = j.at("score").get<double>();
      e.score_norm = j.at("score_norm").get<double>();
      e.group = parse_group(j.at("group").get<std::string>());
      e.source = parse_source(j.at("source").get<std::string>());
      if (!(e.score_norm >= 0.0 && e.score_norm <= 1.0)) {
        throw Error(ErrorKind::OutOfRange, "essay '" + e.id + "' has score_norm outside [0, 1]");
      }
      corpus.push_back(std::move(e));
    } catch (const nlohmann::json::exception& err) {
      throw Error(ErrorKind::Parse, at_line(line) + ": " + err.what());
    }
  }
  reject_duplicates(corpus);
  return corpus;
}

SplitManifest stratified_split(const Corpus& corpus, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorKind::Config, "split ratio must lie in (0, 1)");
  std::vector<bool> is_test(corpus.size(), false);
  for (Group g : kGroups) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (corpus[i].group == g) members.push_back(i);
    }
    if (members.empty()) continue;
    if (members.size() < 2) {
      throw Error(ErrorKind::Stratification, "group " + std::string(to_string(g)) +
                                                 " has fewer than 2 essays");
    }
    Rng rng(derive_seed(seed, "split/" + std::string(to_string(g))));
    rng.shuffle(std::span(members));
    // The 1e-9 slack keeps e.g. 0.2 * 80 from flooring to 15.
    const auto n_test = static_cast<std::size_t>(
        std::floor(static_cast<double>(members.size()) * (1.0 - ratio) + 1e-9));
    for (std::size_t k = 0; k < n_test; ++k) is_test[members[k]] = true;
  }
  SplitManifest m;
  m.seed = seed;
  m.ratio = ratio;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    (is_test[i] ? m.test_ids : m.train_ids).push_back(corpus[i].id);
  }
  return m;
}

Corpus select(const Corpus& corpus, const std::vector<std::string>& ids) {
  std::unordered_set<std::string_view> wanted(ids.begin(), ids.end());
  Corpus out;
  for (const auto& e : corpus) {
    if (wanted.contains(e.id)) out.push_back(e);
  }
  if (out.size() != wanted.size()) {
    throw Error(ErrorKind::Integrity, "manifest references ids missing from the corpus");
  }
  return out;
}

}  // namespace fairaes
