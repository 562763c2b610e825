#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairaes {

enum class Group { Native, ESL };
enum class Source { DatasetA, DatasetB, Synthetic };

std::string_view to_string(Group group);
std::string_view to_string(Source source);
// Accepts the canonical names case-insensitively; anything else is a schema error.
Group parse_group(std::string_view text);
Source parse_source(std::string_view text);

inline constexpr Group kGroups[] = {Group::Native, Group::ESL};

// Closed score interval of a source rubric, e.g. 1..6 or 1..5.
class ScoreScale {
 public:
  ScoreScale(double min, double max);

  double min() const noexcept { return min_; }
  double max() const noexcept { return max_; }
  double denormalize(double score_norm) const { return min_ + score_norm * (max_ - min_); }

  friend bool operator==(const ScoreScale&, const ScoreScale&) = default;

 private:
  double min_;
  double max_;
};

struct Essay {
  std::string id;
  std::string text;
  double raw_score = 0.0;
  double score_norm = 0.0;
  Group group = Group::Native;
  Source source = Source::Synthetic;
};

using Corpus = std::vector<Essay>;

// (raw - min) / (max - min). `id` only decorates the error message.
double normalize_score(double raw, const ScoreScale& scale, std::string_view id = {});

enum class FileFormat { Csv, Jsonl };
FileFormat parse_format(std::string_view text);

struct IngestOptions {
  FileFormat format = FileFormat::Jsonl;
  ScoreScale scale{1.0, 6.0};
  std::optional<Group> default_group;
  Source source = Source::DatasetA;
};

// Ingestion formats: CSV header `id,text,score[,group]` (RFC-4180 quoting) or
// JSONL with keys id, text, score and optional group.
Corpus ingest(const std::filesystem::path& path, const IngestOptions& options);
Corpus parse_csv(std::istream& in, const IngestOptions& options);
Corpus parse_jsonl(std::istream& in, const IngestOptions& options);

// Concatenates corpora; duplicate ids across inputs are a conflict error.
Corpus merge(std::vector<Corpus> parts);

// Canonical interchange: one JSON object per line carrying every Essay field.
void write_corpus_jsonl(std::ostream& out, const Corpus& corpus);
Corpus read_corpus_jsonl(std::istream& in);

struct SplitManifest {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;
  double ratio = 0.8;
};

// Per group: seeded shuffle, test takes floor((1 - ratio) * n) essays and the
// remainder goes to train. Both id lists keep corpus order.
SplitManifest stratified_split(const Corpus& corpus, double ratio, std::uint64_t seed);

// Essays of `corpus` whose ids appear in `ids`, in corpus order.
Corpus select(const Corpus& corpus, const std::vector<std::string>& ids);

}  // namespace fairaes
