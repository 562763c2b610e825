#include "fairaes/linguistics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "fairaes/error.hpp"

namespace fairaes {

namespace {

// Absorbs representation error so a lift of exactly min_lift stays inclusive.
constexpr double kLiftTolerance = 1e-12;

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool ends_sentence(std::string_view word) {
  while (!word.empty() && std::string_view("\"')]}").find(word.back()) != std::string_view::npos) {
    word.remove_suffix(1);
  }
  if (word.empty()) return false;
  const char last = word.back();
  if (last != '.' && last != '!' && last != '?') return false;
  const auto l = lower(word);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), l) == kAbbreviations.end();
}

std::string strip_punct(std::string_view word) {
  std::string out;
  for (unsigned char c : word) {
    if (!std::ispunct(c)) out.push_back(static_cast<char>(c));
  }
  return out;
}

TextStats mean_of(const std::vector<TextStats>& items) {
  TextStats m;
  const double n = static_cast<double>(items.size());
  for (const auto& s : items) {
    m.n_tokens += s.n_tokens / n;
    m.n_sentences += s.n_sentences / n;
    m.mean_sentence_length += s.mean_sentence_length / n;
    m.sentence_length_variance += s.sentence_length_variance / n;
    m.comma_rate += s.comma_rate / n;
    m.long_word_rate += s.long_word_rate / n;
    m.type_token_ratio += s.type_token_ratio / n;
  }
  return m;
}

}  // namespace

std::array<double, 7> stat_values(const TextStats& s) {
  return {s.n_tokens,   s.n_sentences,    s.mean_sentence_length, s.sentence_length_variance,
          s.comma_rate, s.long_word_rate, s.type_token_ratio};
}

TextStats sentence_stats(std::string_view text) {
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return is_space(c); })) {
    throw Error(ErrorKind::EmptyInput, "cannot compute statistics of empty text");
  }
  std::vector<double> lengths;
  std::set<std::string> types;
  double tokens = 0.0;
  double long_words = 0.0;
  double commas = 0.0;
  double run = 0.0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) break;
    const auto word = text.substr(i, j - i);
    commas += static_cast<double>(std::count(word.begin(), word.end(), ','));
    const auto token = strip_punct(word);
    if (!token.empty()) {
      tokens += 1.0;
      run += 1.0;
      if (token.size() >= 7) long_words += 1.0;
      types.insert(lower(token));
    }
    if (ends_sentence(word) && run > 0.0) {
      lengths.push_back(run);
      run = 0.0;
    }
    i = j;
  }
  if (run > 0.0 || lengths.empty()) lengths.push_back(run);

  TextStats s;
  s.n_tokens = tokens;
  s.n_sentences = static_cast<double>(lengths.size());
  s.mean_sentence_length = tokens / s.n_sentences;
  double ss = 0.0;
  for (double len : lengths) ss += (len - s.mean_sentence_length) * (len - s.mean_sentence_length);
  s.sentence_length_variance = ss / s.n_sentences;
  s.comma_rate = commas / s.n_sentences;
  s.long_word_rate = tokens > 0.0 ? long_words / tokens : 0.0;
  s.type_token_ratio = tokens > 0.0 ? static_cast<double>(types.size()) / tokens : 0.0;
  return s;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(ErrorKind::Shape, "pearson needs series of equal length");
  if (xs.size() < 3) throw Error(ErrorKind::EmptyInput, "pearson needs at least 3 points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::UndefinedCorrelation, "series has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

const FeatureCorrelation& CorrelationTable::row(std::string_view feature) const {
  for (const auto& r : rows) {
    if (r.feature == feature) return r;
  }
  throw Error(ErrorKind::Integrity, "no correlation row for feature '" + std::string(feature) + "'");
}

CorrelationTable complexity_correlation(std::span<const ScoredPrediction> predictions, const Corpus& corpus,
                                        Group group) {
  std::unordered_map<std::string_view, const Essay*> by_id;
  for (const auto& e : corpus) by_id.emplace(e.id, &e);
  std::vector<std::array<double, 7>> stats;
  std::vector<double> predicted;
  std::vector<double> residual;
  for (const auto& p : predictions) {
    if (p.group != group) continue;
    auto it = by_id.find(p.essay_id);
    if (it == by_id.end()) throw Error(ErrorKind::Integrity, "prediction for unknown essay '" + p.essay_id + "'");
    stats.push_back(stat_values(sentence_stats(it->second->text)));
    predicted.push_back(p.predicted);
    residual.push_back(p.residual());
  }
  if (stats.size() < 3) {
    throw Error(ErrorKind::EmptyInput, "complexity correlation needs at least 3 essays in group " +
                                           std::string(to_string(group)));
  }
  CorrelationTable table;
  table.group = group;
  table.n_essays = stats.size();
  for (std::size_t f = 0; f < kTextStatNames.size(); ++f) {
    std::vector<double> xs;
    for (const auto& s : stats) xs.push_back(s[f]);
    FeatureCorrelation row;
    row.feature = std::string(kTextStatNames[f]);
    try {
      row.with_prediction = pearson(xs, predicted);
      row.with_residual = pearson(xs, residual);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::UndefinedCorrelation) throw;
      row.error = err.what();
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

LiftReport lift_analysis(std::span<const ScoredPrediction> baseline, std::span<const ScoredPrediction> contrastive,
                         const Corpus& corpus, double min_lift) {
  if (baseline.size() != contrastive.size()) {
    throw Error(ErrorKind::Integrity, "baseline and contrastive predictions cover different essays");
  }
  std::unordered_map<std::string_view, const ScoredPrediction*> base_by_id;
  for (const auto& p : baseline) base_by_id.emplace(p.essay_id, &p);
  std::unordered_map<std::string_view, const Essay*> essay_by_id;
  for (const auto& e : corpus) essay_by_id.emplace(e.id, &e);

  LiftReport report;
  report.min_lift = min_lift;
  std::vector<TextStats> lifted;
  std::vector<TextStats> rest;
  for (const auto& c : contrastive) {
    auto b = base_by_id.find(c.essay_id);
    if (b == base_by_id.end()) {
      throw Error(ErrorKind::Integrity, "essay '" + c.essay_id + "' has no baseline prediction");
    }
    if (c.group != Group::ESL) continue;
    auto e = essay_by_id.find(c.essay_id);
    if (e == essay_by_id.end()) throw Error(ErrorKind::Integrity, "prediction for unknown essay '" + c.essay_id + "'");
    ++report.n_esl;
    auto stats = sentence_stats(e->second->text);
    if (c.predicted - b->second->predicted >= min_lift - kLiftTolerance) {
      report.lifted_ids.push_back(c.essay_id);
      lifted.push_back(stats);
    } else {
      report.complement_ids.push_back(c.essay_id);
      rest.push_back(stats);
    }
  }
  if (!lifted.empty()) report.lifted_mean = mean_of(lifted);
  if (!rest.empty()) report.complement_mean = mean_of(rest);
  return report;
}

}  // namespace fairaes
