#include "fairaes/triplet_miner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "fairaes/error.hpp"
#include "fairaes/random.hpp"

namespace fairaes {

std::string_view to_string(NegativeBand band) {
  return band == NegativeBand::Outside ? "outside" : "inside";
}

NegativeBand parse_negative_band(std::string_view text) {
  if (text == "outside") return NegativeBand::Outside;
  if (text == "inside") return NegativeBand::Inside;
  throw Error(ErrorKind::Config, "negative_band must be 'outside' or 'inside', got '" + std::string(text) + "'");
}

void MinerConfig::validate() const {
  if (!(eps_pos > 0.0 && eps_pos < eps_neg && eps_neg <= 1.0)) {
    throw Error(ErrorKind::Config, "miner bands require 0 < eps_pos < eps_neg <= 1");
  }
  if (max_triplets_per_anchor == 0) throw Error(ErrorKind::Config, "max_triplets_per_anchor must be >= 1");
}

bool in_positive_band(double candidate, double anchor, const MinerConfig& config) {
  return std::abs(candidate - anchor) <= config.eps_pos;
}

bool in_negative_band(double candidate, double anchor, const MinerConfig& config) {
  const double gap = std::abs(candidate - anchor);
  return config.negative_band == NegativeBand::Outside ? gap >= config.eps_neg : gap <= config.eps_neg;
}

namespace {

// Essay indices sorted by score (ties by id) for band lookups.
struct ScoreIndex {
  std::vector<const Essay*> essays;

  explicit ScoreIndex(std::vector<const Essay*> items) : essays(std::move(items)) {
    std::sort(essays.begin(), essays.end(), [](const Essay* a, const Essay* b) {
      return a->score_norm != b->score_norm ? a->score_norm < b->score_norm : a->id < b->id;
    });
  }

  // [first, last) of essays within eps of s. fl(a - s) is monotone in a, so
  // the exact predicate partitions the sorted order and no slack is needed.
  std::pair<std::size_t, std::size_t> within(double s, double eps) const {
    auto lo = std::partition_point(essays.begin(), essays.end(), [&](const Essay* e) {
      return e->score_norm < s && std::abs(e->score_norm - s) > eps;
    });
    auto hi = std::partition_point(lo, essays.end(), [&](const Essay* e) {
      return e->score_norm <= s || std::abs(e->score_norm - s) <= eps;
    });
    return {static_cast<std::size_t>(lo - essays.begin()), static_cast<std::size_t>(hi - essays.begin())};
  }

  // Lower tail [0, a) and upper tail [b, n) with |score - s| >= eps.
  std::pair<std::size_t, std::size_t> outside(double s, double eps) const {
    auto a = std::partition_point(essays.begin(), essays.end(), [&](const Essay* e) {
      return e->score_norm < s && std::abs(e->score_norm - s) >= eps;
    });
    auto b = std::partition_point(a, essays.end(), [&](const Essay* e) {
      return e->score_norm <= s || std::abs(e->score_norm - s) < eps;
    });
    return {static_cast<std::size_t>(a - essays.begin()), static_cast<std::size_t>(b - essays.begin())};
  }
};

}  // namespace

MiningResult mine_triplets(const Corpus& train, const MinerConfig& config) {
  config.validate();
  if (train.empty()) throw Error(ErrorKind::EmptyInput, "cannot mine triplets from an empty training set");

  std::vector<const Essay*> esl;
  std::vector<const Essay*> all;
  std::vector<const Essay*> anchors;
  for (const auto& e : train) {
    all.push_back(&e);
    (e.group == Group::ESL ? esl : anchors).push_back(&e);
  }
  std::sort(anchors.begin(), anchors.end(), [](const Essay* a, const Essay* b) { return a->id < b->id; });
  const ScoreIndex positives(std::move(esl));
  const ScoreIndex pool(std::move(all));

  MiningResult result;
  result.n_anchors = anchors.size();
  for (const Essay* anchor : anchors) {
    const double s = anchor->score_norm;
    auto [p_lo, p_hi] = positives.within(s, config.eps_pos);
    if (p_lo == p_hi) {
      ++result.n_skipped_no_positive;
      continue;
    }

    // Negative candidates as index ranges into the pooled index.
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    if (config.negative_band == NegativeBand::Outside) {
      auto [a, b] = pool.outside(s, config.eps_neg);
      ranges = {{0, a}, {b, pool.essays.size()}};
    } else {
      auto [a, b] = pool.within(s, config.eps_neg);
      ranges = {{a, b}};
    }
    auto count_negatives = [&] {
      std::size_t n = 0;
      for (auto [lo, hi] : ranges) n += hi - lo;
      return n;
    };
    auto negative_at = [&](std::size_t k) -> const Essay* {
      for (auto [lo, hi] : ranges) {
        if (k < hi - lo) return pool.essays[lo + k];
        k -= hi - lo;
      }
      return nullptr;
    };
    const std::size_t n_neg = count_negatives();

    Rng rng(derive_seed(config.seed, anchor->id));
    std::vector<std::size_t> pos_order(p_hi - p_lo);
    std::iota(pos_order.begin(), pos_order.end(), p_lo);
    std::size_t emitted = 0;
    // Partial Fisher-Yates: draw positives without replacement.
    for (std::size_t k = 0; k < pos_order.size() && emitted < config.max_triplets_per_anchor; ++k) {
      std::size_t j = k + static_cast<std::size_t>(rng.below(pos_order.size() - k));
      std::swap(pos_order[k], pos_order[j]);
      const Essay* positive = positives.essays[pos_order[k]];

      // Outside-band negatives can never equal the anchor or a positive; the
      // inside band can, so those are rejected by redrawing over the rest.
      std::vector<const Essay*> excluded;
      if (config.negative_band == NegativeBand::Inside) excluded = {anchor, positive};
      std::size_t usable = n_neg;
      for (const Essay* x : excluded) {
        for (auto [lo, hi] : ranges) {
          for (std::size_t i = lo; i < hi; ++i) usable -= pool.essays[i] == x ? 1 : 0;
        }
      }
      if (usable == 0) continue;
      std::size_t pick = static_cast<std::size_t>(rng.below(usable));
      const Essay* negative = nullptr;
      for (std::size_t k2 = 0; k2 < n_neg; ++k2) {
        const Essay* cand = negative_at(k2);
        if (std::find(excluded.begin(), excluded.end(), cand) != excluded.end()) continue;
        if (pick-- == 0) {
          negative = cand;
          break;
        }
      }
      result.triplets.push_back({anchor->id, positive->id, negative->id, s});
      ++emitted;
    }
    if (emitted == 0) {
      ++result.n_skipped_no_negative;
    } else {
      ++result.n_emitting;
    }
  }
  return result;
}

TripletValidation validate_triplets(std::span<const Triplet> triplets, const Corpus& corpus,
                                    const MinerConfig& config) {
  std::unordered_map<std::string_view, const Essay*> by_id;
  for (const auto& e : corpus) by_id.emplace(e.id, &e);
  auto resolve = [&](const std::string& id) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorKind::Integrity, "triplet references unknown essay '" + id + "'");
    return it->second;
  };
  TripletValidation v;
  for (const auto& t : triplets) {
    const Essay* a = resolve(t.anchor_id);
    const Essay* p = resolve(t.positive_id);
    const Essay* n = resolve(t.negative_id);
    ++v.n_checked;
    if (a->group != Group::Native || p->group != Group::ESL) ++v.group_violations;
    if (!in_positive_band(p->score_norm, a->score_norm, config)) ++v.positive_band_violations;
    if (!in_negative_band(n->score_norm, a->score_norm, config)) ++v.negative_band_violations;
    if (a == p || a == n || p == n) ++v.identity_violations;
  }
  return v;
}

}  // namespace fairaes
