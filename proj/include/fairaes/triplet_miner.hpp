#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairaes/corpus.hpp"

namespace fairaes {

// Where negatives are drawn relative to the anchor score S. Outside means
// |S_N - S| >= eps_neg; inside is the literal [S - eps_neg, S + eps_neg]
// reading, kept selectable for comparison runs only.
enum class NegativeBand { Outside, Inside };

std::string_view to_string(NegativeBand band);
NegativeBand parse_negative_band(std::string_view text);

struct MinerConfig {
  double eps_pos = 0.02;
  double eps_neg = 0.20;
  std::uint64_t seed = 0;
  std::size_t max_triplets_per_anchor = 1;
  NegativeBand negative_band = NegativeBand::Outside;

  void validate() const;
};

struct Triplet {
  std::string anchor_id;
  std::string positive_id;
  std::string negative_id;
  double anchor_score = 0.0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct MiningResult {
  std::vector<Triplet> triplets;
  std::size_t n_anchors = 0;
  std::size_t n_emitting = 0;
  std::size_t n_skipped_no_positive = 0;
  std::size_t n_skipped_no_negative = 0;
};

// Band predicates shared by the miner, the validator and test oracles.
bool in_positive_band(double candidate, double anchor, const MinerConfig& config);
bool in_negative_band(double candidate, double anchor, const MinerConfig& config);

// Every Native essay of `train` is an anchor. Candidates are drawn uniformly
// from each anchor's own PRNG stream (seed, anchor id), so the result does not
// depend on corpus order. Output is sorted by anchor id.
MiningResult mine_triplets(const Corpus& train, const MinerConfig& config);

struct TripletValidation {
  std::size_t n_checked = 0;
  std::size_t group_violations = 0;
  std::size_t positive_band_violations = 0;
  std::size_t negative_band_violations = 0;
  std::size_t identity_violations = 0;

  std::size_t total() const {
    return group_violations + positive_band_violations + negative_band_violations + identity_violations;
  }
};

TripletValidation validate_triplets(std::span<const Triplet> triplets, const Corpus& corpus,
                                    const MinerConfig& config);

}  // namespace fairaes
