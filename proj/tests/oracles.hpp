#pragma once

// Independent reference computations shared by the unit and acceptance suites.

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fairaes/corpus.hpp"
#include "fairaes/triplet_miner.hpp"

namespace fairaes::test {

// Exhaustive O(n^3) enumeration: anchors having at least one legal
// (positive, negative) pair, plus the number of distinct positives per anchor.
struct OracleCount {
  std::size_t eligible_anchors = 0;
  std::map<std::string, std::size_t> positives;
};

inline OracleCount brute_force(const Corpus& c, const MinerConfig& cfg) {
  OracleCount out;
  for (const auto& a : c) {
    if (a.group != Group::Native) continue;
    std::set<std::string> legal_positives;
    for (const auto& p : c) {
      if (p.group != Group::ESL || &p == &a) continue;
      if (!(std::abs(p.score_norm - a.score_norm) <= cfg.eps_pos)) continue;
      for (const auto& n : c) {
        if (&n == &a || &n == &p) continue;
        const double gap = std::abs(n.score_norm - a.score_norm);
        const bool ok = cfg.negative_band == NegativeBand::Outside ? gap >= cfg.eps_neg : gap <= cfg.eps_neg;
        if (ok) {
          legal_positives.insert(p.id);
          break;
        }
      }
    }
    if (!legal_positives.empty()) ++out.eligible_anchors;
    out.positives[a.id] = legal_positives.size();
  }
  return out;
}

// Direct O/E contingency-table kappa over already-binned ratings.
inline std::optional<double> oracle_qwk(const std::vector<int>& x, const std::vector<int>& y, int k) {
  std::vector<std::vector<double>> o(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < x.size(); ++i) o[x[i]][y[i]] += 1.0;
  std::vector<double> rows(k, 0.0), cols(k, 0.0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      rows[i] += o[i][j];
      cols[j] += o[i][j];
    }
  const double n = static_cast<double>(x.size());
  double num = 0.0, den = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double w = static_cast<double>((i - j) * (i - j)) / ((k - 1) * (k - 1));
      num += w * o[i][j];
      den += w * rows[i] * cols[j] / n;
    }
  if (den == 0.0) return std::nullopt;
  return 1.0 - num / den;
}

}  // namespace fairaes::test
