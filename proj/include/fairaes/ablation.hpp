#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fairaes/fairness_eval.hpp"

namespace fairaes {

struct ModelRow {
  std::string label;
  std::optional<double> alpha;      // empty for the baseline
  FairnessReport report;
  std::optional<double> reduction;  // percent vs. the baseline gap
};

struct AblationTable {
  ModelRow baseline;
  std::vector<ModelRow> rows;
};

std::string contrastive_label(double alpha);

// Reduction is left empty when either gap is undefined or the baseline gap is 0.
ModelRow compare_to_baseline(std::string label, std::optional<double> alpha, FairnessReport report,
                             const FairnessReport& baseline);

// | Model | QWK | Gap (Hi-Prof) | Reduction |, baseline first.
std::string render_markdown(const AblationTable& table);

// Trade-off scatter points: label,alpha,qwk,gap,fairness with fairness = 1 - gap.
std::string render_pareto_csv(const AblationTable& table);

}  // namespace fairaes
