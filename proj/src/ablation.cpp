#include "fairaes/ablation.hpp"

#include <cstdio>
#include <sstream>

namespace fairaes {

namespace {

std::string fixed(std::optional<double> v, const char* format) {
  if (!v) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, format, *v);
  return buf;
}

void table_row(std::ostringstream& out, const ModelRow& row, bool is_baseline) {
  out << "| " << row.label << " | " << fixed(row.report.qwk, "%.3f") << " | " << fixed(row.report.hiprof_gap, "%.3f")
      << " | " << (is_baseline ? std::string("---") : fixed(row.reduction, "%.1f%%")) << " |\n";
}

void csv_row(std::ostringstream& out, const ModelRow& row) {
  const auto& r = row.report;
  out << row.label << ',' << (row.alpha ? fixed(row.alpha, "%.17g") : "") << ',' << (r.qwk ? fixed(r.qwk, "%.17g") : "")
      << ',' << (r.hiprof_gap ? fixed(r.hiprof_gap, "%.17g") : "") << ','
      << (r.hiprof_gap ? fixed(1.0 - *r.hiprof_gap, "%.17g") : "") << '\n';
}

}  // namespace

std::string contrastive_label(double alpha) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "Contrastive (\xce\xb1=%.1f)", alpha);
  return buf;
}

ModelRow compare_to_baseline(std::string label, std::optional<double> alpha, FairnessReport report,
                             const FairnessReport& baseline) {
  ModelRow row{std::move(label), alpha, std::move(report), std::nullopt};
  if (baseline.hiprof_gap && row.report.hiprof_gap && *baseline.hiprof_gap > 0.0) {
    row.reduction = gap_reduction(*baseline.hiprof_gap, *row.report.hiprof_gap);
  }
  return row;
}

std::string render_markdown(const AblationTable& table) {
  std::ostringstream out;
  out << "| Model | QWK | Gap (Hi-Prof) | Reduction |\n";
  out << "|---|---|---|---|\n";
  table_row(out, table.baseline, true);
  for (const auto& row : table.rows) table_row(out, row, false);
  return out.str();
}

std::string render_pareto_csv(const AblationTable& table) {
  std::ostringstream out;
  out << "label,alpha,qwk,gap,fairness\n";
  csv_row(out, table.baseline);
  for (const auto& row : table.rows) csv_row(out, row);
  return out.str();
}

}  // namespace fairaes
