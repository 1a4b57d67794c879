#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dsakit/dsa.hpp"
#include "dsakit/metrics.hpp"

namespace dsakit::report {

// Per-sample score CSV: row,dsa,dist_a,dist_b,anchor_a,anchor_b,true,predicted.
// Reals are written in shortest round-trip form, so reading back is exact.
void write_scores_csv(const std::filesystem::path& path, std::span<const DsaScore> scores,
                      const LabelPairs& labels);

struct ScoreTable {
  std::vector<DsaScore> scores;
  LabelPairs labels;
};
ScoreTable read_scores_csv(const std::filesystem::path& path);

void write_coverage_csv(const std::filesystem::path& path, const CoverageCurve& curve);
void write_accuracy_csv(const std::filesystem::path& path, std::span<const AccuracyPoint> curve);
void write_roc_csv(const std::filesystem::path& path, const RocCurve& roc);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// Static SVG line chart, one polyline per series.
std::string render_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label, std::span<const Series> series);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace dsakit::report
