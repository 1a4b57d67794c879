#include "dsakit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "dsakit/error.hpp"

namespace dsakit {

namespace {

std::size_t count_corners(std::span<const ScoredSample> samples) {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const ScoredSample& s) { return s.is_corner; }));
}

void check_scores(std::span<const ScoredSample> samples) {
  for (const auto& s : samples) {
    if (std::isnan(s.dsa) || s.dsa < 0.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "score of row " + std::to_string(s.row) + " is negative or NaN");
    }
  }
}

}  // namespace

std::vector<ScoredSample> scored_by_misclassification(std::span<const DsaScore> scores,
                                                      const LabeledTraceSet& test) {
  if (scores.size() != test.size()) {
    throw Error(ErrorCode::kCountMismatch, "score count does not match test set size");
  }
  std::vector<ScoredSample> out(scores.size());
  for (RowId i = 0; i < scores.size(); ++i) {
    out[i] = {scores[i].value, test.misclassified(i), i};
  }
  return out;
}

std::vector<ScoredSample> scored_by_flags(std::span<const DsaScore> scores,
                                          const std::vector<bool>& corner) {
  if (scores.size() != corner.size()) {
    throw Error(ErrorCode::kCountMismatch, "score count does not match corner flag count");
  }
  std::vector<ScoredSample> out(scores.size());
  for (RowId i = 0; i < scores.size(); ++i) out[i] = {scores[i].value, corner[i], i};
  return out;
}

std::vector<ScoredSample> sort_by_descending_dsa(std::span<const ScoredSample> samples) {
  std::vector<ScoredSample> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end(), [](const ScoredSample& a, const ScoredSample& b) {
    if (a.dsa != b.dsa) return a.dsa > b.dsa;
    return a.row < b.row;
  });
  return sorted;
}

double coverage(std::span<const ScoredSample> samples, double v_th) {
  std::size_t corners = 0;
  std::size_t above = 0;
  for (const auto& s : samples) {
    if (!s.is_corner) continue;
    ++corners;
    if (s.dsa > v_th) ++above;
  }
  if (corners == 0) throw Error(ErrorCode::kNoCornerCases, "no corner-case samples");
  return static_cast<double>(above) / static_cast<double>(corners);
}

CoverageCurve coverage_curve(std::span<const ScoredSample> samples) {
  check_scores(samples);
  const std::size_t corners = count_corners(samples);
  if (corners == 0) throw Error(ErrorCode::kNoCornerCases, "no corner-case samples");
  const auto sorted = sort_by_descending_dsa(samples);
  CoverageCurve curve;
  std::size_t above = 0;
  std::size_t corner_above = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double v = sorted[i].dsa;
    // Samples strictly above v have all been consumed.
    curve.points.push_back(
        {v, static_cast<double>(corner_above) / static_cast<double>(corners), above});
    for (; i < sorted.size() && sorted[i].dsa == v; ++i) {
      ++above;
      if (sorted[i].is_corner) ++corner_above;
    }
  }
  curve.points.push_back({-std::numeric_limits<double>::infinity(),
                          static_cast<double>(corner_above) / static_cast<double>(corners),
                          above});
  return curve;
}

std::vector<AccuracyPoint> accuracy_curve(std::span<const ScoredSample> samples,
                                          std::span<const ClassId> true_labels,
                                          std::span<const ClassId> predicted_labels,
                                          std::size_t step) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyInput, "no samples for accuracy curve");
  if (step == 0) throw Error(ErrorCode::kInvalidArgument, "accuracy step must be >= 1");
  if (true_labels.size() != predicted_labels.size()) {
    throw Error(ErrorCode::kCountMismatch, "label vectors differ in length");
  }
  const auto sorted = sort_by_descending_dsa(samples);
  const std::size_t n = sorted.size();
  std::vector<AccuracyPoint> curve;
  std::size_t correct = 0;
  std::size_t next = std::min(kAccuracyCurveStart, n);
  for (std::size_t i = 0; i < n; ++i) {
    const RowId r = sorted[i].row;
    if (r >= true_labels.size()) {
      throw Error(ErrorCode::kCountMismatch, "sample row beyond label vectors");
    }
    if (true_labels[r] == predicted_labels[r]) ++correct;
    const std::size_t k = i + 1;
    if (k == next || k == n) {
      curve.push_back({k, static_cast<double>(correct) / static_cast<double>(k)});
      next = k + step;
    }
  }
  return curve;
}

RocCurve roc_auc(std::span<const ScoredSample> samples) {
  check_scores(samples);
  const std::size_t positives = count_corners(samples);
  const std::size_t negatives = samples.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::kDegenerateLabels,
                "ROC needs both corner-case and normal samples (corner=" +
                    std::to_string(positives) + ", normal=" + std::to_string(negatives) + ")");
  }
  const auto sorted = sort_by_descending_dsa(samples);
  const double p = static_cast<double>(positives);
  const double q = static_cast<double>(negatives);

  RocCurve roc;
  roc.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  // Twice the trapezoid area in units of one (positive, negative) pair; exact
  // in integers, so it equals the pairwise rank statistic.
  std::uint64_t twice_area = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double v = sorted[i].dsa;
    std::uint64_t dtp = 0;
    std::uint64_t dfp = 0;
    for (; i < sorted.size() && sorted[i].dsa == v; ++i) {
      if (sorted[i].is_corner) {
        ++dtp;
      } else {
        ++dfp;
      }
    }
    twice_area += dfp * (2 * tp + dtp);
    tp += dtp;
    fp += dfp;
    roc.points.push_back({v, static_cast<double>(fp) / q, static_cast<double>(tp) / p});
  }
  roc.auc = static_cast<double>(twice_area) / (2.0 * p * q);
  return roc;
}

}  // namespace dsakit
