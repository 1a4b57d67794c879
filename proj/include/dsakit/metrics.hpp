#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dsakit/dsa.hpp"
#include "dsakit/traces.hpp"

namespace dsakit {

struct ScoredSample {
  double dsa = 0.0;  // finite and >= 0, or +inf
  bool is_corner = false;
  RowId row = 0;
};

// is_corner = (true label != predicted label) for every row.
std::vector<ScoredSample> scored_by_misclassification(std::span<const DsaScore> scores,
                                                      const LabeledTraceSet& test);
// is_corner taken from an external flag vector (e.g. the perturbation oracle).
std::vector<ScoredSample> scored_by_flags(std::span<const DsaScore> scores,
                                          const std::vector<bool>& corner);

// Descending score, ties by ascending row.
std::vector<ScoredSample> sort_by_descending_dsa(std::span<const ScoredSample> samples);

struct CoveragePoint {
  double threshold = 0.0;    // v_th; -inf for the saturating final point
  double coverage = 0.0;     // fraction of corner cases with dsa > v_th
  std::size_t n_above = 0;   // all samples with dsa > v_th
};

struct CoverageCurve {
  std::vector<CoveragePoint> points;  // thresholds strictly descending
};

struct AccuracyPoint {
  std::size_t k = 0;
  double accuracy = 0.0;

  friend bool operator==(const AccuracyPoint&, const AccuracyPoint&) = default;
};

struct RocPoint {
  double threshold = 0.0;  // samples with dsa >= threshold are flagged
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0,0) to (1,1)
  double auc = 0.0;
};

// Fraction of corner-case samples whose score is strictly above v_th.
double coverage(std::span<const ScoredSample> samples, double v_th);

// One point per distinct score (descending), evaluated at that score, plus a
// final point below every score where coverage saturates at 1.
CoverageCurve coverage_curve(std::span<const ScoredSample> samples);

inline constexpr std::size_t kAccuracyCurveStart = 100;
inline constexpr std::size_t kDefaultAccuracyStep = 100;

// Accuracy of the k highest-scoring samples for k = min(100, n), then every
// `step` samples, always ending at k = n.
std::vector<AccuracyPoint> accuracy_curve(std::span<const ScoredSample> samples,
                                          std::span<const ClassId> true_labels,
                                          std::span<const ClassId> predicted_labels,
                                          std::size_t step = kDefaultAccuracyStep);

// ROC from sweeping every distinct score as a threshold (equal scores form one
// step) and its trapezoidal area.
RocCurve roc_auc(std::span<const ScoredSample> samples);

}  // namespace dsakit
