#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsakit/nnindex.hpp"
#include "dsakit/traces.hpp"

namespace dsakit {

// DSA0 is the original distance ratio; DSA1..DSA3 are the three modifications
// (own-distance denominator, class centroids, local neighbourhood centroids).
enum class DsaVariant { kDsa0, kDsa1, kDsa2, kDsa3 };

inline constexpr DsaVariant kAllVariants[] = {DsaVariant::kDsa0, DsaVariant::kDsa1,
                                              DsaVariant::kDsa2, DsaVariant::kDsa3};

std::string_view variant_name(DsaVariant v);  // "dsa0".."dsa3"
DsaVariant parse_variant(std::string_view name);

inline constexpr std::size_t kDefaultNeighborhoodK = 20;

struct NeighborhoodSpec {
  enum class Mode { kNearest, kRadius };

  Mode mode = Mode::kNearest;
  std::size_t k = kDefaultNeighborhoodK;
  double delta = 0.0;

  static NeighborhoodSpec nearest(std::size_t k);
  static NeighborhoodSpec radius(double delta);
};

enum class ClassReference { kPredicted, kTrueLabel };
enum class ZeroDenominatorPolicy { kInfinity, kError };

struct DsaConfig {
  DsaVariant variant = DsaVariant::kDsa3;
  NeighborhoodSpec neighborhood;
  ClassReference class_reference = ClassReference::kPredicted;
  ZeroDenominatorPolicy zero_denominator = ZeroDenominatorPolicy::kInfinity;
  // Preprocessing, applied by preprocess() with training statistics.
  bool normalize = false;
  bool drop_low_variance = false;
  double low_variance_threshold = kDefaultLowVarianceThreshold;
  // The DSA3 anchor belongs to its own neighbourhood unless this is false.
  bool include_anchor = true;
  // Test row i is the training row i (train-on-train audits).
  bool exclude_self_by_row = false;
  int threads = 0;  // <= 0: all available, capped by SADL_DSA_THREADS
};

inline constexpr double kInfiniteDsa = std::numeric_limits<double>::infinity();

struct DsaScore {
  double value = 0.0;  // +inf when dist_a > 0 and dist_b == 0
  double dist_a = 0.0;
  double dist_b = 0.0;
  RowId anchor_a = 0;
  RowId anchor_b = 0;

  friend bool operator==(const DsaScore&, const DsaScore&) = default;
};

// dist_a / dist_b with the degenerate cases resolved: 0 when dist_a == 0,
// +inf (or an error) when only dist_b == 0.
double dsa_ratio(double dist_a, double dist_b, ZeroDenominatorPolicy policy);

// Scores test traces against a fixed training set. Immutable after
// construction and safe to share between threads.
class DsaScorer {
 public:
  explicit DsaScorer(const LabeledTraceSet& train);

  const NeighborIndex& index() const noexcept { return index_; }
  std::size_t n_classes() const noexcept { return index_.n_classes(); }
  TraceView centroid(ClassId c) const;

  DsaScore dsa0(TraceView x, ClassId c_x, std::optional<RowId> exclude = std::nullopt) const;
  DsaScore dsa1(TraceView x, ClassId c_x, std::optional<RowId> exclude = std::nullopt) const;
  DsaScore dsa2(TraceView x, ClassId c_x, std::optional<RowId> exclude = std::nullopt) const;
  DsaScore dsa3(TraceView x, ClassId c_x, const NeighborhoodSpec& spec,
                std::optional<RowId> exclude = std::nullopt) const;

  // Single sample under a full configuration (variant, policy, anchor rule).
  DsaScore score(TraceView x, ClassId c_x, const DsaConfig& config,
                 std::optional<RowId> exclude = std::nullopt) const;

  // One score per test row, in row order. Parallel across rows; the result is
  // identical for every thread count.
  std::vector<DsaScore> batch(const LabeledTraceSet& test, const DsaConfig& config) const;

 private:
  DsaScore finish(TraceView x, ClassId c_x, std::span<const std::optional<NeighborHit>> per_class,
                  const DsaConfig& config) const;
  std::vector<double> neighborhood_mean(RowId anchor, ClassId c, const NeighborhoodSpec& spec,
                                        bool include_anchor) const;

  NeighborIndex index_;
  std::vector<double> centroids_;  // n_classes x dim
};

struct PreparedSets {
  LabeledTraceSet train;
  LabeledTraceSet test;
};

// Applies the optional low-variance column filter and standardisation, both
// fitted on the training traces only.
PreparedSets preprocess(const LabeledTraceSet& train, const LabeledTraceSet& test,
                        const DsaConfig& config);

// Class each test row is scored against, per config.class_reference.
std::vector<ClassId> reference_classes(const LabeledTraceSet& test, const DsaConfig& config);

// preprocess + DsaScorer + batch.
std::vector<DsaScore> batch_dsa(const LabeledTraceSet& train, const LabeledTraceSet& test,
                                const DsaConfig& config);

}  // namespace dsakit
