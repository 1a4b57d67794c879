#pragma once

// Straightforward serial transcription of the nearest-neighbour queries and
// DSA formulas: direct scans, sequential sums, full sorts, no index. Used as
// the oracle in tests and as the baseline in the benchmark.

#include <optional>
#include <span>
#include <vector>

#include "dsakit/dsa.hpp"
#include "dsakit/traces.hpp"

namespace dsakit::reference {

double distance(TraceView a, TraceView b);

std::optional<NeighborHit> nearest_in_class(const TraceSet& train, std::span<const ClassId> labels,
                                            TraceView query, ClassId c,
                                            std::optional<RowId> exclude = std::nullopt);
std::optional<NeighborHit> nearest_outside_class(const TraceSet& train,
                                                 std::span<const ClassId> labels,
                                                 TraceView query, ClassId c);
std::vector<NeighborHit> k_nearest_in_class(const TraceSet& train, std::span<const ClassId> labels,
                                            TraceView anchor, ClassId c, std::size_t k,
                                            std::optional<RowId> exclude = std::nullopt);
std::vector<NeighborHit> radius_in_class(const TraceSet& train, std::span<const ClassId> labels,
                                         TraceView anchor, ClassId c, double delta,
                                         std::optional<RowId> exclude = std::nullopt);

// One test input, scored against the training set. Throws the same error
// codes as DsaScorer for degenerate inputs.
DsaScore dsa(const LabeledTraceSet& train, TraceView x, ClassId c_x, const DsaConfig& config,
             std::optional<RowId> exclude = std::nullopt);

std::vector<DsaScore> batch_dsa(const LabeledTraceSet& train, const LabeledTraceSet& test,
                                const DsaConfig& config);

}  // namespace dsakit::reference
