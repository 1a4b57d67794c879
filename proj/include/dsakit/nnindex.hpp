#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dsakit/traces.hpp"

namespace dsakit {

// Squared Euclidean distance with a fixed accumulation order: eight strided
// partial sums over whole blocks of eight, combined pairwise, then the tail in
// sequence. Every distance in the toolkit goes through this order so that the
// same pair of vectors always yields bit-identical results.
double squared_distance(TraceView a, TraceView b) noexcept;

inline double euclidean_distance(TraceView a, TraceView b) noexcept {
  return std::sqrt(squared_distance(a, b));
}

struct NeighborHit {
  RowId index = 0;
  double distance = 0.0;

  friend bool operator==(const NeighborHit&, const NeighborHit&) = default;
};

// Exact Euclidean nearest-neighbour queries over the rows of a training set,
// restricted to class subsets. Rows of each class are packed contiguously so
// that a query sweeps memory linearly. Ties resolve to the lowest row id.
class NeighborIndex {
 public:
  NeighborIndex(TraceSet train, ClassPartition partition);

  const TraceSet& traces() const noexcept { return train_; }
  const ClassPartition& partition() const noexcept { return partition_; }
  std::size_t n_classes() const noexcept { return partition_.n_classes(); }
  std::size_t dim() const noexcept { return train_.n_neurons(); }

  NeighborHit nearest_in_class(TraceView query, ClassId class_id,
                               std::optional<RowId> exclude = std::nullopt) const;
  NeighborHit nearest_outside_class(TraceView query, ClassId class_id) const;

  // Ascending by (distance, row). An anchor that is itself a member comes
  // first at distance 0 unless excluded.
  std::vector<NeighborHit> k_nearest_in_class(TraceView anchor, ClassId class_id, std::size_t k,
                                              std::optional<RowId> exclude = std::nullopt) const;
  // Members strictly closer than delta, ascending by (distance, row).
  std::vector<NeighborHit> radius_in_class(TraceView anchor, ClassId class_id, double delta,
                                           std::optional<RowId> exclude = std::nullopt) const;

  // Nearest member of every class for one query in a single sweep. Entry c is
  // empty when class c has no eligible member.
  std::vector<std::optional<NeighborHit>> nearest_per_class(
      TraceView query, std::optional<RowId> exclude = std::nullopt) const;

  // Blocked batch form of nearest_per_class: result[q * n_classes() + c].
  // Parallel over blocks of queries; results do not depend on thread count.
  // exclude, when non-empty, holds one optional row id per query.
  std::vector<std::optional<NeighborHit>> nearest_per_class_batch(
      const TraceSet& queries, std::span<const std::optional<RowId>> exclude = {},
      int threads = 0) const;

 private:
  struct ClassPack {
    std::vector<double> values;  // members x dim, row-major
    std::vector<RowId> rows;     // ascending original row ids
  };

  struct Best {
    double sq = 0.0;
    RowId row = 0;
    bool found = false;
  };

  void check_query(TraceView query) const;
  void check_class(ClassId class_id) const;
  void sweep_block(const TraceSet& queries, std::size_t begin, std::size_t end,
                   std::span<const std::optional<RowId>> exclude, std::span<Best> best) const;
  template <typename Visit>
  void scan_class(ClassId class_id, Visit&& visit) const;

  TraceSet train_;
  ClassPartition partition_;
  std::vector<ClassPack> packs_;
};

}  // namespace dsakit
