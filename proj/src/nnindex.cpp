#include "dsakit/nnindex.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <queue>
#include <string>

#include "dsakit/error.hpp"
#include "dsakit/parallel.hpp"

namespace dsakit {

namespace {

constexpr std::size_t kLanes = 8;
constexpr std::size_t kCheckEvery = 32;  // dims between early-exit checks
constexpr std::size_t kQueryBlock = 16;
constexpr std::size_t kTileRows = 256;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Lanes 0-3 and 4-7 of the canonical 8-lane accumulator.
typedef double Lanes4 __attribute__((vector_size(32)));

inline Lanes4 load4(const double* p) noexcept {
  Lanes4 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline double combine(Lanes4 lo, Lanes4 hi) noexcept {
  return ((lo[0] + lo[1]) + (lo[2] + lo[3])) + ((hi[0] + hi[1]) + (hi[2] + hi[3]));
}

// Canonical squared distance: lane j accumulates dims j, j+8, j+16, ...; the
// lanes are combined pairwise and the tail (n % 8 dims) is added in order.
// Once the running partial sum exceeds `bound` the partial is returned;
// since every lane only grows, the full sum would exceed `bound` as well.
inline double bounded_squared_distance(const double* a, const double* b, std::size_t n,
                                       double bound) noexcept {
  Lanes4 lo = {0.0, 0.0, 0.0, 0.0};
  Lanes4 hi = lo;
  const std::size_t blocked = n / kLanes * kLanes;
  std::size_t i = 0;
  while (i < blocked) {
    const std::size_t stop = std::min(blocked, i + kCheckEvery);
    for (; i < stop; i += kLanes) {
      const Lanes4 t0 = load4(a + i) - load4(b + i);
      const Lanes4 t1 = load4(a + i + 4) - load4(b + i + 4);
      lo += t0 * t0;
      hi += t1 * t1;
    }
    if (i < blocked) {
      const double partial = combine(lo, hi);
      if (partial > bound) return partial;
    }
  }
  double total = combine(lo, hi);
  for (; i < n; ++i) {
    const double t = a[i] - b[i];
    total += t * t;
  }
  return total;
}

inline bool closer(double sq, RowId row, double best_sq, RowId best_row) {
  return sq < best_sq || (sq == best_sq && row < best_row);
}

}  // namespace

double squared_distance(TraceView a, TraceView b) noexcept {
  return bounded_squared_distance(a.data(), b.data(), std::min(a.size(), b.size()), kInf);
}

NeighborIndex::NeighborIndex(TraceSet train, ClassPartition partition)
    : train_(std::move(train)), partition_(std::move(partition)) {
  const std::size_t d = train_.n_neurons();
  std::size_t total = 0;
  packs_.resize(partition_.n_classes());
  for (ClassId c = 0; c < partition_.n_classes(); ++c) {
    const auto& members = partition_.members(c);
    total += members.size();
    auto& pack = packs_[c];
    pack.rows = members;
    pack.values.reserve(members.size() * d);
    for (RowId r : members) {
      if (r >= train_.n_samples()) {
        throw Error(ErrorCode::kDimensionMismatch, "partition refers to row beyond trace set");
      }
      auto row = train_.row(r);
      pack.values.insert(pack.values.end(), row.begin(), row.end());
    }
  }
  if (total != train_.n_samples()) {
    throw Error(ErrorCode::kDimensionMismatch, "class partition does not cover the trace set");
  }
}

void NeighborIndex::check_query(TraceView query) const {
  if (query.size() != dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "query has " + std::to_string(query.size()) + " values, index has dimension " +
                    std::to_string(dim()));
  }
}

void NeighborIndex::check_class(ClassId class_id) const {
  if (class_id >= n_classes()) {
    throw Error(ErrorCode::kLabelOutOfRange,
                "class " + std::to_string(class_id) + " outside [0," +
                    std::to_string(n_classes()) + ")");
  }
}

template <typename Visit>
void NeighborIndex::scan_class(ClassId class_id, Visit&& visit) const {
  const auto& pack = packs_[class_id];
  const std::size_t d = dim();
  for (std::size_t m = 0; m < pack.rows.size(); ++m) {
    visit(pack.rows[m], pack.values.data() + m * d);
  }
}

NeighborHit NeighborIndex::nearest_in_class(TraceView query, ClassId class_id,
                                            std::optional<RowId> exclude) const {
  check_query(query);
  check_class(class_id);
  Best best;
  best.sq = kInf;
  scan_class(class_id, [&](RowId row, const double* v) {
    if (exclude && *exclude == row) return;
    const double sq = bounded_squared_distance(query.data(), v, dim(), best.sq);
    if (!best.found || sq < best.sq) best = {sq, row, true};
  });
  if (!best.found) {
    throw Error(ErrorCode::kEmptyClass,
                "class " + std::to_string(class_id) + " has no eligible member");
  }
  return {best.row, std::sqrt(best.sq)};
}

NeighborHit NeighborIndex::nearest_outside_class(TraceView query, ClassId class_id) const {
  check_query(query);
  check_class(class_id);
  Best best;
  best.sq = kInf;
  for (ClassId c = 0; c < n_classes(); ++c) {
    if (c == class_id) continue;
    scan_class(c, [&](RowId row, const double* v) {
      const double sq = bounded_squared_distance(query.data(), v, dim(), best.sq);
      if (!best.found || closer(sq, row, best.sq, best.row)) best = {sq, row, true};
    });
  }
  if (!best.found) {
    throw Error(ErrorCode::kEmptyComplement,
                "no training sample outside class " + std::to_string(class_id));
  }
  return {best.row, std::sqrt(best.sq)};
}

std::vector<NeighborHit> NeighborIndex::k_nearest_in_class(TraceView anchor, ClassId class_id,
                                                           std::size_t k,
                                                           std::optional<RowId> exclude) const {
  check_query(anchor);
  check_class(class_id);
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  // Max-heap on (sq, row): the top is the current k-th best.
  using Entry = std::pair<double, RowId>;
  std::priority_queue<Entry> heap;
  scan_class(class_id, [&](RowId row, const double* v) {
    if (exclude && *exclude == row) return;
    const double bound = heap.size() < k ? kInf : heap.top().first;
    const double sq = bounded_squared_distance(anchor.data(), v, dim(), bound);
    if (heap.size() < k) {
      heap.emplace(sq, row);
    } else if (Entry{sq, row} < heap.top()) {
      heap.pop();
      heap.emplace(sq, row);
    }
  });
  if (heap.empty()) {
    throw Error(ErrorCode::kEmptyClass,
                "class " + std::to_string(class_id) + " has no eligible member");
  }
  std::vector<NeighborHit> hits(heap.size());
  for (std::size_t i = hits.size(); i-- > 0;) {
    hits[i] = {heap.top().second, std::sqrt(heap.top().first)};
    heap.pop();
  }
  return hits;
}

std::vector<NeighborHit> NeighborIndex::radius_in_class(TraceView anchor, ClassId class_id,
                                                        double delta,
                                                        std::optional<RowId> exclude) const {
  check_query(anchor);
  check_class(class_id);
  if (!(delta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "radius must be positive");
  std::vector<NeighborHit> hits;
  scan_class(class_id, [&](RowId row, const double* v) {
    if (exclude && *exclude == row) return;
    const double dist = std::sqrt(bounded_squared_distance(anchor.data(), v, dim(), kInf));
    if (dist < delta) hits.push_back({row, dist});
  });
  std::sort(hits.begin(), hits.end(), [](const NeighborHit& a, const NeighborHit& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  });
  return hits;
}

void NeighborIndex::sweep_block(const TraceSet& queries, std::size_t begin, std::size_t end,
                                std::span<const std::optional<RowId>> exclude,
                                std::span<Best> best) const {
  const std::size_t d = dim();
  const std::size_t n_cls = n_classes();
  for (ClassId c = 0; c < n_cls; ++c) {
    const auto& pack = packs_[c];
    const std::size_t members = pack.rows.size();
    for (std::size_t tile = 0; tile < members; tile += kTileRows) {
      const std::size_t tile_end = std::min(members, tile + kTileRows);
      for (std::size_t q = begin; q < end; ++q) {
        const double* qv = queries.row(q).data();
        // No training row has this id, so it stands for "nothing to skip".
        const RowId skip = exclude.empty() || !exclude[q] ? std::numeric_limits<RowId>::max() : *exclude[q];
        Best& b = best[(q - begin) * n_cls + c];
        for (std::size_t m = tile; m < tile_end; ++m) {
          const RowId row = pack.rows[m];
          if (row == skip) continue;
          const double sq =
              bounded_squared_distance(qv, pack.values.data() + m * d, d, b.found ? b.sq : kInf);
          if (!b.found || sq < b.sq) b = {sq, row, true};
        }
      }
    }
  }
}

std::vector<std::optional<NeighborHit>> NeighborIndex::nearest_per_class(
    TraceView query, std::optional<RowId> exclude) const {
  check_query(query);
  TraceSet one(1, dim(), std::vector<double>(query.begin(), query.end()));
  const std::optional<RowId> ex[1] = {exclude};
  return nearest_per_class_batch(one, ex, 1);
}

std::vector<std::optional<NeighborHit>> NeighborIndex::nearest_per_class_batch(
    const TraceSet& queries, std::span<const std::optional<RowId>> exclude, int threads) const {
  if (queries.n_samples() > 0 && queries.n_neurons() != dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "queries have " + std::to_string(queries.n_neurons()) +
                    " neurons, index has dimension " + std::to_string(dim()));
  }
  if (!exclude.empty() && exclude.size() != queries.n_samples()) {
    throw Error(ErrorCode::kCountMismatch, "exclusion list does not match query count");
  }
  const std::size_t n = queries.n_samples();
  const std::size_t n_cls = n_classes();
  std::vector<std::optional<NeighborHit>> out(n * n_cls);
  const auto n_blocks = static_cast<std::int64_t>((n + kQueryBlock - 1) / kQueryBlock);

#pragma omp parallel for schedule(dynamic) num_threads(resolve_threads(threads))
  for (std::int64_t blk = 0; blk < n_blocks; ++blk) {
    const std::size_t begin = static_cast<std::size_t>(blk) * kQueryBlock;
    const std::size_t end = std::min(n, begin + kQueryBlock);
    std::vector<Best> best((end - begin) * n_cls);
    sweep_block(queries, begin, end, exclude, best);
    for (std::size_t i = 0; i < best.size(); ++i) {
      if (best[i].found) {
        out[begin * n_cls + i] = NeighborHit{best[i].row, std::sqrt(best[i].sq)};
      }
    }
  }
  return out;
}

}  // namespace dsakit
