#include "dsakit/reference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsakit/error.hpp"

namespace dsakit::reference {

namespace {

std::vector<NeighborHit> sorted_class_hits(const TraceSet& train, std::span<const ClassId> labels,
                                           TraceView anchor, ClassId c,
                                           std::optional<RowId> exclude) {
  std::vector<NeighborHit> hits;
  for (RowId i = 0; i < train.n_samples(); ++i) {
    if (labels[i] != c || (exclude && *exclude == i)) continue;
    hits.push_back({i, distance(anchor, train.row(i))});
  }
  std::sort(hits.begin(), hits.end(), [](const NeighborHit& a, const NeighborHit& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.index < b.index;
  });
  return hits;
}

std::vector<double> mean_of(const TraceSet& train, const std::vector<NeighborHit>& hits) {
  std::vector<double> m(train.n_neurons(), 0.0);
  for (const auto& h : hits) {
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += train.row(h.index)[j];
  }
  for (auto& v : m) v /= static_cast<double>(hits.size());
  return m;
}

std::vector<double> class_mean(const TraceSet& train, std::span<const ClassId> labels, ClassId c) {
  std::vector<double> m(train.n_neurons(), 0.0);
  std::size_t count = 0;
  for (RowId i = 0; i < train.n_samples(); ++i) {
    if (labels[i] != c) continue;
    ++count;
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += train.row(i)[j];
  }
  for (auto& v : m) v /= static_cast<double>(count);
  return m;
}

std::vector<double> local_mean(const LabeledTraceSet& train, RowId anchor, ClassId c,
                               const DsaConfig& config) {
  const auto& traces = train.traces();
  const std::optional<RowId> exclude =
      config.include_anchor ? std::nullopt : std::optional<RowId>(anchor);
  auto hits = sorted_class_hits(traces, train.true_labels(), traces.row(anchor), c, exclude);
  if (config.neighborhood.mode == NeighborhoodSpec::Mode::kNearest) {
    if (hits.size() > config.neighborhood.k) hits.resize(config.neighborhood.k);
  } else {
    std::erase_if(hits, [&](const NeighborHit& h) { return !(h.distance < config.neighborhood.delta); });
  }
  if (hits.empty()) throw Error(ErrorCode::kEmptyNeighborhood, "empty neighbourhood");
  return mean_of(traces, hits);
}

}  // namespace

double distance(TraceView a, TraceView b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(sum);
}

std::optional<NeighborHit> nearest_in_class(const TraceSet& train, std::span<const ClassId> labels,
                                            TraceView query, ClassId c,
                                            std::optional<RowId> exclude) {
  std::optional<NeighborHit> best;
  for (RowId i = 0; i < train.n_samples(); ++i) {
    if (labels[i] != c || (exclude && *exclude == i)) continue;
    const double d = distance(query, train.row(i));
    if (!best || d < best->distance) best = NeighborHit{i, d};
  }
  return best;
}

std::optional<NeighborHit> nearest_outside_class(const TraceSet& train,
                                                 std::span<const ClassId> labels,
                                                 TraceView query, ClassId c) {
  std::optional<NeighborHit> best;
  for (RowId i = 0; i < train.n_samples(); ++i) {
    if (labels[i] == c) continue;
    const double d = distance(query, train.row(i));
    if (!best || d < best->distance) best = NeighborHit{i, d};
  }
  return best;
}

std::vector<NeighborHit> k_nearest_in_class(const TraceSet& train, std::span<const ClassId> labels,
                                            TraceView anchor, ClassId c, std::size_t k,
                                            std::optional<RowId> exclude) {
  auto hits = sorted_class_hits(train, labels, anchor, c, exclude);
  if (hits.size() > k) hits.resize(k);
  return hits;
}

std::vector<NeighborHit> radius_in_class(const TraceSet& train, std::span<const ClassId> labels,
                                         TraceView anchor, ClassId c, double delta,
                                         std::optional<RowId> exclude) {
  auto hits = sorted_class_hits(train, labels, anchor, c, exclude);
  std::erase_if(hits, [&](const NeighborHit& h) { return !(h.distance < delta); });
  return hits;
}

DsaScore dsa(const LabeledTraceSet& train, TraceView x, ClassId c_x, const DsaConfig& config,
             std::optional<RowId> exclude) {
  const auto& traces = train.traces();
  const auto& labels = train.true_labels();

  // x_a: nearest training trace of the reference class.
  const auto x_a = nearest_in_class(traces, labels, x, c_x, exclude);
  if (!x_a) throw Error(ErrorCode::kEmptyClass, "reference class has no training sample");

  // x_b: nearest training trace of any other class, measured from x.
  std::optional<NeighborHit> x_b;
  for (RowId i = 0; i < traces.n_samples(); ++i) {
    if (labels[i] == c_x || (exclude && *exclude == i)) continue;
    const double d = distance(x, traces.row(i));
    if (!x_b || d < x_b->distance) x_b = NeighborHit{i, d};
  }
  if (!x_b) throw Error(ErrorCode::kEmptyComplement, "no training sample outside class");

  DsaScore s;
  s.anchor_a = x_a->index;
  s.anchor_b = x_b->index;
  switch (config.variant) {
    case DsaVariant::kDsa0: {
      // x_b measured from x_a instead of x.
      const auto from_a = nearest_outside_class(traces, labels, traces.row(x_a->index), c_x);
      s.dist_a = x_a->distance;
      s.dist_b = from_a->distance;
      s.anchor_b = from_a->index;
      break;
    }
    case DsaVariant::kDsa1:
      s.dist_a = x_a->distance;
      s.dist_b = x_b->distance;
      break;
    case DsaVariant::kDsa2:
      s.dist_a = distance(x, class_mean(traces, labels, c_x));
      s.dist_b = distance(x, class_mean(traces, labels, labels[x_b->index]));
      break;
    case DsaVariant::kDsa3:
      s.dist_a = distance(x, local_mean(train, x_a->index, c_x, config));
      s.dist_b = distance(x, local_mean(train, x_b->index, labels[x_b->index], config));
      break;
  }
  if (s.dist_a == 0.0) {
    s.value = 0.0;
  } else if (s.dist_b == 0.0) {
    if (config.zero_denominator == ZeroDenominatorPolicy::kError) {
      throw Error(ErrorCode::kZeroDenominator, "zero denominator");
    }
    s.value = kInfiniteDsa;
  } else {
    s.value = s.dist_a / s.dist_b;
  }
  return s;
}

std::vector<DsaScore> batch_dsa(const LabeledTraceSet& train, const LabeledTraceSet& test,
                                const DsaConfig& config) {
  const auto classes = reference_classes(test, config);
  std::vector<DsaScore> out;
  out.reserve(test.size());
  for (RowId i = 0; i < test.size(); ++i) {
    const std::optional<RowId> exclude =
        config.exclude_self_by_row ? std::optional<RowId>(i) : std::nullopt;
    out.push_back(dsa(train, test.traces().row(i), classes[i], config, exclude));
  }
  return out;
}

}  // namespace dsakit::reference
