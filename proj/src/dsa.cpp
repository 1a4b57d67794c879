#include "dsakit/dsa.hpp"


#include <mutex>
#include <string>

#include "dsakit/error.hpp"
#include "dsakit/parallel.hpp"

namespace dsakit {

std::string_view variant_name(DsaVariant v) {
  switch (v) {
    case DsaVariant::kDsa0: return "dsa0";
    case DsaVariant::kDsa1: return "dsa1";
    case DsaVariant::kDsa2: return "dsa2";
    case DsaVariant::kDsa3: return "dsa3";
  }
  return "dsa?";
}

DsaVariant parse_variant(std::string_view name) {
  for (auto v : kAllVariants) {
    if (variant_name(v) == name) return v;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown DSA variant '" + std::string(name) + "'");
}

NeighborhoodSpec NeighborhoodSpec::nearest(std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "neighbourhood size k must be >= 1");
  return {Mode::kNearest, k, 0.0};
}

NeighborhoodSpec NeighborhoodSpec::radius(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::kInvalidArgument, "neighbourhood radius must be positive and finite");
  }
  return {Mode::kRadius, 0, delta};
}

double dsa_ratio(double dist_a, double dist_b, ZeroDenominatorPolicy policy) {
  if (dist_a == 0.0) return 0.0;
  if (dist_b == 0.0) {
    if (policy == ZeroDenominatorPolicy::kError) {
      throw Error(ErrorCode::kZeroDenominator, "dist_b is zero while dist_a is positive");
    }
    return kInfiniteDsa;
  }
  return dist_a / dist_b;
}

DsaScorer::DsaScorer(const LabeledTraceSet& train)
    : index_(train.traces(), ClassPartition(train.true_labels(), train.n_classes())) {
  const std::size_t d = index_.dim();
  const std::size_t n_cls = index_.n_classes();
  centroids_.assign(n_cls * d, 0.0);
  for (ClassId c = 0; c < n_cls; ++c) {
    const auto& members = index_.partition().members(c);
    if (members.empty()) {
      throw Error(ErrorCode::kEmptyClass, "class " + std::to_string(c) + " has no training samples");
    }
    double* m = centroids_.data() + c * d;
    for (RowId r : members) {
      auto row = index_.traces().row(r);
      for (std::size_t j = 0; j < d; ++j) m[j] += row[j];
    }
    for (std::size_t j = 0; j < d; ++j) m[j] /= static_cast<double>(members.size());
  }
}

TraceView DsaScorer::centroid(ClassId c) const {
  if (c >= n_classes()) throw Error(ErrorCode::kLabelOutOfRange, "class id out of range");
  return {centroids_.data() + c * index_.dim(), index_.dim()};
}

std::vector<double> DsaScorer::neighborhood_mean(RowId anchor, ClassId c,
                                                 const NeighborhoodSpec& spec,
                                                 bool include_anchor) const {
  const auto anchor_row = index_.traces().row(anchor);
  const std::optional<RowId> exclude =
      include_anchor ? std::nullopt : std::optional<RowId>(anchor);
  std::vector<NeighborHit> hits;
  if (!include_anchor && index_.partition().members(c).size() <= 1) {
    throw Error(ErrorCode::kEmptyNeighborhood,
                "neighbourhood of row " + std::to_string(anchor) + " is empty");
  }
  if (spec.mode == NeighborhoodSpec::Mode::kNearest) {
    hits = index_.k_nearest_in_class(anchor_row, c, spec.k, exclude);
  } else {
    hits = index_.radius_in_class(anchor_row, c, spec.delta, exclude);
  }
  if (hits.empty()) {
    throw Error(ErrorCode::kEmptyNeighborhood,
                "no class member within radius of row " + std::to_string(anchor));
  }
  std::vector<double> mean(index_.dim(), 0.0);
  for (const auto& h : hits) {
    auto row = index_.traces().row(h.index);
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += row[j];
  }
  for (auto& v : mean) v /= static_cast<double>(hits.size());
  return mean;
}

DsaScore DsaScorer::finish(TraceView x, ClassId c_x,
                           std::span<const std::optional<NeighborHit>> per_class,
                           const DsaConfig& config) const {
  if (c_x >= n_classes()) {
    throw Error(ErrorCode::kLabelOutOfRange, "reference class " + std::to_string(c_x) +
                                                 " unknown to the training set");
  }
  const auto& hit_a = per_class[c_x];
  if (!hit_a) {
    throw Error(ErrorCode::kEmptyClass, "class " + std::to_string(c_x) + " has no eligible member");
  }
  std::optional<NeighborHit> hit_b;
  for (ClassId c = 0; c < per_class.size(); ++c) {
    const auto& h = per_class[c];
    if (c == c_x || !h) continue;
    if (!hit_b || h->distance < hit_b->distance ||
        (h->distance == hit_b->distance && h->index < hit_b->index)) {
      hit_b = h;
    }
  }
  if (!hit_b) {
    throw Error(ErrorCode::kEmptyComplement,
                "no training sample outside class " + std::to_string(c_x));
  }

  DsaScore s;
  s.anchor_a = hit_a->index;
  s.anchor_b = hit_b->index;
  const auto& partition = index_.partition();
  switch (config.variant) {
    case DsaVariant::kDsa0: {
      s.dist_a = hit_a->distance;
      const auto from_anchor = index_.nearest_outside_class(index_.traces().row(hit_a->index), c_x);
      s.anchor_b = from_anchor.index;
      s.dist_b = from_anchor.distance;
      break;
    }
    case DsaVariant::kDsa1:
      s.dist_a = hit_a->distance;
      s.dist_b = hit_b->distance;
      break;
    case DsaVariant::kDsa2:
      s.dist_a = euclidean_distance(x, centroid(c_x));
      s.dist_b = euclidean_distance(x, centroid(partition.class_of(hit_b->index)));
      break;
    case DsaVariant::kDsa3: {
      const auto m_a =
          neighborhood_mean(hit_a->index, c_x, config.neighborhood, config.include_anchor);
      const auto m_b = neighborhood_mean(hit_b->index, partition.class_of(hit_b->index),
                                         config.neighborhood, config.include_anchor);
      s.dist_a = euclidean_distance(x, m_a);
      s.dist_b = euclidean_distance(x, m_b);
      break;
    }
  }
  s.value = dsa_ratio(s.dist_a, s.dist_b, config.zero_denominator);
  return s;
}

DsaScore DsaScorer::score(TraceView x, ClassId c_x, const DsaConfig& config,
                          std::optional<RowId> exclude) const {
  const auto per_class = index_.nearest_per_class(x, exclude);
  return finish(x, c_x, per_class, config);
}

DsaScore DsaScorer::dsa0(TraceView x, ClassId c_x, std::optional<RowId> exclude) const {
  DsaConfig config;
  config.variant = DsaVariant::kDsa0;
  return score(x, c_x, config, exclude);
}

DsaScore DsaScorer::dsa1(TraceView x, ClassId c_x, std::optional<RowId> exclude) const {
  DsaConfig config;
  config.variant = DsaVariant::kDsa1;
  return score(x, c_x, config, exclude);
}

DsaScore DsaScorer::dsa2(TraceView x, ClassId c_x, std::optional<RowId> exclude) const {
  DsaConfig config;
  config.variant = DsaVariant::kDsa2;
  return score(x, c_x, config, exclude);
}

DsaScore DsaScorer::dsa3(TraceView x, ClassId c_x, const NeighborhoodSpec& spec,
                         std::optional<RowId> exclude) const {
  DsaConfig config;
  config.variant = DsaVariant::kDsa3;
  config.neighborhood = spec;
  return score(x, c_x, config, exclude);
}

std::vector<ClassId> reference_classes(const LabeledTraceSet& test, const DsaConfig& config) {
  return config.class_reference == ClassReference::kPredicted ? test.predicted_labels()
                                                              : test.true_labels();
}

std::vector<DsaScore> DsaScorer::batch(const LabeledTraceSet& test, const DsaConfig& config) const {
  const std::size_t n = test.size();
  if (n == 0) return {};
  if (test.traces().n_neurons() != index_.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "test traces have " + std::to_string(test.traces().n_neurons()) +
                    " neurons, training traces have " + std::to_string(index_.dim()));
  }
  const auto classes = reference_classes(test, config);
  std::vector<std::optional<RowId>> exclude;
  if (config.exclude_self_by_row) {
    if (n != index_.traces().n_samples()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "self exclusion by row needs test and training sets of equal size");
    }
    exclude.resize(n);
    for (RowId i = 0; i < n; ++i) exclude[i] = i;
  }

  const int threads = resolve_threads(config.threads);
  const auto per_class = index_.nearest_per_class_batch(test.traces(), exclude, threads);
  const std::size_t n_cls = n_classes();

  std::vector<DsaScore> scores(n);
  std::mutex err_mu;
  std::optional<RowId> err_row;
  std::optional<Error> err;
  const auto n_rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads)
  for (std::int64_t i = 0; i < n_rows; ++i) {
    const auto row = static_cast<RowId>(i);
    try {
      scores[row] = finish(test.traces().row(row), classes[row],
                           std::span(per_class).subspan(row * n_cls, n_cls), config);
    } catch (const Error& e) {
      std::lock_guard lock(err_mu);
      if (!err_row || row < *err_row) {
        err_row = row;
        err.emplace(e.code(), "test row " + std::to_string(row) + ": " + e.what());
      }
    }
  }
  if (err) throw *err;
  return scores;
}

PreparedSets preprocess(const LabeledTraceSet& train, const LabeledTraceSet& test,
                        const DsaConfig& config) {
  if (test.size() > 0 && test.traces().n_neurons() != train.traces().n_neurons()) {
    throw Error(ErrorCode::kDimensionMismatch, "train and test traces differ in width");
  }
  TraceSet tr = train.traces();
  TraceSet te = test.traces();
  if (config.drop_low_variance) {
    const auto keep = columns_above_variance(compute_neuron_stats(tr), config.low_variance_threshold);
    tr = select_columns(tr, keep);
    te = select_columns(te, keep);
  }
  if (config.normalize) {
    const auto stats = compute_neuron_stats(tr);
    tr = normalize_traces(tr, stats);
    te = normalize_traces(te, stats);
  }
  return {LabeledTraceSet::training(std::move(tr),
                                    {train.true_labels(), train.predicted_labels()},
                                    train.n_classes()),
          LabeledTraceSet::test(std::move(te), {test.true_labels(), test.predicted_labels()},
                                test.n_classes())};
}

std::vector<DsaScore> batch_dsa(const LabeledTraceSet& train, const LabeledTraceSet& test,
                                const DsaConfig& config) {
  if (test.size() == 0) return {};
  if (!config.normalize && !config.drop_low_variance) {
    return DsaScorer(train).batch(test, config);
  }
  const auto prepared = preprocess(train, test, config);
  return DsaScorer(prepared.train).batch(prepared.test, config);
}

}  // namespace dsakit
