#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dsakit {

using ClassId = std::uint32_t;
using RowId = std::size_t;

// Read-only view of one activation trace (one row of a TraceSet).
using TraceView = std::span<const double>;

// Activation values of one input over an ordered set of traced neurons.
class ActivationTrace {
 public:
  explicit ActivationTrace(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  TraceView view() const noexcept { return values_; }
  operator TraceView() const noexcept { return values_; }  // NOLINT
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

// Dense row-major n_samples x n_neurons matrix of activation traces, held in
// f64. A set with zero rows is allowed so empty test batches are expressible;
// training sets are checked for non-emptiness by LabeledTraceSet.
class TraceSet {
 public:
  TraceSet() = default;
  TraceSet(std::size_t n_samples, std::size_t n_neurons, std::vector<double> values,
           std::string layer_name = {});

  static TraceSet from_rows(const std::vector<std::vector<double>>& rows,
                            std::string layer_name = {});

  std::size_t n_samples() const noexcept { return n_samples_; }
  std::size_t n_neurons() const noexcept { return n_neurons_; }
  const std::string& layer_name() const noexcept { return layer_name_; }
  void set_layer_name(std::string name) { layer_name_ = std::move(name); }

  TraceView row(RowId i) const noexcept {
    return {values_.data() + i * n_neurons_, n_neurons_};
  }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const TraceSet& a, const TraceSet& b) {
    return a.n_samples_ == b.n_samples_ && a.n_neurons_ == b.n_neurons_ &&
           a.values_ == b.values_;
  }

 private:
  std::size_t n_samples_ = 0;
  std::size_t n_neurons_ = 0;
  std::vector<double> values_;
  std::string layer_name_;
};

struct LabelPairs {
  std::vector<ClassId> true_labels;
  std::vector<ClassId> predicted_labels;
};

// Traces joined with true and predicted class ids.
class LabeledTraceSet {
 public:
  // Training sets additionally require every class to occur among true labels.
  static LabeledTraceSet training(TraceSet traces, LabelPairs labels, std::size_t n_classes);
  static LabeledTraceSet test(TraceSet traces, LabelPairs labels, std::size_t n_classes);

  const TraceSet& traces() const noexcept { return traces_; }
  const std::vector<ClassId>& true_labels() const noexcept { return labels_.true_labels; }
  const std::vector<ClassId>& predicted_labels() const noexcept {
    return labels_.predicted_labels;
  }
  std::size_t n_classes() const noexcept { return n_classes_; }
  std::size_t size() const noexcept { return traces_.n_samples(); }
  bool misclassified(RowId i) const {
    return labels_.true_labels[i] != labels_.predicted_labels[i];
  }

 private:
  LabeledTraceSet(TraceSet traces, LabelPairs labels, std::size_t n_classes)
      : traces_(std::move(traces)), labels_(std::move(labels)), n_classes_(n_classes) {}

  TraceSet traces_;
  LabelPairs labels_;
  std::size_t n_classes_ = 0;
};

// Class id -> ascending row ids. Disjoint and exhaustive over [0, n).
class ClassPartition {
 public:
  ClassPartition(std::span<const ClassId> labels, std::size_t n_classes);

  std::size_t n_classes() const noexcept { return members_.size(); }
  const std::vector<RowId>& members(ClassId c) const { return members_.at(c); }
  ClassId class_of(RowId row) const { return class_of_.at(row); }
  std::size_t max_class_size() const noexcept;

 private:
  std::vector<std::vector<RowId>> members_;
  std::vector<ClassId> class_of_;
};

struct NeuronStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // population standard deviation
};

inline constexpr double kVarianceFloor = 1e-12;
inline constexpr double kDefaultLowVarianceThreshold = 1e-5;

NeuronStats compute_neuron_stats(const TraceSet& set);

// (v - mean) / max(stddev, kVarianceFloor) per column, with stats taken from
// the training set.
TraceSet normalize_traces(const TraceSet& set, const NeuronStats& stats);

// Columns whose training stddev is >= threshold.
std::vector<std::size_t> columns_above_variance(const NeuronStats& stats, double threshold);
TraceSet select_columns(const TraceSet& set, std::span<const std::size_t> columns);

// ATRC binary trace files. Paths ending in ".csv" use the CSV fallback.
TraceSet load_trace_file(const std::filesystem::path& path);
void save_trace_file(const TraceSet& set, const std::filesystem::path& path);

// ALBL binary label files. Paths ending in ".csv" use the CSV fallback.
// When n_classes is given every label must lie in [0, n_classes).
LabelPairs load_labels(const std::filesystem::path& path, std::size_t n_samples,
                       std::optional<std::size_t> n_classes = std::nullopt);
void save_labels(const LabelPairs& labels, const std::filesystem::path& path);

// Shortest decimal text that parses back to the same double; "inf" for +inf.
std::string format_double(double v);

}  // namespace dsakit
