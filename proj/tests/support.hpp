#pragma once

// Shared fixtures for the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dsakit/demo.hpp"
#include "dsakit/dsa.hpp"
#include "dsakit/traces.hpp"

namespace dsakit::testkit {

inline LabeledTraceSet make_train(const std::vector<std::vector<double>>& rows,
                                  const std::vector<ClassId>& labels, std::size_t n_classes) {
  return LabeledTraceSet::training(TraceSet::from_rows(rows), LabelPairs{labels, labels},
                                   n_classes);
}

inline LabeledTraceSet make_test(const std::vector<std::vector<double>>& rows,
                                 const std::vector<ClassId>& truth,
                                 const std::vector<ClassId>& predicted, std::size_t n_classes) {
  return LabeledTraceSet::test(TraceSet::from_rows(rows), LabelPairs{truth, predicted}, n_classes);
}

struct Instance {
  LabeledTraceSet train;
  LabeledTraceSet test;
  std::size_t max_class_size = 0;
};

// n_train <= 300, d <= 16, C in 2..5. Every fourth instance draws values from
// a small integer grid, so exact distance ties and duplicate rows occur;
// allow_grid = false keeps all instances continuous.
inline Instance random_instance(std::uint64_t seed, std::size_t max_train = 300,
                                std::size_t max_test = 40, bool allow_grid = true) {
  demo::Rng rng(seed * 7919 + 17);
  const std::size_t c = 2 + rng.index(4);
  const std::size_t d = 1 + rng.index(16);
  const std::size_t n_train = std::max<std::size_t>(c * 2, 2 + rng.index(max_train - 1));
  const std::size_t n_test = 1 + rng.index(max_test);
  const bool grid = allow_grid && seed % 4 == 3;
  std::vector<double> centres(c * d);
  for (double& v : centres) v = 2.0 * rng.normal();
  auto draw = [&](ClassId cls) {
    std::vector<double> row(d);
    for (std::size_t j = 0; j < d; ++j) {
      row[j] = grid ? static_cast<double>(static_cast<int>(rng.index(5)) - 2)
                    : centres[cls * d + j] + rng.normal();
    }
    return row;
  };
  std::vector<std::vector<double>> train_rows, test_rows;
  std::vector<ClassId> train_labels, test_true, test_pred;
  std::vector<std::size_t> sizes(c, 0);
  for (std::size_t i = 0; i < n_train; ++i) {
    const auto cls = static_cast<ClassId>(i < c ? i : rng.index(c));
    ++sizes[cls];
    train_labels.push_back(cls);
    train_rows.push_back(draw(cls));
  }
  for (std::size_t i = 0; i < n_test; ++i) {
    const auto cls = static_cast<ClassId>(rng.index(c));
    test_true.push_back(cls);
    test_pred.push_back(rng.uniform() < 0.8 ? cls : static_cast<ClassId>(rng.index(c)));
    test_rows.push_back(draw(cls));
  }
  return {make_train(train_rows, train_labels, c), make_test(test_rows, test_true, test_pred, c),
          *std::max_element(sizes.begin(), sizes.end())};
}

// |a - b| / max(|a|, |b|); 0 when both are equal (including both +inf).
inline double rel_diff(double a, double b) {
  if (a == b) return 0.0;
  if (!std::isfinite(a) || !std::isfinite(b)) return INFINITY;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

// Applies f to every row of a trace set.
template <class F>
TraceSet map_rows(const TraceSet& set, F&& f) {
  std::vector<std::vector<double>> rows;
  for (RowId i = 0; i < set.n_samples(); ++i) {
    auto r = set.row(i);
    rows.push_back(f(std::vector<double>(r.begin(), r.end())));
  }
  return TraceSet::from_rows(rows);
}

template <class F>
Instance transform(const Instance& in, F&& f) {
  LabelPairs tr{in.train.true_labels(), in.train.predicted_labels()};
  LabelPairs te{in.test.true_labels(), in.test.predicted_labels()};
  return {LabeledTraceSet::training(map_rows(in.train.traces(), f), tr, in.train.n_classes()),
          LabeledTraceSet::test(map_rows(in.test.traces(), f), te, in.test.n_classes()),
          in.max_class_size};
}

// Random d x d orthogonal matrix (Gram-Schmidt on Gaussian columns), row-major.
inline std::vector<double> random_orthogonal(std::size_t d, std::uint64_t seed) {
  demo::Rng rng(seed);
  std::vector<double> q(d * d);
  for (std::size_t col = 0; col < d; ++col) {
    std::vector<double> v(d);
    for (double& x : v) x = rng.normal();
    for (std::size_t prev = 0; prev < col; ++prev) {
      double dot = 0.0;
      for (std::size_t i = 0; i < d; ++i) dot += v[i] * q[i * d + prev];
      for (std::size_t i = 0; i < d; ++i) v[i] -= dot * q[i * d + prev];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < d; ++i) q[i * d + col] = v[i] / norm;
  }
  return q;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dsakit_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace dsakit::testkit
