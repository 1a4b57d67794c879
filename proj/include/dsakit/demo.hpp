#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "dsakit/traces.hpp"

namespace dsakit::demo {

// Reproducible random source: mt19937_64 output is fixed by the standard, and
// the float conversions below are ours, so a seed yields the same numbers on
// every conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();                     // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();                      // standard normal, Box-Muller
  std::size_t index(std::size_t n);     // [0, n)

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct BlobSpec {
  std::vector<std::vector<double>> centers;  // one per class, all of width d
  double sigma = 1.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
};

// Two classes at (-1, 0) and (+1, 0), sigma 0.7, 2000 train / 500 test.
BlobSpec overlapping_blobs_spec();

struct SyntheticDataset {
  BlobSpec spec;
  std::uint64_t seed = 0;
  TraceSet train_inputs;
  std::vector<ClassId> train_labels;
  TraceSet test_inputs;
  std::vector<ClassId> test_labels;

  std::size_t n_classes() const noexcept { return spec.centers.size(); }
};

// Isotropic Gaussian blobs; sample i belongs to class i % C.
SyntheticDataset generate_blobs(const BlobSpec& spec, std::uint64_t seed);

enum class Activation { kIdentity, kRelu, kSoftmax };

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;     // out
  Activation activation = Activation::kRelu;
};

inline constexpr std::size_t kMaxLayers = 3;
inline constexpr std::size_t kMaxHiddenUnits = 64;

// A small fully connected classifier. Layer i is exposed as tap "layer<i+1>";
// a tap's trace is that layer's post-activation output.
class TinyNet {
 public:
  explicit TinyNet(std::vector<DenseLayer> layers);

  // He-initialised ReLU hidden layers and a softmax output layer.
  static TinyNet random(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                        std::size_t n_classes, std::uint64_t seed);

  std::size_t input_dim() const noexcept { return layers_.front().in; }
  std::size_t output_dim() const noexcept { return layers_.back().out; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& mutable_layers() noexcept { return layers_; }

  std::vector<std::string> tap_names() const;
  std::size_t tap_index(std::string_view tap) const;

  // Post-activation outputs of every layer.
  std::vector<std::vector<double>> forward_all(TraceView x) const;
  std::vector<double> forward(TraceView x) const;
  // Argmax of the output, ties to the lowest class id.
  ClassId predict(TraceView x) const;

 private:
  std::vector<DenseLayer> layers_;
};

struct TrainConfig {
  std::vector<std::size_t> hidden = {16, 16};
  std::size_t epochs = 40;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

struct TrainResult {
  TinyNet net;
  double train_accuracy = 0.0;
  double final_loss = 0.0;
};

// Mini-batch SGD with momentum on softmax cross-entropy. Single-threaded and
// deterministic under the seed. A non-finite loss raises kDivergence.
TrainResult train_tinynet(const SyntheticDataset& data, const TrainConfig& config);

std::vector<ClassId> predict_all(const TinyNet& net, const TraceSet& inputs, int threads = 0);
double accuracy(std::span<const ClassId> truth, std::span<const ClassId> predicted);

// Row i is the post-activation output of `tap` for input row i.
TraceSet extract_traces(const TinyNet& net, const TraceSet& inputs, std::string_view tap,
                        int threads = 0);

enum class PerturbationNorm { kLinf, kL2 };

struct PerturbationOracleConfig {
  double epsilon = 0.1;
  std::size_t n_samples = 256;
  std::uint64_t seed = 0;
  PerturbationNorm norm = PerturbationNorm::kLinf;
};

// True when the net already mislabels x, or when some perturbation p with
// 0 < |p| <= epsilon flips the prediction away from `label`. Candidate
// perturbations are n_samples uniform draws from the ball plus the 2d axis
// extremes; for each one the whole segment from x through x + p to the ball
// boundary is checked exactly, by walking the piecewise-linear pieces of the
// ReLU network. Every reported flip is a real point in the ball (no false
// positives); flips outside the sampled directions can be missed.
bool corner_oracle(const TinyNet& net, TraceView x, ClassId label,
                   const PerturbationOracleConfig& config);

std::vector<bool> corner_oracle_all(const TinyNet& net, const TraceSet& inputs,
                                    std::span<const ClassId> labels,
                                    const PerturbationOracleConfig& config, int threads = 0);

}  // namespace dsakit::demo
