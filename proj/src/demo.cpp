#include "dsakit/demo.hpp"


#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dsakit/error.hpp"
#include "dsakit/parallel.hpp"

namespace dsakit::demo {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 == 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::size_t Rng::index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

BlobSpec overlapping_blobs_spec() {
  BlobSpec spec;
  spec.centers = {{-1.0, 0.0}, {1.0, 0.0}};
  spec.sigma = 0.7;
  spec.n_train = 2000;
  spec.n_test = 500;
  return spec;
}

namespace {

void check_spec(const BlobSpec& spec) {
  if (spec.centers.size() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 classes");
  const std::size_t d = spec.centers.front().size();
  if (d < 2) throw Error(ErrorCode::kInvalidArgument, "need input dimension >= 2");
  for (const auto& c : spec.centers) {
    if (c.size() != d) throw Error(ErrorCode::kInvalidArgument, "class centres differ in width");
    for (double v : c) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite class centre");
    }
  }
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "sigma must be finite and non-negative");
  }
  if (spec.n_train < spec.centers.size()) {
    throw Error(ErrorCode::kInvalidArgument, "every class needs at least one training sample");
  }
}

void draw_blobs(const BlobSpec& spec, std::size_t n, Rng& rng, TraceSet& inputs,
                std::vector<ClassId>& labels, const char* name) {
  const std::size_t d = spec.centers.front().size();
  const std::size_t n_cls = spec.centers.size();
  std::vector<double> values(n * d);
  labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<ClassId>(i % n_cls);
    labels[i] = c;
    for (std::size_t j = 0; j < d; ++j) {
      values[i * d + j] = spec.centers[c][j] + spec.sigma * rng.normal();
    }
  }
  inputs = TraceSet(n, d, std::move(values), name);
}

void apply_activation(Activation act, std::vector<double>& z) {
  switch (act) {
    case Activation::kIdentity:
      break;
    case Activation::kRelu:
      for (auto& v : z) v = std::max(v, 0.0);
      break;
    case Activation::kSoftmax: {
      const double m = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (auto& v : z) {
        v = std::exp(v - m);
        sum += v;
      }
      for (auto& v : z) v /= sum;
      break;
    }
  }
}

std::vector<double> affine(const DenseLayer& layer, std::span<const double> a) {
  std::vector<double> z(layer.out);
  for (std::size_t o = 0; o < layer.out; ++o) {
    double acc = layer.bias[o];
    const double* w = layer.weights.data() + o * layer.in;
    for (std::size_t i = 0; i < layer.in; ++i) acc += w[i] * a[i];
    z[o] = acc;
  }
  return z;
}

std::vector<double> linear(const DenseLayer& layer, std::span<const double> a) {
  std::vector<double> z(layer.out);
  for (std::size_t o = 0; o < layer.out; ++o) {
    double acc = 0.0;
    const double* w = layer.weights.data() + o * layer.in;
    for (std::size_t i = 0; i < layer.in; ++i) acc += w[i] * a[i];
    z[o] = acc;
  }
  return z;
}

ClassId argmax(std::span<const double> v) {
  return static_cast<ClassId>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

SyntheticDataset generate_blobs(const BlobSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  SyntheticDataset data;
  data.spec = spec;
  data.seed = seed;
  Rng rng(seed);
  draw_blobs(spec, spec.n_train, rng, data.train_inputs, data.train_labels, "train_inputs");
  draw_blobs(spec, spec.n_test, rng, data.test_inputs, data.test_labels, "test_inputs");
  return data;
}

TinyNet::TinyNet(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty() || layers_.size() > kMaxLayers) {
    throw Error(ErrorCode::kInvalidArgument, "TinyNet takes 1 to 3 layers");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.in == 0 || layer.out == 0 || layer.weights.size() != layer.in * layer.out ||
        layer.bias.size() != layer.out) {
      throw Error(ErrorCode::kDimensionMismatch, "layer " + std::to_string(l + 1) + " is malformed");
    }
    if (l > 0 && layer.in != layers_[l - 1].out) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "layer " + std::to_string(l + 1) + " input width does not match previous output");
    }
    if (l + 1 < layers_.size() && layer.out > kMaxHiddenUnits) {
      throw Error(ErrorCode::kInvalidArgument, "hidden layers are limited to 64 units");
    }
    if (l + 1 < layers_.size() && layer.activation == Activation::kSoftmax) {
      throw Error(ErrorCode::kInvalidArgument, "softmax is only allowed on the output layer");
    }
  }
}

TinyNet TinyNet::random(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                        std::size_t n_classes, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  std::size_t in = input_dim;
  auto make = [&](std::size_t out, Activation act) {
    DenseLayer layer{in, out, std::vector<double>(in * out), std::vector<double>(out, 0.0), act};
    const double scale = std::sqrt(2.0 / static_cast<double>(in));
    for (auto& w : layer.weights) w = scale * rng.normal();
    layers.push_back(std::move(layer));
    in = out;
  };
  for (auto h : hidden) make(h, Activation::kRelu);
  make(n_classes, Activation::kSoftmax);
  return TinyNet(std::move(layers));
}

std::vector<std::string> TinyNet::tap_names() const {
  std::vector<std::string> names;
  for (std::size_t l = 0; l < layers_.size(); ++l) names.push_back("layer" + std::to_string(l + 1));
  return names;
}

std::size_t TinyNet::tap_index(std::string_view tap) const {
  const auto names = tap_names();
  for (std::size_t l = 0; l < names.size(); ++l) {
    if (names[l] == tap) return l;
  }
  throw Error(ErrorCode::kUnknownTap, "unknown tap '" + std::string(tap) + "'");
}

std::vector<std::vector<double>> TinyNet::forward_all(TraceView x) const {
  if (x.size() != input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "input width does not match the network");
  }
  std::vector<std::vector<double>> outs;
  outs.reserve(layers_.size());
  std::span<const double> a = x;
  for (const auto& layer : layers_) {
    auto z = affine(layer, a);
    apply_activation(layer.activation, z);
    outs.push_back(std::move(z));
    a = outs.back();
  }
  return outs;
}

std::vector<double> TinyNet::forward(TraceView x) const { return forward_all(x).back(); }

ClassId TinyNet::predict(TraceView x) const {
  if (x.size() != input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "input width does not match the network");
  }
  // Softmax preserves the argmax; compare logits so that rounding in exp()
  // cannot create ties.
  std::vector<double> a(x.begin(), x.end());
  for (const auto& layer : layers_) {
    a = affine(layer, a);
    if (layer.activation != Activation::kSoftmax) apply_activation(layer.activation, a);
  }
  return argmax(a);
}

TrainResult train_tinynet(const SyntheticDataset& data, const TrainConfig& config) {
  if (config.batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch size must be >= 1");
  if (!(config.learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate must be positive");
  }
  const std::size_t n = data.train_inputs.n_samples();
  const std::size_t n_cls = data.n_classes();
  TinyNet net = TinyNet::random(data.train_inputs.n_neurons(), config.hidden, n_cls, config.seed);
  auto& layers = net.mutable_layers();
  const std::size_t n_layers = layers.size();

  std::vector<std::vector<double>> vel_w(n_layers), vel_b(n_layers);
  std::vector<std::vector<double>> grad_w(n_layers), grad_b(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    vel_w[l].assign(layers[l].weights.size(), 0.0);
    vel_b[l].assign(layers[l].bias.size(), 0.0);
  }

  Rng rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  double last_loss = 0.0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      for (std::size_t l = 0; l < n_layers; ++l) {
        grad_w[l].assign(layers[l].weights.size(), 0.0);
        grad_b[l].assign(layers[l].bias.size(), 0.0);
      }
      for (std::size_t b = start; b < end; ++b) {
        const RowId row = order[b];
        const auto x = data.train_inputs.row(row);
        const auto outs = net.forward_all(x);
        const ClassId y = data.train_labels[row];
        std::vector<double> delta = outs.back();
        if (layers.back().activation == Activation::kIdentity) {
          apply_activation(Activation::kSoftmax, delta);
        }
        epoch_loss -= std::log(std::max(delta[y], 1e-300));
        // Softmax + cross-entropy gradient w.r.t. the logits.
        delta[y] -= 1.0;
        for (std::size_t l = n_layers; l-- > 0;) {
          const auto& layer = layers[l];
          std::span<const double> input = l == 0 ? x : std::span<const double>(outs[l - 1]);
          for (std::size_t o = 0; o < layer.out; ++o) {
            grad_b[l][o] += delta[o];
            double* gw = grad_w[l].data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) gw[i] += delta[o] * input[i];
          }
          if (l == 0) break;
          std::vector<double> prev(layer.in, 0.0);
          for (std::size_t o = 0; o < layer.out; ++o) {
            const double* w = layer.weights.data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) prev[i] += w[i] * delta[o];
          }
          if (layers[l - 1].activation == Activation::kRelu) {
            for (std::size_t i = 0; i < prev.size(); ++i) {
              if (outs[l - 1][i] <= 0.0) prev[i] = 0.0;
            }
          }
          delta = std::move(prev);
        }
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t l = 0; l < n_layers; ++l) {
        for (std::size_t k = 0; k < layers[l].weights.size(); ++k) {
          vel_w[l][k] = config.momentum * vel_w[l][k] - config.learning_rate * scale * grad_w[l][k];
          layers[l].weights[k] += vel_w[l][k];
        }
        for (std::size_t k = 0; k < layers[l].bias.size(); ++k) {
          vel_b[l][k] = config.momentum * vel_b[l][k] - config.learning_rate * scale * grad_b[l][k];
          layers[l].bias[k] += vel_b[l][k];
        }
      }
    }
    last_loss = epoch_loss / static_cast<double>(n);
    if (!std::isfinite(last_loss)) {
      throw Error(ErrorCode::kDivergence,
                  "training diverged at epoch " + std::to_string(epoch + 1));
    }
  }

  const auto predicted = predict_all(net, data.train_inputs, 1);
  TrainResult result{std::move(net), accuracy(data.train_labels, predicted), last_loss};
  return result;
}

std::vector<ClassId> predict_all(const TinyNet& net, const TraceSet& inputs, int threads) {
  std::vector<ClassId> out(inputs.n_samples());
  const auto n = static_cast<std::int64_t>(inputs.n_samples());
#pragma omp parallel for num_threads(resolve_threads(threads))
  for (std::int64_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = net.predict(inputs.row(static_cast<RowId>(i)));
  }
  return out;
}

double accuracy(std::span<const ClassId> truth, std::span<const ClassId> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::kCountMismatch, "label vectors differ in length");
  }
  if (truth.empty()) throw Error(ErrorCode::kEmptyInput, "no labels");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += truth[i] == predicted[i];
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

TraceSet extract_traces(const TinyNet& net, const TraceSet& inputs, std::string_view tap,
                        int threads) {
  const std::size_t layer = net.tap_index(tap);
  if (inputs.n_neurons() != net.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "input width does not match the network");
  }
  const std::size_t width = net.layers()[layer].out;
  std::vector<double> values(inputs.n_samples() * width);
  const auto n = static_cast<std::int64_t>(inputs.n_samples());
#pragma omp parallel for num_threads(resolve_threads(threads))
  for (std::int64_t i = 0; i < n; ++i) {
    const auto outs = net.forward_all(inputs.row(static_cast<RowId>(i)));
    std::copy(outs[layer].begin(), outs[layer].end(),
              values.begin() + static_cast<std::ptrdiff_t>(i) * static_cast<std::ptrdiff_t>(width));
  }
  return TraceSet(inputs.n_samples(), width, std::move(values), std::string(tap));
}

namespace {

constexpr std::size_t kMaxPieces = 4096;

// Walks x + s*dir for s in (0, length]. Within one linear piece of the ReLU
// network the output differences are affine in s, so a flip inside a piece
// also shows at the piece's far end; it suffices to evaluate the network at
// every piece boundary and at the segment end.
bool segment_flips(const TinyNet& net, TraceView x, const std::vector<double>& dir, double length,
                   ClassId label) {
  const std::size_t d = x.size();
  std::vector<double> point(d);
  double s = 0.0;
  for (std::size_t piece = 0; piece < kMaxPieces; ++piece) {
    for (std::size_t j = 0; j < d; ++j) point[j] = x[j] + s * dir[j];
    double next = length;
    std::vector<double> a(point), da(dir);
    for (const auto& layer : net.layers()) {
      auto z = affine(layer, a);
      auto dz = linear(layer, da);
      if (layer.activation == Activation::kRelu) {
        for (std::size_t o = 0; o < z.size(); ++o) {
          const bool active = z[o] > 0.0 || (z[o] == 0.0 && dz[o] > 0.0);
          double crossing = -1.0;
          if (active && dz[o] < 0.0) crossing = s + z[o] / -dz[o];
          if (!active && dz[o] > 0.0) crossing = s + -z[o] / dz[o];
          if (crossing > s) next = std::min(next, crossing);
          if (!active) {
            z[o] = 0.0;
            dz[o] = 0.0;
          }
        }
      }
      a = std::move(z);
      da = std::move(dz);
    }
    if (!(next > s)) next = std::nextafter(s, length);
    for (std::size_t j = 0; j < d; ++j) point[j] = x[j] + next * dir[j];
    if (net.predict(point) != label) return true;
    if (next >= length) return false;
    s = next;
  }
  return false;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

double norm_inf(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

}  // namespace

bool corner_oracle(const TinyNet& net, TraceView x, ClassId label,
                   const PerturbationOracleConfig& config) {
  if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must be positive and finite");
  }
  if (config.n_samples == 0) throw Error(ErrorCode::kInvalidArgument, "n_samples must be >= 1");
  if (net.predict(x) != label) return true;

  const std::size_t d = x.size();
  // Unit direction and the distance along it to the ball boundary.
  auto check = [&](std::vector<double> u) {
    const double len = norm2(u);
    if (!(len > 0.0)) return false;
    for (auto& e : u) e /= len;
    const double reach = config.norm == PerturbationNorm::kLinf ? config.epsilon / norm_inf(u)
                                                                : config.epsilon;
    return segment_flips(net, x, u, reach, label);
  };

  for (std::size_t j = 0; j < d; ++j) {
    for (double sign : {1.0, -1.0}) {
      std::vector<double> u(d, 0.0);
      u[j] = sign;
      if (check(std::move(u))) return true;
    }
  }
  Rng rng(config.seed);
  for (std::size_t s = 0; s < config.n_samples; ++s) {
    std::vector<double> u(d);
    if (config.norm == PerturbationNorm::kLinf) {
      for (auto& e : u) e = rng.uniform(-1.0, 1.0);
    } else {
      for (auto& e : u) e = rng.normal();
      const double r = std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
      const double len = norm2(u);
      for (auto& e : u) e *= r / len;
    }
    if (check(std::move(u))) return true;
  }
  return false;
}

std::vector<bool> corner_oracle_all(const TinyNet& net, const TraceSet& inputs,
                                    std::span<const ClassId> labels,
                                    const PerturbationOracleConfig& config, int threads) {
  if (labels.size() != inputs.n_samples()) {
    throw Error(ErrorCode::kCountMismatch, "label count does not match input count");
  }
  std::vector<char> flags(inputs.n_samples(), 0);
  const auto n = static_cast<std::int64_t>(inputs.n_samples());
#pragma omp parallel for schedule(dynamic, 16) num_threads(resolve_threads(threads))
  for (std::int64_t i = 0; i < n; ++i) {
    auto cfg = config;
    cfg.seed = config.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(i + 1);
    const auto row = static_cast<RowId>(i);
    flags[row] = corner_oracle(net, inputs.row(row), labels[row], cfg) ? 1 : 0;
  }
  return {flags.begin(), flags.end()};
}

}  // namespace dsakit::demo
