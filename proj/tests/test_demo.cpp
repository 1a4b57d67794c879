#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <fstream>
#include <sstream>

#include "dsakit/demo.hpp"
#include "dsakit/dsa.hpp"
#include "dsakit/error.hpp"

using namespace dsakit;
using namespace dsakit::demo;

namespace {

// Golden reference for generate_blobs: 2 classes at (-1, 0) and (+1, 0),
// sigma 0.5, 300 train + 100 test rows, seed 2024.
BlobSpec golden_spec() {
  BlobSpec s;
  s.centers = {{-1.0, 0.0}, {1.0, 0.0}};
  s.sigma = 0.5;
  s.n_train = 300;
  s.n_test = 100;
  return s;
}
constexpr std::uint64_t kGoldenSeed = 2024;

std::string golden_path() { return std::string(DSAKIT_TEST_DATA) + "/blobs_golden.csv"; }

// split,label,x0,x1 with 17 significant digits.
void write_golden(const SyntheticDataset& d, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  ASSERT_NE(f, nullptr);
  std::fprintf(f, "split,label,x0,x1\n");
  auto dump = [&](const char* split, const TraceSet& x, const std::vector<ClassId>& y) {
    for (RowId i = 0; i < x.n_samples(); ++i) {
      std::fprintf(f, "%s,%u,%.17g,%.17g\n", split, static_cast<unsigned>(y[i]), x.row(i)[0],
                   x.row(i)[1]);
    }
  };
  dump("train", d.train_inputs, d.train_labels);
  dump("test", d.test_inputs, d.test_labels);
  std::fclose(f);
}

// Two blobs six sigma apart along x0.
BlobSpec separable_spec() {
  BlobSpec s;
  s.centers = {{-3.0, 0.0}, {3.0, 0.0}};
  s.sigma = 1.0;
  s.n_train = 1000;
  s.n_test = 1000;
  return s;
}

TinyNet train_separable() {
  TrainConfig tc;
  tc.epochs = 20;
  tc.seed = 3;
  return train_tinynet(generate_blobs(separable_spec(), 1), tc).net;
}

// Dense grid over the L-inf ball, pitch epsilon / 50, origin excluded.
bool grid_flip(const TinyNet& net, TraceView x, ClassId label, double eps) {
  if (net.predict(x) != label) return true;
  const int steps = 50;
  std::vector<double> p(2);
  for (int i = -steps; i <= steps; ++i) {
    for (int j = -steps; j <= steps; ++j) {
      if (i == 0 && j == 0) continue;
      p[0] = x[0] + eps * i / steps;
      p[1] = x[1] + eps * j / steps;
      if (net.predict(p) != label) return true;
    }
  }
  return false;
}

std::vector<double> vec(const TraceSet& t) { return {t.values().begin(), t.values().end()}; }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no dsakit::Error thrown";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(Rng, DeterministicAndInRange) {
  Rng a(5), b(5), c(6);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    differs |= u != c.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const auto k = a.index(7);
    EXPECT_EQ(k, b.index(7));
    EXPECT_LT(k, 7u);
    EXPECT_EQ(a.normal(), b.normal());
  }
  EXPECT_TRUE(differs);
  Rng n(11);
  double sum = 0.0, sq = 0.0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double z = n.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / m, 0.0, 0.01);
  EXPECT_NEAR(sq / m, 1.0, 0.02);
}

TEST(GenerateBlobs, MatchesGoldenFile) {
  const auto d = generate_blobs(golden_spec(), kGoldenSeed);
  if (std::getenv("DSAKIT_REGEN_GOLDEN")) write_golden(d, golden_path());
  std::ifstream in(golden_path());
  ASSERT_TRUE(in) << golden_path();
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "split,label,x0,x1");
  std::size_t train_rows = 0, test_rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string split, label, x0, x1;
    std::getline(ss, split, ',');
    std::getline(ss, label, ',');
    std::getline(ss, x0, ',');
    std::getline(ss, x1, ',');
    const bool train = split == "train";
    const RowId i = static_cast<RowId>(train ? train_rows++ : test_rows++);
    const auto& x = train ? d.train_inputs : d.test_inputs;
    const auto& y = train ? d.train_labels : d.test_labels;
    ASSERT_LT(i, x.n_samples());
    EXPECT_EQ(std::stoul(label), y[i]);
    EXPECT_NEAR(std::stod(x0), x.row(i)[0], 1e-12);
    EXPECT_NEAR(std::stod(x1), x.row(i)[1], 1e-12);
  }
  EXPECT_EQ(train_rows, 300u);
  EXPECT_EQ(test_rows, 100u);
}

TEST(GenerateBlobs, LabelsAlternateAndSpreadMatchesSigma) {
  const auto spec = golden_spec();
  const auto d = generate_blobs(spec, 1);
  double sq = 0.0;
  for (RowId i = 0; i < d.train_inputs.n_samples(); ++i) {
    EXPECT_EQ(d.train_labels[i], i % 2);
    const auto& c = spec.centers[d.train_labels[i]];
    for (std::size_t j = 0; j < 2; ++j) sq += std::pow(d.train_inputs.row(i)[j] - c[j], 2);
  }
  EXPECT_NEAR(std::sqrt(sq / (2.0 * 300.0)), 0.5, 0.05);
}

TEST(GenerateBlobs, ZeroVarianceAndDeterminism) {
  auto spec = golden_spec();
  spec.sigma = 0.0;
  const auto d = generate_blobs(spec, 9);
  for (RowId i = 0; i < d.train_inputs.n_samples(); ++i) {
    EXPECT_EQ(d.train_inputs.row(i)[0], spec.centers[d.train_labels[i]][0]);
    EXPECT_EQ(d.train_inputs.row(i)[1], 0.0);
  }
  const auto a = generate_blobs(golden_spec(), 77);
  const auto b = generate_blobs(golden_spec(), 77);
  EXPECT_EQ(vec(a.train_inputs), vec(b.train_inputs));
  EXPECT_EQ(vec(a.test_inputs), vec(b.test_inputs));
  EXPECT_NE(vec(a.train_inputs), vec(generate_blobs(golden_spec(), 78).train_inputs));
}

TEST(GenerateBlobs, InvalidSpecs) {
  auto one = golden_spec();
  one.centers.pop_back();
  EXPECT_EQ(code_of([&] { generate_blobs(one, 0); }), ErrorCode::kInvalidArgument);
  auto narrow = golden_spec();
  narrow.centers = {{0.0}, {1.0}};
  EXPECT_EQ(code_of([&] { generate_blobs(narrow, 0); }), ErrorCode::kInvalidArgument);
  auto neg = golden_spec();
  neg.sigma = -1.0;
  EXPECT_EQ(code_of([&] { generate_blobs(neg, 0); }), ErrorCode::kInvalidArgument);
}

TEST(TrainTinyNet, SeparableBlobsReachNinetyNinePercent) {
  const auto data = generate_blobs(separable_spec(), 1);
  TrainConfig tc;
  tc.epochs = 20;
  tc.seed = 3;
  const auto r = train_tinynet(data, tc);
  EXPECT_GE(r.train_accuracy, 0.99);
  EXPECT_GE(accuracy(data.test_labels, predict_all(r.net, data.test_inputs)), 0.99);
}

TEST(TrainTinyNet, ZeroEpochsIsChance) {
  // An untrained net is a fixed random function of the input; averaged over
  // 400 initialisations its accuracy on balanced classes is 1/2.
  const auto data = generate_blobs(overlapping_blobs_spec(), 4);
  TrainConfig tc;
  tc.epochs = 0;
  double sum = 0.0;
  const int seeds = 400;
  for (int s = 0; s < seeds; ++s) {
    tc.seed = static_cast<std::uint64_t>(s);
    const auto r = train_tinynet(data, tc);
    sum += accuracy(data.test_labels, predict_all(r.net, data.test_inputs, 1));
  }
  EXPECT_NEAR(sum / seeds, 0.5, 0.1);
}

TEST(TrainTinyNet, FixedSeedGivesIdenticalWeights) {
  const auto data = generate_blobs(overlapping_blobs_spec(), 4);
  TrainConfig tc;
  tc.epochs = 3;
  tc.seed = 21;
  const auto a = train_tinynet(data, tc);
  const auto b = train_tinynet(data, tc);
  ASSERT_EQ(a.net.layers().size(), b.net.layers().size());
  for (std::size_t l = 0; l < a.net.layers().size(); ++l) {
    EXPECT_EQ(a.net.layers()[l].weights, b.net.layers()[l].weights);
    EXPECT_EQ(a.net.layers()[l].bias, b.net.layers()[l].bias);
  }
  EXPECT_EQ(a.final_loss, b.final_loss);
}

TEST(TrainTinyNet, DivergenceIsNamed) {
  const auto data = generate_blobs(overlapping_blobs_spec(), 4);
  TrainConfig tc;
  tc.epochs = 5;
  tc.learning_rate = 1e300;
  EXPECT_EQ(code_of([&] { train_tinynet(data, tc); }), ErrorCode::kDivergence);
}

TEST(ExtractTraces, IdentityWeights) {
  TinyNet net({DenseLayer{2, 2, {1, 0, 0, 1}, {0, 0}, Activation::kIdentity}});
  const auto t = extract_traces(net, TraceSet::from_rows({{1.0, 2.0}}), "layer1");
  EXPECT_EQ(t.row(0)[0], 1.0);
  EXPECT_EQ(t.row(0)[1], 2.0);
}

TEST(ExtractTraces, ZeroInputZeroBiasGivesZeroTrace) {
  auto net = TinyNet::random(2, {16, 16}, 2, 5);
  for (auto& l : net.mutable_layers()) std::fill(l.bias.begin(), l.bias.end(), 0.0);
  const auto in = TraceSet::from_rows({{0.0, 0.0}});
  for (const char* tap : {"layer1", "layer2"}) {
    const auto t = extract_traces(net, in, tap);
    EXPECT_EQ(t.n_neurons(), 16u);
    for (double v : t.row(0)) EXPECT_EQ(v, 0.0);
  }
}

TEST(ExtractTraces, HandComputedForwardPass) {
  // Layer 1: relu([[1,-1],[2,0.5]] x + [0.5,-1]); layer 2: softmax([[1,2],[-1,1]] h + [0,0.1]).
  TinyNet net({DenseLayer{2, 2, {1, -1, 2, 0.5}, {0.5, -1}, Activation::kRelu},
               DenseLayer{2, 2, {1, 2, -1, 1}, {0, 0.1}, Activation::kSoftmax}});
  const auto in = TraceSet::from_rows({{1.0, 3.0}});
  // z1 = [-1.5, 2.5] -> h = [0, 2.5]; z2 = [5, 2.6].
  const auto h = extract_traces(net, in, "layer1");
  EXPECT_EQ(h.row(0)[0], 0.0);
  EXPECT_NEAR(h.row(0)[1], 2.5, 1e-15);
  const auto o = extract_traces(net, in, "layer2");
  EXPECT_NEAR(o.row(0)[0], 1.0 / (1.0 + std::exp(-2.4)), 1e-12);
  EXPECT_NEAR(o.row(0)[1], 1.0 / (1.0 + std::exp(2.4)), 1e-12);
  EXPECT_EQ(net.predict(in.row(0)), 0u);
  EXPECT_EQ(code_of([&] { extract_traces(net, in, "layer3"); }), ErrorCode::kUnknownTap);
  EXPECT_EQ(code_of([&] { extract_traces(net, TraceSet::from_rows({{1.0}}), "layer1"); }),
            ErrorCode::kDimensionMismatch);
}

TEST(CornerOracle, MisclassifiedIsAlwaysCorner) {
  const auto net = train_separable();
  PerturbationOracleConfig c;
  c.n_samples = 1;
  const std::vector<double> x{-3.0, 0.0};
  ASSERT_EQ(net.predict(x), 0u);
  EXPECT_TRUE(corner_oracle(net, x, 1, c));
}

TEST(CornerOracle, CentreIsNotCornerMidpointIs) {
  const auto net = train_separable();
  PerturbationOracleConfig c;
  c.epsilon = 0.1;
  EXPECT_FALSE(corner_oracle(net, std::vector<double>{-3.0, 0.0}, 0, c));
  EXPECT_FALSE(corner_oracle(net, std::vector<double>{3.0, 0.0}, 1, c));
  // The boundary lies near x0 = 0; a unit ball around the midpoint crosses it.
  const std::vector<double> mid{0.0, 0.0};
  c.epsilon = 1.0;
  const ClassId label = net.predict(mid);
  EXPECT_TRUE(corner_oracle(net, mid, label, c));
  EXPECT_TRUE(grid_flip(net, mid, label, 1.0));
}

TEST(CornerOracle, AgreesWithGridSearchAndIsMonotone) {
  const auto data = generate_blobs(overlapping_blobs_spec(), 8);
  TrainConfig tc;
  tc.seed = 8;
  const auto net = train_tinynet(data, tc).net;
  PerturbationOracleConfig c;
  c.epsilon = 0.1;
  c.seed = 5;
  std::size_t agree = 0, positives = 0;
  const RowId probes = 60;
  for (RowId i = 0; i < probes; ++i) {
    const auto x = data.test_inputs.row(i);
    const ClassId y = data.test_labels[i];
    const bool o = corner_oracle(net, x, y, c);
    agree += o == grid_flip(net, x, y, c.epsilon) ? 1 : 0;
    positives += o ? 1 : 0;
    bool prev = false;
    for (double eps : {0.01, 0.05, 0.1, 0.2, 0.5, 1.0}) {
      auto ce = c;
      ce.epsilon = eps;
      const bool now = corner_oracle(net, x, y, ce);
      EXPECT_TRUE(now || !prev) << "row " << i << " eps " << eps;
      prev = now;
    }
  }
  EXPECT_GE(static_cast<double>(agree), 0.95 * probes);
  EXPECT_GT(positives, 0u);
}

TEST(CornerOracle, InvalidConfig) {
  const auto net = train_separable();
  PerturbationOracleConfig c;
  c.epsilon = 0.0;
  EXPECT_EQ(code_of([&] { corner_oracle(net, std::vector<double>{0.0, 0.0}, 0, c); }),
            ErrorCode::kInvalidArgument);
  c.epsilon = 0.1;
  c.n_samples = 0;
  EXPECT_EQ(code_of([&] { corner_oracle(net, std::vector<double>{0.0, 0.0}, 0, c); }),
            ErrorCode::kInvalidArgument);
}

TEST(CornerOracle, ParallelMatchesSerial) {
  const auto data = generate_blobs(overlapping_blobs_spec(), 2);
  TrainConfig tc;
  tc.epochs = 5;
  const auto net = train_tinynet(data, tc).net;
  PerturbationOracleConfig c;
  c.n_samples = 32;
  EXPECT_EQ(corner_oracle_all(net, data.test_inputs, data.test_labels, c, 1),
            corner_oracle_all(net, data.test_inputs, data.test_labels, c, 4));
}

TEST(DemoCorrelation, OraclePositivesHaveHigherDsa3) {
  const auto data = generate_blobs(overlapping_blobs_spec(), 13);
  TrainConfig tc;
  tc.seed = 13;
  const auto net = train_tinynet(data, tc).net;
  const std::string tap = net.tap_names().back();
  LabelPairs train_labels{data.train_labels, predict_all(net, data.train_inputs)};
  LabelPairs test_labels{data.test_labels, predict_all(net, data.test_inputs)};
  const auto train = LabeledTraceSet::training(extract_traces(net, data.train_inputs, tap),
                                               train_labels, 2);
  const auto test = LabeledTraceSet::test(extract_traces(net, data.test_inputs, tap), test_labels, 2);
  DsaConfig dc;
  dc.variant = DsaVariant::kDsa3;
  const auto scores = batch_dsa(train, test, dc);
  PerturbationOracleConfig oc;
  oc.seed = 15;
  const auto flags = corner_oracle_all(net, data.test_inputs, data.test_labels, oc);
  double pos = 0.0, neg = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i].value)) continue;
    (flags[i] ? pos : neg) += scores[i].value;
    ++(flags[i] ? n_pos : n_neg);
  }
  ASSERT_GT(n_pos, 0u);
  ASSERT_GT(n_neg, 0u);
  EXPECT_GT(pos / static_cast<double>(n_pos), neg / static_cast<double>(n_neg));
}
