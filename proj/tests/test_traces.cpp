#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "dsakit/error.hpp"
#include "dsakit/traces.hpp"
#include "support.hpp"

using namespace dsakit;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no dsakit::Error thrown";
  return ErrorCode::kInvalidArgument;
}

std::string atrc_header(std::uint32_t version, std::uint64_t n, std::uint64_t d) {
  std::string h = "ATRC";
  for (int i = 0; i < 4; ++i) h += static_cast<char>((version >> (8 * i)) & 0xff);
  for (int i = 0; i < 8; ++i) h += static_cast<char>((n >> (8 * i)) & 0xff);
  for (int i = 0; i < 8; ++i) h += static_cast<char>((d >> (8 * i)) & 0xff);
  return h;
}

std::string f32_bytes(float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  std::string s;
  for (int i = 0; i < 4; ++i) s += static_cast<char>((bits >> (8 * i)) & 0xff);
  return s;
}

}  // namespace

TEST(ActivationTrace, RejectsEmptyAndNonFinite) {
  EXPECT_EQ(code_of([] { ActivationTrace t({}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { ActivationTrace t({1.0, NAN}); }), ErrorCode::kNonFiniteValue);
  EXPECT_EQ(code_of([] { ActivationTrace t({INFINITY}); }), ErrorCode::kNonFiniteValue);
  ActivationTrace ok({1.0, 2.0});
  EXPECT_EQ(ok.size(), 2u);
}

TEST(TraceSet, ShapeAndFiniteness) {
  auto s = TraceSet::from_rows({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(s.n_samples(), 2u);
  EXPECT_EQ(s.n_neurons(), 3u);
  EXPECT_EQ(s.row(1)[2], 6.0);
  EXPECT_EQ(code_of([] { TraceSet::from_rows({{1, 2}, {3}}); }), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([] { TraceSet(1, 0, {}); }), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([] { TraceSet(1, 2, {1.0}); }), ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([] { TraceSet(1, 1, {NAN}); }), ErrorCode::kNonFiniteValue);
}

TEST(LabeledTraceSet, TrainingNeedsEveryClass) {
  auto traces = TraceSet::from_rows({{0}, {1}, {2}});
  EXPECT_EQ(code_of([&] { LabeledTraceSet::training(traces, {{0, 0, 2}, {0, 0, 2}}, 3); }),
            ErrorCode::kEmptyClass);
  // Test sets are exempt.
  auto test = LabeledTraceSet::test(traces, {{0, 0, 2}, {0, 1, 2}}, 3);
  EXPECT_TRUE(test.misclassified(1));
  EXPECT_FALSE(test.misclassified(0));
  EXPECT_EQ(code_of([&] { LabeledTraceSet::test(traces, {{0, 0}, {0, 0}}, 3); }),
            ErrorCode::kCountMismatch);
  EXPECT_EQ(code_of([&] { LabeledTraceSet::test(traces, {{0, 0, 3}, {0, 0, 0}}, 3); }),
            ErrorCode::kLabelOutOfRange);
}

TEST(ClassPartition, DisjointAndExhaustive) {
  demo::Rng rng(5);
  std::vector<ClassId> labels(200);
  for (auto& l : labels) l = static_cast<ClassId>(rng.index(4));
  ClassPartition p(labels, 4);
  std::vector<int> hits(labels.size(), 0);
  for (ClassId c = 0; c < 4; ++c) {
    for (RowId r : p.members(c)) {
      ++hits[r];
      EXPECT_EQ(labels[r], c);
      EXPECT_EQ(p.class_of(r), c);
    }
  }
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(TraceFile, TwoByThreeFromRawBytes) {
  auto dir = testkit::scratch_dir("atrc_raw");
  std::string bytes = atrc_header(1, 2, 3);
  const float vals[] = {0.5f, -1.25f, 3.0f, 1e-3f, 7.0f, -0.0f};
  for (float f : vals) bytes += f32_bytes(f);
  spit(dir / "a.atrc", bytes);
  auto s = load_trace_file(dir / "a.atrc");
  ASSERT_EQ(s.n_samples(), 2u);
  ASSERT_EQ(s.n_neurons(), 3u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(s.values()[i], static_cast<double>(vals[i]));
  EXPECT_EQ(s.layer_name(), "a");
}

TEST(TraceFile, OneByOneIsTwentyEightBytes) {
  auto dir = testkit::scratch_dir("atrc_1x1");
  save_trace_file(TraceSet::from_rows({{0.0}}), dir / "z.atrc");
  const auto bytes = slurp(dir / "z.atrc");
  ASSERT_EQ(bytes.size(), 28u);
  EXPECT_EQ(bytes.substr(0, 4), "ATRC");
  EXPECT_EQ(bytes, atrc_header(1, 1, 1) + f32_bytes(0.0f));
}

TEST(TraceFile, NamedErrors) {
  auto dir = testkit::scratch_dir("atrc_errors");
  const std::string good = atrc_header(1, 1, 2) + f32_bytes(1.0f) + f32_bytes(2.0f);

  std::string bad_magic = good;
  bad_magic.replace(0, 4, "XXXX");
  spit(dir / "magic.atrc", bad_magic);
  EXPECT_EQ(code_of([&] { load_trace_file(dir / "magic.atrc"); }), ErrorCode::kBadMagic);

  spit(dir / "version.atrc", atrc_header(2, 1, 2) + f32_bytes(1.0f) + f32_bytes(2.0f));
  EXPECT_EQ(code_of([&] { load_trace_file(dir / "version.atrc"); }),
            ErrorCode::kUnsupportedVersion);

  spit(dir / "short_header.atrc", good.substr(0, 10));
  EXPECT_EQ(code_of([&] { load_trace_file(dir / "short_header.atrc"); }), ErrorCode::kTruncated);

  spit(dir / "short_payload.atrc", good.substr(0, good.size() - 1));
  EXPECT_EQ(code_of([&] { load_trace_file(dir / "short_payload.atrc"); }), ErrorCode::kTruncated);

  spit(dir / "huge.atrc", atrc_header(1, std::uint64_t{1} << 62, 4) + f32_bytes(1.0f));
  EXPECT_EQ(code_of([&] { load_trace_file(dir / "huge.atrc"); }), ErrorCode::kTruncated);

  spit(dir / "trailing.atrc", good + "x");
  EXPECT_EQ(code_of([&] { load_trace_file(dir / "trailing.atrc"); }),
            ErrorCode::kDimensionMismatch);

  spit(dir / "zero_width.atrc", atrc_header(1, 3, 0));
  EXPECT_EQ(code_of([&] { load_trace_file(dir / "zero_width.atrc"); }),
            ErrorCode::kDimensionMismatch);

  spit(dir / "nan.atrc", atrc_header(1, 1, 2) + f32_bytes(1.0f) +
                             f32_bytes(std::numeric_limits<float>::quiet_NaN()));
  EXPECT_EQ(code_of([&] { load_trace_file(dir / "nan.atrc"); }), ErrorCode::kNonFiniteValue);

  EXPECT_EQ(code_of([&] { load_trace_file(dir / "missing.atrc"); }), ErrorCode::kIoMissing);
}

TEST(TraceFile, RejectsValuesOutsideF32BeforeWriting) {
  auto dir = testkit::scratch_dir("atrc_overflow");
  auto s = TraceSet::from_rows({{1.0, 1e300}});
  EXPECT_EQ(code_of([&] { save_trace_file(s, dir / "o.atrc"); }), ErrorCode::kNonFiniteValue);
  EXPECT_FALSE(fs::exists(dir / "o.atrc"));
}

TEST(TraceFile, EmptySetRoundTrips) {
  auto dir = testkit::scratch_dir("atrc_empty");
  TraceSet empty(0, 5, {});
  save_trace_file(empty, dir / "e.atrc");
  auto back = load_trace_file(dir / "e.atrc");
  EXPECT_EQ(back.n_samples(), 0u);
  EXPECT_EQ(back.n_neurons(), 5u);
}

TEST(TraceFile, RandomMatricesRoundTripExactly) {
  auto dir = testkit::scratch_dir("atrc_roundtrip");
  demo::Rng rng(11);
  for (int round = 0; round < 50; ++round) {
    const std::size_t n = round == 0 ? 100 : 1 + rng.index(40);
    const std::size_t d = round == 0 ? 16 : 1 + rng.index(20);
    std::vector<double> v(n * d);
    // f32-representable values so the in-memory set is exactly what is stored.
    for (auto& x : v) x = static_cast<double>(static_cast<float>(rng.normal() * 100.0));
    TraceSet s(n, d, v);
    save_trace_file(s, dir / "r.atrc");
    auto back = load_trace_file(dir / "r.atrc");
    ASSERT_EQ(back.n_samples(), n);
    ASSERT_EQ(back.n_neurons(), d);
    ASSERT_TRUE(std::equal(v.begin(), v.end(), back.values().begin()));
    // Saving the loaded set reproduces the file byte for byte.
    const auto first = slurp(dir / "r.atrc");
    save_trace_file(back, dir / "r2.atrc");
    ASSERT_EQ(first, slurp(dir / "r2.atrc"));
  }
}

TEST(TraceFile, CsvFallbackIsExactInDoublePrecision) {
  auto dir = testkit::scratch_dir("csv_roundtrip");
  demo::Rng rng(3);
  std::vector<double> v(7 * 3);
  for (auto& x : v) x = rng.normal() * 1e-3;
  TraceSet s(7, 3, v);
  save_trace_file(s, dir / "t.csv");
  EXPECT_EQ(slurp(dir / "t.csv").substr(0, 9), "n0,n1,n2\n");
  auto back = load_trace_file(dir / "t.csv");
  EXPECT_EQ(back, TraceSet(7, 3, v, "t"));

  spit(dir / "ragged.csv", "n0,n1\n1,2\n3\n");
  EXPECT_EQ(code_of([&] { load_trace_file(dir / "ragged.csv"); }), ErrorCode::kDimensionMismatch);
  spit(dir / "nan.csv", "n0\nnan\n");
  EXPECT_EQ(code_of([&] { load_trace_file(dir / "nan.csv"); }), ErrorCode::kNonFiniteValue);
  spit(dir / "junk.csv", "n0\n1.5x\n");
  EXPECT_EQ(code_of([&] { load_trace_file(dir / "junk.csv"); }), ErrorCode::kParse);
}

TEST(LabelFile, AlblPairs) {
  auto dir = testkit::scratch_dir("albl");
  LabelPairs l{{3, 7}, {3, 1}};
  save_labels(l, dir / "l.albl");
  const auto bytes = slurp(dir / "l.albl");
  ASSERT_EQ(bytes.size(), 16u + 2 * 8);
  EXPECT_EQ(bytes.substr(0, 4), "ALBL");
  auto back = load_labels(dir / "l.albl", 2);
  EXPECT_EQ(back.true_labels, (std::vector<ClassId>{3, 7}));
  EXPECT_EQ(back.predicted_labels, (std::vector<ClassId>{3, 1}));
  EXPECT_EQ(code_of([&] { load_labels(dir / "l.albl", 3); }), ErrorCode::kCountMismatch);
  EXPECT_EQ(code_of([&] { load_labels(dir / "l.albl", 2, 5); }), ErrorCode::kLabelOutOfRange);

  std::string bad = bytes;
  bad[0] = 'X';
  spit(dir / "bad.albl", bad);
  EXPECT_EQ(code_of([&] { load_labels(dir / "bad.albl", 2); }), ErrorCode::kBadMagic);
  spit(dir / "short.albl", bytes.substr(0, bytes.size() - 3));
  EXPECT_EQ(code_of([&] { load_labels(dir / "short.albl", 2); }), ErrorCode::kTruncated);
}

TEST(LabelFile, CsvAndRandomRoundTrip) {
  auto dir = testkit::scratch_dir("labels_rt");
  demo::Rng rng(8);
  for (int round = 0; round < 30; ++round) {
    const std::size_t n = rng.index(50);
    LabelPairs l;
    for (std::size_t i = 0; i < n; ++i) {
      l.true_labels.push_back(static_cast<ClassId>(rng.index(1000)));
      l.predicted_labels.push_back(static_cast<ClassId>(rng.index(1000)));
    }
    for (const char* name : {"l.albl", "l.csv"}) {
      save_labels(l, dir / name);
      auto back = load_labels(dir / name, n);
      ASSERT_EQ(back.true_labels, l.true_labels);
      ASSERT_EQ(back.predicted_labels, l.predicted_labels);
    }
  }
  EXPECT_EQ(slurp(dir / "l.csv").substr(0, 15), "true,predicted\n");
}

TEST(Normalize, HandColumns) {
  auto s = TraceSet::from_rows({{1, 0}, {1, 2}});
  auto stats = compute_neuron_stats(s);
  EXPECT_EQ(stats.mean[1], 1.0);
  EXPECT_EQ(stats.stddev[1], 1.0);
  auto n = normalize_traces(s, stats);
  EXPECT_EQ(n.row(0)[0], 0.0);
  EXPECT_EQ(n.row(1)[0], 0.0);
  EXPECT_EQ(n.row(0)[1], -1.0);
  EXPECT_EQ(n.row(1)[1], 1.0);

  auto three = TraceSet::from_rows({{1}, {1}, {1}});
  auto z = normalize_traces(three, compute_neuron_stats(three));
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(code_of([&] { normalize_traces(TraceSet::from_rows({{1, 2, 3}}), stats); }),
            ErrorCode::kDimensionMismatch);
}

TEST(Normalize, RandomColumnsStandardiseAndReapplyIsStable) {
  demo::Rng rng(21);
  std::vector<double> v(500 * 6);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 3.0 + (1 + i % 6) * rng.normal();
  TraceSet s(500, 6, v);
  auto n = normalize_traces(s, compute_neuron_stats(s));
  auto st = compute_neuron_stats(n);
  for (std::size_t j = 0; j < 6; ++j) {
    EXPECT_NEAR(st.mean[j], 0.0, 1e-9);
    EXPECT_NEAR(st.stddev[j], 1.0, 1e-9);
  }
  // Standardising already-standard data with its own stats changes nothing.
  auto again = normalize_traces(n, st);
  for (std::size_t i = 0; i < n.values().size(); ++i) {
    EXPECT_NEAR(again.values()[i], n.values()[i], 1e-9);
  }
}

TEST(Normalize, LowVarianceFilter) {
  auto s = TraceSet::from_rows({{1, 5, 0}, {2, 5, 1e-7}, {3, 5, 0}});
  auto keep = columns_above_variance(compute_neuron_stats(s), kDefaultLowVarianceThreshold);
  EXPECT_EQ(keep, (std::vector<std::size_t>{0}));
  auto sel = select_columns(s, keep);
  EXPECT_EQ(sel.n_neurons(), 1u);
  EXPECT_EQ(sel.row(2)[0], 3.0);
  EXPECT_EQ(code_of([&] { select_columns(s, std::vector<std::size_t>{}); }),
            ErrorCode::kDimensionMismatch);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(INFINITY), "inf");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(ErrorTags, StableExitCodes) {
  EXPECT_EQ(error_tag(ErrorCode::kIoMissing), "E_IO_MISSING");
  EXPECT_EQ(exit_code_for(ErrorCode::kIoMissing), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::kBadMagic), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::kInvalidArgument), 3);
  EXPECT_EQ(exit_code_for(ErrorCode::kLabelOutOfRange), 3);
  EXPECT_EQ(error_tag(ErrorCode::kDegenerateLabels), "E_NO_CORNER_CASES");
  EXPECT_EQ(exit_code_for(ErrorCode::kDegenerateLabels), 4);
  EXPECT_EQ(exit_code_for(ErrorCode::kEmptyClass), 4);
}
