#include "dsakit/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dsakit/error.hpp"
#include "dsakit/report.hpp"

namespace dsakit::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Non-finite reals become the strings "inf" / "-inf" so the JSON stays valid.
json real(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double real_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw Error(ErrorCode::kParse, "expected a number, got " + j.dump());
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(fs::exists(path) ? ErrorCode::kIo : ErrorCode::kIoMissing,
                "cannot read " + path.string());
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json parse_json_file(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

std::string_view class_ref_name(ClassReference r) {
  return r == ClassReference::kPredicted ? "predicted" : "true";
}

ClassReference parse_class_ref(std::string_view s) {
  if (s == "predicted") return ClassReference::kPredicted;
  if (s == "true") return ClassReference::kTrueLabel;
  throw Error(ErrorCode::kInvalidArgument, "class reference must be predicted|true, got " + std::string(s));
}

std::string_view zero_policy_name(ZeroDenominatorPolicy p) {
  return p == ZeroDenominatorPolicy::kInfinity ? "inf" : "error";
}

ZeroDenominatorPolicy parse_zero_policy(std::string_view s) {
  if (s == "inf") return ZeroDenominatorPolicy::kInfinity;
  if (s == "error") return ZeroDenominatorPolicy::kError;
  throw Error(ErrorCode::kInvalidArgument, "zero_denominator must be inf|error, got " + std::string(s));
}

json dsa_config_to_json(const DsaConfig& c) {
  json nb;
  if (c.neighborhood.mode == NeighborhoodSpec::Mode::kNearest) {
    nb = {{"mode", "nearest"}, {"k", c.neighborhood.k}};
  } else {
    nb = {{"mode", "radius"}, {"delta", c.neighborhood.delta}};
  }
  return {{"neighborhood", nb},
          {"class_ref", class_ref_name(c.class_reference)},
          {"zero_denominator", zero_policy_name(c.zero_denominator)},
          {"normalize", c.normalize},
          {"drop_low_variance", c.drop_low_variance},
          {"low_variance_threshold", c.low_variance_threshold},
          {"include_anchor", c.include_anchor},
          {"exclude_self_by_row", c.exclude_self_by_row},
          {"threads", c.threads}};
}

DsaConfig dsa_config_from_json(const json& j) {
  DsaConfig c;
  if (j.contains("neighborhood")) {
    const auto& nb = j.at("neighborhood");
    const auto mode = nb.value("mode", std::string("nearest"));
    if (mode == "nearest") {
      c.neighborhood = NeighborhoodSpec::nearest(nb.value("k", kDefaultNeighborhoodK));
    } else if (mode == "radius") {
      c.neighborhood = NeighborhoodSpec::radius(nb.at("delta").get<double>());
    } else {
      throw Error(ErrorCode::kInvalidArgument, "neighborhood mode must be nearest|radius");
    }
  }
  c.class_reference = parse_class_ref(j.value("class_ref", std::string("predicted")));
  c.zero_denominator = parse_zero_policy(j.value("zero_denominator", std::string("inf")));
  c.normalize = j.value("normalize", c.normalize);
  c.drop_low_variance = j.value("drop_low_variance", c.drop_low_variance);
  c.low_variance_threshold = j.value("low_variance_threshold", c.low_variance_threshold);
  c.include_anchor = j.value("include_anchor", c.include_anchor);
  c.exclude_self_by_row = j.value("exclude_self_by_row", c.exclude_self_by_row);
  c.threads = j.value("threads", c.threads);
  return c;
}

struct CurveInput {
  std::string label;
  std::vector<ScoredSample> samples;
  std::vector<ClassId> true_labels;
  std::vector<ClassId> predicted_labels;
};

struct CurveSet {
  CoverageCurve coverage;
  std::vector<AccuracyPoint> accuracy;
  RocCurve roc;
};

// CSVs per input as <kind>_<label>.csv, one SVG per kind as <kind>_<group>.svg.
std::vector<CurveSet> write_curve_group(const fs::path& out, const std::string& group,
                                        const std::vector<CurveInput>& inputs, std::size_t step,
                                        bool svg) {
  std::vector<CurveSet> sets;
  std::vector<report::Series> cov_series, acc_series, roc_series;
  for (const auto& in : inputs) {
    CurveSet cs;
    cs.roc = roc_auc(in.samples);
    cs.coverage = coverage_curve(in.samples);
    cs.accuracy = accuracy_curve(in.samples, in.true_labels, in.predicted_labels, step);
    report::write_coverage_csv(out / ("coverage_" + in.label + ".csv"), cs.coverage);
    report::write_accuracy_csv(out / ("accuracy_" + in.label + ".csv"), cs.accuracy);
    report::write_roc_csv(out / ("roc_" + in.label + ".csv"), cs.roc);
    if (svg) {
      report::Series c{in.label, {}, {}}, a{in.label, {}, {}}, r{in.label, {}, {}};
      for (const auto& p : cs.coverage.points) {
        c.x.push_back(p.threshold);
        c.y.push_back(p.coverage);
      }
      for (const auto& p : cs.accuracy) {
        a.x.push_back(static_cast<double>(p.k));
        a.y.push_back(p.accuracy);
      }
      for (const auto& p : cs.roc.points) {
        r.x.push_back(p.fpr);
        r.y.push_back(p.tpr);
      }
      cov_series.push_back(std::move(c));
      acc_series.push_back(std::move(a));
      roc_series.push_back(std::move(r));
    }
    sets.push_back(std::move(cs));
  }
  if (svg) {
    report::write_text(out / ("coverage_" + group + ".svg"),
                       report::render_svg("Corner-case coverage, " + group, "DSA threshold",
                                          "coverage", cov_series));
    report::write_text(out / ("accuracy_" + group + ".svg"),
                       report::render_svg("Accuracy of top-k by DSA, " + group, "k", "accuracy",
                                          acc_series));
    report::write_text(out / ("roc_" + group + ".svg"),
                       report::render_svg("ROC, " + group, "FPR", "TPR", roc_series));
  }
  return sets;
}

struct ComputedScores {
  std::string layer;
  DsaVariant variant;
  std::vector<DsaScore> scores;
};

std::vector<ComputedScores> compute_all(const RunManifest& manifest, const LoadedRun& run) {
  if (manifest.variants.empty()) throw Error(ErrorCode::kInvalidArgument, "no variants requested");
  std::vector<ComputedScores> out;
  for (const auto& layer : run.layers) {
    const PreparedSets prepared = preprocess(layer.train, layer.test, manifest.dsa);
    const DsaScorer scorer(prepared.train);
    for (DsaVariant v : manifest.variants) {
      DsaConfig config = manifest.dsa;
      config.variant = v;
      out.push_back({layer.name, v, scorer.batch(prepared.test, config)});
    }
  }
  return out;
}

std::string score_file_name(const std::string& layer, DsaVariant v) {
  return "scores_" + layer + "_" + std::string(variant_name(v)) + ".csv";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "cannot create output directory " + dir.string());
  }
}

}  // namespace

std::string_view oracle_name(OracleKind kind) {
  return kind == OracleKind::kMisclassified ? "misclassified" : "perturbation";
}

OracleKind parse_oracle(std::string_view name) {
  if (name == "misclassified") return OracleKind::kMisclassified;
  if (name == "perturbation") return OracleKind::kPerturbation;
  throw Error(ErrorCode::kInvalidArgument,
              "oracle must be misclassified|perturbation, got " + std::string(name));
}

json manifest_to_json(const RunManifest& m) {
  json layers = json::array();
  for (const auto& l : m.layers) {
    layers.push_back({{"name", l.name},
                      {"train_traces", l.train_traces.generic_string()},
                      {"test_traces", l.test_traces.generic_string()}});
  }
  json variants = json::array();
  for (auto v : m.variants) variants.push_back(variant_name(v));
  json j = {{"layers", layers},
            {"train_labels", m.train_labels.generic_string()},
            {"test_labels", m.test_labels.generic_string()},
            {"variants", variants},
            {"dsa", dsa_config_to_json(m.dsa)},
            {"step", m.step},
            {"oracle", oracle_name(m.oracle)},
            {"epsilon", m.epsilon},
            {"corner_flags", m.corner_flags.generic_string()},
            {"svg", m.svg},
            {"seed", m.seed},
            {"out_dir", m.out_dir.generic_string()}};
  j["n_classes"] = m.n_classes ? json(*m.n_classes) : json(nullptr);
  return j;
}

RunManifest manifest_from_json(const json& j, const fs::path& base_dir) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::kParse, "manifest must be a JSON object");
    RunManifest m;
    for (const auto& l : j.at("layers")) {
      LayerFiles f;
      f.train_traces = resolve(l.at("train_traces").get<std::string>(), base_dir);
      f.test_traces = resolve(l.at("test_traces").get<std::string>(), base_dir);
      f.name = l.contains("name") ? l.at("name").get<std::string>()
                                  : layer_name_from_path(f.train_traces);
      m.layers.push_back(std::move(f));
    }
    m.train_labels = resolve(j.at("train_labels").get<std::string>(), base_dir);
    m.test_labels = resolve(j.at("test_labels").get<std::string>(), base_dir);
    if (j.contains("n_classes") && !j.at("n_classes").is_null()) {
      m.n_classes = j.at("n_classes").get<std::size_t>();
    }
    if (j.contains("variants")) {
      m.variants.clear();
      for (const auto& v : j.at("variants")) m.variants.push_back(parse_variant(v.get<std::string>()));
    }
    if (j.contains("dsa")) m.dsa = dsa_config_from_json(j.at("dsa"));
    m.step = j.value("step", m.step);
    m.oracle = parse_oracle(j.value("oracle", std::string("misclassified")));
    m.epsilon = j.value("epsilon", m.epsilon);
    m.corner_flags = resolve(j.value("corner_flags", std::string()), base_dir);
    m.svg = j.value("svg", m.svg);
    m.seed = j.value("seed", m.seed);
    m.out_dir = resolve(j.value("out_dir", std::string(".")), base_dir);
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("manifest: ") + e.what());
  }
}

RunManifest load_manifest(const fs::path& path) {
  return manifest_from_json(parse_json_file(path), path.parent_path());
}

void save_manifest(const RunManifest& manifest, const fs::path& path) {
  report::write_text(path, manifest_to_json(manifest).dump(2) + "\n");
}

void save_corner_flags(const std::vector<bool>& flags, const fs::path& path) {
  std::string out = "row,corner\n";
  for (std::size_t i = 0; i < flags.size(); ++i) {
    out += std::to_string(i) + ',' + (flags[i] ? '1' : '0') + '\n';
  }
  report::write_text(path, out);
}

std::vector<bool> load_corner_flags(const fs::path& path, std::size_t n_samples) {
  std::istringstream in(read_text(path));
  std::vector<bool> flags;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 || line.empty()) continue;
    const std::string expect = std::to_string(flags.size()) + ',';
    if (line.size() != expect.size() + 1 || line.compare(0, expect.size(), expect) != 0 ||
        (line.back() != '0' && line.back() != '1')) {
      throw Error(ErrorCode::kParse, "bad corner flag line " + std::to_string(line_no));
    }
    flags.push_back(line.back() == '1');
  }
  if (flags.size() != n_samples) {
    throw Error(ErrorCode::kCountMismatch, "corner flag file has " + std::to_string(flags.size()) +
                                               " rows, expected " + std::to_string(n_samples));
  }
  return flags;
}

std::string layer_name_from_path(const fs::path& train_traces) {
  std::string stem = train_traces.stem().string();
  for (const char* prefix : {"train_", "train-"}) {
    if (stem.rfind(prefix, 0) == 0 && stem.size() > 6) return stem.substr(6);
  }
  return stem;
}

void check_inputs_exist(const RunManifest& m) {
  auto need = [](const fs::path& p, const char* what) {
    if (p.empty()) throw Error(ErrorCode::kInvalidArgument, std::string("no ") + what + " given");
    if (!fs::exists(p)) throw Error(ErrorCode::kIoMissing, std::string(what) + " not found: " + p.string());
  };
  if (m.layers.empty()) throw Error(ErrorCode::kInvalidArgument, "no trace files given");
  for (const auto& l : m.layers) {
    need(l.train_traces, "training traces");
    need(l.test_traces, "test traces");
  }
  need(m.train_labels, "training labels");
  need(m.test_labels, "test labels");
  if (!m.corner_flags.empty()) need(m.corner_flags, "corner flags");
}

LoadedRun load_run(const RunManifest& m) {
  check_inputs_exist(m);
  std::set<std::string> names;
  for (const auto& l : m.layers) {
    if (!valid_name(l.name)) {
      throw Error(ErrorCode::kInvalidArgument, "layer name must be [A-Za-z0-9_.-]+: '" + l.name + "'");
    }
    if (!names.insert(l.name).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate layer name " + l.name);
    }
  }

  std::vector<TraceSet> train_sets, test_sets;
  for (const auto& l : m.layers) {
    train_sets.push_back(load_trace_file(l.train_traces));
    test_sets.push_back(load_trace_file(l.test_traces));
  }
  LoadedRun run;
  run.train_labels = load_labels(m.train_labels, train_sets.front().n_samples(), m.n_classes);
  run.test_labels = load_labels(m.test_labels, test_sets.front().n_samples(), m.n_classes);
  if (m.n_classes) {
    run.n_classes = *m.n_classes;
  } else {
    ClassId hi = 0;
    for (const auto* v : {&run.train_labels.true_labels, &run.train_labels.predicted_labels,
                          &run.test_labels.true_labels, &run.test_labels.predicted_labels}) {
      for (ClassId c : *v) hi = std::max(hi, c);
    }
    run.n_classes = static_cast<std::size_t>(hi) + 1;
  }
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    if (train_sets[i].n_samples() != train_sets.front().n_samples() ||
        test_sets[i].n_samples() != test_sets.front().n_samples()) {
      throw Error(ErrorCode::kCountMismatch, "layer " + m.layers[i].name +
                                                 " has a different sample count than the labels");
    }
    if (train_sets[i].n_neurons() != test_sets[i].n_neurons()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "layer " + m.layers[i].name + ": train and test trace widths differ");
    }
    train_sets[i].set_layer_name(m.layers[i].name);
    test_sets[i].set_layer_name(m.layers[i].name);
    run.layers.push_back(
        {m.layers[i].name,
         LabeledTraceSet::training(std::move(train_sets[i]), run.train_labels, run.n_classes),
         LabeledTraceSet::test(std::move(test_sets[i]), run.test_labels, run.n_classes)});
  }
  return run;
}

json report_to_json(const DetectionReport& r) {
  json results = json::array();
  for (const auto& e : r.entries) {
    json scores = json::array();
    json corner = json::array();
    for (const auto& s : e.scores) scores.push_back(real(s.value));
    for (bool b : e.corner) corner.push_back(b ? 1 : 0);
    results.push_back({{"layer", e.layer},
                       {"variant", variant_name(e.variant)},
                       {"auc", e.auc},
                       {"n_test", e.n_test},
                       {"n_corner", e.n_corner},
                       {"scores", scores},
                       {"corner", corner}});
  }
  json j = {{"schema", 1},
            {"toolkit", "dsakit"},
            {"version", DSAKIT_VERSION},
            {"generated_at", r.generated_at},
            {"config", manifest_to_json(r.manifest)},
            {"oracle", r.oracle},
            {"test_accuracy", r.test_accuracy},
            {"labels", {{"true", r.test_labels.true_labels}, {"predicted", r.test_labels.predicted_labels}}},
            {"results", results}};
  if (!r.extra.empty()) j["demo"] = r.extra;
  return j;
}

std::vector<fs::path> run_compute(const RunManifest& manifest) {
  const LoadedRun run = load_run(manifest);
  const auto computed = compute_all(manifest, run);
  ensure_dir(manifest.out_dir);
  std::vector<fs::path> files;
  for (const auto& c : computed) {
    const fs::path path = manifest.out_dir / score_file_name(c.layer, c.variant);
    report::write_scores_csv(path, c.scores, run.test_labels);
    files.push_back(path);
  }
  return files;
}

DetectionReport run_eval(const RunManifest& manifest, const std::vector<bool>* corner_flags) {
  const LoadedRun run = load_run(manifest);
  const std::size_t n_test = run.test_labels.true_labels.size();

  std::vector<bool> corner;
  if (corner_flags) {
    corner = *corner_flags;
  } else if (manifest.oracle == OracleKind::kPerturbation) {
    if (manifest.corner_flags.empty()) {
      throw Error(ErrorCode::kOracleUnavailable,
                  "perturbation oracle needs the network; supply corner flags or use the demo");
    }
    corner = load_corner_flags(manifest.corner_flags, n_test);
  } else {
    corner.resize(n_test);
    for (std::size_t i = 0; i < n_test; ++i) {
      corner[i] = run.test_labels.true_labels[i] != run.test_labels.predicted_labels[i];
    }
  }
  if (corner.size() != n_test) {
    throw Error(ErrorCode::kCountMismatch, "corner flags do not match the test set size");
  }
  const std::size_t n_corner = static_cast<std::size_t>(std::count(corner.begin(), corner.end(), true));
  if (n_corner == 0) throw Error(ErrorCode::kDegenerateLabels, "no corner cases among test samples");
  if (n_corner == n_test) throw Error(ErrorCode::kDegenerateLabels, "every test sample is a corner case");

  const auto computed = compute_all(manifest, run);
  ensure_dir(manifest.out_dir);

  DetectionReport rep;
  rep.manifest = manifest;
  rep.test_labels = run.test_labels;
  rep.oracle = std::string(oracle_name(corner_flags ? OracleKind::kPerturbation : manifest.oracle));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n_test; ++i) {
    correct += run.test_labels.true_labels[i] == run.test_labels.predicted_labels[i];
  }
  rep.test_accuracy = n_test ? static_cast<double>(correct) / static_cast<double>(n_test) : 0.0;

  for (const auto& layer : run.layers) {
    std::vector<CurveInput> inputs;
    std::vector<const ComputedScores*> sources;
    for (const auto& c : computed) {
      if (c.layer != layer.name) continue;
      report::write_scores_csv(manifest.out_dir / score_file_name(c.layer, c.variant), c.scores,
                               run.test_labels);
      inputs.push_back({c.layer + "_" + std::string(variant_name(c.variant)),
                        scored_by_flags(c.scores, corner), run.test_labels.true_labels,
                        run.test_labels.predicted_labels});
      sources.push_back(&c);
    }
    const auto sets = write_curve_group(manifest.out_dir, layer.name, inputs, manifest.step, manifest.svg);
    for (std::size_t k = 0; k < sources.size(); ++k) {
      rep.entries.push_back({layer.name, sources[k]->variant, sets[k].roc.auc, n_test, n_corner,
                             sources[k]->scores, corner});
    }
  }
  rep.generated_at = iso_timestamp();
  report::write_text(manifest.out_dir / "report.json", report_to_json(rep).dump(2) + "\n");
  return rep;
}

DemoResult run_demo(const DemoOptions& o) {
  ensure_dir(o.out_dir);
  const auto data = demo::generate_blobs(o.blobs, o.seed);
  demo::TrainConfig tc = o.train;
  tc.seed = o.seed ^ 0x5bd1e995u;
  auto trained = demo::train_tinynet(data, tc);
  const auto& net = trained.net;

  const int threads = o.dsa.threads;
  LabelPairs train_labels{data.train_labels, demo::predict_all(net, data.train_inputs, threads)};
  LabelPairs test_labels{data.test_labels, demo::predict_all(net, data.test_inputs, threads)};

  RunManifest m;
  m.n_classes = data.n_classes();
  m.variants = o.variants;
  m.dsa = o.dsa;
  m.step = o.step;
  m.oracle = o.oracle;
  m.epsilon = o.epsilon;
  m.svg = o.svg;
  m.seed = o.seed;
  m.train_labels = "train_labels.albl";
  m.test_labels = "test_labels.albl";
  save_labels(train_labels, o.out_dir / m.train_labels);
  save_labels(test_labels, o.out_dir / m.test_labels);
  for (const auto& tap : net.tap_names()) {
    LayerFiles f{tap, "train_" + tap + ".atrc", "test_" + tap + ".atrc"};
    save_trace_file(demo::extract_traces(net, data.train_inputs, tap, threads), o.out_dir / f.train_traces);
    save_trace_file(demo::extract_traces(net, data.test_inputs, tap, threads), o.out_dir / f.test_traces);
    m.layers.push_back(std::move(f));
  }

  demo::PerturbationOracleConfig oc;
  oc.epsilon = o.epsilon;
  oc.n_samples = o.oracle_samples;
  oc.seed = o.seed + 2;
  if (o.oracle == OracleKind::kPerturbation) {
    const auto flags = demo::corner_oracle_all(net, data.test_inputs, data.test_labels, oc, threads);
    m.corner_flags = "corner_flags.csv";
    save_corner_flags(flags, o.out_dir / m.corner_flags);
  }
  save_manifest(m, o.out_dir / "manifest.json");

  // Evaluate through the files just written, exactly as an imported run would.
  DemoResult result;
  result.train_accuracy = trained.train_accuracy;
  result.test_accuracy = demo::accuracy(test_labels.true_labels, test_labels.predicted_labels);

  json extra = {{"seed", o.seed},
                {"blobs",
                 {{"centers", o.blobs.centers},
                  {"sigma", o.blobs.sigma},
                  {"n_train", o.blobs.n_train},
                  {"n_test", o.blobs.n_test}}},
                {"hidden", tc.hidden},
                {"epochs", tc.epochs},
                {"final_loss", real(trained.final_loss)},
                {"train_accuracy", result.train_accuracy},
                {"test_accuracy", result.test_accuracy},
                {"taps", net.tap_names()}};
  if (o.oracle == OracleKind::kPerturbation) {
    extra["perturbation"] = {{"epsilon", oc.epsilon}, {"n_samples", oc.n_samples}, {"norm", "linf"}};
  }

  RunManifest resolved = load_manifest(o.out_dir / "manifest.json");
  resolved.out_dir = o.out_dir;
  DetectionReport rep = run_eval(resolved);
  // Record the relative manifest so the report does not depend on where it was written.
  rep.manifest = m;
  rep.extra = extra;
  report::write_text(o.out_dir / "report.json", report_to_json(rep).dump(2) + "\n");
  result.report = std::move(rep);
  return result;
}

namespace {

void render_inputs(const std::map<std::string, std::vector<CurveInput>>& groups, const fs::path& out,
                   std::size_t step, bool svg) {
  ensure_dir(out);
  for (const auto& [group, inputs] : groups) write_curve_group(out, group, inputs, step, svg);
}

}  // namespace

void render_curves_from_report(const fs::path& report_json, const fs::path& out, std::size_t step,
                               bool svg) {
  const json j = parse_json_file(report_json);
  std::map<std::string, std::vector<CurveInput>> groups;
  try {
    if (j.at("schema").get<int>() != 1) {
      throw Error(ErrorCode::kUnsupportedVersion, "report schema " + j.at("schema").dump());
    }
    const auto truth = j.at("labels").at("true").get<std::vector<ClassId>>();
    const auto pred = j.at("labels").at("predicted").get<std::vector<ClassId>>();
    for (const auto& e : j.at("results")) {
      const auto& scores = e.at("scores");
      const auto& corner = e.at("corner");
      if (scores.size() != truth.size() || corner.size() != truth.size() || pred.size() != truth.size()) {
        throw Error(ErrorCode::kCountMismatch, "report arrays have inconsistent lengths");
      }
      CurveInput in;
      const auto layer = e.at("layer").get<std::string>();
      in.label = layer + "_" + e.at("variant").get<std::string>();
      for (std::size_t i = 0; i < scores.size(); ++i) {
        in.samples.push_back({real_from(scores[i]), corner[i].get<int>() != 0, i});
      }
      in.true_labels = truth;
      in.predicted_labels = pred;
      groups[layer].push_back(std::move(in));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, report_json.string() + ": " + e.what());
  }
  render_inputs(groups, out, step, svg);
}

void render_curves_from_scores(const std::vector<fs::path>& score_files, const fs::path& out,
                               std::size_t step, bool svg) {
  if (score_files.empty()) throw Error(ErrorCode::kInvalidArgument, "no score files given");
  std::map<std::string, std::vector<CurveInput>> groups;
  for (const auto& path : score_files) {
    auto table = report::read_scores_csv(path);
    std::string label = path.stem().string();
    if (label.rfind("scores_", 0) == 0) label = label.substr(7);
    std::vector<bool> corner(table.scores.size());
    for (std::size_t i = 0; i < corner.size(); ++i) {
      corner[i] = table.labels.true_labels[i] != table.labels.predicted_labels[i];
    }
    groups["scores"].push_back({label, scored_by_flags(table.scores, corner),
                                std::move(table.labels.true_labels),
                                std::move(table.labels.predicted_labels)});
  }
  render_inputs(groups, out, step, svg);
}

}  // namespace dsakit::pipeline
