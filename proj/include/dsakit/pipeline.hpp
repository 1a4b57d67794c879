#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsakit/demo.hpp"
#include "dsakit/dsa.hpp"
#include "dsakit/metrics.hpp"
#include "json.hpp"

namespace dsakit::pipeline {

enum class OracleKind { kMisclassified, kPerturbation };

struct LayerFiles {
  std::string name;
  std::filesystem::path train_traces;
  std::filesystem::path test_traces;
};

// Everything a compute/eval run needs. Serialises to a JSON config file;
// relative paths in such a file resolve against the file's directory.
struct RunManifest {
  std::vector<LayerFiles> layers;
  std::filesystem::path train_labels;
  std::filesystem::path test_labels;
  std::optional<std::size_t> n_classes;
  std::vector<DsaVariant> variants = {std::begin(kAllVariants), std::end(kAllVariants)};
  DsaConfig dsa;  // dsa.variant is ignored; `variants` selects what runs
  std::size_t step = kDefaultAccuracyStep;
  OracleKind oracle = OracleKind::kMisclassified;
  double epsilon = 0.1;
  // Per-row corner flags (row,corner CSV) from the perturbation oracle.
  std::filesystem::path corner_flags;
  bool svg = false;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
};

nlohmann::json manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const RunManifest& manifest, const std::filesystem::path& path);

std::string_view oracle_name(OracleKind kind);
OracleKind parse_oracle(std::string_view name);

void save_corner_flags(const std::vector<bool>& flags, const std::filesystem::path& path);
std::vector<bool> load_corner_flags(const std::filesystem::path& path, std::size_t n_samples);

// Layer name derived from a training trace file: its stem without a leading
// "train_" / "train-".
std::string layer_name_from_path(const std::filesystem::path& train_traces);

// Fails with E_IO_MISSING when a referenced file does not exist.
void check_inputs_exist(const RunManifest& manifest);

struct LoadedLayer {
  std::string name;
  LabeledTraceSet train;
  LabeledTraceSet test;
};

struct LoadedRun {
  std::vector<LoadedLayer> layers;
  LabelPairs train_labels;
  LabelPairs test_labels;
  std::size_t n_classes = 0;
};

LoadedRun load_run(const RunManifest& manifest);

struct EvalEntry {
  std::string layer;
  DsaVariant variant = DsaVariant::kDsa3;
  double auc = 0.0;
  std::size_t n_test = 0;
  std::size_t n_corner = 0;
  std::vector<DsaScore> scores;
  std::vector<bool> corner;
};

struct DetectionReport {
  RunManifest manifest;
  LabelPairs test_labels;
  std::string oracle;
  double test_accuracy = 0.0;
  std::vector<EvalEntry> entries;
  nlohmann::json extra = nlohmann::json::object();
  std::string generated_at;  // ISO-8601 UTC
};

nlohmann::json report_to_json(const DetectionReport& report);

// Writes scores_<layer>_<variant>.csv for every layer and variant.
std::vector<std::filesystem::path> run_compute(const RunManifest& manifest);

// Scores, curves (CSV, optional SVG) and report.json. corner_flags, when
// given, replaces misclassification as the corner-case label.
DetectionReport run_eval(const RunManifest& manifest,
                         const std::vector<bool>* corner_flags = nullptr);

struct DemoOptions {
  std::uint64_t seed = 13;
  std::filesystem::path out_dir = "demo_out";
  demo::BlobSpec blobs = demo::overlapping_blobs_spec();
  demo::TrainConfig train;
  DsaConfig dsa;
  std::vector<DsaVariant> variants = {std::begin(kAllVariants), std::end(kAllVariants)};
  std::size_t step = kDefaultAccuracyStep;
  OracleKind oracle = OracleKind::kMisclassified;
  double epsilon = 0.1;
  std::size_t oracle_samples = 256;
  bool svg = false;
};

struct DemoResult {
  DetectionReport report;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

// Blobs -> TinyNet -> ATRC/ALBL files for every tap -> eval on those files.
DemoResult run_demo(const DemoOptions& options);

// Re-renders curve CSVs (and SVGs) from a report.json without recomputing.
void render_curves_from_report(const std::filesystem::path& report_json,
                               const std::filesystem::path& out_dir, std::size_t step, bool svg);
// Curves from score CSVs; corner cases are the misclassified rows.
void render_curves_from_scores(const std::vector<std::filesystem::path>& score_files,
                               const std::filesystem::path& out_dir, std::size_t step, bool svg);

}  // namespace dsakit::pipeline
