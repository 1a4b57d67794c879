// dsakit command line: compute, eval, demo, curves.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dsakit/error.hpp"
#include "dsakit/pipeline.hpp"

namespace {

using namespace dsakit;
using namespace dsakit::pipeline;

// Flags shared by compute/eval/demo. Unset flags leave the manifest alone.
struct DsaFlags {
  std::vector<std::string> variants;
  std::optional<std::size_t> k;
  std::optional<double> delta;
  std::optional<std::string> class_ref;
  std::optional<std::string> zero_denominator;
  bool normalize = false;
  bool drop_low_variance = false;
  bool exclude_self_by_row = false;
  bool exclude_anchor = false;
  std::optional<std::size_t> step;
  std::optional<double> epsilon;
  std::optional<std::string> oracle;
  bool svg = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;

  void add_to(CLI::App* app, bool with_run_io) {
    app->add_option("--variant", variants, "dsa0|dsa1|dsa2|dsa3 (repeatable; default all)")
        ->check(CLI::IsMember({"dsa0", "dsa1", "dsa2", "dsa3"}));
    app->add_option("--k", k, "DSA3 neighbourhood size")->check(CLI::PositiveNumber);
    app->add_option("--delta", delta, "DSA3 neighbourhood radius (overrides --k)")
        ->check(CLI::PositiveNumber);
    app->add_option("--class-ref", class_ref, "reference class for test rows")
        ->check(CLI::IsMember({"predicted", "true"}));
    app->add_option("--zero-denominator", zero_denominator, "dist_b == 0 handling")
        ->check(CLI::IsMember({"inf", "error"}));
    app->add_flag("--normalize", normalize, "standardise neurons with training statistics");
    app->add_flag("--drop-low-variance", drop_low_variance, "drop near-constant neurons");
    app->add_flag("--exclude-anchor", exclude_anchor, "DSA3: leave the anchor out of its neighbourhood");
    app->add_option("--step", step, "accuracy-curve step")->check(CLI::PositiveNumber);
    app->add_option("--oracle", oracle, "corner-case oracle")
        ->check(CLI::IsMember({"misclassified", "perturbation"}));
    app->add_option("--epsilon", epsilon, "perturbation radius (L-inf)")->check(CLI::PositiveNumber);
    app->add_flag("--svg", svg, "also write SVG plots");
    app->add_option("--seed", seed, "random seed");
    app->add_option("--out", out, "output directory");
    app->add_option("--threads", threads, "worker threads (0 = all, capped by SADL_DSA_THREADS)");
    if (with_run_io) {
      app->add_flag("--exclude-self-by-row", exclude_self_by_row,
                    "test row i is training row i; skip it as a neighbour");
    }
  }

  void apply(DsaConfig& c) const {
    if (delta) {
      c.neighborhood = NeighborhoodSpec::radius(*delta);
    } else if (k) {
      c.neighborhood = NeighborhoodSpec::nearest(*k);
    }
    if (class_ref) c.class_reference = *class_ref == "true" ? ClassReference::kTrueLabel : ClassReference::kPredicted;
    if (zero_denominator) {
      c.zero_denominator = *zero_denominator == "error" ? ZeroDenominatorPolicy::kError
                                                        : ZeroDenominatorPolicy::kInfinity;
    }
    if (normalize) c.normalize = true;
    if (drop_low_variance) c.drop_low_variance = true;
    if (exclude_anchor) c.include_anchor = false;
    if (exclude_self_by_row) c.exclude_self_by_row = true;
    if (threads) c.threads = *threads;
  }

  std::optional<std::vector<DsaVariant>> parsed_variants() const {
    if (variants.empty()) return std::nullopt;
    std::vector<DsaVariant> v;
    for (const auto& s : variants) v.push_back(parse_variant(s));
    return v;
  }
};

struct RunFlags {
  std::optional<std::string> manifest;
  std::vector<std::string> train_traces;
  std::vector<std::string> test_traces;
  std::vector<std::string> layer_names;
  std::optional<std::string> train_labels;
  std::optional<std::string> test_labels;
  std::optional<std::size_t> n_classes;
  std::optional<std::string> corner_flags;

  void add_to(CLI::App* app) {
    app->add_option("--manifest", manifest, "JSON run manifest");
    app->add_option("--train-traces", train_traces, "training ATRC/CSV trace file (one per layer)");
    app->add_option("--test-traces", test_traces, "test ATRC/CSV trace file (one per layer)");
    app->add_option("--layer-name", layer_names, "name per layer (default: from file name)");
    app->add_option("--train-labels", train_labels, "training ALBL/CSV labels");
    app->add_option("--test-labels", test_labels, "test ALBL/CSV labels");
    app->add_option("--n-classes", n_classes, "number of classes (default: inferred)");
    app->add_option("--corner-flags", corner_flags, "row,corner CSV for --oracle perturbation");
  }

  RunManifest build(const DsaFlags& f) const {
    RunManifest m = manifest ? load_manifest(*manifest) : RunManifest{};
    if (!train_traces.empty() || !test_traces.empty()) {
      if (train_traces.size() != test_traces.size()) {
        throw Error(ErrorCode::kInvalidArgument, "--train-traces and --test-traces must pair up");
      }
      if (!layer_names.empty() && layer_names.size() != train_traces.size()) {
        throw Error(ErrorCode::kInvalidArgument, "one --layer-name per trace pair");
      }
      m.layers.clear();
      for (std::size_t i = 0; i < train_traces.size(); ++i) {
        m.layers.push_back({layer_names.empty() ? layer_name_from_path(train_traces[i]) : layer_names[i],
                            train_traces[i], test_traces[i]});
      }
    }
    if (train_labels) m.train_labels = *train_labels;
    if (test_labels) m.test_labels = *test_labels;
    if (n_classes) m.n_classes = *n_classes;
    if (corner_flags) m.corner_flags = *corner_flags;
    if (auto v = f.parsed_variants()) m.variants = *v;
    f.apply(m.dsa);
    if (f.step) m.step = *f.step;
    if (f.oracle) m.oracle = parse_oracle(*f.oracle);
    if (f.epsilon) m.epsilon = *f.epsilon;
    if (f.svg) m.svg = true;
    if (f.seed) m.seed = *f.seed;
    if (f.out) m.out_dir = *f.out;
    return m;
  }
};

void print_aucs(const DetectionReport& rep) {
  for (const auto& e : rep.entries) {
    std::printf("%-10s %-5s AUC %.4f  (%zu corner / %zu)\n", e.layer.c_str(),
                std::string(variant_name(e.variant)).c_str(), e.auc, e.n_corner, e.n_test);
  }
}

int fail(std::string_view tag, const std::string& msg, int code) {
  std::string line = msg;
  for (char& c : line) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::cerr << tag << ": " << line << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distance-based surprise adequacy for corner-case detection"};
  app.set_version_flag("--version", DSAKIT_VERSION);
  app.require_subcommand(1);

  DsaFlags compute_flags, eval_flags, demo_flags;
  RunFlags compute_io, eval_io;

  auto* compute = app.add_subcommand("compute", "write per-sample DSA score CSVs");
  compute_flags.add_to(compute, true);
  compute_io.add_to(compute);

  auto* eval = app.add_subcommand("eval", "scores, AUC, coverage/accuracy/ROC curves and report.json");
  eval_flags.add_to(eval, true);
  eval_io.add_to(eval);

  auto* demo_cmd = app.add_subcommand("demo", "synthetic blobs -> TinyNet -> traces -> full report");
  demo_flags.add_to(demo_cmd, false);
  std::optional<std::size_t> epochs;
  std::size_t oracle_samples = 256;
  demo_cmd->add_option("--epochs", epochs, "training epochs");
  demo_cmd->add_option("--oracle-samples", oracle_samples, "random perturbations per input");

  auto* curves = app.add_subcommand("curves", "re-render curves from a report or score files");
  std::optional<std::string> curves_report;
  std::vector<std::string> curves_scores;
  std::size_t curves_step = 100;
  std::string curves_out = ".";
  bool curves_svg = false;
  auto* rep_opt = curves->add_option("--report", curves_report, "report.json from eval/demo");
  auto* sc_opt = curves->add_option("--scores", curves_scores, "score CSV files");
  rep_opt->excludes(sc_opt);
  curves->add_option("--step", curves_step, "accuracy-curve step")->check(CLI::PositiveNumber);
  curves->add_option("--out", curves_out, "output directory");
  curves->add_flag("--svg", curves_svg, "also write SVG plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(error_tag(ErrorCode::kInvalidArgument), e.what(),
                exit_code_for(ErrorCode::kInvalidArgument));
  }

  try {
    if (*compute) {
      for (const auto& path : run_compute(compute_io.build(compute_flags))) {
        std::printf("%s\n", path.string().c_str());
      }
    } else if (*eval) {
      const auto m = eval_io.build(eval_flags);
      const auto rep = run_eval(m);
      print_aucs(rep);
      std::printf("report: %s\n", (m.out_dir / "report.json").string().c_str());
    } else if (*demo_cmd) {
      DemoOptions o;
      if (demo_flags.seed) o.seed = *demo_flags.seed;
      if (demo_flags.out) o.out_dir = *demo_flags.out;
      if (auto v = demo_flags.parsed_variants()) o.variants = *v;
      demo_flags.apply(o.dsa);
      if (demo_flags.step) o.step = *demo_flags.step;
      if (demo_flags.oracle) o.oracle = parse_oracle(*demo_flags.oracle);
      if (demo_flags.epsilon) o.epsilon = *demo_flags.epsilon;
      if (epochs) o.train.epochs = *epochs;
      o.oracle_samples = oracle_samples;
      o.svg = demo_flags.svg;
      const auto res = run_demo(o);
      std::printf("train accuracy %.4f, test accuracy %.4f\n", res.train_accuracy, res.test_accuracy);
      print_aucs(res.report);
      std::printf("report: %s\n", (o.out_dir / "report.json").string().c_str());
    } else if (*curves) {
      if (curves_report) {
        render_curves_from_report(*curves_report, curves_out, curves_step, curves_svg);
      } else if (!curves_scores.empty()) {
        std::vector<std::filesystem::path> files(curves_scores.begin(), curves_scores.end());
        render_curves_from_scores(files, curves_out, curves_step, curves_svg);
      } else {
        throw Error(ErrorCode::kInvalidArgument, "curves needs --report or --scores");
      }
    }
  } catch (const Error& e) {
    return fail(error_tag(e.code()), e.what(), exit_code_for(e.code()));
  } catch (const std::bad_alloc&) {
    return fail("E_OUT_OF_MEMORY", "allocation failed", 1);
  } catch (const std::exception& e) {
    return fail("E_INTERNAL", e.what(), 1);
  }
  return 0;
}
