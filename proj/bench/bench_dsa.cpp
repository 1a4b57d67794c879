// Timing harness: naive reference vs. the blocked kernel on one thread vs.
// the blocked kernel on all threads. `--perf` adds the 10k x 60k x 64 DSA1 run.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dsakit/demo.hpp"
#include "dsakit/dsa.hpp"
#include "dsakit/parallel.hpp"
#include "dsakit/reference.hpp"

namespace {

using namespace dsakit;

// Class-clustered Gaussian traces: class centres ~ N(0, spread^2) per neuron,
// samples = centre + N(0, 1). Labels are i % C; predicted = true.
LabeledTraceSet make_set(std::size_t n, std::size_t d, std::size_t c, double spread,
                         std::uint64_t seed, bool training) {
  demo::Rng centre_rng(0xC0FFEE);
  std::vector<double> centres(c * d);
  for (double& v : centres) v = spread * centre_rng.normal();
  demo::Rng rng(seed);
  std::vector<double> values(n * d);
  LabelPairs labels;
  for (std::size_t i = 0; i < n; ++i) {
    const auto cls = static_cast<ClassId>(i % c);
    for (std::size_t j = 0; j < d; ++j) values[i * d + j] = centres[cls * d + j] + rng.normal();
    labels.true_labels.push_back(cls);
    labels.predicted_labels.push_back(cls);
  }
  TraceSet traces(n, d, std::move(values));
  return training ? LabeledTraceSet::training(std::move(traces), std::move(labels), c)
                  : LabeledTraceSet::test(std::move(traces), std::move(labels), c);
}

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool same(const std::vector<DsaScore>& a, const std::vector<DsaScore>& b) {
  return a == b;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dsakit benchmark"};
  bool perf = false;
  std::size_t n_train = 6000, n_test = 1000, dim = 64, classes = 10;
  double spread = 1.0;
  app.add_flag("--perf", perf, "also run 10,000 test x 60,000 train x 64 dims, DSA1");
  app.add_option("--train", n_train, "training rows for the comparison runs");
  app.add_option("--test", n_test, "test rows for the comparison runs");
  app.add_option("--dim", dim, "trace width");
  app.add_option("--classes", classes, "number of classes");
  app.add_option("--spread", spread, "class-centre spread (noise sigma is 1)");
  CLI11_PARSE(app, argc, argv);

  const int all = resolve_threads(0);
  std::printf("threads available: %d\n", all);
  const auto train = make_set(n_train, dim, classes, spread, 1, true);
  const auto test = make_set(n_test, dim, classes, spread, 2, false);
  std::printf("comparison: %zu test x %zu train x %zu dims, %zu classes\n", n_test, n_train, dim,
              classes);
  std::printf("%-6s %12s %12s %12s %9s %9s\n", "var", "reference_s", "serial_s", "parallel_s",
              "speedup", "match");
  for (DsaVariant v : kAllVariants) {
    DsaConfig config;
    config.variant = v;
    std::vector<DsaScore> ref, serial, par;
    const double t_ref = seconds([&] { ref = reference::batch_dsa(train, test, config); });
    config.threads = 1;
    const double t_ser = seconds([&] { serial = batch_dsa(train, test, config); });
    config.threads = all;
    const double t_par = seconds([&] { par = batch_dsa(train, test, config); });
    // Bitwise equality of the two kernel runs; the reference sums in a
    // different order and is compared with a tolerance in the test suite.
    std::printf("%-6s %12.3f %12.3f %12.3f %8.2fx %9s\n", std::string(variant_name(v)).c_str(),
                t_ref, t_ser, t_par, t_ref / t_par, same(serial, par) ? "yes" : "NO");
  }

  if (perf) {
    const auto big_train = make_set(60000, 64, classes, spread, 3, true);
    const auto big_test = make_set(10000, 64, classes, spread, 4, false);
    DsaConfig config;
    config.variant = DsaVariant::kDsa1;
    config.threads = all;
    std::vector<DsaScore> out;
    const double t = seconds([&] { out = batch_dsa(big_train, big_test, config); });
    std::printf("perf: DSA1 10000 x 60000 x 64 on %d thread(s): %.2f s (target < 60 s on 4 cores)\n",
                all, t);
  }
  return 0;
}
