#include "dsakit/traces.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "dsakit/error.hpp"

namespace dsakit {

namespace {

constexpr std::array<char, 4> kTraceMagic = {'A', 'T', 'R', 'C'};
constexpr std::array<char, 4> kLabelMagic = {'A', 'L', 'B', 'L'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::size_t kTraceHeaderBytes = 24;
constexpr std::size_t kLabelHeaderBytes = 16;

void check_finite(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "non-finite trace value at flat index " + std::to_string(i));
    }
  }
}

bool is_csv(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv";
}

std::string read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) {
    throw Error(ErrorCode::kIoMissing, "file not found: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed: " + path.string());
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

template <typename T>
void put_le(std::string& out, T v) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
  }
}

template <typename T>
T get_le(const std::string& in, std::size_t offset) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<T>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return v;
}

void check_magic(const std::string& bytes, const std::array<char, 4>& magic,
                 const std::filesystem::path& path) {
  if (bytes.size() < 4 || !std::equal(magic.begin(), magic.end(), bytes.begin())) {
    throw Error(ErrorCode::kBadMagic, "bad magic in " + path.string() + ", expected \"" +
                                          std::string(magic.begin(), magic.end()) + "\"");
  }
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  for (auto& f : fields) {
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) {
      f.remove_suffix(1);
    }
  }
  return fields;
}

std::vector<std::string_view> csv_lines(const std::string& text) {
  std::vector<std::string_view> lines;
  std::string_view rest(text);
  while (!rest.empty()) {
    auto pos = rest.find('\n');
    auto line = rest.substr(0, pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + 1);
  }
  return lines;
}

double parse_double(std::string_view field, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    // from_chars rejects "inf"/"nan" spellings in some forms; treat those as non-finite.
    std::string lowered(field);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lowered.find("nan") != std::string::npos || lowered.find("inf") != std::string::npos) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "non-finite value on CSV line " + std::to_string(line_no));
    }
    throw Error(ErrorCode::kParse, "cannot parse number '" + std::string(field) +
                                       "' on CSV line " + std::to_string(line_no));
  }
  return v;
}

long long parse_int(std::string_view field, std::size_t line_no) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kParse, "cannot parse label '" + std::string(field) +
                                       "' on CSV line " + std::to_string(line_no));
  }
  return v;
}

TraceSet load_trace_csv(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto lines = csv_lines(text);
  if (lines.empty()) throw Error(ErrorCode::kTruncated, "empty CSV trace file " + path.string());
  const std::size_t n_neurons = split_commas(lines[0]).size();
  std::vector<double> values;
  values.reserve((lines.size() - 1) * n_neurons);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_commas(lines[i]);
    if (fields.size() != n_neurons) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "CSV line " + std::to_string(i + 1) + " has " + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(n_neurons));
    }
    for (auto f : fields) values.push_back(parse_double(f, i + 1));
  }
  return TraceSet(lines.size() - 1, n_neurons, std::move(values),
                  path.stem().string());
}

void save_trace_csv(const TraceSet& set, const std::filesystem::path& path) {
  std::string out;
  for (std::size_t j = 0; j < set.n_neurons(); ++j) {
    if (j) out += ',';
    out += 'n';
    out += std::to_string(j);
  }
  out += '\n';
  for (std::size_t i = 0; i < set.n_samples(); ++i) {
    auto row = set.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += format_double(row[j]);
    }
    out += '\n';
  }
  write_file(path, out);
}

void check_label_range(const LabelPairs& labels, std::optional<std::size_t> n_classes) {
  if (!n_classes) return;
  for (std::size_t i = 0; i < labels.true_labels.size(); ++i) {
    if (labels.true_labels[i] >= *n_classes || labels.predicted_labels[i] >= *n_classes) {
      throw Error(ErrorCode::kLabelOutOfRange,
                  "label out of range [0," + std::to_string(*n_classes) + ") at row " +
                      std::to_string(i));
    }
  }
}

}  // namespace

ActivationTrace::ActivationTrace(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorCode::kInvalidArgument, "activation trace is empty");
  check_finite(values_);
}

TraceSet::TraceSet(std::size_t n_samples, std::size_t n_neurons, std::vector<double> values,
                   std::string layer_name)
    : n_samples_(n_samples),
      n_neurons_(n_neurons),
      values_(std::move(values)),
      layer_name_(std::move(layer_name)) {
  if (n_neurons_ == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "trace set needs at least one neuron");
  }
  if (values_.size() != n_samples_ * n_neurons_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "trace payload has " + std::to_string(values_.size()) + " values, expected " +
                    std::to_string(n_samples_ * n_neurons_));
  }
  check_finite(values_);
}

TraceSet TraceSet::from_rows(const std::vector<std::vector<double>>& rows,
                             std::string layer_name) {
  if (rows.empty()) throw Error(ErrorCode::kEmptyInput, "no rows");
  const std::size_t d = rows.front().size();
  std::vector<double> flat;
  flat.reserve(rows.size() * d);
  for (const auto& r : rows) {
    if (r.size() != d) throw Error(ErrorCode::kDimensionMismatch, "ragged trace rows");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return TraceSet(rows.size(), d, std::move(flat), std::move(layer_name));
}

LabeledTraceSet LabeledTraceSet::test(TraceSet traces, LabelPairs labels,
                                      std::size_t n_classes) {
  if (n_classes == 0) throw Error(ErrorCode::kInvalidArgument, "n_classes must be positive");
  const std::size_t n = traces.n_samples();
  if (labels.true_labels.size() != n || labels.predicted_labels.size() != n) {
    throw Error(ErrorCode::kCountMismatch,
                "label count (" + std::to_string(labels.true_labels.size()) + "/" +
                    std::to_string(labels.predicted_labels.size()) +
                    ") does not match trace count " + std::to_string(n));
  }
  check_label_range(labels, n_classes);
  return LabeledTraceSet(std::move(traces), std::move(labels), n_classes);
}

LabeledTraceSet LabeledTraceSet::training(TraceSet traces, LabelPairs labels,
                                          std::size_t n_classes) {
  if (traces.n_samples() == 0) {
    throw Error(ErrorCode::kEmptyInput, "training trace set is empty");
  }
  auto set = test(std::move(traces), std::move(labels), n_classes);
  std::vector<bool> seen(n_classes, false);
  for (auto c : set.true_labels()) seen[c] = true;
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (!seen[c]) {
      throw Error(ErrorCode::kEmptyClass,
                  "class " + std::to_string(c) + " has no training samples");
    }
  }
  return set;
}

ClassPartition::ClassPartition(std::span<const ClassId> labels, std::size_t n_classes)
    : members_(n_classes), class_of_(labels.begin(), labels.end()) {
  for (RowId i = 0; i < labels.size(); ++i) {
    if (labels[i] >= n_classes) {
      throw Error(ErrorCode::kLabelOutOfRange, "label out of range at row " + std::to_string(i));
    }
    members_[labels[i]].push_back(i);
  }
}

std::size_t ClassPartition::max_class_size() const noexcept {
  std::size_t m = 0;
  for (const auto& v : members_) m = std::max(m, v.size());
  return m;
}

NeuronStats compute_neuron_stats(const TraceSet& set) {
  const std::size_t n = set.n_samples();
  const std::size_t d = set.n_neurons();
  if (n == 0) throw Error(ErrorCode::kEmptyInput, "cannot compute statistics of an empty set");
  NeuronStats stats{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    auto r = set.row(i);
    for (std::size_t j = 0; j < d; ++j) stats.mean[j] += r[j];
  }
  for (auto& m : stats.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = set.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double dv = r[j] - stats.mean[j];
      stats.stddev[j] += dv * dv;
    }
  }
  for (auto& s : stats.stddev) s = std::sqrt(s / static_cast<double>(n));
  return stats;
}

TraceSet normalize_traces(const TraceSet& set, const NeuronStats& stats) {
  const std::size_t d = set.n_neurons();
  if (stats.mean.size() != d || stats.stddev.size() != d) {
    throw Error(ErrorCode::kDimensionMismatch,
                "statistics have " + std::to_string(stats.mean.size()) +
                    " columns, traces have " + std::to_string(d));
  }
  std::vector<double> out(set.values().begin(), set.values().end());
  for (std::size_t i = 0; i < set.n_samples(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double& v = out[i * d + j];
      v = (v - stats.mean[j]) / std::max(stats.stddev[j], kVarianceFloor);
    }
  }
  return TraceSet(set.n_samples(), d, std::move(out), set.layer_name());
}

std::vector<std::size_t> columns_above_variance(const NeuronStats& stats, double threshold) {
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < stats.stddev.size(); ++j) {
    if (stats.stddev[j] >= threshold) keep.push_back(j);
  }
  return keep;
}

TraceSet select_columns(const TraceSet& set, std::span<const std::size_t> columns) {
  if (columns.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "column selection would drop every neuron");
  }
  std::vector<double> out;
  out.reserve(set.n_samples() * columns.size());
  for (std::size_t i = 0; i < set.n_samples(); ++i) {
    auto r = set.row(i);
    for (auto j : columns) {
      if (j >= r.size()) throw Error(ErrorCode::kDimensionMismatch, "column index out of range");
      out.push_back(r[j]);
    }
  }
  return TraceSet(set.n_samples(), columns.size(), std::move(out), set.layer_name());
}

TraceSet load_trace_file(const std::filesystem::path& path) {
  if (is_csv(path)) return load_trace_csv(path);
  const std::string bytes = read_file(path);
  check_magic(bytes, kTraceMagic, path);
  if (bytes.size() < kTraceHeaderBytes) {
    throw Error(ErrorCode::kTruncated, "truncated ATRC header in " + path.string());
  }
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kFormatVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "unsupported ATRC version " + std::to_string(version));
  }
  const auto n_samples = get_le<std::uint64_t>(bytes, 8);
  const auto n_neurons = get_le<std::uint64_t>(bytes, 16);
  if (n_neurons == 0) throw Error(ErrorCode::kDimensionMismatch, "ATRC file declares 0 neurons");
  const std::uint64_t available = (bytes.size() - kTraceHeaderBytes) / 4;
  if (n_samples > available / n_neurons ||
      (bytes.size() - kTraceHeaderBytes) < n_samples * n_neurons * 4) {
    throw Error(ErrorCode::kTruncated, "ATRC payload shorter than " + std::to_string(n_samples) +
                                           "x" + std::to_string(n_neurons) + " floats");
  }
  const std::uint64_t count = n_samples * n_neurons;
  if (bytes.size() != kTraceHeaderBytes + count * 4) {
    throw Error(ErrorCode::kDimensionMismatch,
                "ATRC file has trailing bytes beyond the declared payload");
  }
  std::vector<double> values(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto bits = get_le<std::uint32_t>(bytes, kTraceHeaderBytes + 4 * i);
    const float f = std::bit_cast<float>(bits);
    if (!std::isfinite(f)) {
      throw Error(ErrorCode::kNonFiniteValue,
                  "non-finite value at row " + std::to_string(i / n_neurons) + ", column " +
                      std::to_string(i % n_neurons));
    }
    values[i] = static_cast<double>(f);
  }
  return TraceSet(n_samples, n_neurons, std::move(values), path.stem().string());
}

void save_trace_file(const TraceSet& set, const std::filesystem::path& path) {
  if (is_csv(path)) {
    save_trace_csv(set, path);
    return;
  }
  std::string out;
  out.reserve(kTraceHeaderBytes + set.values().size() * 4);
  out.append(kTraceMagic.begin(), kTraceMagic.end());
  put_le<std::uint32_t>(out, kFormatVersion);
  put_le<std::uint64_t>(out, set.n_samples());
  put_le<std::uint64_t>(out, set.n_neurons());
  for (double v : set.values()) {
    const auto f = static_cast<float>(v);
    if (!std::isfinite(f)) {
      throw Error(ErrorCode::kNonFiniteValue, "value " + format_double(v) +
                                                  " is not representable as a finite f32");
    }
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
  }
  write_file(path, out);
}

LabelPairs load_labels(const std::filesystem::path& path, std::size_t n_samples,
                       std::optional<std::size_t> n_classes) {
  LabelPairs labels;
  if (is_csv(path)) {
    const std::string text = read_file(path);
    const auto lines = csv_lines(text);
    if (lines.empty()) throw Error(ErrorCode::kTruncated, "empty label CSV " + path.string());
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto fields = split_commas(lines[i]);
      if (fields.size() != 2) {
        throw Error(ErrorCode::kParse, "label CSV line " + std::to_string(i + 1) +
                                           " must have two fields");
      }
      const auto t = parse_int(fields[0], i + 1);
      const auto p = parse_int(fields[1], i + 1);
      if (t < 0 || p < 0 || t > std::numeric_limits<ClassId>::max() ||
          p > std::numeric_limits<ClassId>::max()) {
        throw Error(ErrorCode::kLabelOutOfRange,
                    "label out of range on CSV line " + std::to_string(i + 1));
      }
      labels.true_labels.push_back(static_cast<ClassId>(t));
      labels.predicted_labels.push_back(static_cast<ClassId>(p));
    }
  } else {
    const std::string bytes = read_file(path);
    check_magic(bytes, kLabelMagic, path);
    if (bytes.size() < kLabelHeaderBytes) {
      throw Error(ErrorCode::kTruncated, "truncated ALBL header in " + path.string());
    }
    const auto version = get_le<std::uint32_t>(bytes, 4);
    if (version != kFormatVersion) {
      throw Error(ErrorCode::kUnsupportedVersion,
                  "unsupported ALBL version " + std::to_string(version));
    }
    const auto count = get_le<std::uint64_t>(bytes, 8);
    if ((bytes.size() - kLabelHeaderBytes) / 8 < count) {
      throw Error(ErrorCode::kTruncated, "ALBL payload shorter than declared count");
    }
    if (bytes.size() != kLabelHeaderBytes + count * 8) {
      throw Error(ErrorCode::kDimensionMismatch, "ALBL file has trailing bytes");
    }
    labels.true_labels.resize(count);
    labels.predicted_labels.resize(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      labels.true_labels[i] = get_le<std::uint32_t>(bytes, kLabelHeaderBytes + 8 * i);
      labels.predicted_labels[i] = get_le<std::uint32_t>(bytes, kLabelHeaderBytes + 8 * i + 4);
    }
  }
  if (labels.true_labels.size() != n_samples) {
    throw Error(ErrorCode::kCountMismatch,
                "label file " + path.string() + " has " +
                    std::to_string(labels.true_labels.size()) + " entries, traces have " +
                    std::to_string(n_samples));
  }
  check_label_range(labels, n_classes);
  return labels;
}

void save_labels(const LabelPairs& labels, const std::filesystem::path& path) {
  if (labels.true_labels.size() != labels.predicted_labels.size()) {
    throw Error(ErrorCode::kCountMismatch, "true/predicted label vectors differ in length");
  }
  std::string out;
  if (is_csv(path)) {
    out = "true,predicted\n";
    for (std::size_t i = 0; i < labels.true_labels.size(); ++i) {
      out += std::to_string(labels.true_labels[i]) + ',' +
             std::to_string(labels.predicted_labels[i]) + '\n';
    }
  } else {
    out.append(kLabelMagic.begin(), kLabelMagic.end());
    put_le<std::uint32_t>(out, kFormatVersion);
    put_le<std::uint64_t>(out, labels.true_labels.size());
    for (std::size_t i = 0; i < labels.true_labels.size(); ++i) {
      put_le<std::uint32_t>(out, labels.true_labels[i]);
      put_le<std::uint32_t>(out, labels.predicted_labels[i]);
    }
  }
  write_file(path, out);
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace dsakit
