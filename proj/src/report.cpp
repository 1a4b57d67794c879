#include "dsakit/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dsakit/error.hpp"

namespace dsakit::report {

namespace {

double parse_real(std::string_view field, std::size_t line_no) {
  if (field == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kParse,
                "bad number '" + std::string(field) + "' on line " + std::to_string(line_no));
  }
  return v;
}

std::uint64_t parse_unsigned(std::string_view field, std::size_t line_no) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kParse,
                "bad integer '" + std::string(field) + "' on line " + std::to_string(line_no));
  }
  return v;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v, int digits = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

void write_scores_csv(const std::filesystem::path& path, std::span<const DsaScore> scores,
                      const LabelPairs& labels) {
  if (labels.true_labels.size() != scores.size() || labels.predicted_labels.size() != scores.size()) {
    throw Error(ErrorCode::kCountMismatch, "labels do not match score count");
  }
  std::string out = "row,dsa,dist_a,dist_b,anchor_a,anchor_b,true,predicted\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& s = scores[i];
    out += std::to_string(i) + ',' + format_double(s.value) + ',' + format_double(s.dist_a) + ',' +
           format_double(s.dist_b) + ',' + std::to_string(s.anchor_a) + ',' +
           std::to_string(s.anchor_b) + ',' + std::to_string(labels.true_labels[i]) + ',' +
           std::to_string(labels.predicted_labels[i]) + '\n';
  }
  write_text(path, out);
}

ScoreTable read_scores_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(std::filesystem::exists(path) ? ErrorCode::kIo : ErrorCode::kIoMissing,
                "cannot read score file " + path.string());
  }
  ScoreTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line_no == 1) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    while (true) {
      auto pos = rest.find(',');
      f.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (f.size() != 8) {
      throw Error(ErrorCode::kParse, "score line " + std::to_string(line_no) + " needs 8 fields");
    }
    if (parse_unsigned(f[0], line_no) != table.scores.size()) {
      throw Error(ErrorCode::kParse, "score rows out of order at line " + std::to_string(line_no));
    }
    DsaScore s;
    s.value = parse_real(f[1], line_no);
    s.dist_a = parse_real(f[2], line_no);
    s.dist_b = parse_real(f[3], line_no);
    s.anchor_a = parse_unsigned(f[4], line_no);
    s.anchor_b = parse_unsigned(f[5], line_no);
    table.scores.push_back(s);
    table.labels.true_labels.push_back(static_cast<ClassId>(parse_unsigned(f[6], line_no)));
    table.labels.predicted_labels.push_back(static_cast<ClassId>(parse_unsigned(f[7], line_no)));
  }
  return table;
}

void write_coverage_csv(const std::filesystem::path& path, const CoverageCurve& curve) {
  std::string out = "threshold,coverage,n_above\n";
  for (const auto& p : curve.points) {
    out += format_double(p.threshold) + ',' + format_double(p.coverage) + ',' +
           std::to_string(p.n_above) + '\n';
  }
  write_text(path, out);
}

void write_accuracy_csv(const std::filesystem::path& path, std::span<const AccuracyPoint> curve) {
  std::string out = "k,accuracy\n";
  for (const auto& p : curve) out += std::to_string(p.k) + ',' + format_double(p.accuracy) + '\n';
  write_text(path, out);
}

void write_roc_csv(const std::filesystem::path& path, const RocCurve& roc) {
  std::string out = "threshold,fpr,tpr\n";
  for (const auto& p : roc.points) {
    out += format_double(p.threshold) + ',' + format_double(p.fpr) + ',' + format_double(p.tpr) + '\n';
  }
  write_text(path, out);
}

std::string render_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label, std::span<const Series> series) {
  constexpr double kWidth = 560, kHeight = 380;
  constexpr double kLeft = 60, kRight = 130, kTop = 36, kBottom = 48;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  }
  if (!std::isfinite(x_min)) x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
  auto py = [&](double y) { return kTop + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << escape_xml(title) << "</text>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = x_min + (x_max - x_min) * t / 4.0;
    const double fy = y_min + (y_max - y_min) * t / 4.0;
    svg << "<text x=\"" << px(fx) << "\" y=\"" << kTop + plot_h + 16
        << "\" text-anchor=\"middle\">" << fixed(fx) << "</text>\n"
        << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(fy) + 4 << "\" text-anchor=\"end\">"
        << fixed(fy) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">" << escape_xml(x_label) << "</text>\n"
      << "<text x=\"16\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kTop + plot_h / 2 << ")\">" << escape_xml(y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      svg << fixed(px(s.x[i])) << ',' << fixed(py(s.y[i])) << ' ';
    }
    svg << "\"/>\n";
    const double ly = kTop + 14 + 18 * static_cast<double>(k);
    svg << "<line x1=\"" << kWidth - kRight + 12 << "\" y1=\"" << ly << "\" x2=\""
        << kWidth - kRight + 32 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kWidth - kRight + 38 << "\" y=\"" << ly + 4 << "\">"
        << escape_xml(s.name) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace dsakit::report
