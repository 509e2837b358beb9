#include "wulff/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace wulff {

namespace {

std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  const double v = std::get<double>(c);
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

// Orders numbers numerically and strings lexically; mixed types by index.
bool cell_less(const Cell& a, const Cell& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  return a < b;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw DomainError("Table " + name + ": row has " + std::to_string(row.size()) + " cells, expected " +
                      std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

void Table::sort_rows() {
  const int keys = std::min<int>(key_columns, static_cast<int>(columns.size()));
  std::stable_sort(rows.begin(), rows.end(), [keys](const auto& a, const auto& b) {
    for (int k = 0; k < keys; ++k) {
      if (cell_less(a[k], b[k])) return true;
      if (cell_less(b[k], a[k])) return false;
    }
    return false;
  });
}

void Table::write_csv(std::ostream& out) const {
  for (const auto& c : comments) out << "# " << c << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out << ',';
    out << columns[i].name;
    if (!columns[i].convention.empty()) out << '[' << columns[i].convention << ']';
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_cell(row[i]);
    }
    out << '\n';
  }
}

void Plot::write_svg(std::ostream& out) const {
  constexpr double kW = 640, kH = 440, kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!(s.x[i] > 0) || !(s.y[i] > 0) || !std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, std::log10(s.x[i]));
      xmax = std::max(xmax, std::log10(s.x[i]));
      ymin = std::min(ymin, std::log10(s.y[i]));
      ymax = std::max(ymax, std::log10(s.y[i]));
    }
  }
  if (!(xmin <= xmax)) xmin = 0, xmax = 1;
  if (!(ymin <= ymax)) ymin = 0, ymax = 1;
  xmin = std::floor(xmin), xmax = std::max(std::ceil(xmax), xmin + 1);
  ymin = std::floor(ymin), ymax = std::max(std::ceil(ymax), ymin + 1);
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto px = [&](double lx) { return kLeft + (lx - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double ly) { return kTop + (ymax - ly) / (ymax - ymin) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"22\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(xmin); d <= static_cast<int>(xmax); ++d) {
    out << "<line x1=\"" << px(d) << "\" y1=\"" << kTop << "\" x2=\"" << px(d) << "\" y2=\"" << kTop + ph
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << px(d) << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (int d = static_cast<int>(ymin); d <= static_cast<int>(ymax); ++d) {
    out << "<line x1=\"" << kLeft << "\" y1=\"" << py(d) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << py(d)
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(d) + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 18 << "\" text-anchor=\"middle\">" << xml_escape(x_label)
      << "</text>\n";
  out << "<text transform=\"translate(18," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << xml_escape(y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % 8];
    std::string points;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!(s.x[i] > 0) || !(s.y[i] > 0) || !std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      const double x = px(std::log10(s.x[i])), y = py(std::log10(s.y[i]));
      points += std::to_string(x) + "," + std::to_string(y) + " ";
      out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    if (!points.empty()) {
      out << "<polyline points=\"" << points << "\" fill=\"none\" stroke=\"" << color << "\"/>\n";
    }
    const double ly = kTop + 14 + 18 * static_cast<double>(k);
    out << "<line x1=\"" << kLeft + pw + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + pw + 30 << "\" y2=\""
        << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << kLeft + pw + 36 << "\" y=\"" << ly << "\">" << xml_escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
}

std::string Assertion::line() const {
  std::string out = pass ? "PASS " : "FAIL ";
  if (criterion > 0) out += "[criterion " + std::to_string(criterion) + "] ";
  out += scope;
  if (!detail.empty()) out += ": " + detail;
  return out;
}

bool ExperimentResult::passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string prefix = experiment_name(result.config.id);
  auto open = [&](const std::string& file) {
    std::ofstream out(dir / file);
    if (!out) throw Error("cannot write " + (dir / file).string());
    return out;
  };
  for (const auto& t : result.tables) {
    auto out = open(prefix + "_" + t.name + ".csv");
    t.write_csv(out);
  }
  for (const auto& p : result.plots) {
    auto out = open(prefix + "_" + p.name + ".svg");
    p.write_svg(out);
  }
  auto summary = open(prefix + "_summary.txt");
  summary << "# experiment " << prefix << ", seed " << result.config.seed << " (std::mt19937_64)\n";
  for (const auto& note : result.notes) summary << "NOTE " << note << '\n';
  for (const auto& a : result.assertions) summary << a.line() << '\n';
  auto cfg = open(prefix + "_config.json");
  cfg << config_to_json(result.config).dump(2) << '\n';
}

ConstantFit fit_constant(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DomainError("fit_constant: column lengths differ");
  ConstantFit fit;
  fit.c_hat = 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) {
      ++fit.skipped;
      continue;
    }
    fit.c_hat = std::max(fit.c_hat, y[i] / x[i]);
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, syy += ly * ly;
    ++fit.used;
  }
  if (fit.used < 3) {
    throw DomainError("fit_constant: need at least 3 usable rows, got " + std::to_string(fit.used) + " (" +
                      std::to_string(fit.skipped) + " skipped)");
  }
  const double m = fit.used;
  const double vxx = sxx - sx * sx / m, vxy = sxy - sx * sy / m, vyy = syy - sy * sy / m;
  fit.slope = vxy / vxx;
  fit.r2 = vyy > 0 ? vxy * vxy / (vxx * vyy) : 1.0;
  return fit;
}

}  // namespace wulff
