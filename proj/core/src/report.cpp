#include "compobs/report.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace compobs {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string fmt_seed(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%" PRIu64, v);
  return buf;
}

std::string fmt_omega(const std::vector<int>& omega) {
  std::string out;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    if (i) out += '|';
    out += std::to_string(omega[i]);
  }
  return out;
}

const char* status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIters: return "max-iters";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed: " + path);
}

std::string csv_preamble(const CsvEcho& echo) {
  std::string out = "# compobs-csv v1\n";
  for (const auto& [key, value] : echo) out += "# " + key + "=" + value + "\n";
  return out;
}

}  // namespace

void write_rate_csv(const std::string& path, const std::vector<RateRow>& rows,
                    const CsvEcho& echo) {
  std::string out = csv_preamble(echo);
  out += "measurement,omega_index,omega,m,exact_count,trials,rate\n";
  for (const RateRow& row : rows) {
    out += row.measurement;
    out += ',' + std::to_string(row.omega_index);
    out += ',' + fmt_omega(row.omega);
    out += ',' + std::to_string(row.m);
    out += ',' + std::to_string(row.exact_count);
    out += ',' + std::to_string(row.trials);
    out += ',' + fmt_double(row.rate);
    out += '\n';
  }
  write_file(path, out);
}

void write_trial_csv(const std::string& path,
                     const std::vector<TrialRecord>& records, const CsvEcho& echo) {
  std::string out = csv_preamble(echo);
  out += "trial,seed,measurement,omega,m,noise_std,l2_error,rel_error,exact,status\n";
  for (const TrialRecord& r : records) {
    out += std::to_string(r.trial_index);
    out += ',' + fmt_seed(r.seed);
    out += ',' + r.measurement;
    out += ',' + fmt_omega(r.omega);
    out += ',' + std::to_string(r.m);
    out += ',' + fmt_double(r.noise_std);
    out += ',' + fmt_double(r.l2_error);
    out += ',' + fmt_double(r.rel_error);
    out += ',' + std::string(r.exact ? "1" : "0");
    out += ',' + std::string(status_name(r.solver_status));
    out += '\n';
  }
  write_file(path, out);
}

void write_com_csv(const std::string& path, const std::vector<ComSuiteRow>& rows,
                   const CsvEcho& echo) {
  std::string out = csv_preamble(echo);
  out += "regime,m,k,eps,a,bound,empirical,trials\n";
  for (const ComSuiteRow& row : rows) {
    out += row.regime;
    out += ',' + std::to_string(row.m);
    out += ',' + std::to_string(row.k);
    out += ',' + fmt_double(row.eps);
    out += ',' + fmt_double(row.a);
    out += ',' + fmt_double(row.report.bound);
    out += ',' + fmt_double(row.report.empirical_failure);
    out += ',' + std::to_string(row.report.trials);
    out += '\n';
  }
  write_file(path, out);
}

void write_sim_csv(const std::string& path, const std::vector<SimulationRow>& rows,
                   const CsvEcho& echo) {
  std::string out = csv_preamble(echo);
  out += "time,node,value\n";
  for (const SimulationRow& row : rows) {
    out += std::to_string(row.time);
    out += ',' + std::to_string(row.node);
    out += ',' + fmt_double(row.value);
    out += '\n';
  }
  write_file(path, out);
}

namespace {

// Fixed palette; cycles when a chart has more series than entries.
const char* const kPalette[] = {"#1f6f8b", "#d1495b", "#3a7d44", "#8d5a97",
                                "#c96e12", "#385777", "#7d7461", "#262626"};

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double width = 640, height = 420;
  double left = 70, right = 20, top = 40, bottom = 50;
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;

  double px(double x) const {
    const double span = x_max > x_min ? x_max - x_min : 1.0;
    return left + (x - x_min) / span * (width - left - right);
  }
  double py(double y) const {
    const double span = y_max > y_min ? y_max - y_min : 1.0;
    return height - bottom - (y - y_min) / span * (height - top - bottom);
  }
};

std::string svg_header(const Frame& f, const std::string& title,
                       const std::string& x_label, const std::string& y_label) {
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         fmt_double(f.width) + "\" height=\"" + fmt_double(f.height) +
         "\" viewBox=\"0 0 " + fmt_double(f.width) + " " + fmt_double(f.height) +
         "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fmt_double(f.width / 2) +
         "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">" +
         escape_xml(title) + "</text>\n";
  // Axes.
  out += "<line x1=\"" + fmt_double(f.left) + "\" y1=\"" +
         fmt_double(f.height - f.bottom) + "\" x2=\"" +
         fmt_double(f.width - f.right) + "\" y2=\"" +
         fmt_double(f.height - f.bottom) + "\" stroke=\"#444\"/>\n";
  out += "<line x1=\"" + fmt_double(f.left) + "\" y1=\"" + fmt_double(f.top) +
         "\" x2=\"" + fmt_double(f.left) + "\" y2=\"" +
         fmt_double(f.height - f.bottom) + "\" stroke=\"#444\"/>\n";
  // Axis extents and labels.
  out += "<text x=\"" + fmt_double(f.left) + "\" y=\"" +
         fmt_double(f.height - f.bottom + 18) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" +
         fmt_double(f.x_min) + "</text>\n";
  out += "<text x=\"" + fmt_double(f.width - f.right) + "\" y=\"" +
         fmt_double(f.height - f.bottom + 18) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" +
         fmt_double(f.x_max) + "</text>\n";
  out += "<text x=\"" + fmt_double(f.left - 8) + "\" y=\"" +
         fmt_double(f.height - f.bottom + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" +
         fmt_double(f.y_min) + "</text>\n";
  out += "<text x=\"" + fmt_double(f.left - 8) + "\" y=\"" +
         fmt_double(f.top + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" +
         fmt_double(f.y_max) + "</text>\n";
  out += "<text x=\"" + fmt_double((f.left + f.width - f.right) / 2) + "\" y=\"" +
         fmt_double(f.height - 12) +
         "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
         escape_xml(x_label) + "</text>\n";
  out += "<text x=\"16\" y=\"" + fmt_double((f.top + f.height - f.bottom) / 2) +
         "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 16 " +
         fmt_double((f.top + f.height - f.bottom) / 2) + ")\">" +
         escape_xml(y_label) + "</text>\n";
  return out;
}

}  // namespace

void svg_line_chart(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<ChartSeries>& series) {
  if (series.empty()) throw ParameterError("a chart needs at least one series");

  Frame frame;
  bool first = true;
  for (const ChartSeries& s : series) {
    for (const auto& [x, y] : s.points) {
      if (first) {
        frame.x_min = frame.x_max = x;
        frame.y_min = frame.y_max = y;
        first = false;
      }
      frame.x_min = std::min(frame.x_min, x);
      frame.x_max = std::max(frame.x_max, x);
      frame.y_min = std::min(frame.y_min, y);
      frame.y_max = std::max(frame.y_max, y);
    }
  }
  if (first) throw ParameterError("a chart needs at least one point");

  std::string out = svg_header(frame, title, x_label, y_label);
  const int palette_size = static_cast<int>(sizeof(kPalette) / sizeof(kPalette[0]));
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % palette_size];
    if (!series[i].points.empty()) {
      std::string poly = "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                         "\" stroke-width=\"1.8\" points=\"";
      for (const auto& [x, y] : series[i].points)
        poly += fmt_double(frame.px(x)) + "," + fmt_double(frame.py(y)) + " ";
      poly += "\"/>\n";
      out += poly;
      for (const auto& [x, y] : series[i].points)
        out += "<circle cx=\"" + fmt_double(frame.px(x)) + "\" cy=\"" +
               fmt_double(frame.py(y)) + "\" r=\"2.4\" fill=\"" + color + "\"/>\n";
    }
    // Legend entry.
    const double ly = frame.top + 6 + 16 * double(i);
    out += "<rect x=\"" + fmt_double(frame.width - frame.right - 130) + "\" y=\"" +
           fmt_double(ly - 8) + "\" width=\"12\" height=\"4\" fill=\"" + color +
           "\"/>\n";
    out += "<text x=\"" + fmt_double(frame.width - frame.right - 112) + "\" y=\"" +
           fmt_double(ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" +
           escape_xml(series[i].label) + "</text>\n";
  }
  out += "</svg>\n";
  write_file(path, out);
}

void svg_histogram(const std::string& path, const std::string& title,
                   const std::string& x_label, const std::vector<double>& values,
                   int bins) {
  if (values.empty()) throw ParameterError("a histogram needs at least one value");
  if (bins < 1) throw ParameterError("a histogram needs at least one bin");

  double lo = values.front(), hi = values.front();
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi == lo) hi = lo + 1.0;

  std::vector<int> counts(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    int b = static_cast<int>((v - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  const int peak = *std::max_element(counts.begin(), counts.end());

  Frame frame;
  frame.x_min = lo;
  frame.x_max = hi;
  frame.y_min = 0;
  frame.y_max = peak;

  std::string out = svg_header(frame, title, x_label, "count");
  const double bin_width = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) {
    const double x0 = frame.px(lo + b * bin_width);
    const double x1 = frame.px(lo + (b + 1) * bin_width);
    const double y = frame.py(counts[static_cast<std::size_t>(b)]);
    const double base = frame.py(0);
    out += "<rect x=\"" + fmt_double(x0) + "\" y=\"" + fmt_double(y) +
           "\" width=\"" + fmt_double(std::max(0.5, x1 - x0 - 1.0)) +
           "\" height=\"" + fmt_double(std::max(0.0, base - y)) +
           "\" fill=\"#1f6f8b\"/>\n";
  }
  out += "</svg>\n";
  write_file(path, out);
}

}  // namespace compobs
