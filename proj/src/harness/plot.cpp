// Copyright 2026 The kronprec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kronprec/errors.hpp"
#include "kronprec/harness.hpp"

namespace kronprec::harness {
namespace {

constexpr double kWidth = 860.0;
constexpr double kHeight = 520.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 210.0;  // legend column
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#e377c2"};

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_number(const std::string& s, const char* what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError(std::string("plot: bad ") + what + " value '" + s + "'");
  return value;
}

// Shortest round-trip formatting, deterministic and locale-free.
std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("plot: float formatting failed");
  return std::string(buf, ptr);
}

struct Series {
  std::vector<std::pair<double, double>> points;
};

}  // namespace

std::string render_plot(const std::string& csv_text, const PlotSpec& spec) {
  std::stringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("plot: empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader)
    throw ConfigError("plot: CSV header does not match the probe schema");

  int x_index;
  if (spec.x_column == "step") x_index = 0;
  else if (spec.x_column == "batch_size") x_index = 5;
  else throw ConfigError("plot: x column must be 'step' or 'batch_size'");

  std::map<std::string, Series> series;  // key "target/estimator"
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f = split_line(line);
    if (f.size() != 8)
      throw ConfigError("plot: expected 8 fields per row, got " +
                        std::to_string(f.size()));
    const std::string& xs = f[static_cast<std::size_t>(x_index)];
    if (xs.empty())
      throw ConfigError("plot: selected x column is empty in a row");
    double x = parse_number(xs, spec.x_column.c_str());
    double y = parse_number(f[3], "cosine");
    series[f[1] + "/" + f[2]].points.emplace_back(x, y);
  }
  if (series.empty()) throw ConfigError("plot: no data rows");

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (auto& [name, s] : series) {
    std::stable_sort(s.points.begin(), s.points.end(),
                     [](auto& a, auto& b) { return a.first < b.first; });
    for (auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  // A little headroom keeps markers inside the frame.
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto sx = [&](double x) {
    return kMarginLeft + (x - xmin) / (xmax - xmin) * plot_w;
  };
  auto sy = [&](double y) {
    return kMarginTop + (ymax - y) / (ymax - ymin) * plot_h;
  };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         fmt(kWidth) + "\" height=\"" + fmt(kHeight) + "\" viewBox=\"0 0 " +
         fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
  svg += "<rect width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
         "\" fill=\"white\"/>\n";
  if (!spec.title.empty())
    svg += "<text x=\"" + fmt(kMarginLeft) + "\" y=\"24\" font-family=\"sans-serif\""
           " font-size=\"15\">" + spec.title + "</text>\n";

  // Axes.
  svg += "<line x1=\"" + fmt(kMarginLeft) + "\" y1=\"" + fmt(kMarginTop) +
         "\" x2=\"" + fmt(kMarginLeft) + "\" y2=\"" +
         fmt(kHeight - kMarginBottom) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt(kMarginLeft) + "\" y1=\"" +
         fmt(kHeight - kMarginBottom) + "\" x2=\"" + fmt(kWidth - kMarginRight) +
         "\" y2=\"" + fmt(kHeight - kMarginBottom) + "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    double fx = xmin + (xmax - xmin) * tick / 4.0;
    double fy = ymin + (ymax - ymin) * tick / 4.0;
    svg += "<text x=\"" + fmt(sx(fx)) + "\" y=\"" +
           fmt(kHeight - kMarginBottom + 18.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" +
           fmt(fx) + "</text>\n";
    svg += "<text x=\"" + fmt(kMarginLeft - 8.0) + "\" y=\"" + fmt(sy(fy) + 4.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" +
           fmt(fy) + "</text>\n";
  }
  svg += "<text x=\"" + fmt(kMarginLeft + plot_w / 2.0) + "\" y=\"" +
         fmt(kHeight - 12.0) +
         "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
         spec.x_column + "</text>\n";
  svg += "<text x=\"18\" y=\"" + fmt(kMarginTop + plot_h / 2.0) +
         "\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 18 " +
         fmt(kMarginTop + plot_h / 2.0) + ")\" text-anchor=\"middle\">cosine</text>\n";

  int color = 0;
  double legend_y = kMarginTop + 10.0;
  for (const auto& [name, s] : series) {
    const char* stroke = kPalette[color % 8];
    std::string pts;
    for (const auto& [x, y] : s.points) {
      if (!pts.empty()) pts += " ";
      pts += fmt(sx(x)) + "," + fmt(sy(y));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    for (const auto& [x, y] : s.points)
      svg += "<circle cx=\"" + fmt(sx(x)) + "\" cy=\"" + fmt(sy(y)) +
             "\" r=\"2.5\" fill=\"" + std::string(stroke) + "\"/>\n";
    double lx = kWidth - kMarginRight + 16.0;
    svg += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(legend_y - 4.0) +
           "\" x2=\"" + fmt(lx + 18.0) + "\" y2=\"" + fmt(legend_y - 4.0) +
           "\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(lx + 24.0) + "\" y=\"" + fmt(legend_y) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + name +
           "</text>\n";
    legend_y += 18.0;
    ++color;
  }
  svg += "</svg>\n";
  return svg;
}

void plot_csv(const std::filesystem::path& csv_path,
              const std::filesystem::path& svg_path, const PlotSpec& spec) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw ConfigError("plot: cannot open " + csv_path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  write_file_atomic(svg_path, render_plot(text, spec));
}

}  // namespace kronprec::harness
