#include "disrc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace disrc {

namespace {

namespace fs = std::filesystem;

struct Series {
  std::string label;
  std::vector<double> rewards;  // indexed by episode order in the file
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

Series read_series(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("plot: cannot read " + path);
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("plot: empty file " + path);
  const auto header = split_csv_line(line);
  int reward_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == "raw_reward") reward_col = static_cast<int>(i);
  if (reward_col < 0)
    throw std::runtime_error("plot: no raw_reward column in " + path);

  Series s;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) <= reward_col)
      throw std::runtime_error("plot: short row in " + path);
    try {
      s.rewards.push_back(std::stod(cells[reward_col]));
    } catch (...) {
      throw std::runtime_error("plot: bad reward value in " + path);
    }
  }
  if (s.rewards.empty()) throw std::runtime_error("plot: no data rows in " + path);
  return s;
}

std::vector<double> moving_average(const std::vector<double>& xs, int window) {
  std::vector<double> out(xs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    acc += xs[i];
    if (i >= static_cast<std::size_t>(window)) acc -= xs[i - window];
    const std::size_t n = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
    out[i] = acc / static_cast<double>(n);
  }
  return out;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

void plot(const std::vector<std::string>& csv_paths, const std::string& out_svg,
          int smoothing_window) {
  if (csv_paths.empty()) throw std::invalid_argument("plot: no input files");
  if (smoothing_window < 1)
    throw std::invalid_argument("plot: smoothing_window must be >= 1");

  std::vector<Series> series;
  for (const auto& p : csv_paths) series.push_back(read_series(p));

  // legend labels: file stem, parent directory prefix when stems collide
  std::vector<std::string> stems;
  for (const auto& p : csv_paths) stems.push_back(fs::path(p).stem().string());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const bool dup =
        std::count(stems.begin(), stems.end(), stems[i]) > 1;
    if (dup) {
      const auto parent = fs::path(csv_paths[i]).parent_path().filename().string();
      series[i].label = parent.empty() ? stems[i] : parent + "/" + stems[i];
    } else {
      series[i].label = stems[i];
    }
  }

  std::size_t max_len = 0;
  double ymin = 0.0, ymax = 1.0;
  for (const auto& s : series) {
    max_len = std::max(max_len, s.rewards.size());
    for (double r : s.rewards) {
      ymin = std::min(ymin, r);
      ymax = std::max(ymax, r);
    }
  }
  if (ymax == ymin) ymax = ymin + 1.0;

  const double width = 960, height = 540;
  const double ml = 64, mr = 24, mt = 28, mb = 48;
  const double pw = width - ml - mr, ph = height - mt - mb;
  const double xmax = static_cast<double>(std::max<std::size_t>(max_len, 2));

  auto px = [&](double episode) { return ml + (episode - 1.0) / (xmax - 1.0) * pw; };
  auto py = [&](double r) { return mt + (ymax - r) / (ymax - ymin) * ph; };

  auto polyline = [&](const std::vector<double>& ys, const std::string& color,
                      double stroke_width, double opacity) {
    std::ostringstream os;
    os << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
       << stroke_width << "\" stroke-opacity=\"" << opacity << "\" points=\"";
    for (std::size_t i = 0; i < ys.size(); ++i) {
      if (i) os << ' ';
      os << fmt2(px(static_cast<double>(i + 1))) << ',' << fmt2(py(ys[i]));
    }
    os << "\"/>\n";
    return os.str();
  };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
     << "\">\n";
  os << "  <rect width=\"" << width << "\" height=\"" << height
     << "\" fill=\"white\"/>\n";

  // axes
  os << "  <line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
     << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  os << "  <line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
     << mt + ph << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double ep = 1.0 + (xmax - 1.0) * i / 5.0;
    const double x = px(ep);
    os << "  <line x1=\"" << fmt2(x) << "\" y1=\"" << mt + ph << "\" x2=\"" << fmt2(x)
       << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    os << "  <text x=\"" << fmt2(x) << "\" y=\"" << mt + ph + 20
       << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt_tick(std::round(ep))
       << "</text>\n";
    const double r = ymin + (ymax - ymin) * i / 5.0;
    const double y = py(r);
    os << "  <line x1=\"" << ml - 5 << "\" y1=\"" << fmt2(y) << "\" x2=\"" << ml
       << "\" y2=\"" << fmt2(y) << "\" stroke=\"black\"/>\n";
    os << "  <text x=\"" << ml - 9 << "\" y=\"" << fmt2(y + 4)
       << "\" font-size=\"12\" text-anchor=\"end\">" << fmt_tick(r) << "</text>\n";
  }
  os << "  <text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
     << "\" font-size=\"14\" text-anchor=\"middle\">episode</text>\n";
  os << "  <text x=\"18\" y=\"" << mt + ph / 2
     << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << mt + ph / 2 << ")\">episode reward</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % std::size(kPalette)];
    os << polyline(series[k].rewards, color, 1.0, 0.35);
    os << polyline(moving_average(series[k].rewards, smoothing_window), color, 2.2,
                   1.0);
  }

  // legend, top-right
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % std::size(kPalette)];
    const double y = mt + 16 + 18 * static_cast<double>(k);
    os << "  <line x1=\"" << ml + pw - 150 << "\" y1=\"" << y << "\" x2=\""
       << ml + pw - 122 << "\" y2=\"" << y << "\" stroke=\"" << color
       << "\" stroke-width=\"2.2\"/>\n";
    os << "  <text x=\"" << ml + pw - 116 << "\" y=\"" << y + 4
       << "\" font-size=\"12\" class=\"legend\">" << series[k].label << "</text>\n";
  }

  os << "</svg>\n";

  std::ofstream out(out_svg);
  if (!out) throw std::runtime_error("plot: cannot write " + out_svg);
  out << os.str();
}

}  // namespace disrc
