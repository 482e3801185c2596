#include "rewardrig/experiment_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace rewardrig {

std::string fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string s = buf;
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string experiment_csv(const std::vector<ExperimentSeries>& series) {
  std::string out;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& st = series[k].stats;
    if (k > 0) out += '\n';
    out += "# agent=" + std::string(grid::to_string(series[k].agent)) + " runs=" + std::to_string(st.runs) + '\n';
    out += "episode,nominal_mean,nominal_std,true_mean,true_std\n";
    for (std::size_t e = 0; e < st.nominal_mean.size(); ++e) {
      out += std::to_string(e + 1) + ',' + fixed6(st.nominal_mean[e]) + ',' + fixed6(st.nominal_std[e]) + ',' +
             fixed6(st.truth_mean[e]) + ',' + fixed6(st.truth_std[e]) + '\n';
    }
  }
  return out;
}

namespace {

constexpr double kWidth = 800, kHeight = 480;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 50;

struct Frame {
  double x_max = 1, y_min = 0, y_max = 1;
  double px(double x) const { return kLeft + (x / x_max) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kTop + (y_max - y) / (y_max - y_min) * (kHeight - kTop - kBottom); }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

std::vector<std::size_t> sample_points(std::size_t n) {
  std::vector<std::size_t> idx;
  std::size_t stride = std::max<std::size_t>(1, n / 600);
  for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
  if (!idx.empty() && idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

std::string polyline(const Frame& f, const std::vector<double>& ys, const std::vector<std::size_t>& idx) {
  std::string pts;
  for (auto i : idx) pts += num(f.px(double(i + 1))) + ',' + num(f.py(ys[i])) + ' ';
  return pts;
}

std::string band(const Frame& f, const std::vector<double>& mean, const std::vector<double>& sd,
                 const std::vector<std::size_t>& idx) {
  std::string d;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    auto i = idx[k];
    d += (k == 0 ? "M" : "L") + num(f.px(double(i + 1))) + ',' + num(f.py(mean[i] + sd[i])) + ' ';
  }
  for (std::size_t k = idx.size(); k-- > 0;) {
    auto i = idx[k];
    d += 'L' + num(f.px(double(i + 1))) + ',' + num(f.py(mean[i] - sd[i])) + ' ';
  }
  return d + 'Z';
}

}  // namespace

std::string experiment_svg(const std::vector<ExperimentSeries>& series, std::string_view title) {
  Frame f;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : series) {
    const auto& st = s.stats;
    f.x_max = std::max(f.x_max, double(st.nominal_mean.size()));
    for (std::size_t i = 0; i < st.nominal_mean.size(); ++i) {
      lo = std::min({lo, st.nominal_mean[i] - st.nominal_std[i], st.truth_mean[i] - st.truth_std[i]});
      hi = std::max({hi, st.nominal_mean[i] + st.nominal_std[i], st.truth_mean[i] + st.truth_std[i]});
    }
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (hi - lo < 1e-9) lo -= 0.5, hi += 0.5;
  double pad = 0.05 * (hi - lo);
  f.y_min = lo - pad;
  f.y_max = hi + pad;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                    num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kLeft) + "\" y=\"24\" font-size=\"15\">" + escape(title) + "</text>\n";
  double x0 = f.px(0), x1 = f.px(f.x_max), y0 = f.py(f.y_min), y1 = f.py(f.y_max);
  svg += "<rect x=\"" + num(x0) + "\" y=\"" + num(y1) + "\" width=\"" + num(x1 - x0) + "\" height=\"" + num(y0 - y1) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    double xv = f.x_max * t / 5, yv = f.y_min + (f.y_max - f.y_min) * t / 5;
    svg += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(y0 + 18) + "\" text-anchor=\"middle\">" +
           std::to_string(static_cast<long long>(std::llround(xv))) + "</text>\n";
    svg += "<line x1=\"" + num(x0) + "\" x2=\"" + num(x1) + "\" y1=\"" + num(f.py(yv)) + "\" y2=\"" + num(f.py(yv)) +
           "\" stroke=\"#ddd\"/>\n";
    svg += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(f.py(yv) + 4) + "\" text-anchor=\"end\">" + num(yv) +
           "</text>\n";
  }
  svg += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 10) + "\" text-anchor=\"middle\">episode</text>\n";

  double legend_y = kTop + 10;
  for (const auto& s : series) {
    const auto& st = s.stats;
    std::string colour = s.agent == grid::AgentKind::standard ? "#1f5fbf" : "#c8282d";
    auto idx = sample_points(st.nominal_mean.size());
    if (idx.empty()) continue;
    svg += "<path d=\"" + band(f, st.nominal_mean, st.nominal_std, idx) + "\" fill=\"" + colour +
           "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    svg += "<path d=\"" + band(f, st.truth_mean, st.truth_std, idx) + "\" fill=\"" + colour +
           "\" fill-opacity=\"0.08\" stroke=\"none\"/>\n";
    svg += "<polyline points=\"" + polyline(f, st.nominal_mean, idx) + "\" fill=\"none\" stroke=\"" + colour +
           "\" stroke-width=\"1.5\"/>\n";
    svg += "<polyline points=\"" + polyline(f, st.truth_mean, idx) + "\" fill=\"none\" stroke=\"" + colour +
           "\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
    std::string name(grid::to_string(s.agent));
    double lx = x1 + 12;
    svg += "<line x1=\"" + num(lx) + "\" x2=\"" + num(lx + 24) + "\" y1=\"" + num(legend_y) + "\" y2=\"" +
           num(legend_y) + "\" stroke=\"" + colour + "\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + num(lx + 30) + "\" y=\"" + num(legend_y + 4) + "\">" + name + " nominal</text>\n";
    legend_y += 18;
    svg += "<line x1=\"" + num(lx) + "\" x2=\"" + num(lx + 24) + "\" y1=\"" + num(legend_y) + "\" y2=\"" +
           num(legend_y) + "\" stroke=\"" + colour + "\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
    svg += "<text x=\"" + num(lx + 30) + "\" y=\"" + num(legend_y + 4) + "\">" + name + " true</text>\n";
    legend_y += 24;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace rewardrig
