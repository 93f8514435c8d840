#pragma once

// Artifact writers: record CSVs, JSON summaries, SVG heatmaps and log-log plots.

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgnls/config.hpp"
#include "kgnls/experiments.hpp"

#ifndef KGNLS_VERSION
#define KGNLS_VERSION "0.0.0"
#endif

namespace kgnls::report {

inline constexpr const char* kRecordHeader = "epsilon,sup_err_v,sup_err_w,res_v,res_w,wall_ms,trunc_monitor";

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_record_row(std::ostream& out, const ExperimentRecord& r) {
  out << num(r.epsilon) << ',' << num(r.sup_err_v) << ',' << num(r.sup_err_w) << ',' << num(r.res_v) << ','
      << num(r.res_w) << ',' << num(r.wall_ms) << ',' << num(r.trunc_monitor) << '\n';
}

/// Header, one row per record, and a `# truncated=true` trailer for partial runs.
inline void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records, bool truncated) {
  out << kRecordHeader << '\n';
  for (const auto& r : records) write_record_row(out, r);
  if (truncated) out << "# truncated=true\n";
}

using Json = nlohmann::ordered_json;

inline Json to_json(const SlopeFit& f) {
  return Json{{"exponent", f.exponent}, {"constant", f.constant}, {"r2", f.r2}, {"points", f.points}};
}

/// NaN is not representable in JSON; unmeasured fields become null.
inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const ExperimentRecord& r) {
  return Json{{"epsilon", r.epsilon},
              {"sup_err_v", finite_or_null(r.sup_err_v)},
              {"sup_err_w", finite_or_null(r.sup_err_w)},
              {"res_v", finite_or_null(r.res_v)},
              {"res_w", finite_or_null(r.res_w)},
              {"wall_ms", r.wall_ms},
              {"trunc_monitor", r.trunc_monitor}};
}

inline Json versions() {
  return Json{{"kgnls", KGNLS_VERSION}, {"fftw", std::string(fftw_version)}, {"tomlplusplus", std::to_string(TOML_LIB_MAJOR) + "." + std::to_string(TOML_LIB_MINOR) + "." + std::to_string(TOML_LIB_PATCH)}, {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

/// Common envelope of every summary: subcommand, resolved config, its hash
/// and versions. Callers add results.
inline Json summary_base(const std::string& subcommand, const config::Loaded& cfg) {
  const std::string echo = config::echo(cfg);
  Json j;
  j["subcommand"] = subcommand;
  j["config_source"] = cfg.source;
  j["config_overrides"] = cfg.overrides;
  j["config"] = echo;
  j["config_hash"] = config::fnv1a_hex(echo);
  j["versions"] = versions();
  return j;
}

inline Json records_json(const std::vector<ExperimentRecord>& records) {
  Json a = Json::array();
  for (const auto& r : records) a.push_back(to_json(r));
  return a;
}

// ---------------------------------------------------------------- SVG

struct Rgb {
  double r, g, b;
};

/// Piecewise-linear viridis approximation on [0, 1].
inline Rgb colormap(double t) {
  static constexpr std::array<Rgb, 6> stops{{{68, 1, 84}, {65, 68, 135}, {42, 120, 142},
                                             {34, 168, 132}, {122, 209, 81}, {253, 231, 37}}};
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0) * (stops.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - static_cast<double>(i);
  return {stops[i].r + f * (stops[i + 1].r - stops[i].r), stops[i].g + f * (stops[i + 1].g - stops[i].g),
          stops[i].b + f * (stops[i + 1].b - stops[i].b)};
}

inline std::string hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(c.r)), static_cast<int>(std::lround(c.g)),
                static_cast<int>(std::lround(c.b)));
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline void svg_open(std::ostream& out, int w, int h, const std::string& config_hash) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
      << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<metadata>kgnls " << KGNLS_VERSION << " config_hash=" << config_hash << "</metadata>\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

inline void write_heatmap_svg(std::ostream& out, const Heatmap& h, const std::string& config_hash) {
  const int left = 60, top = 30, pw = 480, ph = 360, bar = 16;
  svg_open(out, left + pw + 90, top + ph + 50, config_hash);
  double lo = 0.0, hi = 0.0;
  if (!h.values.empty()) {
    lo = *std::min_element(h.values.begin(), h.values.end());
    hi = *std::max_element(h.values.begin(), h.values.end());
  }
  const double span = hi > lo ? hi - lo : 1.0;
  out << "<text x=\"" << left << "\" y=\"18\">" << escape(h.title) << "</text>\n";
  const double cw = static_cast<double>(pw) / static_cast<double>(std::max<std::size_t>(h.nx, 1));
  const double ch = static_cast<double>(ph) / static_cast<double>(std::max<std::size_t>(h.ny, 1));
  out << "<g shape-rendering=\"crispEdges\">\n";
  for (std::size_t j = 0; j < h.ny; ++j) {
    for (std::size_t i = 0; i < h.nx; ++i) {
      const double v = h.values[j * h.nx + i];
      char buf[160];
      std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n",
                    left + cw * static_cast<double>(i), top + ph - ch * static_cast<double>(j + 1), cw + 0.05, ch + 0.05,
                    hex(colormap((v - lo) / span)).c_str());
      out << buf;
    }
  }
  out << "</g>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << left << "\" y=\"" << top + ph + 16 << "\">" << num(h.x0) << "</text>\n";
  out << "<text x=\"" << left + pw << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"end\">" << num(h.x1) << "</text>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << top + ph + 34 << "\" text-anchor=\"middle\">"
      << escape(h.x_label) << "</text>\n";
  out << "<text x=\"" << left - 6 << "\" y=\"" << top + ph << "\" text-anchor=\"end\">" << num(h.y0) << "</text>\n";
  out << "<text x=\"" << left - 6 << "\" y=\"" << top + 10 << "\" text-anchor=\"end\">" << num(h.y1) << "</text>\n";
  out << "<text x=\"" << 14 << "\" y=\"" << top + ph / 2 << "\">" << escape(h.y_label) << "</text>\n";
  const int bx = left + pw + 16;
  for (int k = 0; k < 64; ++k) {
    out << "<rect x=\"" << bx << "\" y=\"" << top + ph - (k + 1) * ph / 64.0 << "\" width=\"" << bar
        << "\" height=\"" << ph / 64.0 + 0.5 << "\" fill=\"" << hex(colormap((k + 0.5) / 64.0)) << "\"/>\n";
  }
  char lbl[32];
  std::snprintf(lbl, sizeof lbl, "%.3g", hi);
  out << "<text x=\"" << bx + bar + 4 << "\" y=\"" << top + 10 << "\">" << lbl << "</text>\n";
  std::snprintf(lbl, sizeof lbl, "%.3g", lo);
  out << "<text x=\"" << bx + bar + 4 << "\" y=\"" << top + ph << "\">" << lbl << "</text>\n";
  out << "</svg>\n";
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
  std::string color;
  const SlopeFit* fit = nullptr;
};

/// Log-log scatter of each series with its fitted power law as a dashed line.
inline void write_loglog_svg(std::ostream& out, const std::string& title, const std::vector<Series>& series,
                             const std::string& config_hash) {
  const int left = 70, top = 30, pw = 480, ph = 360;
  svg_open(out, left + pw + 200, top + ph + 50, config_hash);
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!(x > 0.0) || !(y > 0.0)) continue;
      xmin = std::min(xmin, std::log10(x));
      xmax = std::max(xmax, std::log10(x));
      ymin = std::min(ymin, std::log10(y));
      ymax = std::max(ymax, std::log10(y));
    }
  }
  if (xmin > xmax) xmin = -1, xmax = 0, ymin = -1, ymax = 0;
  xmin = std::floor(xmin * 10) / 10 - 0.05;
  xmax = std::ceil(xmax * 10) / 10 + 0.05;
  ymin = std::floor(ymin) - 0.0;
  ymax = std::ceil(ymax) + 0.0;
  if (ymax - ymin < 1) ymax = ymin + 1;
  auto px = [&](double lx) { return left + (lx - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double ly) { return top + ph - (ly - ymin) / (ymax - ymin) * ph; };
  out << "<text x=\"" << left << "\" y=\"18\">" << escape(title) << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(ymin); d <= static_cast<int>(ymax); ++d) {
    out << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << py(d) << "\" y2=\"" << py(d)
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(d) + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if (!(x > 0.0) || !(y > 0.0)) continue;
      out << "<circle cx=\"" << px(std::log10(x)) << "\" cy=\"" << py(std::log10(y)) << "\" r=\"4\" fill=\"" << s.color
          << "\"/>\n";
      if (&s == &series.front()) {
        char lbl[32];
        std::snprintf(lbl, sizeof lbl, "%g", x);
        out << "<text x=\"" << px(std::log10(x)) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">" << lbl
            << "</text>\n";
      }
    }
    if (s.fit && s.fit->points > 0) {
      auto fy = [&](double lx) { return std::log10(s.fit->constant) + s.fit->exponent * lx; };
      out << "<line x1=\"" << px(xmin) << "\" y1=\"" << py(fy(xmin)) << "\" x2=\"" << px(xmax) << "\" y2=\""
          << py(fy(xmax)) << "\" stroke=\"" << s.color << "\" stroke-dasharray=\"5,4\"/>\n";
    }
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << top + ph + 34 << "\" text-anchor=\"middle\">epsilon</text>\n";
  int row = 0;
  for (const auto& s : series) {
    std::string label = s.label;
    if (s.fit && s.fit->points > 0) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "  slope %.3f, r2 %.4f", s.fit->exponent, s.fit->r2);
      label += buf;
    }
    const int y = top + 14 + 18 * row++;
    out << "<rect x=\"" << left + pw + 12 << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\"" << s.color
        << "\"/>\n";
    out << "<text x=\"" << left + pw + 28 << "\" y=\"" << y << "\">" << escape(label) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace kgnls::report
