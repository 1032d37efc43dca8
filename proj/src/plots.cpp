#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "lpvplan/errors.hpp"
#include "lpvplan/harness.hpp"

namespace lpvplan {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Axis labels only need a few digits.
std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // Non-empty and non-degenerate.
  Range padded(double frac) const {
    Range r = *this;
    if (!(r.lo <= r.hi)) r = {-1.0, 1.0};
    const double span = r.hi - r.lo;
    const double pad = span > 0.0 ? span * frac : std::max(1.0, std::abs(r.lo)) * 0.5;
    return {r.lo - pad, r.hi + pad};
  }
};

// Plot area with data-to-pixel mapping; y grows upwards in data space.
class Canvas {
 public:
  Canvas(double width, double height, Range x, Range y, bool equalAspect = false)
      : w_(width), h_(height), x_(x), y_(y) {
    if (equalAspect) {
      const double sx = (w_ - 2 * kMargin) / (x_.hi - x_.lo);
      const double sy = (h_ - 2 * kMargin) / (y_.hi - y_.lo);
      const double sc = std::min(sx, sy);
      const double cx = 0.5 * (x_.lo + x_.hi);
      const double cy = 0.5 * (y_.lo + y_.hi);
      const double hx = 0.5 * (w_ - 2 * kMargin) / sc;
      const double hy = 0.5 * (h_ - 2 * kMargin) / sc;
      x_ = {cx - hx, cx + hx};
      y_ = {cy - hy, cy + hy};
    }
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w_) << "\" height=\"" << fmt(h_)
         << "\" viewBox=\"0 0 " << fmt(w_) << ' ' << fmt(h_) << "\">\n";
    out_ << "<rect x=\"0\" y=\"0\" width=\"" << fmt(w_) << "\" height=\"" << fmt(h_) << "\" fill=\"white\"/>\n";
    out_ << "<rect x=\"" << fmt(kMargin) << "\" y=\"" << fmt(kMargin) << "\" width=\"" << fmt(w_ - 2 * kMargin)
         << "\" height=\"" << fmt(h_ - 2 * kMargin) << "\" fill=\"none\" stroke=\"#888\"/>\n";
  }

  double px(double x) const { return kMargin + (x - x_.lo) / (x_.hi - x_.lo) * (w_ - 2 * kMargin); }
  double py(double y) const { return h_ - kMargin - (y - y_.lo) / (y_.hi - y_.lo) * (h_ - 2 * kMargin); }

  void polyline(const std::vector<Vec2>& pts, const std::string& style, bool closed = false) {
    if (pts.empty()) return;
    out_ << '<' << (closed ? "polygon" : "polyline") << " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) out_ << ' ';
      out_ << fmt(px(pts[i].x())) << ',' << fmt(py(pts[i].y()));
    }
    out_ << "\" " << style << "/>\n";
  }

  void marker(const Vec2& p, const std::string& color) {
    out_ << "<circle cx=\"" << fmt(px(p.x())) << "\" cy=\"" << fmt(py(p.y())) << "\" r=\"3\" fill=\"" << color
         << "\"/>\n";
  }

  void text(double x, double y, const std::string& s, const std::string& anchor = "start") {
    out_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-family=\"sans-serif\" font-size=\"12\" "
         << "text-anchor=\"" << anchor << "\">" << s << "</text>\n";
  }

  void axes(const std::string& title, const std::string& xLabel, const std::string& yLabel) {
    text(w_ / 2, kMargin * 0.6, title, "middle");
    text(w_ / 2, h_ - kMargin * 0.25, xLabel, "middle");
    text(6, kMargin - 6, yLabel);
    text(kMargin, h_ - kMargin + 14, label(x_.lo), "middle");
    text(w_ - kMargin, h_ - kMargin + 14, label(x_.hi), "middle");
    text(kMargin - 4, h_ - kMargin, label(y_.lo), "end");
    text(kMargin - 4, kMargin + 4, label(y_.hi), "end");
  }

  void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
    double y = kMargin + 16;
    for (const auto& [label, color] : entries) {
      out_ << "<line x1=\"" << fmt(kMargin + 10) << "\" y1=\"" << fmt(y - 4) << "\" x2=\"" << fmt(kMargin + 30)
           << "\" y2=\"" << fmt(y - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      text(kMargin + 36, y, label);
      y += 16;
    }
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  static constexpr double kMargin = 50.0;
  double w_, h_;
  Range x_, y_;
  std::ostringstream out_;
};

void writeFile(const std::filesystem::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write " + file.string());
  out << content;
  out.close();
  if (!out) throw IoError("failed writing " + file.string());
}

std::string trajectorySvg(const RunResult& r) {
  Range x, y;
  auto add = [&](const Vec2& p) {
    x.add(p.x());
    y.add(p.y());
  };
  for (const auto& v : r.reference) add(v);
  for (const auto& p : r.plant) add({p.state.x, p.state.y});
  for (const auto& v : r.goalRegion) add(v);
  for (const auto& poly : r.world.obstacles()) {
    for (const auto& v : poly) add(v);
  }
  for (const auto& line : r.legalLines) {
    for (const auto& v : line) add(v);
  }
  Canvas c(900, 600, x.padded(0.05), y.padded(0.05), true);
  for (const auto& poly : r.world.obstacles()) c.polyline(poly, "fill=\"#bbb\" stroke=\"#444\"", true);
  for (const auto& line : r.legalLines) {
    c.polyline(line, "fill=\"none\" stroke=\"#e08000\" stroke-dasharray=\"6,4\" stroke-width=\"1.5\"");
  }
  if (!r.goalRegion.empty()) {
    c.polyline(r.goalRegion, "fill=\"none\" stroke=\"#800080\" stroke-dasharray=\"3,3\"", true);
  }
  c.polyline(r.reference, "fill=\"none\" stroke=\"#1f4fd0\" stroke-width=\"1.5\"");
  for (const auto& v : r.reference) c.marker(v, "#1f4fd0");

  std::vector<Vec2> driven;
  for (const auto& p : r.plant) driven.emplace_back(p.state.x, p.state.y);
  c.polyline(driven, "fill=\"none\" stroke=\"#20a020\" stroke-width=\"2\"");
  // About 15 vehicle outlines along the run, plus the final one.
  const std::size_t every = std::max<std::size_t>(1, r.plant.size() / 15);
  for (std::size_t i = 0; i < r.plant.size(); i += every) {
    c.polyline(vehicleContour(r.plant[i].state.pose(), r.vehicle), "fill=\"none\" stroke=\"black\"", true);
  }
  if (!r.plant.empty()) {
    c.polyline(vehicleContour(r.plant.back().state.pose(), r.vehicle), "fill=\"none\" stroke=\"black\"", true);
  }
  c.axes("trajectory: " + r.scenario, "x [m]", "y [m]");
  c.legend({{"reference", "#1f4fd0"}, {"driven", "#20a020"}, {"vehicle", "black"}});
  return c.finish();
}

std::string steeringSvg(const RunResult& r) {
  Range t, d;
  std::vector<Vec2> front, rear;
  for (const auto& c : r.cycles) {
    t.add(c.t);
    d.add(c.command.deltaF);
    d.add(c.command.deltaR);
    front.emplace_back(c.t, c.command.deltaF);
    rear.emplace_back(c.t, c.command.deltaR);
  }
  d.add(0.0);
  Canvas c(900, 400, t.padded(0.02), d.padded(0.1));
  c.polyline(front, "fill=\"none\" stroke=\"#d02020\" stroke-width=\"1.5\"");
  c.polyline(rear, "fill=\"none\" stroke=\"#1f4fd0\" stroke-width=\"1.5\"");
  if (front.size() == 1) {
    c.marker(front[0], "#d02020");
    c.marker(rear[0], "#1f4fd0");
  }
  c.axes("steering angles", "t [s]", "delta [rad]");
  c.legend({{"front", "#d02020"}, {"rear", "#1f4fd0"}});
  return c.finish();
}

std::string corridorSvg(const RunResult& r) {
  Range s, e;
  std::vector<Vec2> dev, lo, hi;
  for (const auto& c : r.cycles) {
    s.add(c.s);
    e.add(c.e);
    e.add(c.eMin);
    e.add(c.eMax);
    dev.emplace_back(c.s, c.e);
    if (std::isfinite(c.eMin)) lo.emplace_back(c.s, c.eMin);
    if (std::isfinite(c.eMax)) hi.emplace_back(c.s, c.eMax);
  }
  Canvas c(900, 400, s.padded(0.02), e.padded(0.1));
  c.polyline(lo, "fill=\"none\" stroke=\"#444\" stroke-dasharray=\"5,3\"");
  c.polyline(hi, "fill=\"none\" stroke=\"#444\" stroke-dasharray=\"5,3\"");
  c.polyline(dev, "fill=\"none\" stroke=\"#20a020\" stroke-width=\"1.5\"");
  if (dev.size() == 1) c.marker(dev[0], "#20a020");
  c.axes("lateral deviation and corridor", "s [m]", "e [m]");
  c.legend({{"e", "#20a020"}, {"bounds", "#444"}});
  return c.finish();
}

}  // namespace

std::vector<std::filesystem::path> emitPlots(const RunResult& r, const std::filesystem::path& outDir,
                                             bool includeTiming) {
  std::error_code ec;
  std::filesystem::create_directories(outDir, ec);
  if (ec || !std::filesystem::is_directory(outDir)) {
    throw IoError("cannot create output directory " + outDir.string());
  }
  std::vector<std::filesystem::path> files;
  auto emit = [&](const char* name, const std::string& content) {
    files.push_back(outDir / name);
    writeFile(files.back(), content);
  };
  emit("trajectory.svg", trajectorySvg(r));
  emit("steering.svg", steeringSvg(r));
  emit("corridor.svg", corridorSvg(r));
  std::ostringstream cycles;
  writeCycleCsv(cycles, r, includeTiming);
  emit("cycles.csv", cycles.str());
  std::ostringstream plant;
  writePlantCsv(plant, r);
  emit("plant.csv", plant.str());
  return files;
}

}  // namespace lpvplan
