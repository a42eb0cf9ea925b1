#include "latfrac/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace latfrac {

namespace {

constexpr double kW = 640.0, kH = 440.0;
constexpr double kL = 70.0, kR = 20.0, kT = 40.0, kB = 55.0;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double nice_step(double span) {
    if (span <= 0.0) return 1.0;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag) return m * mag;
    return 10.0 * mag;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgPlot::add_line(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                       bool with_markers, const std::string& label) {
    series_.push_back({Series::Kind::line, pts, {}, color, label, with_markers, 3.0});
}

void SvgPlot::add_points(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                         double radius, const std::string& label) {
    series_.push_back({Series::Kind::markers, pts, {}, color, label, true, radius});
}

void SvgPlot::add_errorbars(const std::vector<std::pair<double, double>>& pts,
                            const std::vector<double>& half_heights, const std::string& color) {
    series_.push_back({Series::Kind::errorbars, pts, half_heights, color, "", false, 3.0});
}

std::string SvgPlot::render() const {
    double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
    bool first = true;
    for (const auto& s : series_) {
        for (std::size_t i = 0; i < s.pts.size(); ++i) {
            const double err = s.kind == Series::Kind::errorbars && i < s.errs.size() ? s.errs[i] : 0.0;
            const auto& [x, y] = s.pts[i];
            if (first) { x_lo = x_hi = x; y_lo = y - err; y_hi = y + err; first = false; }
            x_lo = std::min(x_lo, x); x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y - err); y_hi = std::max(y_hi, y + err);
        }
    }
    if (x_hi <= x_lo) x_hi = x_lo + 1.0;
    if (y_hi <= y_lo) y_hi = y_lo + 1.0;
    const double x_pad = 0.06 * (x_hi - x_lo), y_pad = 0.08 * (y_hi - y_lo);
    x_lo -= x_pad; x_hi += x_pad; y_lo -= y_pad; y_hi += y_pad;

    auto px = [&](double x) { return kL + (x - x_lo) / (x_hi - x_lo) * (kW - kL - kR); };
    auto py = [&](double y) { return kH - kB - (y - y_lo) / (y_hi - y_lo) * (kH - kT - kB); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">" << title_ << "</text>\n";

    // axes
    o << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << kW - kL - kR << "\" height=\""
      << kH - kT - kB << "\" fill=\"none\" stroke=\"black\"/>\n";
    const double xs = nice_step(x_hi - x_lo), ys = nice_step(y_hi - y_lo);
    for (double x = std::ceil(x_lo / xs) * xs; x <= x_hi + 1e-12; x += xs) {
        o << "<line x1=\"" << px(x) << "\" y1=\"" << kH - kB << "\" x2=\"" << px(x) << "\" y2=\""
          << kH - kB + 5 << "\" stroke=\"black\"/>\n"
          << "<text x=\"" << px(x) << "\" y=\"" << kH - kB + 18 << "\" font-size=\"11\" text-anchor=\"middle\">"
          << fmt(x) << "</text>\n";
    }
    for (double y = std::ceil(y_lo / ys) * ys; y <= y_hi + 1e-12; y += ys) {
        o << "<line x1=\"" << kL - 5 << "\" y1=\"" << py(y) << "\" x2=\"" << kL << "\" y2=\"" << py(y)
          << "\" stroke=\"black\"/>\n"
          << "<text x=\"" << kL - 8 << "\" y=\"" << py(y) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
          << fmt(y) << "</text>\n";
    }
    o << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12
      << "\" font-size=\"13\" text-anchor=\"middle\">" << x_label_ << "</text>\n"
      << "<text x=\"16\" y=\"" << (kT + kH - kB) / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (kT + kH - kB) / 2 << ")\">" << y_label_ << "</text>\n";

    int legend_row = 0;
    for (const auto& s : series_) {
        if (s.kind == Series::Kind::errorbars) {
            for (std::size_t i = 0; i < s.pts.size() && i < s.errs.size(); ++i) {
                const double cx = px(s.pts[i].first);
                const double y1 = py(s.pts[i].second - s.errs[i]);
                const double y2 = py(s.pts[i].second + s.errs[i]);
                o << "<line x1=\"" << cx << "\" y1=\"" << y1 << "\" x2=\"" << cx << "\" y2=\"" << y2
                  << "\" stroke=\"" << s.color << "\"/>\n"
                  << "<line x1=\"" << cx - 4 << "\" y1=\"" << y1 << "\" x2=\"" << cx + 4 << "\" y2=\"" << y1
                  << "\" stroke=\"" << s.color << "\"/>\n"
                  << "<line x1=\"" << cx - 4 << "\" y1=\"" << y2 << "\" x2=\"" << cx + 4 << "\" y2=\"" << y2
                  << "\" stroke=\"" << s.color << "\"/>\n";
            }
            continue;
        }
        if (s.kind == Series::Kind::line && s.pts.size() >= 2) {
            o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
            for (const auto& [x, y] : s.pts) o << px(x) << "," << py(y) << " ";
            o << "\"/>\n";
        }
        if (s.with_markers) {
            for (const auto& [x, y] : s.pts)
                o << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"" << s.radius
                  << "\" fill=\"" << s.color << "\"/>\n";
        }
        if (!s.label.empty()) {
            const double lx = kL + 12, ly = kT + 16 + 16 * legend_row++;
            o << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 22 << "\" y2=\"" << ly - 4
              << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n"
              << "<text x=\"" << lx + 28 << "\" y=\"" << ly << "\" font-size=\"11\">" << s.label << "</text>\n";
        }
    }
    o << "</svg>\n";
    return o.str();
}

std::string crack_pattern_svg(const SimulationRecord& record, const MacrocrackResult& crack,
                              const GrainStructure* grains) {
    const Rect& d = record.outline;
    const double scale = 480.0 / std::max(d.width(), d.height());
    const double w = d.width() * scale + 40, h = d.height() * scale + 40;
    auto px = [&](double x) { return 20 + (x - d.x0) * scale; };
    auto py = [&](double y) { return h - 20 - (y - d.y0) * scale; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<rect x=\"" << px(d.x0) << "\" y=\"" << py(d.y1) << "\" width=\"" << d.width() * scale
      << "\" height=\"" << d.height() * scale << "\" fill=\"none\" stroke=\"#999\"/>\n";
    if (grains) {
        for (const auto& inc : grains->inclusions)
            o << "<circle cx=\"" << px(inc.center.x) << "\" cy=\"" << py(inc.center.y) << "\" r=\""
              << 0.5 * inc.diameter * scale << "\" fill=\"#eee\" stroke=\"#bbb\"/>\n";
    }
    std::vector<char> is_macro(record.events.size(), 0);
    for (int i : crack.event_indices) is_macro[i] = 1;
    for (const auto& e : record.events) {
        if (is_macro[e.index]) continue;
        o << "<circle cx=\"" << px(e.midpoint.x) << "\" cy=\"" << py(e.midpoint.y)
          << "\" r=\"2\" fill=\"#3465d9\"/>\n";
    }
    for (int i : crack.event_indices) {
        const auto& e = record.events[i];
        o << "<circle cx=\"" << px(e.midpoint.x) << "\" cy=\"" << py(e.midpoint.y)
          << "\" r=\"2.6\" fill=\"black\"/>\n";
    }
    o << "</svg>\n";
    return o.str();
}

std::string raster_heatmap_svg(const Raster& raster, const std::string& title) {
    const double scale = 480.0 / std::max(raster.extent.width(), raster.extent.height());
    const double w = raster.extent.width() * scale + 40, h = raster.extent.height() * scale + 60;
    double vmax = 0.0;
    for (double v : raster.values) vmax = std::max(vmax, v);
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << w / 2 << "\" y=\"18\" font-size=\"13\" text-anchor=\"middle\">" << title << "</text>\n";
    for (int iy = 0; iy < raster.ny; ++iy) {
        for (int ix = 0; ix < raster.nx; ++ix) {
            const double v = raster.values[static_cast<std::size_t>(iy) * raster.nx + ix];
            if (v <= 0.0) continue;
            const double t = vmax > 0.0 ? v / vmax : 0.0;
            const int red = static_cast<int>(255 * std::min(1.0, 0.2 + 0.8 * t));
            const int other = static_cast<int>(235 * (1.0 - t));
            o << "<rect x=\"" << 20 + ix * raster.cell * scale << "\" y=\""
              << h - 20 - (iy + 1) * raster.cell * scale << "\" width=\"" << raster.cell * scale
              << "\" height=\"" << raster.cell * scale << "\" fill=\"rgb(" << red << "," << other << ","
              << other << ")\"/>\n";
        }
    }
    o << "<rect x=\"20\" y=\"" << h - 20 - raster.ny * raster.cell * scale << "\" width=\""
      << raster.nx * raster.cell * scale << "\" height=\"" << raster.ny * raster.cell * scale
      << "\" fill=\"none\" stroke=\"#999\"/>\n</svg>\n";
    return o.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << content;
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace latfrac
