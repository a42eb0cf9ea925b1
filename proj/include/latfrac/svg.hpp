#ifndef LATFRAC_SVG_HPP
#define LATFRAC_SVG_HPP

#include <string>
#include <vector>

#include "latfrac/analysis.hpp"
#include "latfrac/geometry.hpp"

namespace latfrac {

// Minimal SVG chart writer for the campaign reports. Data coordinates are
// mapped to a fixed canvas with linear axes and outward ticks.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string x_label, std::string y_label);

    void add_line(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                  bool with_markers = false, const std::string& label = "");
    void add_points(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                    double radius = 3.0, const std::string& label = "");
    // vertical error bars, one per point
    void add_errorbars(const std::vector<std::pair<double, double>>& pts,
                       const std::vector<double>& half_heights, const std::string& color);

    std::string render() const;

private:
    struct Series {
        enum class Kind { line, markers, errorbars } kind;
        std::vector<std::pair<double, double>> pts;
        std::vector<double> errs;
        std::string color;
        std::string label;
        bool with_markers = false;
        double radius = 3.0;
    };
    std::string title_, x_label_, y_label_;
    std::vector<Series> series_;
};

// Scatter of broken elements over the specimen outline; the macrocrack set
// is drawn black, the remaining microcracks blue.
std::string crack_pattern_svg(const SimulationRecord& record, const MacrocrackResult& crack,
                              const GrainStructure* grains = nullptr);

std::string raster_heatmap_svg(const Raster& raster, const std::string& title);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace latfrac

#endif
