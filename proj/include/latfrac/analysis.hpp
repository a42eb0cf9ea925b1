#ifndef LATFRAC_ANALYSIS_HPP
#define LATFRAC_ANALYSIS_HPP

#include <utility>
#include <vector>

#include "latfrac/engine.hpp"

namespace latfrac {

enum class EnergyKind { actual, nominal };

// Fracture energy from a localized test: the ultimate-state elastic energy
// of the broken elements divided by the total cracking surface,
// 1/2 sum A^2 (sn0^2/Kn + st0^2/Kt) / sum A.
double fracture_energy_Gf(const SimulationRecord& record);

// Dissipated energy density from a distributed test: same numerator divided
// by the specimen volume (unit thickness; bar strips excluded). V = 0 takes
// the record's specimen area.
double energy_density_Ws(const SimulationRecord& record, double volume = 0.0);

// lc ~ h = Gf / Ws
double characteristic_length(double gf, double ws);

struct MacrocrackResult {
    Vec2 direction;                  // unit vector along the mean crack
    std::vector<int> event_indices;  // members of the macrocrack set
    double opening_threshold = 0.0;  // mm
    bool fallback = false;           // too few elements; axis perpendicular to loading
};

// Macrocrack = broken elements whose opening reaches threshold_ratio times
// the largest opening; direction is the principal axis of their midpoints.
MacrocrackResult macrocrack_direction(const SimulationRecord& record, double threshold_ratio = 0.5);

struct EnergyProfile {
    Vec2 axis;  // profile direction, perpendicular to the mean crack
    std::vector<std::pair<double, double>> samples;     // (coordinate, energy), sorted
    std::vector<std::pair<double, double>> cumulative;  // (coordinate, fraction), midpoint rule
    double total = 0.0;
};

// Dissipated-energy profile across the crack band; the cumulative curve is
// what the Gaussian cdf is fitted to.
EnergyProfile energy_profile(const SimulationRecord& record, EnergyKind kind = EnergyKind::actual,
                             double macrocrack_threshold = 0.5);

struct FpzResult {
    double l_fpz = 0.0;     // 4 * sigma [mm]
    double sigma = 0.0;     // fitted Gaussian std [mm]
    double center = 0.0;    // fitted mean along the profile axis [mm]
    double residual = 0.0;  // rms cdf misfit
    double angle = 0.0;     // crack direction angle [rad]
    bool degenerate = false;
};

struct GaussianCdfFit {
    double mu = 0.0;
    double sigma = 0.0;
    double residual = 0.0;
};

// Least-squares fit of F(s) = (1 + erf((s - mu)/(sigma sqrt 2)))/2 to the
// (coordinate, cumulative fraction) samples; started from the sample
// mean/std unless overridden.
GaussianCdfFit fit_gaussian_cdf(const std::vector<std::pair<double, double>>& samples,
                                double mu0, double sigma0);

// FPZ width: project broken-element midpoints on the axis perpendicular to
// the macrocrack, build the cumulative dissipated-energy fraction, fit the
// Gaussian cdf, report 4 sigma. Needs at least 5 broken elements. A profile
// with all energy at one coordinate gets the sigma floor mean_mesh_size/4.
FpzResult fpz_width(const SimulationRecord& record, EnergyKind kind = EnergyKind::actual,
                    double macrocrack_threshold = 0.5);

struct EnvelopeCurve {
    std::vector<std::pair<double, double>> points;  // (displacement, force)
};

// Monotone-displacement smoothing of an event-driven load curve: when the
// displacement decreases, the load drop is held vertically at the running
// maximum displacement until the raw curve crosses it again; a terminal
// snap-back ends with the vertical hold down to the last raw force.
EnvelopeCurve envelope_curve(const std::vector<std::pair<double, double>>& raw);

struct Raster {
    Rect extent;
    int nx = 0, ny = 0;
    double cell = 0.0;
    std::vector<double> values;  // row-major, ny rows of nx

    double total() const;
};

Raster energy_density_map(const SimulationRecord& record, double cell_size,
                          EnergyKind kind = EnergyKind::actual);

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

OlsFit ols_fit(const std::vector<std::pair<double, double>>& points);

// OLS over per-size means; needs at least 3 distinct mesh sizes.
OlsFit mesh_size_regression(const std::vector<std::vector<std::pair<double, double>>>& runs_by_size);

double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace latfrac

#endif
