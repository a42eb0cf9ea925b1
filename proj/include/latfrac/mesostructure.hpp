#ifndef LATFRAC_MESOSTRUCTURE_HPP
#define LATFRAC_MESOSTRUCTURE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latfrac/mesh.hpp"

namespace latfrac {

struct Inclusion {
    Vec2 center;      // mm
    double diameter;  // mm
};

struct GradingSpec {
    enum class Kind { monodisperse, fuller, none };
    Kind kind = Kind::none;
    double d = 0.0;            // monodisperse diameter [mm]
    double d_min = 0.0;        // fuller band [mm]
    double d_max = 0.0;
    int n_classes = 5;
    double target_fraction = 0.0;  // surface fraction P_a in [0, 1)
    double fuller_exponent = 0.5;
};

struct GrainStructure {
    std::vector<Inclusion> inclusions;
    GradingSpec spec;
    std::uint64_t seed = 0;
    double achieved_fraction = 0.0;
    Rect outline;
};

enum class Phase : std::uint8_t { inclusion, matrix, itz, bar };

const char* to_string(Phase p);

// Take-and-place packing of mono-sized disks: centers drawn uniformly,
// accepted when the disk is fully inside the outline and clears every
// accepted disk by at least gap_min. Stops at the target count, or once the
// next disk would push the surface fraction past the target.
GrainStructure place_monodisperse(const Rect& outline, double d,
                                  std::optional<int> target_count, std::optional<double> target_fraction,
                                  double gap_min, std::uint64_t seed);

// Same centers, new diameter (variation path with fixed positions). Throws
// naming the first violating pair when the new diameter breaks gap_min or
// the outline.
GrainStructure rescale_diameters(const GrainStructure& grains, double new_d, double gap_min);

// Fuller-graded packing: cumulative passing P(D) = (D/d_max)^q split into
// log-spaced sieve classes on [d_min, d_max], placed largest class first;
// per-class area budget proportional to the class's share of the curve.
GrainStructure place_fuller(const Rect& outline, double d_min, double d_max, double fraction,
                            int n_classes, double gap_min, std::uint64_t seed,
                            double q = 0.5);

double fuller_passing(double D, double d_max, double q = 0.5);

// Element phase rule: both nodes inside one disk -> inclusion; both in
// matrix -> matrix; a straddling element follows its midpoint (inside any
// disk -> inclusion, else itz). "Inside" is strict.
std::vector<Phase> classify_elements(const LatticeMesh& mesh, const GrainStructure& grains);

struct PhaseFractions {
    double inclusion = 0.0;
    double itz = 0.0;
    double matrix = 0.0;
};

// element-count fractions and the A*l area-weighted variant
PhaseFractions surface_fractions(const LatticeMesh& mesh, const std::vector<Phase>& labels);
PhaseFractions surface_fractions_weighted(const LatticeMesh& mesh, const std::vector<Phase>& labels);

std::string grains_to_json(const GrainStructure& grains);
GrainStructure grains_from_json(const std::string& text);

}  // namespace latfrac

#endif
