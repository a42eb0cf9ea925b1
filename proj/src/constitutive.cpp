#include "latfrac/constitutive.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace latfrac {

PhaseSpec PhaseSpec::scaled(const std::string& new_name, double stiffness_factor, double strength_factor,
                            bool breakable_flag) const {
    PhaseSpec p = *this;
    p.name = new_name;
    p.Kn_bar *= stiffness_factor;
    p.Kt_bar *= stiffness_factor;
    p.sigma_n0 *= strength_factor;
    p.sigma_t0 *= strength_factor;
    p.breakable = breakable_flag;
    return p;
}

const PhaseSpec& MaterialTable::phase(Phase p) const {
    switch (p) {
        case Phase::inclusion: return inclusion;
        case Phase::matrix: return matrix;
        case Phase::itz: return itz;
        case Phase::bar: return bar;
    }
    return matrix;
}

MaterialTable default_material() {
    MaterialTable t;
    t.matrix = {"matrix", 16500.0, 5100.0, 6.07, 18.21, true};
    t.inclusion = t.matrix.scaled("inclusion", 10.0, 10.0);
    t.itz = t.matrix.scaled("itz", 0.5, 0.5);
    t.bar = t.matrix.scaled("bar", 10.0, 1.0, false);
    t.exponent = 5.0;
    return t;
}

void moduli_from_elastic(double E, double nu, double& Kn_bar, double& Kt_bar) {
    if (nu < 0.0 || nu >= 1.0 / 3.0)
        throw std::invalid_argument("moduli_from_elastic: nu must lie in [0, 1/3) for a positive shear stiffness");
    Kn_bar = E / (1.0 - nu);
    Kt_bar = E * (1.0 - 3.0 * nu) / (1.0 - nu * nu);
}

ElasticConstants elastic_from_moduli(double Kn_bar, double Kt_bar) {
    const double nu = (Kn_bar - Kt_bar) / (3.0 * Kn_bar + Kt_bar);
    return {Kn_bar * (1.0 - nu), nu};
}

double failure_value(double fn, double ft, double A, double sigma_n0, double sigma_t0, double n) {
    return fn / (A * sigma_n0) + std::pow(std::abs(ft) / (A * sigma_t0), n) - 1.0;
}

double failure_value(double fn, double ft, double A, const PhaseSpec& phase, double n) {
    return failure_value(fn, ft, A, phase.sigma_n0, phase.sigma_t0, n);
}

double failure_scale(double fn, double ft, double A, double sigma_n0, double sigma_t0, double n) {
    const double a = fn / (A * sigma_n0);
    const double b = std::abs(ft) / (A * sigma_t0);
    if (b <= 0.0) {
        if (a <= 0.0) return std::numeric_limits<double>::infinity();
        return 1.0 / a;  // pure normal loading
    }
    // normalized root: with t = b*eta, solve g(t) = c*t + t^n = 1. Scaling
    // (fn, ft) by lambda leaves c untouched, so eta scales exactly by
    // 1/lambda. g is convex, so Newton from a bracketing upper point
    // converges monotonically onto the root.
    const double c = a / b;
    auto g = [&](double t) { return c * t + std::pow(t, n); };
    double t = 1.0;
    while (g(t) < 1.0) {
        t *= 2.0;
        if (t > 1e300) return std::numeric_limits<double>::infinity();
    }
    for (int it = 0; it < 100; ++it) {
        const double v = g(t) - 1.0;
        if (std::abs(v) < 1e-15) break;
        const double dg = c + n * std::pow(t, n - 1.0);
        const double next = t - v / dg;
        if (!(next < t)) break;
        t = next;
    }
    return t / b;
}

double failure_scale(double fn, double ft, double A, const PhaseSpec& phase, double n) {
    return failure_scale(fn, ft, A, phase.sigma_n0, phase.sigma_t0, n);
}

std::vector<ElementState> assign_element_properties(const LatticeMesh& mesh,
                                                    const std::vector<Phase>& labels,
                                                    const MaterialTable& table) {
    if (labels.size() != mesh.elements.size())
        throw std::invalid_argument("assign_element_properties: missing phase labels (" +
                                    std::to_string(labels.size()) + " labels for " +
                                    std::to_string(mesh.elements.size()) + " elements)");
    std::vector<ElementState> states(mesh.elements.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        const PhaseSpec& spec = table.phase(labels[i]);
        const double ratio = mesh.elements[i].eff_width / mesh.elements[i].length;
        ElementState& s = states[i];
        s.phase = labels[i];
        s.Kn = ratio * spec.Kn_bar;
        s.Kt = ratio * spec.Kt_bar;
        s.sigma_n0 = spec.sigma_n0;
        s.sigma_t0 = spec.sigma_t0;
        s.breakable = spec.breakable;
    }
    return states;
}

double nominal_capacity_energy(const ElementGeom& geom, const ElementState& state) {
    const double A = geom.eff_width;
    return 0.5 * A * A * (state.sigma_n0 * state.sigma_n0 / state.Kn +
                          state.sigma_t0 * state.sigma_t0 / state.Kt);
}

}  // namespace latfrac
