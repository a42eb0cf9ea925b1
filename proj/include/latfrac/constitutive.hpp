#ifndef LATFRAC_CONSTITUTIVE_HPP
#define LATFRAC_CONSTITUTIVE_HPP

#include <string>
#include <vector>

#include "latfrac/mesh.hpp"
#include "latfrac/mesostructure.hpp"

namespace latfrac {

// Internal unit system: mm, N, MPa (= N/mm^2); energies in N*mm; everything
// per unit out-of-plane thickness. Stiffness moduli are stored in MPa.

struct PhaseSpec {
    std::string name;
    double Kn_bar = 0.0;     // MPa
    double Kt_bar = 0.0;     // MPa
    double sigma_n0 = 0.0;   // MPa, ultimate stress for pure normal loading
    double sigma_t0 = 0.0;   // MPa, ultimate stress for pure tangential loading
    bool breakable = true;

    PhaseSpec scaled(const std::string& new_name, double stiffness_factor, double strength_factor,
                     bool breakable_flag = true) const;
};

struct MaterialTable {
    PhaseSpec matrix;
    PhaseSpec inclusion;
    PhaseSpec itz;
    PhaseSpec bar;
    double exponent = 5.0;  // n of the failure surface

    const PhaseSpec& phase(Phase p) const;
};

// Bulk matrix parameters (Kn 16.50 GPa, Kt 5.10 GPa, sigma_n0 6.07 MPa,
// sigma_t0 18.21 MPa) with inclusions 10x matrix, matrix 2x ITZ, and
// unbreakable bars 10x matrix, n = 5.
MaterialTable default_material();

struct ElasticConstants {
    double E;   // MPa
    double nu;  // -
};

// Kn = E/(1-nu), Kt = E(1-3nu)/(1-nu^2); valid for 0 <= nu < 1/3.
void moduli_from_elastic(double E, double nu, double& Kn_bar, double& Kt_bar);
ElasticConstants elastic_from_moduli(double Kn_bar, double Kt_bar);

// psi(fn, ft) = fn/(A sn0) + (|ft|/(A st0))^n - 1. The shear term uses |ft|
// so the surface is symmetric in the shear sign for odd n.
double failure_value(double fn, double ft, double A, double sigma_n0, double sigma_t0, double n);
double failure_value(double fn, double ft, double A, const PhaseSpec& phase, double n);

// The unique eta > 0 with psi(eta fn, eta ft) = 0, or +inf when no positive
// scaling reaches the surface (pure compression). |psi| < 1e-12 at the root.
double failure_scale(double fn, double ft, double A, double sigma_n0, double sigma_t0, double n);
double failure_scale(double fn, double ft, double A, const PhaseSpec& phase, double n);

struct ElementState {
    Phase phase = Phase::matrix;
    double Kn = 0.0;  // (A/l) * Kn_bar
    double Kt = 0.0;
    double sigma_n0 = 0.0;
    double sigma_t0 = 0.0;
    bool breakable = true;
    bool broken = false;
    double dissipated_nominal = 0.0;  // N*mm, set when the element breaks
    double dissipated_actual = 0.0;
    double opening = 0.0;             // mm, filled by final_openings
};

std::vector<ElementState> assign_element_properties(const LatticeMesh& mesh,
                                                    const std::vector<Phase>& labels,
                                                    const MaterialTable& table);

// Elastic energy the element stores at its ultimate stresses:
// 1/2 A^2 (sn0^2/Kn + st0^2/Kt). This is the per-element summand of the
// fracture-energy bookkeeping.
double nominal_capacity_energy(const ElementGeom& geom, const ElementState& state);

}  // namespace latfrac

#endif
