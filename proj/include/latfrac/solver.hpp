#ifndef LATFRAC_SOLVER_HPP
#define LATFRAC_SOLVER_HPP

#include <array>
#include <stdexcept>
#include <vector>

#include "latfrac/constitutive.hpp"
#include "latfrac/mesh.hpp"

namespace latfrac {

// Per-node, per-axis displacement constraints [mm].
class BoundaryConditions {
public:
    BoundaryConditions() = default;
    explicit BoundaryConditions(std::size_t node_count) : mask_(node_count, 0), values_(node_count) {}

    void fix_x(int node, double value) { mask_[node] |= 1; values_[node].x = value; }
    void fix_y(int node, double value) { mask_[node] |= 2; values_[node].y = value; }
    void fix(int node, const Vec2& value) { mask_[node] = 3; values_[node] = value; }

    bool x_fixed(int node) const { return mask_[node] & 1; }
    bool y_fixed(int node) const { return mask_[node] & 2; }
    const Vec2& value(int node) const { return values_[node]; }
    std::size_t node_count() const { return mask_.size(); }

    std::size_t scalar_constraint_count() const {
        std::size_t n = 0;
        for (auto m : mask_) n += (m & 1 ? 1 : 0) + (m & 2 ? 1 : 0);
        return n;
    }

    // scale all imposed values by lambda
    BoundaryConditions scaled(double lambda) const {
        BoundaryConditions b = *this;
        for (auto& v : b.values_) v = lambda * v;
        return b;
    }

private:
    std::vector<std::uint8_t> mask_;
    std::vector<Vec2> values_;
};

struct SolveReport {
    long iterations = 0;
    double gradient_norm = 0.0;  // N/mm, over free dofs
    double energy = 0.0;         // N*mm
    bool converged = false;
};

struct SolverOptions {
    double tol_rel = 1e-10;  // on the free-dof gradient norm vs its start value
    long max_iter = 0;       // 0: 50 * n_dof
};

class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, SolveReport r) : std::runtime_error(what), report(r) {}
    SolveReport report;
};

// Total elastic energy over unbroken elements (Eq. of state:
// 1/2 sum Kn dn^2 + Kt dt^2 with dn = (u_i - u_j).n0, dt = (u_i - u_j).t0).
double elastic_energy(const LatticeMesh& mesh, const std::vector<ElementState>& states,
                      const std::vector<Vec2>& u);

// Analytic gradient of the elastic energy per node. When bc is given,
// entries at fixed dofs are zeroed.
std::vector<Vec2> energy_gradient(const LatticeMesh& mesh, const std::vector<ElementState>& states,
                                  const std::vector<Vec2>& u, const BoundaryConditions* bc = nullptr);

// Minimize the elastic energy over free dofs with conjugate gradients
// (matrix-free, block-Jacobi preconditioned). Free connected components
// without any constraint are pinned at zero displacement. Warm start keeps
// the fixed dofs from bc; pass the previous solution when the system differs
// by a single removed element.
struct SolveOutcome {
    std::vector<Vec2> u;
    SolveReport report;
};

SolveOutcome solve_reference(const LatticeMesh& mesh, const std::vector<ElementState>& states,
                             const BoundaryConditions& bc, const SolverOptions& options = {},
                             const std::vector<Vec2>* warm_start = nullptr);

// (fn, ft) per element; broken elements report (0, 0).
std::vector<std::array<double, 2>> element_forces(const LatticeMesh& mesh,
                                                  const std::vector<ElementState>& states,
                                                  const std::vector<Vec2>& u);

// Sum of internal nodal forces over nodes with the given tag, projected on
// axis. At equilibrium free nodes contribute ~0, so this is the boundary
// reaction [N per unit thickness].
double reaction_force(const LatticeMesh& mesh, const std::vector<ElementState>& states,
                      const std::vector<Vec2>& u, BoundaryTag tag, const Vec2& axis = {0.0, 1.0});

// Same, over an explicit node set.
double reaction_force_at(const LatticeMesh& mesh, const std::vector<ElementState>& states,
                         const std::vector<Vec2>& u, const std::vector<int>& nodes,
                         const Vec2& axis = {0.0, 1.0});

}  // namespace latfrac

#endif
