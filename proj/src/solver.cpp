#include "latfrac/solver.hpp"

#include <cmath>
#include <numeric>

namespace latfrac {

namespace {

// per-element 2x2 symmetric stiffness block Kn n0xn0 + Kt t0xt0
struct Block {
    int i, j;
    double m00, m01, m11;
};

std::vector<Block> active_blocks(const LatticeMesh& mesh, const std::vector<ElementState>& states) {
    std::vector<Block> blocks;
    blocks.reserve(mesh.elements.size());
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        if (states[e].broken) continue;
        const ElementGeom& g = mesh.elements[e];
        const double kn = states[e].Kn, kt = states[e].Kt;
        blocks.push_back({g.node_i, g.node_j,
                          kn * g.n0.x * g.n0.x + kt * g.t0.x * g.t0.x,
                          kn * g.n0.x * g.n0.y + kt * g.t0.x * g.t0.y,
                          kn * g.n0.y * g.n0.y + kt * g.t0.y * g.t0.y});
    }
    return blocks;
}

void apply_stiffness(const std::vector<Block>& blocks, const std::vector<Vec2>& v, std::vector<Vec2>& out) {
    std::fill(out.begin(), out.end(), Vec2{});
    for (const Block& b : blocks) {
        const Vec2 d = v[b.i] - v[b.j];
        const Vec2 f{b.m00 * d.x + b.m01 * d.y, b.m01 * d.x + b.m11 * d.y};
        out[b.i] += f;
        out[b.j] -= f;
    }
}

void mask_fixed(const BoundaryConditions& bc, std::vector<Vec2>& v) {
    for (std::size_t n = 0; n < v.size(); ++n) {
        if (bc.x_fixed(static_cast<int>(n))) v[n].x = 0.0;
        if (bc.y_fixed(static_cast<int>(n))) v[n].y = 0.0;
    }
}

double dot(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i].dot(b[i]);
    return s;
}

}  // namespace

double elastic_energy(const LatticeMesh& mesh, const std::vector<ElementState>& states,
                      const std::vector<Vec2>& u) {
    double total = 0.0;
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        if (states[e].broken) continue;
        const ElementGeom& g = mesh.elements[e];
        const Vec2 d = u[g.node_i] - u[g.node_j];
        const double dn = d.dot(g.n0), dt = d.dot(g.t0);
        total += 0.5 * (states[e].Kn * dn * dn + states[e].Kt * dt * dt);
    }
    return total;
}

std::vector<Vec2> energy_gradient(const LatticeMesh& mesh, const std::vector<ElementState>& states,
                                  const std::vector<Vec2>& u, const BoundaryConditions* bc) {
    std::vector<Vec2> grad(u.size());
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        if (states[e].broken) continue;
        const ElementGeom& g = mesh.elements[e];
        const Vec2 d = u[g.node_i] - u[g.node_j];
        const Vec2 f = states[e].Kn * d.dot(g.n0) * g.n0 + states[e].Kt * d.dot(g.t0) * g.t0;
        grad[g.node_i] += f;
        grad[g.node_j] -= f;
    }
    if (bc) mask_fixed(*bc, grad);
    return grad;
}

SolveOutcome solve_reference(const LatticeMesh& mesh, const std::vector<ElementState>& states,
                             const BoundaryConditions& bc_in, const SolverOptions& options,
                             const std::vector<Vec2>* warm_start) {
    const std::size_t nn = mesh.nodes.size();
    if (bc_in.node_count() != nn) throw std::invalid_argument("solve_reference: bc size mismatch");
    if (bc_in.scalar_constraint_count() < 3)
        throw std::invalid_argument("solve_reference: need at least 3 scalar constraints");

    const std::vector<Block> blocks = active_blocks(mesh, states);

    // pin every connected component that carries no constraint (isolated
    // islands created by cracking)
    BoundaryConditions bc = bc_in;
    {
        std::vector<int> parent(nn);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int a) { while (parent[a] != a) a = parent[a] = parent[parent[a]]; return a; };
        for (const Block& b : blocks) parent[find(b.i)] = find(b.j);
        std::vector<char> constrained(nn, 0);
        for (std::size_t n = 0; n < nn; ++n)
            if (bc.x_fixed(static_cast<int>(n)) || bc.y_fixed(static_cast<int>(n)))
                constrained[find(static_cast<int>(n))] = 1;
        for (std::size_t n = 0; n < nn; ++n)
            if (!constrained[find(static_cast<int>(n))]) bc.fix(static_cast<int>(n), {0.0, 0.0});
    }

    std::vector<Vec2> u(nn);
    if (warm_start && warm_start->size() == nn) u = *warm_start;
    for (std::size_t n = 0; n < nn; ++n) {
        if (bc.x_fixed(static_cast<int>(n))) u[n].x = bc.value(static_cast<int>(n)).x;
        if (bc.y_fixed(static_cast<int>(n))) u[n].y = bc.value(static_cast<int>(n)).y;
    }

    // block-Jacobi preconditioner from the assembled 2x2 diagonal
    std::vector<double> d00(nn, 0.0), d01(nn, 0.0), d11(nn, 0.0);
    for (const Block& b : blocks) {
        d00[b.i] += b.m00; d01[b.i] += b.m01; d11[b.i] += b.m11;
        d00[b.j] += b.m00; d01[b.j] += b.m01; d11[b.j] += b.m11;
    }
    auto precondition = [&](const std::vector<Vec2>& r, std::vector<Vec2>& z) {
        for (std::size_t n = 0; n < nn; ++n) {
            const bool fx = bc.x_fixed(static_cast<int>(n)), fy = bc.y_fixed(static_cast<int>(n));
            if (fx && fy) { z[n] = {0.0, 0.0}; continue; }
            if (!fx && !fy) {
                const double det = d00[n] * d11[n] - d01[n] * d01[n];
                if (det > 0.0) {
                    z[n].x = (d11[n] * r[n].x - d01[n] * r[n].y) / det;
                    z[n].y = (d00[n] * r[n].y - d01[n] * r[n].x) / det;
                } else {
                    z[n] = r[n];
                }
            } else if (fx) {
                z[n].x = 0.0;
                z[n].y = d11[n] > 0.0 ? r[n].y / d11[n] : r[n].y;
            } else {
                z[n].x = d00[n] > 0.0 ? r[n].x / d00[n] : r[n].x;
                z[n].y = 0.0;
            }
        }
    };

    const long n_dof = static_cast<long>(2 * nn - bc.scalar_constraint_count());
    const long max_iter = options.max_iter > 0 ? options.max_iter : 50 * std::max<long>(n_dof, 1);

    std::vector<Vec2> r(nn), z(nn), p(nn), q(nn);
    apply_stiffness(blocks, u, r);
    for (auto& v : r) v = -1.0 * v;
    mask_fixed(bc, r);

    SolveReport report;
    const double g0 = std::sqrt(dot(r, r));
    report.gradient_norm = g0;
    const double target = options.tol_rel * g0;
    if (g0 == 0.0) {
        report.converged = true;
        report.energy = elastic_energy(mesh, states, u);
        return {std::move(u), report};
    }

    precondition(r, z);
    p = z;
    double rz = dot(r, z);
    double rnorm = g0;
    for (long it = 0; it < max_iter; ++it) {
        apply_stiffness(blocks, p, q);
        mask_fixed(bc, q);
        const double pq = dot(p, q);
        if (pq <= 0.0) break;  // numerically exhausted direction
        const double alpha = rz / pq;
        for (std::size_t n = 0; n < nn; ++n) u[n] += alpha * p[n];
        for (std::size_t n = 0; n < nn; ++n) r[n] -= alpha * q[n];
        rnorm = std::sqrt(dot(r, r));
        report.iterations = it + 1;
        if (rnorm <= target) { report.converged = true; break; }
        precondition(r, z);
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t n = 0; n < nn; ++n) p[n] = z[n] + beta * p[n];
    }
    report.gradient_norm = rnorm;
    report.energy = elastic_energy(mesh, states, u);
    if (!report.converged)
        throw SolveError("solve_reference: conjugate gradient hit the iteration cap (" +
                         std::to_string(max_iter) + ") at |g| = " + std::to_string(rnorm), report);
    return {std::move(u), report};
}

std::vector<std::array<double, 2>> element_forces(const LatticeMesh& mesh,
                                                  const std::vector<ElementState>& states,
                                                  const std::vector<Vec2>& u) {
    std::vector<std::array<double, 2>> f(mesh.elements.size(), {0.0, 0.0});
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        if (states[e].broken) continue;
        const ElementGeom& g = mesh.elements[e];
        const Vec2 d = u[g.node_i] - u[g.node_j];
        f[e] = {states[e].Kn * d.dot(g.n0), states[e].Kt * d.dot(g.t0)};
    }
    return f;
}

double reaction_force_at(const LatticeMesh& mesh, const std::vector<ElementState>& states,
                         const std::vector<Vec2>& u, const std::vector<int>& nodes, const Vec2& axis) {
    std::vector<Vec2> grad = energy_gradient(mesh, states, u);
    double total = 0.0;
    for (int n : nodes) total += grad[n].dot(axis);
    return total;
}

double reaction_force(const LatticeMesh& mesh, const std::vector<ElementState>& states,
                      const std::vector<Vec2>& u, BoundaryTag tag, const Vec2& axis) {
    bool any = false;
    std::vector<Vec2> grad = energy_gradient(mesh, states, u);
    double total = 0.0;
    for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
        if (mesh.nodes[n].tag != tag) continue;
        any = true;
        total += grad[n].dot(axis);
    }
    if (!any) throw std::invalid_argument(std::string("reaction_force: no node carries tag ") + to_string(tag));
    return total;
}

}  // namespace latfrac
