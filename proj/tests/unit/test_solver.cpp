#include <doctest.h>

#include <cmath>

#include "latfrac/solver.hpp"

using namespace latfrac;

namespace {

// hand-built mesh: explicit nodes and elements, no triangles (geometry
// fields filled directly)
LatticeMesh chain_mesh(const std::vector<Vec2>& positions) {
    LatticeMesh mesh;
    for (const Vec2& p : positions) mesh.nodes.push_back({p, BoundaryTag::interior});
    for (std::size_t k = 0; k + 1 < positions.size(); ++k) {
        ElementGeom e;
        e.node_i = static_cast<int>(k);
        e.node_j = static_cast<int>(k + 1);
        const Vec2 d = positions[k] - positions[k + 1];
        e.length = d.norm();
        e.n0 = (1.0 / e.length) * d;
        e.t0 = e.n0.rot90();
        e.eff_width = 1.0;
        mesh.elements.push_back(e);
    }
    return mesh;
}

std::vector<ElementState> unit_states(std::size_t n, double kn = 1.0, double kt = 1.0) {
    std::vector<ElementState> s(n);
    for (auto& st : s) {
        st.Kn = kn;
        st.Kt = kt;
        st.sigma_n0 = 1.0;
        st.sigma_t0 = 1.0;
    }
    return s;
}

struct Patch {
    LatticeMesh mesh;
    std::vector<ElementState> states;
};

Patch make_patch(double w, double h, double lm, std::uint64_t seed) {
    Patch p;
    p.mesh = generate_mesh(Rect::sized(w, h), lm, seed);
    std::vector<Phase> labels(p.mesh.elements.size(), Phase::matrix);
    p.states = assign_element_properties(p.mesh, labels, default_material());
    return p;
}

}  // namespace

TEST_CASE("zero displacement carries zero energy, gradient, and forces") {
    const Patch p = make_patch(10.0, 10.0, 2.0, 3);
    const std::vector<Vec2> u(p.mesh.nodes.size());
    CHECK(elastic_energy(p.mesh, p.states, u) == 0.0);
    for (const Vec2& g : energy_gradient(p.mesh, p.states, u)) {
        CHECK(g.x == 0.0);
        CHECK(g.y == 0.0);
    }
    for (const auto& f : element_forces(p.mesh, p.states, u)) {
        CHECK(f[0] == 0.0);
        CHECK(f[1] == 0.0);
    }
}

TEST_CASE("single element under prescribed stretch") {
    LatticeMesh mesh = chain_mesh({{1.0, 0.0}, {0.0, 0.0}});  // i at x=1, j at origin
    auto states = unit_states(1, 2.0, 1.0);

    BoundaryConditions bc(2);
    bc.fix(1, {0.0, 0.0});
    bc.fix_x(0, 0.1);
    const SolveOutcome out = solve_reference(mesh, states, bc);
    CHECK(out.report.converged);
    CHECK(out.u[0].x == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(out.u[0].y == doctest::Approx(0.0).epsilon(1e-10));
    const auto forces = element_forces(mesh, states, out.u);
    CHECK(forces[0][0] == doctest::Approx(2.0 * 0.1).epsilon(1e-10));
    CHECK(elastic_energy(mesh, states, out.u) == doctest::Approx(0.5 * 2.0 * 0.01).epsilon(1e-10));

    // the reaction transmitted to either grip is the spring force
    CHECK(reaction_force_at(mesh, states, out.u, {0}, {1.0, 0.0}) == doctest::Approx(0.2).epsilon(1e-10));
    CHECK(reaction_force_at(mesh, states, out.u, {1}, {1.0, 0.0}) == doctest::Approx(-0.2).epsilon(1e-10));
}

TEST_CASE("two springs in series split the displacement by stiffness") {
    LatticeMesh mesh = chain_mesh({{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}});
    auto states = unit_states(2);
    // k1 names the spring adjacent to the pulled end
    const double k1 = 3.0, k2 = 1.5, U = 0.3;
    states[0].Kn = k2;
    states[1].Kn = k1;

    BoundaryConditions bc(3);
    bc.fix(0, {0.0, 0.0});
    bc.fix(2, {U, 0.0});
    const SolveOutcome out = solve_reference(mesh, states, bc);
    CHECK(out.u[1].x == doctest::Approx(U * k1 / (k1 + k2)).epsilon(1e-10));
    CHECK(reaction_force_at(mesh, states, out.u, {2}, {1.0, 0.0}) ==
          doctest::Approx(U * k1 * k2 / (k1 + k2)).epsilon(1e-10));
}

TEST_CASE("analytic gradient matches central finite differences") {
    const Patch p = make_patch(10.0, 10.0, 2.0, 11);
    Rng rng(5);
    std::vector<Vec2> u(p.mesh.nodes.size());
    for (auto& v : u) v = {rng.uniform(-1e-3, 1e-3), rng.uniform(-1e-3, 1e-3)};
    const auto grad = energy_gradient(p.mesh, p.states, u);
    const double h = 1e-7;
    for (std::size_t n = 0; n < u.size(); n += 3) {
        for (int axis = 0; axis < 2; ++axis) {
            auto up = u, um = u;
            (axis ? up[n].y : up[n].x) += h;
            (axis ? um[n].y : um[n].x) -= h;
            const double fd =
                (elastic_energy(p.mesh, p.states, up) - elastic_energy(p.mesh, p.states, um)) / (2.0 * h);
            const double an = axis ? grad[n].y : grad[n].x;
            if (std::abs(fd) > 1e-9) CHECK(an == doctest::Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("gradient is linear and rigid translations cost nothing") {
    const Patch p = make_patch(10.0, 10.0, 2.0, 7);
    Rng rng(6);
    std::vector<Vec2> u(p.mesh.nodes.size());
    for (auto& v : u) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const auto g1 = energy_gradient(p.mesh, p.states, u);
    auto u2 = u;
    for (auto& v : u2) v = 2.0 * v;
    const auto g2 = energy_gradient(p.mesh, p.states, u2);
    for (std::size_t n = 0; n < u.size(); ++n) {
        CHECK(g2[n].x == 2.0 * g1[n].x);
        CHECK(g2[n].y == 2.0 * g1[n].y);
    }
    std::vector<Vec2> rigid(p.mesh.nodes.size(), Vec2{0.37, -1.2});
    CHECK(std::abs(elastic_energy(p.mesh, p.states, rigid)) < 1e-12);
}

TEST_CASE("converged solutions are equilibria and global minima") {
    const Patch p = make_patch(16.0, 16.0, 2.0, 19);
    BoundaryConditions bc(p.mesh.nodes.size());
    for (std::size_t n = 0; n < p.mesh.nodes.size(); ++n) {
        if (p.mesh.nodes[n].tag == BoundaryTag::bottom) bc.fix(static_cast<int>(n), {0.0, 0.0});
        if (p.mesh.nodes[n].tag == BoundaryTag::top) bc.fix(static_cast<int>(n), {0.0, 0.05});
    }
    const SolveOutcome out = solve_reference(p.mesh, p.states, bc);
    CHECK(out.report.converged);

    // free-node equilibrium residual far below the typical element force
    double f_typ = 0.0;
    for (const auto& f : element_forces(p.mesh, p.states, out.u))
        f_typ = std::max({f_typ, std::abs(f[0]), std::abs(f[1])});
    const auto residual = energy_gradient(p.mesh, p.states, out.u, &bc);
    double rmax = 0.0;
    for (const auto& r : residual) rmax = std::max({rmax, std::abs(r.x), std::abs(r.y)});
    CHECK(rmax < 1e-8 * f_typ);

    // random admissible perturbations never lower the energy
    const double u_ref_energy = out.report.energy;
    Rng rng(55);
    for (int trial = 0; trial < 5; ++trial) {
        auto u = out.u;
        for (std::size_t n = 0; n < u.size(); ++n) {
            if (bc.x_fixed(static_cast<int>(n)) || bc.y_fixed(static_cast<int>(n))) continue;
            u[n] += Vec2{rng.uniform(-1e-3, 1e-3), rng.uniform(-1e-3, 1e-3)};
        }
        CHECK(elastic_energy(p.mesh, p.states, u) >= u_ref_energy - 1e-12);
    }

    // opposite grips react with opposite forces
    const double top = reaction_force(p.mesh, p.states, out.u, BoundaryTag::top);
    const double bottom = reaction_force(p.mesh, p.states, out.u, BoundaryTag::bottom);
    CHECK(top == doctest::Approx(-bottom).epsilon(1e-8));
}

TEST_CASE("scaling the boundary magnitude scales the solution") {
    const Patch p = make_patch(10.0, 10.0, 2.0, 23);
    BoundaryConditions bc(p.mesh.nodes.size());
    for (std::size_t n = 0; n < p.mesh.nodes.size(); ++n) {
        if (p.mesh.nodes[n].tag == BoundaryTag::bottom) bc.fix(static_cast<int>(n), {0.0, 0.0});
        if (p.mesh.nodes[n].tag == BoundaryTag::top) bc.fix(static_cast<int>(n), {0.0, 1.0});
    }
    const SolveOutcome unit = solve_reference(p.mesh, p.states, bc);
    for (double lambda : {2.0, 0.5, 3.7}) {
        const SolveOutcome scaled = solve_reference(p.mesh, p.states, bc.scaled(lambda));
        double num = 0.0, den = 0.0;
        for (std::size_t n = 0; n < unit.u.size(); ++n) {
            num += (scaled.u[n] - lambda * unit.u[n]).norm2();
            den += (lambda * unit.u[n]).norm2();
        }
        CHECK(std::sqrt(num / den) < 1e-9);
    }
}

TEST_CASE("breaking an element never stiffens the specimen") {
    Patch p = make_patch(16.0, 16.0, 2.0, 29);
    BoundaryConditions bc(p.mesh.nodes.size());
    for (std::size_t n = 0; n < p.mesh.nodes.size(); ++n) {
        if (p.mesh.nodes[n].tag == BoundaryTag::bottom) bc.fix(static_cast<int>(n), {0.0, 0.0});
        if (p.mesh.nodes[n].tag == BoundaryTag::top) bc.fix(static_cast<int>(n), {0.0, 1.0});
    }
    std::vector<int> top_nodes;
    for (std::size_t n = 0; n < p.mesh.nodes.size(); ++n)
        if (p.mesh.nodes[n].tag == BoundaryTag::top) top_nodes.push_back(static_cast<int>(n));

    const SolveOutcome before = solve_reference(p.mesh, p.states, bc);
    double reaction = reaction_force_at(p.mesh, p.states, before.u, top_nodes);
    Rng rng(4);
    for (int k = 0; k < 6; ++k) {
        int e = static_cast<int>(rng.next_u64() % p.states.size());
        while (p.states[e].broken) e = (e + 1) % static_cast<int>(p.states.size());
        p.states[e].broken = true;
        const SolveOutcome after = solve_reference(p.mesh, p.states, bc, {}, &before.u);
        const double r2 = reaction_force_at(p.mesh, p.states, after.u, top_nodes);
        CHECK(r2 <= reaction + 1e-9 * std::abs(reaction));
        reaction = r2;
    }
}

TEST_CASE("unconstrained islands are pinned at zero") {
    LatticeMesh mesh = chain_mesh({{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}});
    // append a disconnected two-node island
    mesh.nodes.push_back({{5.0, 5.0}, BoundaryTag::interior});
    mesh.nodes.push_back({{6.0, 5.0}, BoundaryTag::interior});
    ElementGeom e;
    e.node_i = 3;
    e.node_j = 4;
    e.length = 1.0;
    e.n0 = {-1.0, 0.0};
    e.t0 = e.n0.rot90();
    e.eff_width = 1.0;
    mesh.elements.push_back(e);
    auto states = unit_states(3);

    BoundaryConditions bc(5);
    bc.fix(0, {0.0, 0.0});
    bc.fix(2, {0.2, 0.0});
    const SolveOutcome out = solve_reference(mesh, states, bc);
    CHECK(out.u[3].x == 0.0);
    CHECK(out.u[3].y == 0.0);
    CHECK(out.u[4].x == 0.0);
    CHECK(out.u[1].x == doctest::Approx(0.1).epsilon(1e-10));
}

TEST_CASE("homogeneous patch recovers the macroscopic elastic constants") {
    const Patch p = make_patch(40.0, 40.0, 2.0, 31);
    BoundaryConditions bc(p.mesh.nodes.size());
    int pin = -1;
    double best = 1e300;
    for (std::size_t n = 0; n < p.mesh.nodes.size(); ++n) {
        const auto tag = p.mesh.nodes[n].tag;
        if (tag == BoundaryTag::bottom) {
            bc.fix_y(static_cast<int>(n), 0.0);
            const double off = std::abs(p.mesh.nodes[n].pos.x - 20.0);
            if (off < best) { best = off; pin = static_cast<int>(n); }
        } else if (tag == BoundaryTag::top) {
            bc.fix_y(static_cast<int>(n), 0.4);
        }
    }
    bc.fix_x(pin, 0.0);
    const SolveOutcome out = solve_reference(p.mesh, p.states, bc);

    std::vector<int> top;
    for (std::size_t n = 0; n < p.mesh.nodes.size(); ++n)
        if (p.mesh.nodes[n].tag == BoundaryTag::top) top.push_back(static_cast<int>(n));
    const double force = reaction_force_at(p.mesh, p.states, out.u, top);
    const double stress = force / 40.0;            // N/mm over the width
    const double strain = 0.4 / 40.0;
    const double E_measured = stress / strain;

    double left = 0.0, right = 0.0;
    int nl = 0, nr = 0;
    for (std::size_t n = 0; n < p.mesh.nodes.size(); ++n) {
        if (p.mesh.nodes[n].tag == BoundaryTag::left) { left += out.u[n].x; ++nl; }
        if (p.mesh.nodes[n].tag == BoundaryTag::right) { right += out.u[n].x; ++nr; }
    }
    const double lateral_strain = (right / nr - left / nl) / 40.0;
    const double nu_measured = -lateral_strain / strain;

    const ElasticConstants expect = elastic_from_moduli(16500.0, 5100.0);
    CHECK(E_measured == doctest::Approx(expect.E).epsilon(0.10));
    CHECK(nu_measured == doctest::Approx(expect.nu).epsilon(0.10));
}
