#include "latfrac/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "latfrac/delaunay.hpp"

namespace latfrac {

const char* to_string(ProtocolKind k) {
    switch (k) {
        case ProtocolKind::ld: return "ld";
        case ProtocolKind::dd: return "dd";
        case ProtocolKind::direct: return "direct";
    }
    return "direct";
}

ProtocolKind protocol_from_string(const std::string& s) {
    if (s == "ld") return ProtocolKind::ld;
    if (s == "dd") return ProtocolKind::dd;
    if (s == "direct") return ProtocolKind::direct;
    throw std::invalid_argument("unknown protocol: " + s);
}

namespace {

constexpr double kSnapTol = 1e-9;

Phase phase_from_string_(const std::string& s) {
    if (s == "inclusion") return Phase::inclusion;
    if (s == "matrix") return Phase::matrix;
    if (s == "itz") return Phase::itz;
    if (s == "bar") return Phase::bar;
    throw std::invalid_argument("unknown phase: " + s);
}

// Attach stiff bar strips of the given width along one side of the mesh over
// the y-interval [ya, yb]. Inner column nodes are the existing boundary
// nodes on that side (compatible nodes); outer columns copy their y
// ordinates. Returns the full rebuilt triangle list; bar-only nodes are
// appended to mesh.nodes.
struct BarPatch {
    double ya, yb;
    bool left;
};

void attach_bars(LatticeMesh& mesh, const std::vector<BarPatch>& patches, double bar_width, double l_m,
                 std::vector<char>& node_is_bar, std::vector<char>& node_is_glue) {
    std::vector<std::array<int, 3>> tris;
    for (const auto& t : mesh.triangles) tris.push_back(t.nodes);

    node_is_bar.assign(mesh.nodes.size(), 0);
    node_is_glue.assign(mesh.nodes.size(), 0);

    for (const BarPatch& patch : patches) {
        const double side_x = patch.left ? mesh.domain.x0 : mesh.domain.x1;
        std::vector<int> inner;
        for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
            const Vec2& p = mesh.nodes[n].pos;
            if (std::abs(p.x - side_x) < kSnapTol && p.y >= patch.ya - kSnapTol && p.y <= patch.yb + kSnapTol)
                inner.push_back(static_cast<int>(n));
        }
        if (inner.size() < 2)
            throw std::runtime_error("attach_bars: fewer than two boundary nodes along the glue segment");
        std::sort(inner.begin(), inner.end(),
                  [&](int a, int b) { return mesh.nodes[a].pos.y < mesh.nodes[b].pos.y; });

        for (int n : inner) {
            node_is_bar[n] = 1;
            node_is_glue[n] = 1;
            if (mesh.nodes[n].tag == BoundaryTag::left || mesh.nodes[n].tag == BoundaryTag::right)
                mesh.nodes[n].tag = BoundaryTag::bar_interface;
        }

        const int ncols = std::max(1, static_cast<int>(std::llround(bar_width / l_m)));
        const double step = bar_width / ncols * (patch.left ? -1.0 : 1.0);
        std::vector<int> prev = inner;
        for (int k = 1; k <= ncols; ++k) {
            std::vector<int> col;
            for (int n : inner) {
                Node node;
                node.pos = {side_x + k * step, mesh.nodes[n].pos.y};
                if (mesh.nodes[n].tag == BoundaryTag::bottom) node.tag = BoundaryTag::bottom;
                else if (mesh.nodes[n].tag == BoundaryTag::top) node.tag = BoundaryTag::top;
                else if (k == ncols) node.tag = patch.left ? BoundaryTag::left : BoundaryTag::right;
                else node.tag = BoundaryTag::interior;
                col.push_back(static_cast<int>(mesh.nodes.size()));
                mesh.nodes.push_back(node);
                node_is_bar.push_back(1);
                node_is_glue.push_back(0);
            }
            std::vector<Vec2> pts(mesh.nodes.size());
            for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = mesh.nodes[i].pos;
            // walking +y the "upper" chain must sit on the -x side
            auto strip = patch.left ? triangulate_strip(pts, prev, col)
                                    : triangulate_strip(pts, col, prev);
            tris.insert(tris.end(), strip.begin(), strip.end());
            prev = col;
        }
    }

    rebuild_topology(mesh, std::move(tris));
}

}  // namespace

Specimen build_specimen(const SpecimenConfig& config, const GrainStructure& grains,
                        const MaterialTable& material, std::uint64_t mesh_seed) {
    Specimen sp;
    sp.config = config;
    sp.material = material;
    sp.grains = grains;

    sp.mesh = generate_mesh(config.outline, config.l_m, mesh_seed, config.mesh_options);
    double notch_area = 0.0;
    for (const Rect& notch : config.notches) {
        sp.mesh = carve_notch(sp.mesh, notch);
        const Rect clipped{std::max(notch.x0, config.outline.x0), std::max(notch.y0, config.outline.y0),
                           std::min(notch.x1, config.outline.x1), std::min(notch.y1, config.outline.y1)};
        if (!clipped.empty()) notch_area += clipped.area();
    }
    sp.specimen_area = config.outline.area() - notch_area;

    std::vector<char> node_is_bar, node_is_glue;
    if (config.protocol.kind == ProtocolKind::ld || config.protocol.kind == ProtocolKind::dd) {
        std::vector<BarPatch> patches;
        if (config.protocol.kind == ProtocolKind::dd) {
            patches.push_back({config.outline.y0, config.outline.y1, true});
            patches.push_back({config.outline.y0, config.outline.y1, false});
        } else {
            const double g = config.protocol.glue_fraction * config.outline.height();
            patches.push_back({config.outline.y0, config.outline.y0 + g, true});
            patches.push_back({config.outline.y0, config.outline.y0 + g, false});
            patches.push_back({config.outline.y1 - g, config.outline.y1, true});
            patches.push_back({config.outline.y1 - g, config.outline.y1, false});
        }
        attach_bars(sp.mesh, patches, config.protocol.bar_width, config.l_m, node_is_bar, node_is_glue);
    } else {
        node_is_bar.assign(sp.mesh.nodes.size(), 0);
        node_is_glue.assign(sp.mesh.nodes.size(), 0);
    }

    sp.labels = classify_elements(sp.mesh, grains);
    for (std::size_t e = 0; e < sp.mesh.elements.size(); ++e) {
        const ElementGeom& g = sp.mesh.elements[e];
        const bool both_bar = node_is_bar[g.node_i] && node_is_bar[g.node_j];
        const bool both_glue = node_is_glue[g.node_i] && node_is_glue[g.node_j];
        if (both_bar && !both_glue) {
            sp.labels[e] = Phase::bar;
            sp.bar_elements.push_back(static_cast<int>(e));
        }
    }
    sp.states = assign_element_properties(sp.mesh, sp.labels, material);

    // unit loading pattern
    sp.bc = BoundaryConditions(sp.mesh.nodes.size());
    const double y_bot = config.outline.y0, y_top = config.outline.y1;
    if (config.protocol.kind == ProtocolKind::direct) {
        int pin = -1;
        double best = std::numeric_limits<double>::max();
        const double mid_x = 0.5 * (config.outline.x0 + config.outline.x1);
        for (std::size_t n = 0; n < sp.mesh.nodes.size(); ++n) {
            const Vec2& p = sp.mesh.nodes[n].pos;
            if (std::abs(p.y - y_top) < kSnapTol) {
                sp.bc.fix_y(static_cast<int>(n), 1.0);
                sp.top_imposed.push_back(static_cast<int>(n));
            } else if (std::abs(p.y - y_bot) < kSnapTol) {
                sp.bc.fix_y(static_cast<int>(n), 0.0);
                sp.bottom_imposed.push_back(static_cast<int>(n));
                if (std::abs(p.x - mid_x) < best) { best = std::abs(p.x - mid_x); pin = static_cast<int>(n); }
            }
        }
        if (pin < 0) throw std::runtime_error("build_specimen: no bottom boundary nodes to pin");
        sp.bc.fix_x(pin, 0.0);
    } else {
        // grips clamp the bar end rows
        for (std::size_t n = 0; n < sp.mesh.nodes.size(); ++n) {
            if (!node_is_bar[n]) continue;
            const Vec2& p = sp.mesh.nodes[n].pos;
            if (std::abs(p.y - y_top) < kSnapTol) {
                sp.bc.fix(static_cast<int>(n), {0.0, 1.0});
                sp.top_imposed.push_back(static_cast<int>(n));
            } else if (std::abs(p.y - y_bot) < kSnapTol) {
                sp.bc.fix(static_cast<int>(n), {0.0, 0.0});
                sp.bottom_imposed.push_back(static_cast<int>(n));
            }
        }
        if (sp.top_imposed.empty() || sp.bottom_imposed.empty())
            throw std::runtime_error("build_specimen: bar end rows not found for the grips");
    }
    sp.pattern_magnitude = 1.0;
    return sp;
}

SimulationRecord run_quasistatic(Specimen& sp, const StopRules& rules) {
    SimulationRecord rec;
    rec.pattern_magnitude = sp.pattern_magnitude;
    rec.mean_mesh_size = sp.mesh.mean_size;
    rec.specimen_area = sp.specimen_area;
    rec.outline = sp.mesh.domain;
    rec.protocol = to_string(sp.config.protocol.kind);
    rec.mesh_seed = sp.mesh.seed;
    rec.grain_seed = sp.grains.seed;

    long breakable = 0;
    for (const auto& s : sp.states) breakable += (s.breakable && !s.broken) ? 1 : 0;
    if (breakable == 0) throw std::runtime_error("run_quasistatic: specimen has no breakable element");

    std::vector<Vec2> warm(sp.mesh.nodes.size());
    const double n_exp = sp.material.exponent;

    for (long event = 0; event < rules.max_events; ++event) {
        SolveOutcome sol;
        try {
            sol = solve_reference(sp.mesh, sp.states, sp.bc, rules.solver, &warm);
        } catch (const SolveError& err) {
            throw SolveError("event " + std::to_string(event) + ": " + err.what(), err.report);
        }
        warm = sol.u;
        rec.solver_iterations_total += sol.report.iterations;

        const double unit_reaction = reaction_force_at(sp.mesh, sp.states, sol.u, sp.top_imposed, sp.loading_axis);
        if (event == 0) rec.initial_unit_reaction = unit_reaction;
        rec.final_unit_reaction = unit_reaction;
        if (event > 0 && std::abs(unit_reaction) < rules.reaction_ratio * std::abs(rec.initial_unit_reaction)) {
            rec.terminated_reason = "reaction_collapsed";
            return rec;
        }

        const auto forces = element_forces(sp.mesh, sp.states, sol.u);
        double eta_min = std::numeric_limits<double>::infinity();
        int weakest = -1;
        std::array<double, 2> weakest_f{0.0, 0.0};
        for (std::size_t e = 0; e < sp.states.size(); ++e) {
            const ElementState& s = sp.states[e];
            if (s.broken || !s.breakable) continue;
            const double eta = failure_scale(forces[e][0], forces[e][1], sp.mesh.elements[e].eff_width,
                                             s.sigma_n0, s.sigma_t0, n_exp);
            if (std::isfinite(eta) && eta < eta_min * (1.0 - 1e-12)) {
                eta_min = eta;
                weakest = static_cast<int>(e);
                weakest_f = forces[e];
            }
        }
        if (weakest < 0) {
            rec.terminated_reason = "no_breakable_load_path";
            return rec;
        }

        ElementState& s = sp.states[weakest];
        const ElementGeom& g = sp.mesh.elements[weakest];
        BreakEvent ev;
        ev.index = static_cast<int>(rec.events.size());
        ev.element_id = weakest;
        ev.phase = s.phase;
        ev.midpoint = g.midpoint(sp.mesh.nodes);
        ev.eta_min = eta_min;
        ev.displacement = eta_min * sp.pattern_magnitude;
        ev.force = eta_min * unit_reaction;
        const double fn = eta_min * weakest_f[0], ft = eta_min * weakest_f[1];
        ev.e_actual = 0.5 * (fn * fn / s.Kn + ft * ft / s.Kt);
        ev.e_nominal = nominal_capacity_energy(g, s);
        ev.eff_width = g.eff_width;
        ev.Kn = s.Kn;
        ev.Kt = s.Kt;
        ev.sigma_n0 = s.sigma_n0;
        ev.sigma_t0 = s.sigma_t0;
        ev.solver_iterations = sol.report.iterations;
        ev.solver_residual = sol.report.gradient_norm;
        rec.events.push_back(ev);

        s.broken = true;
        s.dissipated_nominal = ev.e_nominal;
        s.dissipated_actual = ev.e_actual;
        if (--breakable == 0) {
            rec.terminated_reason = "all_breakable_elements_broken";
            return rec;
        }
    }
    rec.terminated_reason = "max_events";
    return rec;
}

void final_openings(Specimen& sp, SimulationRecord& rec, const SolverOptions& options) {
    if (rec.events.empty()) return;
    const double scale = rec.events.back().displacement / sp.pattern_magnitude;
    SolveOutcome sol = solve_reference(sp.mesh, sp.states, sp.bc, options);
    for (auto& ev : rec.events) {
        const ElementGeom& g = sp.mesh.elements[ev.element_id];
        const Vec2 d = sol.u[g.node_i] - sol.u[g.node_j];
        ev.opening = std::abs(d.dot(g.n0)) * scale;
        sp.states[ev.element_id].opening = ev.opening;
    }
}

std::string events_to_csv(const SimulationRecord& rec) {
    std::string out = "event_index,element_id,phase,midpoint_x,midpoint_y,eta_min,displacement,force,e_nominal,e_actual\n";
    char line[400];
    for (const auto& e : rec.events) {
        std::snprintf(line, sizeof(line), "%d,%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      e.index, e.element_id, to_string(e.phase), e.midpoint.x, e.midpoint.y,
                      e.eta_min, e.displacement, e.force, e.e_nominal, e.e_actual);
        out += line;
    }
    return out;
}

std::string record_to_json(const SimulationRecord& rec) {
    std::string out;
    out.reserve(rec.events.size() * 320 + 512);
    char buf[64];
    auto num = [&](double v) { std::snprintf(buf, sizeof(buf), "%.17g", v); out += buf; };
    out += "{\n\"protocol\": \"" + rec.protocol + "\",\n\"config_hash\": \"" + rec.config_hash + "\",\n";
    out += "\"mesh_seed\": " + std::to_string(rec.mesh_seed) + ",\n\"grain_seed\": " + std::to_string(rec.grain_seed) + ",\n";
    out += "\"terminated_reason\": \"" + rec.terminated_reason + "\",\n\"pattern_magnitude\": ";
    num(rec.pattern_magnitude);
    out += ",\n\"initial_unit_reaction\": ";
    num(rec.initial_unit_reaction);
    out += ",\n\"final_unit_reaction\": ";
    num(rec.final_unit_reaction);
    out += ",\n\"mean_mesh_size\": ";
    num(rec.mean_mesh_size);
    out += ",\n\"specimen_area\": ";
    num(rec.specimen_area);
    out += ",\n\"outline\": [";
    num(rec.outline.x0); out += ", "; num(rec.outline.y0); out += ", ";
    num(rec.outline.x1); out += ", "; num(rec.outline.y1);
    out += "],\n\"solver_iterations_total\": " + std::to_string(rec.solver_iterations_total);
    out += ",\n\"events\": [";
    for (std::size_t i = 0; i < rec.events.size(); ++i) {
        const BreakEvent& e = rec.events[i];
        out += (i ? ",\n" : "\n");
        out += "{\"i\": " + std::to_string(e.index) + ", \"element\": " + std::to_string(e.element_id) +
               ", \"phase\": \"" + to_string(e.phase) + "\", \"x\": ";
        num(e.midpoint.x); out += ", \"y\": "; num(e.midpoint.y);
        out += ", \"eta\": "; num(e.eta_min);
        out += ", \"d\": "; num(e.displacement);
        out += ", \"f\": "; num(e.force);
        out += ", \"e_nom\": "; num(e.e_nominal);
        out += ", \"e_act\": "; num(e.e_actual);
        out += ", \"A\": "; num(e.eff_width);
        out += ", \"Kn\": "; num(e.Kn);
        out += ", \"Kt\": "; num(e.Kt);
        out += ", \"sn0\": "; num(e.sigma_n0);
        out += ", \"st0\": "; num(e.sigma_t0);
        out += ", \"opening\": "; num(e.opening);
        out += ", \"cg_iters\": " + std::to_string(e.solver_iterations) + ", \"cg_residual\": ";
        num(e.solver_residual);
        out += "}";
    }
    out += "]\n}\n";
    return out;
}

SimulationRecord record_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    SimulationRecord rec;
    rec.protocol = j.value("protocol", "direct");
    rec.config_hash = j.value("config_hash", "");
    rec.mesh_seed = j.value("mesh_seed", std::uint64_t{0});
    rec.grain_seed = j.value("grain_seed", std::uint64_t{0});
    rec.terminated_reason = j.value("terminated_reason", "");
    rec.pattern_magnitude = j.value("pattern_magnitude", 1.0);
    rec.initial_unit_reaction = j.value("initial_unit_reaction", 0.0);
    rec.final_unit_reaction = j.value("final_unit_reaction", 0.0);
    rec.mean_mesh_size = j.value("mean_mesh_size", 0.0);
    rec.specimen_area = j.value("specimen_area", 0.0);
    rec.solver_iterations_total = j.value("solver_iterations_total", long{0});
    if (j.contains("outline")) {
        const auto& o = j.at("outline");
        rec.outline = Rect(o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>(), o.at(3).get<double>());
    }
    for (const auto& e : j.at("events")) {
        BreakEvent ev;
        ev.index = e.at("i").get<int>();
        ev.element_id = e.at("element").get<int>();
        ev.phase = phase_from_string_(e.at("phase").get<std::string>());
        ev.midpoint = {e.at("x").get<double>(), e.at("y").get<double>()};
        ev.eta_min = e.at("eta").get<double>();
        ev.displacement = e.at("d").get<double>();
        ev.force = e.at("f").get<double>();
        ev.e_nominal = e.at("e_nom").get<double>();
        ev.e_actual = e.at("e_act").get<double>();
        ev.eff_width = e.at("A").get<double>();
        ev.Kn = e.at("Kn").get<double>();
        ev.Kt = e.at("Kt").get<double>();
        ev.sigma_n0 = e.at("sn0").get<double>();
        ev.sigma_t0 = e.at("st0").get<double>();
        ev.opening = e.value("opening", 0.0);
        ev.solver_iterations = e.value("cg_iters", long{0});
        ev.solver_residual = e.value("cg_residual", 0.0);
        rec.events.push_back(ev);
    }
    return rec;
}

}  // namespace latfrac
