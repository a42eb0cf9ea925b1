#include "latfrac/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "latfrac/delaunay.hpp"

namespace latfrac {

const char* to_string(BoundaryTag tag) {
    switch (tag) {
        case BoundaryTag::interior: return "interior";
        case BoundaryTag::bottom: return "bottom";
        case BoundaryTag::top: return "top";
        case BoundaryTag::left: return "left";
        case BoundaryTag::right: return "right";
        case BoundaryTag::notch_face: return "notch_face";
        case BoundaryTag::bar_interface: return "bar_interface";
    }
    return "interior";
}

BoundaryTag boundary_tag_from_string(const std::string& s) {
    if (s == "interior") return BoundaryTag::interior;
    if (s == "bottom") return BoundaryTag::bottom;
    if (s == "top") return BoundaryTag::top;
    if (s == "left") return BoundaryTag::left;
    if (s == "right") return BoundaryTag::right;
    if (s == "notch_face") return BoundaryTag::notch_face;
    if (s == "bar_interface") return BoundaryTag::bar_interface;
    throw std::invalid_argument("unknown boundary tag: " + s);
}

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b - a).cross(c - a));
}

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// Orient triangles CCW, compute centroids, enumerate undirected edges in
// first-seen order, and wire element/triangle adjacency.
void assemble_topology(LatticeMesh& mesh, std::vector<std::array<int, 3>> tris) {
    mesh.triangles.clear();
    mesh.triangles.reserve(tris.size());
    for (auto& t : tris) {
        const Vec2& a = mesh.nodes[t[0]].pos;
        const Vec2& b = mesh.nodes[t[1]].pos;
        const Vec2& c = mesh.nodes[t[2]].pos;
        double ar = signed_area(a, b, c);
        if (ar < 0.0) { std::swap(t[1], t[2]); ar = -ar; }
        if (ar <= 1e-12)
            throw std::runtime_error("degenerate triangle (" + std::to_string(t[0]) + "," +
                                     std::to_string(t[1]) + "," + std::to_string(t[2]) +
                                     "): area " + std::to_string(ar) + " mm^2");
        Triangle tri;
        tri.nodes = t;
        tri.centroid = (1.0 / 3.0) * (a + b + c);
        mesh.triangles.push_back(tri);
    }

    mesh.elements.clear();
    std::unordered_map<std::uint64_t, int> edge_index;
    edge_index.reserve(mesh.triangles.size() * 2);
    for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
        const auto& ns = mesh.triangles[ti].nodes;
        for (int k = 0; k < 3; ++k) {
            int a = ns[k], b = ns[(k + 1) % 3];
            auto [it, fresh] = edge_index.try_emplace(edge_key(a, b), static_cast<int>(mesh.elements.size()));
            if (fresh) {
                ElementGeom e;
                e.node_i = std::min(a, b);
                e.node_j = std::max(a, b);
                e.adjacent_triangles = {static_cast<int>(ti), -1};
                mesh.elements.push_back(e);
            } else {
                ElementGeom& e = mesh.elements[it->second];
                if (e.adjacent_triangles[1] >= 0)
                    throw std::runtime_error("non-manifold edge " + std::to_string(e.node_i) + "-" +
                                             std::to_string(e.node_j));
                e.adjacent_triangles[1] = static_cast<int>(ti);
            }
        }
    }
}

void recompute_mean_size(LatticeMesh& mesh) {
    if (mesh.elements.empty()) { mesh.mean_size = 0.0; return; }
    double total = 0.0;
    for (const auto& e : mesh.elements) total += e.length;
    mesh.mean_size = total / static_cast<double>(mesh.elements.size());
}

struct GridNode {
    Vec2 pos;
    BoundaryTag tag;
    bool corner;
    double tangential_clearance;  // nearest same-side neighbor distance
};

}  // namespace

void rebuild_topology(LatticeMesh& mesh, std::vector<std::array<int, 3>> triangles) {
    assemble_topology(mesh, std::move(triangles));
    compute_effective_widths(mesh);
}

double LatticeMesh::triangle_area_sum() const {
    double s = 0.0;
    for (const auto& t : triangles)
        s += signed_area(nodes[t.nodes[0]].pos, nodes[t.nodes[1]].pos, nodes[t.nodes[2]].pos);
    return s;
}

void compute_effective_widths(LatticeMesh& mesh) {
    for (std::size_t ei = 0; ei < mesh.elements.size(); ++ei) {
        ElementGeom& e = mesh.elements[ei];
        const Vec2& pi = mesh.nodes[e.node_i].pos;
        const Vec2& pj = mesh.nodes[e.node_j].pos;
        e.length = (pi - pj).norm();
        if (!(e.length > 0.0))
            throw std::runtime_error("zero-length element " + std::to_string(ei));
        e.n0 = (1.0 / e.length) * (pi - pj);
        e.t0 = e.n0.rot90();

        const int nt = e.triangle_count();
        if (nt == 2) {
            Vec2 d = mesh.triangles[e.adjacent_triangles[0]].centroid -
                     mesh.triangles[e.adjacent_triangles[1]].centroid;
            e.eff_width = std::abs(d.dot(e.t0));
        } else if (nt == 1) {
            // symmetrize the missing half-space: twice the projected distance
            // from the single centroid to the edge midpoint
            Vec2 mid = 0.5 * (pi + pj);
            Vec2 d = mesh.triangles[e.adjacent_triangles[0]].centroid - mid;
            e.eff_width = 2.0 * std::abs(d.dot(e.t0));
        } else {
            throw std::runtime_error("element " + std::to_string(ei) + " has no adjacent triangle");
        }
        if (!(e.eff_width > 0.0))
            throw std::runtime_error("degenerate effective width on element " + std::to_string(ei));
    }
    recompute_mean_size(mesh);
}

LatticeMesh generate_mesh(const Rect& domain, double l_m, std::uint64_t seed, const MeshOptions& options) {
    if (!(l_m > 0.0)) throw std::invalid_argument("generate_mesh: l_m must be positive");
    const double w = domain.width(), h = domain.height();
    if (w < 3.0 * l_m || h < 3.0 * l_m)
        throw std::invalid_argument("generate_mesh: domain " + std::to_string(w) + "x" + std::to_string(h) +
                                    " mm too small for l_m = " + std::to_string(l_m) +
                                    " mm (need at least 3*l_m per side)");
    if (options.perturbation_ratio < 0.0 || options.perturbation_ratio > 0.45)
        throw std::invalid_argument("generate_mesh: perturbation ratio outside [0, 0.45]");

    // grid fitted to the rectangle; row height as close as possible to the
    // equilateral value sqrt(3)/2 * dx
    const int nx = std::max(3, static_cast<int>(std::llround(w / l_m)));
    const double dx = w / nx;
    const int ny = std::max(3, static_cast<int>(std::llround(h / (0.5 * std::sqrt(3.0) * dx))));
    const double dy = h / ny;
    const double radius = options.perturbation_ratio * l_m;

    std::vector<GridNode> grid;
    std::vector<std::vector<int>> rows(ny + 1);
    for (int j = 0; j <= ny; ++j) {
        const bool hrow = (j == 0) || (j == ny);
        const double y = (j == ny) ? domain.y1 : domain.y0 + j * dy;
        std::vector<double> xs;
        if (j % 2 == 0) {
            for (int i = 0; i <= nx; ++i) xs.push_back(i == nx ? domain.x1 : domain.x0 + i * dx);
        } else {
            xs.push_back(domain.x0);
            for (int i = 0; i < nx; ++i) xs.push_back(domain.x0 + (i + 0.5) * dx);
            xs.push_back(domain.x1);
        }
        for (std::size_t k = 0; k < xs.size(); ++k) {
            GridNode gn;
            gn.pos = {xs[k], y};
            const bool on_left = (k == 0), on_right = (k + 1 == xs.size());
            gn.corner = hrow && (on_left || on_right);
            if (hrow) gn.tag = (j == 0) ? BoundaryTag::bottom : BoundaryTag::top;
            else if (on_left) gn.tag = BoundaryTag::left;
            else if (on_right) gn.tag = BoundaryTag::right;
            else gn.tag = BoundaryTag::interior;
            if (hrow) {
                double gap = dx;
                if (k > 0) gap = std::min(gap, xs[k] - xs[k - 1]);
                if (k + 1 < xs.size()) gap = std::min(gap, xs[k + 1] - xs[k]);
                gn.tangential_clearance = gap;
            } else {
                gn.tangential_clearance = dy;
            }
            rows[j].push_back(static_cast<int>(grid.size()));
            grid.push_back(gn);
        }
    }

    LatticeMesh mesh;
    mesh.domain = domain;
    mesh.seed = seed;
    mesh.target_size = l_m;
    mesh.min_size = radius;

    Rng rng(seed);
    mesh.nodes.reserve(grid.size());
    for (const GridNode& gn : grid) {
        Node n;
        n.tag = gn.tag;
        n.pos = gn.pos;
        if (radius > 0.0 && !gn.corner) {
            if (gn.tag == BoundaryTag::interior) {
                n.pos += rng.in_disk(radius);
            } else {
                // tangential only, clamped so side nodes cannot swap order
                double s = std::min(radius, 0.4 * gn.tangential_clearance);
                double shift = rng.uniform(-s, s);
                if (gn.tag == BoundaryTag::left || gn.tag == BoundaryTag::right) n.pos.y += shift;
                else n.pos.x += shift;
            }
        }
        mesh.nodes.push_back(n);
    }

    std::vector<std::array<int, 3>> tris;
    if (radius == 0.0) {
        // an exactly regular grid is Delaunay-degenerate (cocircular quads);
        // triangulate strip by strip with deterministic tie-breaking
        std::vector<Vec2> pts(mesh.nodes.size());
        for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = mesh.nodes[i].pos;
        for (int j = 0; j < ny; ++j) {
            auto strip = triangulate_strip(pts, rows[j], rows[j + 1]);
            tris.insert(tris.end(), strip.begin(), strip.end());
        }
    } else {
        std::vector<Vec2> pts(mesh.nodes.size());
        for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = mesh.nodes[i].pos;
        tris = delaunay_triangulate(pts);
    }

    assemble_topology(mesh, std::move(tris));
    compute_effective_widths(mesh);
    return mesh;
}

LatticeMesh carve_notch(const LatticeMesh& mesh, const Rect& notch) {
    if (notch.empty()) return mesh;

    const std::size_t nn = mesh.nodes.size();
    const std::size_t ne = mesh.elements.size();
    const std::size_t nt = mesh.triangles.size();

    std::vector<char> node_del(nn, 0);
    for (std::size_t i = 0; i < nn; ++i)
        node_del[i] = notch.contains_strict(mesh.nodes[i].pos) ? 1 : 0;

    std::vector<char> elem_keep(ne, 1);
    for (std::size_t ei = 0; ei < ne; ++ei) {
        const ElementGeom& e = mesh.elements[ei];
        if (node_del[e.node_i] || node_del[e.node_j] ||
            segment_intersects_open_rect(mesh.nodes[e.node_i].pos, mesh.nodes[e.node_j].pos, notch))
            elem_keep[ei] = 0;
    }
    if (std::all_of(elem_keep.begin(), elem_keep.end(), [](char c) { return c == 1; })) return mesh;

    std::unordered_map<std::uint64_t, int> edge_of;
    edge_of.reserve(ne * 2);
    for (std::size_t ei = 0; ei < ne; ++ei)
        edge_of[edge_key(mesh.elements[ei].node_i, mesh.elements[ei].node_j)] = static_cast<int>(ei);

    std::vector<char> tri_keep(nt, 1);
    for (std::size_t ti = 0; ti < nt; ++ti) {
        const auto& ns = mesh.triangles[ti].nodes;
        for (int k = 0; k < 3 && tri_keep[ti]; ++k) {
            if (node_del[ns[k]]) tri_keep[ti] = 0;
            else if (!elem_keep[edge_of.at(edge_key(ns[k], ns[(k + 1) % 3]))]) tri_keep[ti] = 0;
        }
    }

    // an element stripped of both its triangles has no width left; drop it
    std::vector<int> tri_count(ne, 0);
    for (std::size_t ti = 0; ti < nt; ++ti) {
        if (!tri_keep[ti]) continue;
        const auto& ns = mesh.triangles[ti].nodes;
        for (int k = 0; k < 3; ++k) ++tri_count[edge_of.at(edge_key(ns[k], ns[(k + 1) % 3]))];
    }
    for (std::size_t ei = 0; ei < ne; ++ei)
        if (elem_keep[ei] && tri_count[ei] == 0) elem_keep[ei] = 0;

    std::vector<char> node_keep(nn, 0);
    for (std::size_t ei = 0; ei < ne; ++ei) {
        if (!elem_keep[ei]) continue;
        node_keep[mesh.elements[ei].node_i] = 1;
        node_keep[mesh.elements[ei].node_j] = 1;
    }

    // newly exposed faces: surviving interior nodes that lost a triangle
    std::vector<char> exposed(nn, 0);
    for (std::size_t ti = 0; ti < nt; ++ti) {
        if (tri_keep[ti]) continue;
        for (int n : mesh.triangles[ti].nodes) exposed[n] = 1;
    }
    for (std::size_t ei = 0; ei < ne; ++ei) {
        if (elem_keep[ei]) continue;
        exposed[mesh.elements[ei].node_i] = 1;
        exposed[mesh.elements[ei].node_j] = 1;
    }

    LatticeMesh out;
    out.domain = mesh.domain;
    out.seed = mesh.seed;
    out.target_size = mesh.target_size;
    out.min_size = mesh.min_size;

    std::vector<int> node_map(nn, -1);
    for (std::size_t i = 0; i < nn; ++i) {
        if (!node_keep[i]) continue;
        Node n = mesh.nodes[i];
        if (exposed[i] && n.tag == BoundaryTag::interior) n.tag = BoundaryTag::notch_face;
        node_map[i] = static_cast<int>(out.nodes.size());
        out.nodes.push_back(n);
    }

    std::vector<std::array<int, 3>> tris;
    for (std::size_t ti = 0; ti < nt; ++ti) {
        if (!tri_keep[ti]) continue;
        const auto& ns = mesh.triangles[ti].nodes;
        tris.push_back({node_map[ns[0]], node_map[ns[1]], node_map[ns[2]]});
    }
    assemble_topology(out, std::move(tris));
    compute_effective_widths(out);

    // the carved specimen must keep its loaded boundaries connected
    std::vector<int> parent(out.nodes.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) { while (parent[a] != a) a = parent[a] = parent[parent[a]]; return a; };
    for (const auto& e : out.elements) parent[find(e.node_i)] = find(e.node_j);
    int loaded_component = -1;
    for (std::size_t i = 0; i < out.nodes.size(); ++i) {
        const BoundaryTag t = out.nodes[i].tag;
        if (t != BoundaryTag::bottom && t != BoundaryTag::top) continue;
        int c = find(static_cast<int>(i));
        if (loaded_component < 0) loaded_component = c;
        else if (loaded_component != c)
            throw std::runtime_error("carve_notch: notch disconnects the loaded boundaries (invalid specimen)");
    }
    return out;
}

void validate_mesh(const LatticeMesh& mesh) {
    std::unordered_map<std::uint64_t, int> seen;
    for (std::size_t ei = 0; ei < mesh.elements.size(); ++ei) {
        const ElementGeom& e = mesh.elements[ei];
        if (!seen.emplace(edge_key(e.node_i, e.node_j), static_cast<int>(ei)).second)
            throw std::runtime_error("duplicate edge " + std::to_string(e.node_i) + "-" + std::to_string(e.node_j));
        if (!(e.length > 0.0) || !(e.eff_width > 0.0))
            throw std::runtime_error("element " + std::to_string(ei) + " has non-positive geometry");
        if (std::abs(e.n0.norm() - 1.0) > 1e-12 || std::abs(e.n0.dot(e.t0)) > 1e-12)
            throw std::runtime_error("element " + std::to_string(ei) + " local frame broken");
        for (int t : e.adjacent_triangles) {
            if (t < 0) continue;
            const auto& ns = mesh.triangles[t].nodes;
            bool has_i = false, has_j = false;
            for (int n : ns) { has_i |= (n == e.node_i); has_j |= (n == e.node_j); }
            if (!has_i || !has_j)
                throw std::runtime_error("element " + std::to_string(ei) + " adjacency mismatch");
        }
    }
    int edge_refs = 0;
    for (const auto& t : mesh.triangles) {
        if (signed_area(mesh.nodes[t.nodes[0]].pos, mesh.nodes[t.nodes[1]].pos, mesh.nodes[t.nodes[2]].pos) <= 0.0)
            throw std::runtime_error("non-CCW triangle");
        for (int k = 0; k < 3; ++k) {
            if (!seen.count(edge_key(t.nodes[k], t.nodes[(k + 1) % 3])))
                throw std::runtime_error("triangle references missing edge");
            ++edge_refs;
        }
    }
    // Euler characteristic V - E + T = number of disk-like components
    std::vector<int> parent(mesh.nodes.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) { while (parent[a] != a) a = parent[a] = parent[parent[a]]; return a; };
    for (const auto& e : mesh.elements) parent[find(e.node_i)] = find(e.node_j);
    int components = 0;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
        if (find(static_cast<int>(i)) == static_cast<int>(i)) ++components;
    const long euler = static_cast<long>(mesh.nodes.size()) - static_cast<long>(mesh.elements.size()) +
                       static_cast<long>(mesh.triangles.size());
    if (euler != components)
        throw std::runtime_error("Euler characteristic " + std::to_string(euler) + " != components " +
                                 std::to_string(components));
    (void)edge_refs;
}

std::string mesh_to_json(const LatticeMesh& mesh) {
    std::string out;
    out.reserve(mesh.nodes.size() * 48 + mesh.elements.size() * 96 + mesh.triangles.size() * 24);
    char buf[64];
    auto num = [&](double v) { std::snprintf(buf, sizeof(buf), "%.17g", v); out += buf; };
    out += "{\n\"seed\": " + std::to_string(mesh.seed) + ",\n\"l_m\": ";
    num(mesh.target_size);
    out += ",\n\"l_min\": ";
    num(mesh.min_size);
    out += ",\n\"mean_size\": ";
    num(mesh.mean_size);
    out += ",\n\"domain\": [";
    num(mesh.domain.x0); out += ", "; num(mesh.domain.y0); out += ", ";
    num(mesh.domain.x1); out += ", "; num(mesh.domain.y1);
    out += "],\n\"nodes\": [";
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        out += (i ? ",\n[" : "\n[");
        num(mesh.nodes[i].pos.x); out += ", "; num(mesh.nodes[i].pos.y);
        out += ", \""; out += to_string(mesh.nodes[i].tag); out += "\"]";
    }
    out += "],\n\"triangles\": [";
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
        const auto& t = mesh.triangles[i].nodes;
        out += (i ? ",\n" : "\n");
        out += "[" + std::to_string(t[0]) + ", " + std::to_string(t[1]) + ", " + std::to_string(t[2]) + "]";
    }
    out += "],\n\"elements\": [";
    for (std::size_t i = 0; i < mesh.elements.size(); ++i) {
        const ElementGeom& e = mesh.elements[i];
        out += (i ? ",\n[" : "\n[");
        out += std::to_string(e.node_i) + ", " + std::to_string(e.node_j) + ", ";
        num(e.length); out += ", "; num(e.eff_width); out += ", ";
        num(e.n0.x); out += ", "; num(e.n0.y);
        out += "]";
    }
    out += "]\n}\n";
    return out;
}

LatticeMesh mesh_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    LatticeMesh mesh;
    mesh.seed = j.at("seed").get<std::uint64_t>();
    mesh.target_size = j.at("l_m").get<double>();
    mesh.min_size = j.value("l_min", 0.0);
    if (j.contains("domain")) {
        const auto& d = j.at("domain");
        mesh.domain = Rect(d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>(), d.at(3).get<double>());
    }
    for (const auto& n : j.at("nodes")) {
        Node node;
        node.pos = {n.at(0).get<double>(), n.at(1).get<double>()};
        node.tag = boundary_tag_from_string(n.at(2).get<std::string>());
        mesh.nodes.push_back(node);
    }
    std::vector<std::array<int, 3>> tris;
    for (const auto& t : j.at("triangles"))
        tris.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
    assemble_topology(mesh, std::move(tris));
    compute_effective_widths(mesh);
    return mesh;
}

}  // namespace latfrac
