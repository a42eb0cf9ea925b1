#ifndef LATFRAC_MESH_HPP
#define LATFRAC_MESH_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "latfrac/geometry.hpp"

namespace latfrac {

enum class BoundaryTag : std::uint8_t {
    interior,
    bottom,
    top,
    left,
    right,
    notch_face,
    bar_interface,
};

const char* to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_string(const std::string& s);

struct Node {
    Vec2 pos;  // mm
    BoundaryTag tag = BoundaryTag::interior;
};

struct Triangle {
    std::array<int, 3> nodes{};  // CCW
    Vec2 centroid;
};

// One lattice element (edge of the triangulation) with its rest geometry.
// n0 points from node j to node i, so stretching gives a positive normal
// length variation; t0 is n0 rotated by +90 degrees.
struct ElementGeom {
    int node_i = -1;
    int node_j = -1;
    double length = 0.0;     // mm
    double eff_width = 0.0;  // mm
    Vec2 n0;
    Vec2 t0;
    std::array<int, 2> adjacent_triangles{-1, -1};  // second is -1 on boundary

    int triangle_count() const { return (adjacent_triangles[0] >= 0 ? 1 : 0) + (adjacent_triangles[1] >= 0 ? 1 : 0); }
    Vec2 midpoint(const std::vector<Node>& nodes) const {
        return 0.5 * (nodes[node_i].pos + nodes[node_j].pos);
    }
};

struct LatticeMesh {
    std::vector<Node> nodes;
    std::vector<Triangle> triangles;
    std::vector<ElementGeom> elements;
    double mean_size = 0.0;    // realized mean edge length [mm]
    double min_size = 0.0;     // node perturbation radius l_min [mm]
    double target_size = 0.0;  // requested l_m [mm]
    std::uint64_t seed = 0;
    Rect domain;               // specimen outline (bars excluded)

    double triangle_area_sum() const;
};

struct MeshOptions {
    // l_min / l_m; 0.4 keeps the perturbed grid Delaunay-valid and triangles
    // non-degenerate
    double perturbation_ratio = 0.4;
};

// Disordered triangular lattice over the rectangle: nodes on a regular
// triangular grid of spacing ~l_m, interior nodes displaced by a uniform
// random vector of magnitude < l_min, boundary nodes displaced only along
// their edge, corners fixed; Delaunay-triangulated. Pure function of
// (domain, l_m, seed, options).
LatticeMesh generate_mesh(const Rect& domain, double l_m, std::uint64_t seed,
                          const MeshOptions& options = {});

// Recompute rest geometry (length, n0/t0, effective width) of every element
// from current node positions and triangle adjacency. The effective width of
// an interior element is the distance between the adjacent-triangle
// centroids projected on t0; a boundary element takes twice the projected
// distance from its single centroid to the edge midpoint.
void compute_effective_widths(LatticeMesh& mesh);

// Remove every element whose segment meets the open notch rectangle, nodes
// strictly inside it, and everything orphaned by those removals; recompute
// adjacency and widths on the surviving triangulation. Surviving interior
// nodes that lost an incident triangle are retagged notch_face.
LatticeMesh carve_notch(const LatticeMesh& mesh, const Rect& notch);

// Replace triangles/elements/adjacency with the given triangle list over the
// current node set (orientation normalized, widths recomputed). Used when a
// builder appends nodes and triangles, e.g. the loading-bar strips.
void rebuild_topology(LatticeMesh& mesh, std::vector<std::array<int, 3>> triangles);

// Structural soundness: each undirected edge once, consistent adjacency,
// positive triangle areas, positive widths. Throws on violation.
void validate_mesh(const LatticeMesh& mesh);

std::string mesh_to_json(const LatticeMesh& mesh);
LatticeMesh mesh_from_json(const std::string& text);

}  // namespace latfrac

#endif
