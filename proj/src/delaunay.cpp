#include "latfrac/delaunay.hpp"

#include <cmath>
#include <stdexcept>

namespace latfrac {

namespace {

// > 0 if c is left of the directed line a->b
double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

// > 0 if p is strictly inside the circumcircle of the CCW triangle (a,b,c).
// Computed on translated coordinates; adequate for the generic point sets
// this triangulator is used on.
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
    const double ax = a.x - p.x, ay = a.y - p.y;
    const double bx = b.x - p.x, by = b.y - p.y;
    const double cx = c.x - p.x, cy = c.y - p.y;
    const double a2 = ax * ax + ay * ay;
    const double b2 = bx * bx + by * by;
    const double c2 = cx * cx + cy * cy;
    return ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
}

struct Tri {
    std::array<int, 3> v;    // CCW
    std::array<int, 3> adj;  // adj[k] shares edge (v[k], v[k+1]); -1 on hull
    bool alive = true;
};

class BowyerWatson {
public:
    explicit BowyerWatson(const std::vector<Vec2>& pts) : input_(pts) {
        pts_ = pts;
        // super-triangle, asymmetric on purpose to dodge symmetric ties
        double lo_x = pts[0].x, hi_x = pts[0].x, lo_y = pts[0].y, hi_y = pts[0].y;
        for (const Vec2& p : pts) {
            lo_x = std::min(lo_x, p.x); hi_x = std::max(hi_x, p.x);
            lo_y = std::min(lo_y, p.y); hi_y = std::max(hi_y, p.y);
        }
        const double cx = 0.5 * (lo_x + hi_x), cy = 0.5 * (lo_y + hi_y);
        const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1.0});
        const double r = 37.123 * span;
        const int n = static_cast<int>(pts_.size());
        pts_.push_back({cx + r * std::cos(0.17), cy + r * std::sin(0.17)});
        pts_.push_back({cx + r * std::cos(2.31), cy + r * std::sin(2.31)});
        pts_.push_back({cx + r * std::cos(4.47), cy + r * std::sin(4.47)});
        Tri t;
        t.v = {n, n + 1, n + 2};
        if (orient2d(pts_[n], pts_[n + 1], pts_[n + 2]) < 0.0) std::swap(t.v[1], t.v[2]);
        t.adj = {-1, -1, -1};
        tris_.push_back(t);
        last_ = 0;
        for (int i = 0; i < n; ++i) insert(i);
    }

    std::vector<std::array<int, 3>> triangles() const {
        const int n = static_cast<int>(input_.size());
        std::vector<std::array<int, 3>> out;
        for (const Tri& t : tris_) {
            if (!t.alive) continue;
            if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
            out.push_back(t.v);
        }
        return out;
    }

private:
    const std::vector<Vec2>& input_;
    std::vector<Vec2> pts_;
    std::vector<Tri> tris_;
    int last_ = 0;

    int locate(const Vec2& p) const {
        int t = last_;
        const int guard = static_cast<int>(tris_.size()) * 4 + 64;
        for (int step = 0; step < guard; ++step) {
            bool moved = false;
            for (int k = 0; k < 3; ++k) {
                const Vec2& a = pts_[tris_[t].v[k]];
                const Vec2& b = pts_[tris_[t].v[(k + 1) % 3]];
                if (orient2d(a, b, p) < 0.0) {
                    int next = tris_[t].adj[k];
                    if (next >= 0) { t = next; moved = true; break; }
                }
            }
            if (!moved) return t;
        }
        // walk cycled (should not happen for valid states): brute force
        for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
            if (!tris_[i].alive) continue;
            bool inside = true;
            for (int k = 0; k < 3 && inside; ++k)
                inside = orient2d(pts_[tris_[i].v[k]], pts_[tris_[i].v[(k + 1) % 3]], p) >= 0.0;
            if (inside) return i;
        }
        throw std::runtime_error("delaunay: point location failed");
    }

    void insert(int ip) {
        const Vec2& p = pts_[ip];
        const int seed = locate(p);

        // grow the cavity: connected set of triangles whose circumcircle
        // strictly contains p
        std::vector<int> cavity;
        std::vector<int> stack{seed};
        std::vector<char> in_cavity(tris_.size(), 0);
        in_cavity[seed] = 1;
        while (!stack.empty()) {
            int t = stack.back();
            stack.pop_back();
            cavity.push_back(t);
            for (int k = 0; k < 3; ++k) {
                int nb = tris_[t].adj[k];
                if (nb < 0 || in_cavity[nb]) continue;
                const Tri& o = tris_[nb];
                if (incircle(pts_[o.v[0]], pts_[o.v[1]], pts_[o.v[2]], p) > 0.0) {
                    in_cavity[nb] = 1;
                    stack.push_back(nb);
                }
            }
        }

        // boundary edges of the cavity, directed so p lies to their left
        struct Edge { int a, b, outer; };
        std::vector<Edge> boundary;
        for (int t : cavity) {
            for (int k = 0; k < 3; ++k) {
                int nb = tris_[t].adj[k];
                if (nb >= 0 && in_cavity[nb]) continue;
                boundary.push_back({tris_[t].v[k], tris_[t].v[(k + 1) % 3], nb});
            }
        }
        for (int t : cavity) tris_[t].alive = false;

        // retriangulate the cavity as a fan around p
        std::vector<int> fresh(boundary.size());
        for (std::size_t e = 0; e < boundary.size(); ++e) {
            Tri t;
            t.v = {boundary[e].a, boundary[e].b, ip};
            t.adj = {boundary[e].outer, -1, -1};
            fresh[e] = static_cast<int>(tris_.size());
            tris_.push_back(t);
            if (boundary[e].outer >= 0) {
                Tri& o = tris_[boundary[e].outer];
                for (int k = 0; k < 3; ++k)
                    if (o.v[k] == boundary[e].b && o.v[(k + 1) % 3] == boundary[e].a) o.adj[k] = fresh[e];
            }
        }
        // stitch the fan: edge (b, ip) of one new triangle matches edge
        // (ip, a) of the triangle whose boundary edge starts at b
        for (std::size_t e = 0; e < boundary.size(); ++e) {
            for (std::size_t f = 0; f < boundary.size(); ++f) {
                if (boundary[f].a == boundary[e].b) {
                    tris_[fresh[e]].adj[1] = fresh[f];
                    tris_[fresh[f]].adj[2] = fresh[e];
                }
            }
        }
        last_ = fresh.empty() ? last_ : fresh[0];
    }
};

}  // namespace

std::vector<std::array<int, 3>> delaunay_triangulate(const std::vector<Vec2>& points) {
    if (points.size() < 3) throw std::invalid_argument("delaunay: need at least 3 points");
    BowyerWatson bw(points);
    return bw.triangles();
}

std::vector<std::array<int, 3>> triangulate_strip(const std::vector<Vec2>& points,
                                                  const std::vector<int>& lower,
                                                  const std::vector<int>& upper) {
    std::vector<std::array<int, 3>> out;
    std::size_t i = 0, j = 0;
    auto emit_lower = [&]() {  // triangle (L_i, L_{i+1}, U_j)
        out.push_back({lower[i], lower[i + 1], upper[j]});
        ++i;
    };
    auto emit_upper = [&]() {  // triangle (L_i, U_{j+1}, U_j)
        out.push_back({lower[i], upper[j + 1], upper[j]});
        ++j;
    };
    while (i + 1 < lower.size() || j + 1 < upper.size()) {
        if (i + 1 >= lower.size()) { emit_upper(); continue; }
        if (j + 1 >= upper.size()) { emit_lower(); continue; }
        const Vec2& a = points[lower[i]];
        const Vec2& b = points[lower[i + 1]];
        const Vec2& c = points[upper[j + 1]];
        const Vec2& d = points[upper[j]];
        // advance along the row whose candidate triangle's circumcircle
        // excludes the other candidate vertex; ties advance the lower row
        const double ax = a.x - c.x, ay = a.y - c.y;
        const double bx = b.x - c.x, by = b.y - c.y;
        const double dx = d.x - c.x, dy = d.y - c.y;
        const double det = (ax * ax + ay * ay) * (bx * dy - by * dx)
                         - (bx * bx + by * by) * (ax * dy - ay * dx)
                         + (dx * dx + dy * dy) * (ax * by - ay * bx);
        // det is the incircle test of c against CCW triangle (a,b,d)
        if (det <= 0.0) emit_lower();
        else emit_upper();
    }
    return out;
}

}  // namespace latfrac
