#ifndef LATFRAC_GEOMETRY_HPP
#define LATFRAC_GEOMETRY_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace latfrac {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
    Vec2 normalized() const { double n = norm(); return {x / n, y / n}; }
    // +90 degree rotation
    Vec2 rot90() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }

struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    Rect() = default;
    Rect(double x0_, double y0_, double x1_, double y1_) : x0(x0_), y0(y0_), x1(x1_), y1(y1_) {}
    static Rect sized(double w, double h) { return {0.0, 0.0, w, h}; }

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    bool empty() const { return x1 <= x0 || y1 <= y0; }
    bool contains(const Vec2& p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
    bool contains_strict(const Vec2& p) const { return p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1; }
    Vec2 center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
};

// Does the closed segment [a,b] meet the open rectangle r?
// Liang-Barsky clip against the closed box, then test the clipped midpoint
// strictly inside (rejects segments lying on the box boundary).
inline bool segment_intersects_open_rect(const Vec2& a, const Vec2& b, const Rect& r) {
    if (r.empty()) return false;
    double t0 = 0.0, t1 = 1.0;
    const double dx = b.x - a.x, dy = b.y - a.y;
    auto clip = [&](double p, double q) {
        if (p == 0.0) return q >= 0.0;  // parallel: keep iff inside the slab
        double t = q / p;
        if (p < 0.0) { if (t > t1) return false; if (t > t0) t0 = t; }
        else         { if (t < t0) return false; if (t < t1) t1 = t; }
        return true;
    };
    if (!clip(-dx, a.x - r.x0)) return false;
    if (!clip( dx, r.x1 - a.x)) return false;
    if (!clip(-dy, a.y - r.y0)) return false;
    if (!clip( dy, r.y1 - a.y)) return false;
    if (t0 > t1) return false;
    Vec2 mid = a + 0.5 * (t0 + t1) * (b - a);
    return r.contains_strict(mid);
}

// Deterministic RNG. std::uniform_real_distribution is implementation-defined,
// so doubles are derived from raw mt19937_64 words directly; streams are
// reproducible across platforms for a fixed seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform over the open disk of given radius
    Vec2 in_disk(double radius) {
        double theta = uniform() * 2.0 * M_PI;
        double rad = radius * std::sqrt(uniform());
        return {rad * std::cos(theta), rad * std::sin(theta)};
    }

private:
    std::mt19937_64 gen_;
};

// SplitMix64 step; used to derive independent child seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = mix_seed(master);
    s = mix_seed(s ^ (a + 0x100000001b3ULL));
    s = mix_seed(s ^ (b + 0xcbf29ce484222325ULL));
    s = mix_seed(s ^ c);
    return s;
}

}  // namespace latfrac

#endif
