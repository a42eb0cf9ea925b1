#include "latfrac/mesostructure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace latfrac {

const char* to_string(Phase p) {
    switch (p) {
        case Phase::inclusion: return "inclusion";
        case Phase::matrix: return "matrix";
        case Phase::itz: return "itz";
        case Phase::bar: return "bar";
    }
    return "matrix";
}

namespace {

constexpr long kMaxConsecutiveRejections = 1'000'000;

bool disk_inside(const Rect& outline, const Vec2& c, double d) {
    const double r = 0.5 * d;
    return c.x - r >= outline.x0 && c.x + r <= outline.x1 && c.y - r >= outline.y0 && c.y + r <= outline.y1;
}

bool clears_all(const std::vector<Inclusion>& placed, const Vec2& c, double d, double gap_min) {
    for (const Inclusion& inc : placed) {
        const double need = 0.5 * (d + inc.diameter) + gap_min;
        if ((c - inc.center).norm2() < need * need) return false;
    }
    return true;
}

[[noreturn]] void packing_infeasible(double achieved, double target) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "take-and-place: %ld consecutive rejections (achieved fraction %.4f of target %.4f)",
                  kMaxConsecutiveRejections, achieved, target);
    throw std::runtime_error(msg);
}

double disk_area(double d) { return 0.25 * M_PI * d * d; }

}  // namespace

GrainStructure place_monodisperse(const Rect& outline, double d,
                                  std::optional<int> target_count, std::optional<double> target_fraction,
                                  double gap_min, std::uint64_t seed) {
    if (!(d > 0.0)) throw std::invalid_argument("place_monodisperse: diameter must be positive");
    if (d >= 0.5 * std::min(outline.width(), outline.height()))
        throw std::invalid_argument("place_monodisperse: diameter too large for the outline");
    if (target_count.has_value() == target_fraction.has_value())
        throw std::invalid_argument("place_monodisperse: give exactly one of count or fraction");

    GrainStructure g;
    g.outline = outline;
    g.seed = seed;
    g.spec.kind = GradingSpec::Kind::monodisperse;
    g.spec.d = d;
    g.spec.target_fraction = target_fraction.value_or(0.0);

    const double area = outline.area();
    const double quantum = disk_area(d) / area;
    Rng rng(seed);
    long rejections = 0;
    while (true) {
        if (target_count && static_cast<int>(g.inclusions.size()) >= *target_count) break;
        if (target_fraction && g.achieved_fraction + quantum > *target_fraction + 1e-12) break;
        Vec2 c{rng.uniform(outline.x0, outline.x1), rng.uniform(outline.y0, outline.y1)};
        if (disk_inside(outline, c, d) && clears_all(g.inclusions, c, d, gap_min)) {
            g.inclusions.push_back({c, d});
            g.achieved_fraction += quantum;
            rejections = 0;
        } else if (++rejections >= kMaxConsecutiveRejections) {
            packing_infeasible(g.achieved_fraction, target_fraction.value_or(0.0));
        }
    }
    return g;
}

GrainStructure rescale_diameters(const GrainStructure& grains, double new_d, double gap_min) {
    GrainStructure g = grains;
    g.spec.d = new_d;
    const double area = g.outline.area();
    g.achieved_fraction = 0.0;
    for (auto& inc : g.inclusions) {
        inc.diameter = new_d;
        g.achieved_fraction += disk_area(new_d) / area;
        if (!disk_inside(g.outline, inc.center, new_d))
            throw std::runtime_error("rescale_diameters: inclusion at (" + std::to_string(inc.center.x) + "," +
                                     std::to_string(inc.center.y) + ") leaves the outline at d = " +
                                     std::to_string(new_d));
    }
    for (std::size_t a = 0; a < g.inclusions.size(); ++a)
        for (std::size_t b = a + 1; b < g.inclusions.size(); ++b) {
            const double dist = (g.inclusions[a].center - g.inclusions[b].center).norm();
            if (dist < new_d + gap_min - 1e-12)
                throw std::runtime_error("rescale_diameters: pair (" + std::to_string(a) + "," + std::to_string(b) +
                                         ") violates the minimum gap: distance " + std::to_string(dist) +
                                         " < " + std::to_string(new_d + gap_min));
        }
    return g;
}

double fuller_passing(double D, double d_max, double q) {
    return std::pow(D / d_max, q);
}

GrainStructure place_fuller(const Rect& outline, double d_min, double d_max, double fraction,
                            int n_classes, double gap_min, std::uint64_t seed, double q) {
    if (!(0.0 < d_min && d_min < d_max)) throw std::invalid_argument("place_fuller: need 0 < d_min < d_max");
    if (n_classes < 2) throw std::invalid_argument("place_fuller: need at least 2 sieve classes");

    GrainStructure g;
    g.outline = outline;
    g.seed = seed;
    g.spec.kind = GradingSpec::Kind::fuller;
    g.spec.d_min = d_min;
    g.spec.d_max = d_max;
    g.spec.n_classes = n_classes;
    g.spec.target_fraction = fraction;
    g.spec.fuller_exponent = q;

    const double area = outline.area();
    const double span = fuller_passing(d_max, d_max, q) - fuller_passing(d_min, d_max, q);
    const double log_lo = std::log(d_min), log_hi = std::log(d_max);

    Rng rng(seed);
    // largest class first so the big disks still find room
    for (int k = n_classes - 1; k >= 0; --k) {
        const double lo = std::exp(log_lo + (log_hi - log_lo) * k / n_classes);
        const double hi = std::exp(log_lo + (log_hi - log_lo) * (k + 1) / n_classes);
        const double p_lo = fuller_passing(lo, d_max, q);
        const double p_hi = fuller_passing(hi, d_max, q);
        const double class_target = fraction * area * (p_hi - p_lo) / span;

        double placed = 0.0;
        long rejections = 0;
        while (true) {
            // diameter from the Fuller curve restricted to [lo, hi]
            const double p = p_lo + (p_hi - p_lo) * rng.uniform();
            const double d = d_max * std::pow(p, 1.0 / q);
            if (placed + disk_area(d) > class_target + 1e-12) break;
            Vec2 c{rng.uniform(outline.x0, outline.x1), rng.uniform(outline.y0, outline.y1)};
            if (disk_inside(outline, c, d) && clears_all(g.inclusions, c, d, gap_min)) {
                g.inclusions.push_back({c, d});
                placed += disk_area(d);
                rejections = 0;
            } else if (++rejections >= kMaxConsecutiveRejections) {
                packing_infeasible((g.achieved_fraction * area + placed) / area, fraction);
            }
        }
        g.achieved_fraction += placed / area;
    }
    return g;
}

std::vector<Phase> classify_elements(const LatticeMesh& mesh, const GrainStructure& grains) {
    if (!grains.inclusions.empty()) {
        const Rect& a = mesh.domain;
        const Rect& b = grains.outline;
        if (std::abs(a.x0 - b.x0) > 1e-9 || std::abs(a.y0 - b.y0) > 1e-9 ||
            std::abs(a.x1 - b.x1) > 1e-9 || std::abs(a.y1 - b.y1) > 1e-9)
            throw std::invalid_argument("classify_elements: mesh and grain structure outlines differ");
    }
    // disk index of the inclusion containing p (strict), or -1
    auto disk_of = [&](const Vec2& p) -> int {
        for (std::size_t k = 0; k < grains.inclusions.size(); ++k) {
            const Inclusion& inc = grains.inclusions[k];
            const double r = 0.5 * inc.diameter;
            if ((p - inc.center).norm2() < r * r) return static_cast<int>(k);
        }
        return -1;
    };
    std::vector<Phase> labels(mesh.elements.size(), Phase::matrix);
    for (std::size_t ei = 0; ei < mesh.elements.size(); ++ei) {
        const ElementGeom& e = mesh.elements[ei];
        const int di = disk_of(mesh.nodes[e.node_i].pos);
        const int dj = disk_of(mesh.nodes[e.node_j].pos);
        if (di < 0 && dj < 0) { labels[ei] = Phase::matrix; continue; }
        if (di == dj) { labels[ei] = Phase::inclusion; continue; }
        labels[ei] = disk_of(e.midpoint(mesh.nodes)) >= 0 ? Phase::inclusion : Phase::itz;
    }
    return labels;
}

namespace {

PhaseFractions tally(const LatticeMesh& mesh, const std::vector<Phase>& labels, bool weighted) {
    if (labels.size() != mesh.elements.size())
        throw std::invalid_argument("surface_fractions: label count mismatch");
    PhaseFractions f;
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double w = weighted ? mesh.elements[i].eff_width * mesh.elements[i].length : 1.0;
        total += w;
        switch (labels[i]) {
            case Phase::inclusion: f.inclusion += w; break;
            case Phase::itz: f.itz += w; break;
            default: f.matrix += w; break;
        }
    }
    if (total > 0.0) { f.inclusion /= total; f.itz /= total; f.matrix /= total; }
    return f;
}

}  // namespace

PhaseFractions surface_fractions(const LatticeMesh& mesh, const std::vector<Phase>& labels) {
    return tally(mesh, labels, false);
}

PhaseFractions surface_fractions_weighted(const LatticeMesh& mesh, const std::vector<Phase>& labels) {
    return tally(mesh, labels, true);
}

std::string grains_to_json(const GrainStructure& grains) {
    std::string out = "{\n\"spec\": {";
    char buf[64];
    auto num = [&](double v) { std::snprintf(buf, sizeof(buf), "%.17g", v); out += buf; };
    switch (grains.spec.kind) {
        case GradingSpec::Kind::monodisperse:
            out += "\"kind\": \"monodisperse\", \"d\": ";
            num(grains.spec.d);
            break;
        case GradingSpec::Kind::fuller:
            out += "\"kind\": \"fuller\", \"d_min\": ";
            num(grains.spec.d_min);
            out += ", \"d_max\": ";
            num(grains.spec.d_max);
            out += ", \"n_classes\": " + std::to_string(grains.spec.n_classes) + ", \"q\": ";
            num(grains.spec.fuller_exponent);
            break;
        case GradingSpec::Kind::none:
            out += "\"kind\": \"none\"";
            break;
    }
    out += ", \"target_fraction\": ";
    num(grains.spec.target_fraction);
    out += "},\n\"seed\": " + std::to_string(grains.seed) + ",\n\"achieved_fraction\": ";
    num(grains.achieved_fraction);
    out += ",\n\"outline\": [";
    num(grains.outline.x0); out += ", "; num(grains.outline.y0); out += ", ";
    num(grains.outline.x1); out += ", "; num(grains.outline.y1);
    out += "],\n\"inclusions\": [";
    for (std::size_t i = 0; i < grains.inclusions.size(); ++i) {
        out += (i ? ",\n[" : "\n[");
        num(grains.inclusions[i].center.x); out += ", ";
        num(grains.inclusions[i].center.y); out += ", ";
        num(grains.inclusions[i].diameter);
        out += "]";
    }
    out += "]\n}\n";
    return out;
}

GrainStructure grains_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    GrainStructure g;
    g.seed = j.at("seed").get<std::uint64_t>();
    g.achieved_fraction = j.value("achieved_fraction", 0.0);
    if (j.contains("outline")) {
        const auto& o = j.at("outline");
        g.outline = Rect(o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>(), o.at(3).get<double>());
    }
    const auto& s = j.at("spec");
    const std::string kind = s.at("kind").get<std::string>();
    if (kind == "monodisperse") {
        g.spec.kind = GradingSpec::Kind::monodisperse;
        g.spec.d = s.at("d").get<double>();
    } else if (kind == "fuller") {
        g.spec.kind = GradingSpec::Kind::fuller;
        g.spec.d_min = s.at("d_min").get<double>();
        g.spec.d_max = s.at("d_max").get<double>();
        g.spec.n_classes = s.value("n_classes", 5);
        g.spec.fuller_exponent = s.value("q", 0.5);
    } else {
        g.spec.kind = GradingSpec::Kind::none;
    }
    g.spec.target_fraction = s.value("target_fraction", 0.0);
    for (const auto& i : j.at("inclusions"))
        g.inclusions.push_back({{i.at(0).get<double>(), i.at(1).get<double>()}, i.at(2).get<double>()});
    return g;
}

}  // namespace latfrac
