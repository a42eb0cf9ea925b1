#include "latfrac/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace latfrac {

namespace {

double ultimate_energy(const BreakEvent& e) {
    return 0.5 * e.eff_width * e.eff_width *
           (e.sigma_n0 * e.sigma_n0 / e.Kn + e.sigma_t0 * e.sigma_t0 / e.Kt);
}

double event_energy(const BreakEvent& e, EnergyKind kind) {
    return kind == EnergyKind::actual ? e.e_actual : e.e_nominal;
}

}  // namespace

double fracture_energy_Gf(const SimulationRecord& record) {
    if (record.events.empty()) throw std::invalid_argument("fracture_energy_Gf: no broken element");
    double num = 0.0, den = 0.0;
    for (const auto& e : record.events) {
        num += ultimate_energy(e);
        den += e.eff_width;
    }
    return num / den;
}

double energy_density_Ws(const SimulationRecord& record, double volume) {
    if (record.events.empty()) throw std::invalid_argument("energy_density_Ws: no broken element");
    const double v = volume > 0.0 ? volume : record.specimen_area;
    if (!(v > 0.0)) throw std::invalid_argument("energy_density_Ws: non-positive volume");
    double num = 0.0;
    for (const auto& e : record.events) num += ultimate_energy(e);
    return num / v;
}

double characteristic_length(double gf, double ws) {
    if (!(gf > 0.0) || !(ws > 0.0))
        throw std::invalid_argument("characteristic_length: Gf and Ws must be positive");
    return gf / ws;
}

MacrocrackResult macrocrack_direction(const SimulationRecord& record, double threshold_ratio) {
    MacrocrackResult res;
    double max_opening = 0.0;
    for (const auto& e : record.events) max_opening = std::max(max_opening, e.opening);
    res.opening_threshold = threshold_ratio * max_opening;
    for (const auto& e : record.events)
        if (max_opening > 0.0 && e.opening >= res.opening_threshold) res.event_indices.push_back(e.index);

    if (res.event_indices.size() < 2) {
        res.fallback = true;
        res.direction = {1.0, 0.0};  // perpendicular to the (vertical) loading axis
        return res;
    }

    Vec2 mean{0.0, 0.0};
    for (int i : res.event_indices) mean += record.events[i].midpoint;
    mean = (1.0 / res.event_indices.size()) * mean;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i : res.event_indices) {
        const Vec2 d = record.events[i].midpoint - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    // leading eigenvector of the 2x2 scatter
    const double tr = sxx + syy;
    const double diff = sxx - syy;
    const double disc = std::sqrt(diff * diff + 4.0 * sxy * sxy);
    const double lambda = 0.5 * (tr + disc);
    Vec2 dir;
    if (std::abs(sxy) > 1e-30) dir = Vec2{lambda - syy, sxy}.normalized();
    else dir = (sxx >= syy) ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
    if (dir.x < 0.0 || (dir.x == 0.0 && dir.y < 0.0)) dir = -1.0 * dir;
    res.direction = dir;
    return res;
}

GaussianCdfFit fit_gaussian_cdf(const std::vector<std::pair<double, double>>& samples,
                                double mu0, double sigma0) {
    GaussianCdfFit fit;
    fit.mu = mu0;
    fit.sigma = std::max(sigma0, 1e-12);

    auto rms = [&](double mu, double sigma) {
        double s = 0.0;
        for (const auto& [x, y] : samples) {
            const double f = 0.5 * (1.0 + std::erf((x - mu) / (sigma * M_SQRT2)));
            s += (f - y) * (f - y);
        }
        return std::sqrt(s / samples.size());
    };

    double lambda = 1e-3;
    double best = rms(fit.mu, fit.sigma);
    for (int it = 0; it < 200; ++it) {
        // Gauss-Newton normal equations with Levenberg damping
        double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, jtr0 = 0.0, jtr1 = 0.0;
        for (const auto& [x, y] : samples) {
            const double z = (x - fit.mu) / fit.sigma;
            const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
            const double f = 0.5 * (1.0 + std::erf(z / M_SQRT2));
            const double r = f - y;
            const double dmu = -pdf / fit.sigma;
            const double dsg = -z * pdf / fit.sigma;
            jtj00 += dmu * dmu;
            jtj01 += dmu * dsg;
            jtj11 += dsg * dsg;
            jtr0 += dmu * r;
            jtr1 += dsg * r;
        }
        const double a00 = jtj00 * (1.0 + lambda), a11 = jtj11 * (1.0 + lambda);
        const double det = a00 * a11 - jtj01 * jtj01;
        if (det <= 0.0 || !std::isfinite(det)) break;
        const double step_mu = -(a11 * jtr0 - jtj01 * jtr1) / det;
        const double step_sg = -(a00 * jtr1 - jtj01 * jtr0) / det;
        const double mu_new = fit.mu + step_mu;
        const double sg_new = std::max(fit.sigma + step_sg, 1e-12);
        const double r_new = rms(mu_new, sg_new);
        if (r_new < best) {
            const bool tiny = std::abs(step_mu) < 1e-12 * (1.0 + std::abs(fit.mu)) &&
                              std::abs(step_sg) < 1e-12 * fit.sigma;
            fit.mu = mu_new;
            fit.sigma = sg_new;
            best = r_new;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (tiny) break;
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }
    fit.residual = best;
    return fit;
}

EnergyProfile energy_profile(const SimulationRecord& record, EnergyKind kind, double macrocrack_threshold) {
    const MacrocrackResult crack = macrocrack_direction(record, macrocrack_threshold);
    EnergyProfile profile;
    profile.axis = crack.direction.rot90();
    for (const auto& e : record.events) {
        const double w = event_energy(e, kind);
        profile.samples.emplace_back(e.midpoint.dot(profile.axis), w);
        profile.total += w;
    }
    std::sort(profile.samples.begin(), profile.samples.end());
    double cum = 0.0;
    for (const auto& [s, w] : profile.samples) {
        profile.cumulative.emplace_back(s, profile.total > 0.0 ? (cum + 0.5 * w) / profile.total : 0.0);
        cum += w;
    }
    return profile;
}

FpzResult fpz_width(const SimulationRecord& record, EnergyKind kind, double macrocrack_threshold) {
    if (record.events.size() < 5)
        throw std::invalid_argument("fpz_width: need at least 5 broken elements, have " +
                                    std::to_string(record.events.size()));
    const MacrocrackResult crack = macrocrack_direction(record, macrocrack_threshold);
    const EnergyProfile profile = energy_profile(record, kind, macrocrack_threshold);
    const auto& se = profile.samples;
    const double total = profile.total;
    if (!(total > 0.0)) throw std::invalid_argument("fpz_width: no dissipated energy recorded");

    double mean = 0.0;
    for (const auto& [s, w] : se) mean += s * w;
    mean /= total;
    double var = 0.0;
    for (const auto& [s, w] : se) var += w * (s - mean) * (s - mean);
    var /= total;

    FpzResult res;
    res.angle = std::atan2(crack.direction.y, crack.direction.x);
    const double floor_sigma = record.mean_mesh_size > 0.0 ? 0.25 * record.mean_mesh_size : 1e-6;
    if (var < 1e-20 || se.front().first == se.back().first) {
        res.degenerate = true;
        res.sigma = floor_sigma;
        res.center = mean;
        res.l_fpz = 4.0 * res.sigma;
        return res;
    }

    const GaussianCdfFit fit = fit_gaussian_cdf(profile.cumulative, mean, std::sqrt(var));
    res.sigma = std::max(fit.sigma, 0.0);
    if (res.sigma < floor_sigma) {
        res.degenerate = true;
        res.sigma = floor_sigma;
    }
    res.center = fit.mu;
    res.residual = fit.residual;
    res.l_fpz = 4.0 * res.sigma;
    return res;
}

EnvelopeCurve envelope_curve(const std::vector<std::pair<double, double>>& raw) {
    if (raw.size() < 2) throw std::invalid_argument("envelope_curve: need at least 2 points");
    EnvelopeCurve env;
    env.points.push_back(raw.front());
    double dstar = raw.front().first;
    bool holding = false;
    for (std::size_t k = 1; k < raw.size(); ++k) {
        const auto& prev = raw[k - 1];
        const auto& cur = raw[k];
        if (!holding) {
            if (cur.first >= dstar) {
                env.points.push_back(cur);
                dstar = cur.first;
            } else {
                holding = true;
            }
        } else if (cur.first >= dstar) {
            const double t = (dstar - prev.first) / (cur.first - prev.first);
            env.points.emplace_back(dstar, prev.second + t * (cur.second - prev.second));
            if (cur.first > dstar) env.points.push_back(cur);
            dstar = cur.first;
            holding = false;
        }
    }
    if (holding) env.points.emplace_back(dstar, raw.back().second);
    return env;
}

double Raster::total() const {
    return std::accumulate(values.begin(), values.end(), 0.0);
}

Raster energy_density_map(const SimulationRecord& record, double cell_size, EnergyKind kind) {
    if (!(cell_size > 0.0)) throw std::invalid_argument("energy_density_map: cell size must be positive");
    Raster r;
    r.extent = record.outline;
    r.cell = cell_size;
    r.nx = std::max(1, static_cast<int>(std::ceil(record.outline.width() / cell_size)));
    r.ny = std::max(1, static_cast<int>(std::ceil(record.outline.height() / cell_size)));
    r.values.assign(static_cast<std::size_t>(r.nx) * r.ny, 0.0);
    for (const auto& e : record.events) {
        int ix = static_cast<int>((e.midpoint.x - r.extent.x0) / cell_size);
        int iy = static_cast<int>((e.midpoint.y - r.extent.y0) / cell_size);
        ix = std::clamp(ix, 0, r.nx - 1);
        iy = std::clamp(iy, 0, r.ny - 1);
        r.values[static_cast<std::size_t>(iy) * r.nx + ix] += event_energy(e, kind);
    }
    return r;
}

OlsFit ols_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) throw std::invalid_argument("ols_fit: need at least 2 points");
    const double n = static_cast<double>(points.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, y] : points) {
        sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
    }
    const double vx = sxx - sx * sx / n;
    const double vy = syy - sy * sy / n;
    const double cxy = sxy - sx * sy / n;
    if (vx <= 0.0) throw std::invalid_argument("ols_fit: degenerate abscissae");
    OlsFit fit;
    fit.slope = cxy / vx;
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.r2 = vy > 0.0 ? (cxy * cxy) / (vx * vy) : 1.0;
    return fit;
}

OlsFit mesh_size_regression(const std::vector<std::vector<std::pair<double, double>>>& runs_by_size) {
    if (runs_by_size.size() < 3)
        throw std::invalid_argument("mesh_size_regression: need at least 3 mesh sizes");
    std::vector<std::pair<double, double>> means;
    for (const auto& runs : runs_by_size) {
        if (runs.empty()) throw std::invalid_argument("mesh_size_regression: empty size group");
        double mx = 0.0, my = 0.0;
        for (const auto& [x, y] : runs) { mx += x; my += y; }
        means.emplace_back(mx / runs.size(), my / runs.size());
    }
    return ols_fit(means);
}

double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("spearman_correlation: need matched samples");
    auto ranks = [](const std::vector<double>& v) {
        std::vector<int> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    std::vector<std::pair<double, double>> pts(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) pts[i] = {rx[i], ry[i]};
    const OlsFit f = ols_fit(pts);
    const double sign = f.slope >= 0.0 ? 1.0 : -1.0;
    return sign * std::sqrt(std::max(0.0, f.r2));
}

}  // namespace latfrac
