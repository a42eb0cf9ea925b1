#include "latfrac/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include <nlohmann/json.hpp>

#include "latfrac/svg.hpp"

namespace latfrac {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string num17(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void append_phase(std::string& out, const char* key, const PhaseSpec& p) {
    out += std::string("\"") + key + "\":{\"Kn_GPa\":" + num17(p.Kn_bar / 1e3) +
           ",\"Kt_GPa\":" + num17(p.Kt_bar / 1e3) + ",\"sigma_n0_MPa\":" + num17(p.sigma_n0) +
           ",\"sigma_t0_MPa\":" + num17(p.sigma_t0) +
           ",\"breakable\":" + (p.breakable ? "true" : "false") + "}";
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

PhaseSpec parse_phase(const json& j, const std::string& path, const PhaseSpec& fallback) {
    PhaseSpec p = fallback;
    if (j.contains("Kn_GPa")) p.Kn_bar = j.at("Kn_GPa").get<double>() * 1e3;
    if (j.contains("Kt_GPa")) p.Kt_bar = j.at("Kt_GPa").get<double>() * 1e3;
    if (j.contains("sigma_n0_MPa")) p.sigma_n0 = j.at("sigma_n0_MPa").get<double>();
    if (j.contains("sigma_t0_MPa")) p.sigma_t0 = j.at("sigma_t0_MPa").get<double>();
    if (j.contains("breakable")) p.breakable = j.at("breakable").get<bool>();
    if (!(p.Kn_bar > 0.0) || !(p.Kt_bar > 0.0))
        throw std::invalid_argument("config: " + path + " stiffnesses must be positive");
    if (p.breakable && (!(p.sigma_n0 > 0.0) || !(p.sigma_t0 > 0.0)))
        throw std::invalid_argument("config: " + path + " strengths must be positive for a breakable phase");
    return p;
}

double require_positive(const json& j, const char* key, const std::string& path) {
    const double v = j.at(key).get<double>();
    if (!(v > 0.0)) throw std::invalid_argument("config: " + path + "." + key + " must be positive");
    return v;
}

}  // namespace

// The canonical form doubles as a valid run-config document, so a config can
// be serialized, reparsed, and hash to the same value.
std::string RunConfig::canonical_json() const {
    std::string s = "{\"geometry\":{\"width\":" + num17(specimen.outline.width()) +
                    ",\"height\":" + num17(specimen.outline.height()) + ",\"notches\":[";
    for (std::size_t i = 0; i < specimen.notches.size(); ++i) {
        const Rect& n = specimen.notches[i];
        s += (i ? ",[" : "[") + num17(n.x0) + "," + num17(n.y0) + "," + num17(n.x1) + "," + num17(n.y1) + "]";
    }
    s += "]},\"mesh\":{\"l_m\":" + num17(specimen.l_m) +
         ",\"perturbation_ratio\":" + num17(specimen.mesh_options.perturbation_ratio) + "}";
    s += ",\"protocol\":{\"kind\":\"" + std::string(to_string(specimen.protocol.kind)) +
         "\",\"bar_width\":" + num17(specimen.protocol.bar_width) +
         ",\"glue_fraction\":" + num17(specimen.protocol.glue_fraction) + "}";
    s += ",\"material\":{";
    append_phase(s, "matrix", material.matrix);
    s += ",";
    append_phase(s, "inclusion", material.inclusion);
    s += ",";
    append_phase(s, "itz", material.itz);
    s += ",";
    append_phase(s, "bar", material.bar);
    s += ",\"exponent\":" + num17(material.exponent) + "}";
    s += ",\"grading\":{";
    switch (grains.spec.kind) {
        case GradingSpec::Kind::none: s += "\"kind\":\"none\""; break;
        case GradingSpec::Kind::monodisperse:
            s += "\"kind\":\"monodisperse\",\"d\":" + num17(grains.spec.d) +
                 ",\"fraction\":" + num17(grains.spec.target_fraction);
            break;
        case GradingSpec::Kind::fuller:
            s += "\"kind\":\"fuller\",\"d_min\":" + num17(grains.spec.d_min) +
                 ",\"d_max\":" + num17(grains.spec.d_max) +
                 ",\"fraction\":" + num17(grains.spec.target_fraction) +
                 ",\"n_classes\":" + std::to_string(grains.spec.n_classes) +
                 ",\"q\":" + num17(grains.spec.fuller_exponent);
            break;
    }
    s += ",\"gap\":" + num17(grains.gap_min) + "}";
    s += ",\"seeds\":{\"mesh\":" + std::to_string(mesh_seed) + ",\"grains\":" + std::to_string(grain_seed) + "}";
    s += ",\"run\":{\"max_events\":" + std::to_string(run.max_events) +
         ",\"reaction_stop_ratio\":" + num17(run.reaction_ratio) +
         ",\"solver_tol\":" + num17(run.solver.tol_rel) +
         ",\"max_solver_iterations\":" + std::to_string(run.solver.max_iter) + "}";
    s += ",\"analysis\":{\"fpz_energy\":\"" +
         std::string(analysis.fpz_energy == EnergyKind::actual ? "actual" : "nominal") +
         "\",\"macrocrack_threshold\":" + num17(analysis.macrocrack_threshold) +
         ",\"density_cell\":" + num17(analysis.density_cell) + "}}";
    return s;
}

std::string RunConfig::hash() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(canonical_json())));
    return buf;
}

std::vector<std::string> preset_names() {
    return {"ld-40x160", "dd-40x160", "specimen-90x60", "ligament-L", "ligament-M", "ligament-S", "ligament-XS"};
}

RunConfig preset_config(const std::string& name) {
    RunConfig cfg;
    cfg.material = default_material();
    auto mid_notches = [](double w, double h, double depth, double nw) {
        const double y0 = 0.5 * h - 0.5 * nw, y1 = 0.5 * h + 0.5 * nw;
        return std::vector<Rect>{Rect(-1.0, y0, depth, y1), Rect(w - depth, y0, w + 1.0, y1)};
    };
    if (name == "ld-40x160" || name == "dd-40x160") {
        cfg.specimen.outline = Rect::sized(40.0, 160.0);
        cfg.specimen.l_m = 2.0;
        cfg.specimen.protocol.kind = name == "ld-40x160" ? ProtocolKind::ld : ProtocolKind::dd;
        if (cfg.specimen.protocol.kind == ProtocolKind::ld)
            cfg.specimen.notches = mid_notches(40.0, 160.0, 8.0, 2.0);
    } else if (name == "specimen-90x60") {
        cfg.specimen.outline = Rect::sized(90.0, 60.0);
        cfg.specimen.l_m = 1.5;
        cfg.specimen.protocol.kind = ProtocolKind::direct;
        cfg.specimen.notches = mid_notches(90.0, 60.0, 10.0, 2.0);
    } else if (name.rfind("ligament-", 0) == 0) {
        const std::string size = name.substr(9);
        double c = 0.0;
        if (size == "L") c = 10.0;
        else if (size == "M") c = 20.0;
        else if (size == "S") c = 35.0;
        else if (size == "XS") c = 50.0;
        else throw std::invalid_argument("unknown preset: " + name);
        cfg.specimen.outline = Rect::sized(100.0, 100.0);
        cfg.specimen.l_m = 1.5;
        cfg.specimen.protocol.kind = ProtocolKind::direct;
        cfg.specimen.notches = {Rect(-1.0, 49.0, c, 51.0)};
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    return cfg;
}

RunConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }

    RunConfig cfg;
    cfg.material = default_material();
    if (j.contains("preset")) cfg = preset_config(j.at("preset").get<std::string>());

    if (j.contains("geometry")) {
        const auto& g = j.at("geometry");
        if (g.contains("width") || g.contains("height")) {
            const double w = require_positive(g, "width", "geometry");
            const double h = require_positive(g, "height", "geometry");
            cfg.specimen.outline = Rect::sized(w, h);
            cfg.specimen.notches.clear();
        }
        if (g.contains("notches")) {
            cfg.specimen.notches.clear();
            for (const auto& n : g.at("notches")) {
                if (!n.is_array() || n.size() != 4)
                    throw std::invalid_argument("config: geometry.notches entries must be [x0,y0,x1,y1]");
                cfg.specimen.notches.emplace_back(n.at(0).get<double>(), n.at(1).get<double>(),
                                                  n.at(2).get<double>(), n.at(3).get<double>());
            }
        }
    }
    if (j.contains("mesh")) {
        const auto& m = j.at("mesh");
        if (m.contains("l_m")) cfg.specimen.l_m = require_positive(m, "l_m", "mesh");
        if (m.contains("perturbation_ratio")) {
            cfg.specimen.mesh_options.perturbation_ratio = m.at("perturbation_ratio").get<double>();
            if (cfg.specimen.mesh_options.perturbation_ratio < 0.0 ||
                cfg.specimen.mesh_options.perturbation_ratio > 0.45)
                throw std::invalid_argument("config: mesh.perturbation_ratio must lie in [0, 0.45]");
        }
    }
    if (j.contains("protocol")) {
        const auto& p = j.at("protocol");
        if (p.contains("kind")) cfg.specimen.protocol.kind = protocol_from_string(p.at("kind").get<std::string>());
        if (p.contains("bar_width")) cfg.specimen.protocol.bar_width = require_positive(p, "bar_width", "protocol");
        if (p.contains("glue_fraction")) {
            cfg.specimen.protocol.glue_fraction = p.at("glue_fraction").get<double>();
            if (cfg.specimen.protocol.glue_fraction <= 0.0 || cfg.specimen.protocol.glue_fraction > 0.5)
                throw std::invalid_argument("config: protocol.glue_fraction must lie in (0, 0.5]");
        }
    }
    if (j.contains("material")) {
        const auto& m = j.at("material");
        if (m.contains("elastic")) {
            const auto& e = m.at("elastic");
            const double E = require_positive(e, "E_GPa", "material.elastic") * 1e3;
            const double nu = e.at("nu").get<double>();
            try {
                moduli_from_elastic(E, nu, cfg.material.matrix.Kn_bar, cfg.material.matrix.Kt_bar);
            } catch (const std::exception& ex) {
                throw std::invalid_argument(std::string("config: material.elastic: ") + ex.what());
            }
        }
        if (m.contains("matrix")) cfg.material.matrix = parse_phase(m.at("matrix"), "material.matrix", cfg.material.matrix);
        double incl_k = 10.0, incl_s = 10.0, itz_k = 0.5, itz_s = 0.5, bar_k = 10.0;
        if (m.contains("inclusion_ratio")) {
            incl_k = m.at("inclusion_ratio").value("stiffness", 10.0);
            incl_s = m.at("inclusion_ratio").value("strength", 10.0);
        }
        if (m.contains("itz_ratio")) {
            itz_k = m.at("itz_ratio").value("stiffness", 0.5);
            itz_s = m.at("itz_ratio").value("strength", 0.5);
        }
        if (m.contains("bar_stiffness_ratio")) bar_k = require_positive(m, "bar_stiffness_ratio", "material");
        cfg.material.inclusion = cfg.material.matrix.scaled("inclusion", incl_k, incl_s);
        cfg.material.itz = cfg.material.matrix.scaled("itz", itz_k, itz_s);
        cfg.material.bar = cfg.material.matrix.scaled("bar", bar_k, 1.0, false);
        if (m.contains("inclusion")) cfg.material.inclusion = parse_phase(m.at("inclusion"), "material.inclusion", cfg.material.inclusion);
        if (m.contains("itz")) cfg.material.itz = parse_phase(m.at("itz"), "material.itz", cfg.material.itz);
        if (m.contains("bar")) cfg.material.bar = parse_phase(m.at("bar"), "material.bar", cfg.material.bar);
        if (m.contains("exponent")) {
            cfg.material.exponent = m.at("exponent").get<double>();
            if (cfg.material.exponent < 1.0) throw std::invalid_argument("config: material.exponent must be >= 1");
        }
    }
    if (j.contains("grading")) {
        const auto& g = j.at("grading");
        const std::string kind = g.value("kind", "none");
        if (kind == "none") {
            cfg.grains.spec = GradingSpec{};
        } else if (kind == "monodisperse") {
            cfg.grains.spec.kind = GradingSpec::Kind::monodisperse;
            cfg.grains.spec.d = require_positive(g, "d", "grading");
            cfg.grains.spec.target_fraction = g.at("fraction").get<double>();
        } else if (kind == "fuller") {
            cfg.grains.spec.kind = GradingSpec::Kind::fuller;
            cfg.grains.spec.d_min = require_positive(g, "d_min", "grading");
            cfg.grains.spec.d_max = require_positive(g, "d_max", "grading");
            if (cfg.grains.spec.d_min >= cfg.grains.spec.d_max)
                throw std::invalid_argument("config: grading.d_min must be below grading.d_max");
            cfg.grains.spec.n_classes = g.value("n_classes", 5);
            if (cfg.grains.spec.n_classes < 2)
                throw std::invalid_argument("config: grading.n_classes must be at least 2");
            cfg.grains.spec.fuller_exponent = g.value("q", 0.5);
            cfg.grains.spec.target_fraction = g.at("fraction").get<double>();
        } else {
            throw std::invalid_argument("config: grading.kind must be none|monodisperse|fuller");
        }
        if (kind != "none" &&
            (cfg.grains.spec.target_fraction < 0.0 || cfg.grains.spec.target_fraction >= 1.0))
            throw std::invalid_argument("config: grading.fraction must lie in [0, 1)");
        cfg.grains.gap_min = g.value("gap", 0.0);
        if (cfg.grains.gap_min < 0.0) throw std::invalid_argument("config: grading.gap must be non-negative");
    }
    if (j.contains("seeds")) {
        cfg.mesh_seed = j.at("seeds").value("mesh", std::uint64_t{1});
        cfg.grain_seed = j.at("seeds").value("grains", std::uint64_t{2});
    }
    if (j.contains("run")) {
        const auto& r = j.at("run");
        if (r.contains("max_events")) {
            cfg.run.max_events = r.at("max_events").get<long>();
            if (cfg.run.max_events < 1) throw std::invalid_argument("config: run.max_events must be >= 1");
        }
        if (r.contains("reaction_stop_ratio")) cfg.run.reaction_ratio = require_positive(r, "reaction_stop_ratio", "run");
        if (r.contains("solver_tol")) cfg.run.solver.tol_rel = require_positive(r, "solver_tol", "run");
        if (r.contains("max_solver_iterations")) cfg.run.solver.max_iter = r.at("max_solver_iterations").get<long>();
    }
    if (j.contains("analysis")) {
        const auto& a = j.at("analysis");
        const std::string ek = a.value("fpz_energy", "actual");
        if (ek == "actual") cfg.analysis.fpz_energy = EnergyKind::actual;
        else if (ek == "nominal") cfg.analysis.fpz_energy = EnergyKind::nominal;
        else throw std::invalid_argument("config: analysis.fpz_energy must be actual|nominal");
        if (a.contains("macrocrack_threshold")) {
            cfg.analysis.macrocrack_threshold = a.at("macrocrack_threshold").get<double>();
            if (cfg.analysis.macrocrack_threshold <= 0.0 || cfg.analysis.macrocrack_threshold > 1.0)
                throw std::invalid_argument("config: analysis.macrocrack_threshold must lie in (0, 1]");
        }
        if (a.contains("density_cell")) cfg.analysis.density_cell = require_positive(a, "density_cell", "analysis");
    }

    const double w = cfg.specimen.outline.width(), h = cfg.specimen.outline.height();
    if (w < 3.0 * cfg.specimen.l_m || h < 3.0 * cfg.specimen.l_m)
        throw std::invalid_argument("config: geometry smaller than 3 * mesh.l_m per side");
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    return parse_config_json(read_text_file(path));
}

std::string default_material_json() {
    const MaterialTable t = default_material();
    const ElasticConstants ec = elastic_from_moduli(t.matrix.Kn_bar, t.matrix.Kt_bar);
    json j;
    j["matrix"] = {{"Kn_GPa", t.matrix.Kn_bar / 1e3}, {"Kt_GPa", t.matrix.Kt_bar / 1e3},
                   {"sigma_n0_MPa", t.matrix.sigma_n0}, {"sigma_t0_MPa", t.matrix.sigma_t0}};
    j["derived_elastic"] = {{"E_GPa", ec.E / 1e3}, {"nu", ec.nu}};
    j["inclusion_ratio"] = {{"stiffness", 10.0}, {"strength", 10.0}};
    j["itz_ratio"] = {{"stiffness", 0.5}, {"strength", 0.5}};
    j["bar_stiffness_ratio"] = 10.0;
    j["exponent"] = t.exponent;
    return j.dump(2) + "\n";
}

RunResult run_single_with_grains(const RunConfig& config, const GrainStructure* grains_override) {
    GrainStructure grains;
    if (grains_override) {
        grains = *grains_override;
    } else {
        switch (config.grains.spec.kind) {
            case GradingSpec::Kind::none:
                grains.outline = config.specimen.outline;
                grains.seed = config.grain_seed;
                break;
            case GradingSpec::Kind::monodisperse:
                grains = place_monodisperse(config.specimen.outline, config.grains.spec.d, std::nullopt,
                                            config.grains.spec.target_fraction, config.grains.gap_min,
                                            config.grain_seed);
                break;
            case GradingSpec::Kind::fuller:
                if (config.grains.spec.d_min < 2.0 * config.specimen.l_m)
                    std::fprintf(stderr,
                                 "latfrac: warning: fuller d_min %.3g below twice the mesh size %.3g; "
                                 "the smallest sieve classes will be under-resolved\n",
                                 config.grains.spec.d_min, config.specimen.l_m);
                grains = place_fuller(config.specimen.outline, config.grains.spec.d_min, config.grains.spec.d_max,
                                      config.grains.spec.target_fraction, config.grains.spec.n_classes,
                                      config.grains.gap_min, config.grain_seed, config.grains.spec.fuller_exponent);
                break;
        }
    }

    Specimen sp = build_specimen(config.specimen, grains, config.material, config.mesh_seed);
    RunResult res;
    res.config = config;
    res.grains = grains;
    res.labels = sp.labels;
    res.record = run_quasistatic(sp, config.run);
    res.record.config_hash = config.hash();
    final_openings(sp, res.record, config.run.solver);
    if (!res.record.events.empty()) res.gf = fracture_energy_Gf(res.record);
    try {
        const FpzResult f = fpz_width(res.record, config.analysis.fpz_energy, config.analysis.macrocrack_threshold);
        res.l_fpz = f.l_fpz;
        res.sigma = f.sigma;
        res.fpz_ok = true;
    } catch (const std::exception& e) {
        res.fpz_error = e.what();
    }
    return res;
}

RunResult run_single(const RunConfig& config) {
    return run_single_with_grains(config, nullptr);
}

CampaignSpec parse_campaign_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("campaign: invalid JSON: ") + e.what());
    }
    CampaignSpec spec;
    if (j.contains("base")) {
        if (j.at("base").is_string()) spec.base = preset_config(j.at("base").get<std::string>());
        else spec.base = parse_config_json(j.at("base").dump());
    } else {
        spec.base = preset_config("ld-40x160");
    }
    spec.replicates = j.value("replicates", 3);
    if (spec.replicates < 1) throw std::invalid_argument("campaign: replicates must be >= 1");
    spec.master_seed = j.value("master_seed", std::uint64_t{1});
    spec.jobs = j.value("jobs", 0);
    if (j.contains("measure"))
        for (const auto& m : j.at("measure"))
            if (m.get<std::string>() == "lc") spec.measure_lc = true;

    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        const std::string kind = s.value("kind", "none");
        auto load_list = [&](const char* key, std::vector<double>& into) {
            if (!s.contains(key)) throw std::invalid_argument(std::string("campaign: sweep.") + key + " missing");
            for (const auto& v : s.at(key)) into.push_back(v.get<double>());
            if (into.empty()) throw std::invalid_argument(std::string("campaign: sweep.") + key + " empty");
        };
        if (kind == "none") {
            spec.sweep.kind = CampaignSweep::Kind::none;
        } else if (kind == "path_a" || kind == "path_b") {
            spec.sweep.kind = kind == "path_a" ? CampaignSweep::Kind::path_a : CampaignSweep::Kind::path_b;
            load_list("d", spec.sweep.d_values);
            spec.sweep.fixed_fraction = s.value("fraction", 0.4);
        } else if (kind == "path_c") {
            spec.sweep.kind = CampaignSweep::Kind::path_c;
            load_list("fraction", spec.sweep.fractions);
            spec.sweep.fixed_d = s.value("d", 8.0);
        } else if (kind == "ligament") {
            spec.sweep.kind = CampaignSweep::Kind::ligament;
            if (s.contains("presets"))
                for (const auto& p : s.at("presets")) spec.sweep.presets.push_back(p.get<std::string>());
            if (spec.sweep.presets.empty()) spec.sweep.presets = {"ligament-L", "ligament-XS"};
            load_list("d_max", spec.sweep.d_max_values);
            spec.sweep.fuller_d_min = s.value("d_min", 3.15);
            spec.sweep.fuller_fraction = s.value("fraction", 0.45);
        } else if (kind == "mesh_size") {
            spec.sweep.kind = CampaignSweep::Kind::mesh_size;
            load_list("l_m", spec.sweep.mesh_sizes);
        } else {
            throw std::invalid_argument("campaign: unknown sweep.kind " + kind);
        }
    }
    return spec;
}

CampaignSpec parse_campaign_file(const std::string& path) {
    return parse_campaign_json(read_text_file(path));
}

int resolve_jobs(int cli_jobs, int spec_jobs) {
    if (cli_jobs > 0) return cli_jobs;
    if (spec_jobs > 0) return spec_jobs;
    if (const char* env = std::getenv("LATFRAC_JOBS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct PointDef {
    std::string label;
    std::string series;
    double parameter = 0.0;
    RunConfig config;
    bool reuse_anchor = false;  // path (a): shared centers per replicate
};

std::vector<PointDef> sweep_points(const CampaignSpec& spec) {
    std::vector<PointDef> points;
    const CampaignSweep& sw = spec.sweep;
    char label[64];
    switch (sw.kind) {
        case CampaignSweep::Kind::none: {
            PointDef p;
            p.label = "base";
            p.config = spec.base;
            points.push_back(p);
            break;
        }
        case CampaignSweep::Kind::path_a:
        case CampaignSweep::Kind::path_b: {
            for (double d : sw.d_values) {
                PointDef p;
                std::snprintf(label, sizeof(label), "d%g", d);
                p.label = label;
                p.parameter = d;
                p.config = spec.base;
                p.config.grains.spec.kind = GradingSpec::Kind::monodisperse;
                p.config.grains.spec.d = d;
                p.config.grains.spec.target_fraction = sw.fixed_fraction;
                p.reuse_anchor = sw.kind == CampaignSweep::Kind::path_a;
                points.push_back(p);
            }
            break;
        }
        case CampaignSweep::Kind::path_c: {
            for (double f : sw.fractions) {
                PointDef p;
                std::snprintf(label, sizeof(label), "Pa%g", f);
                p.label = label;
                p.parameter = f;
                p.config = spec.base;
                p.config.grains.spec.kind = GradingSpec::Kind::monodisperse;
                p.config.grains.spec.d = sw.fixed_d;
                p.config.grains.spec.target_fraction = f;
                points.push_back(p);
            }
            break;
        }
        case CampaignSweep::Kind::ligament: {
            for (const std::string& preset : sw.presets) {
                for (double dmax : sw.d_max_values) {
                    PointDef p;
                    std::snprintf(label, sizeof(label), "%s_dmax%g", preset.c_str(), dmax);
                    p.label = label;
                    p.series = preset;
                    p.parameter = dmax;
                    p.config = preset_config(preset);
                    p.config.material = spec.base.material;
                    p.config.run = spec.base.run;
                    p.config.analysis = spec.base.analysis;
                    p.config.grains.gap_min = spec.base.grains.gap_min;
                    p.config.grains.spec.kind = GradingSpec::Kind::fuller;
                    p.config.grains.spec.d_min = sw.fuller_d_min;
                    p.config.grains.spec.d_max = dmax;
                    p.config.grains.spec.target_fraction = sw.fuller_fraction;
                    points.push_back(p);
                }
            }
            break;
        }
        case CampaignSweep::Kind::mesh_size: {
            for (double lm : sw.mesh_sizes) {
                PointDef p;
                std::snprintf(label, sizeof(label), "lm%g", lm);
                p.label = label;
                p.parameter = lm;
                p.config = spec.base;
                p.config.specimen.l_m = lm;
                p.config.grains.spec = GradingSpec{};
                points.push_back(p);
            }
            break;
        }
    }
    return points;
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
}

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (v.size() - 1));
}

}  // namespace

CampaignSummary run_campaign(const CampaignSpec& spec, int jobs_override) {
    const std::vector<PointDef> points = sweep_points(spec);
    const int R = spec.replicates;

    // path (a): one take-and-place per replicate at the largest diameter,
    // shrunk per point so centers match bit for bit across the sweep
    std::vector<GrainStructure> anchors;
    const bool path_a = spec.sweep.kind == CampaignSweep::Kind::path_a;
    if (path_a) {
        const double d_anchor = *std::max_element(spec.sweep.d_values.begin(), spec.sweep.d_values.end());
        for (int r = 0; r < R; ++r)
            anchors.push_back(place_monodisperse(spec.base.specimen.outline, d_anchor, std::nullopt,
                                                 spec.sweep.fixed_fraction, spec.base.grains.gap_min,
                                                 derive_seed(spec.master_seed, 0xA11CE, r, 1)));
    }

    struct Task {
        int point, replicate;
    };
    std::vector<Task> tasks;
    for (int p = 0; p < static_cast<int>(points.size()); ++p)
        for (int r = 0; r < R; ++r) tasks.push_back({p, r});

    CampaignSummary summary;
    summary.runs.resize(tasks.size());

    auto execute = [&](const Task& t, CampaignRun& out) {
        const PointDef& pd = points[t.point];
        out.point = t.point;
        out.replicate = t.replicate;
        out.point_label = pd.label;
        out.parameter = pd.parameter;
        RunConfig cfg = pd.config;
        cfg.mesh_seed = derive_seed(spec.master_seed, 1000 + t.point, t.replicate, 0);
        cfg.grain_seed = pd.reuse_anchor ? anchors[t.replicate].seed
                                         : derive_seed(spec.master_seed, 1000 + t.point, t.replicate, 1);
        try {
            const GrainStructure* override_ptr = nullptr;
            GrainStructure rescaled;
            if (pd.reuse_anchor) {
                rescaled = rescale_diameters(anchors[t.replicate], pd.config.grains.spec.d, cfg.grains.gap_min);
                override_ptr = &rescaled;
            }
            out.ld = run_single_with_grains(cfg, override_ptr);
            if (spec.measure_lc) {
                RunConfig ddc = cfg;
                ddc.specimen.protocol.kind = ProtocolKind::dd;
                ddc.specimen.notches.clear();
                out.dd = run_single_with_grains(ddc, override_ptr);
                if (!out.dd->record.events.empty() && !out.ld.record.events.empty()) {
                    out.ws = energy_density_Ws(out.dd->record);
                    out.lc = characteristic_length(out.ld.gf, out.ws);
                }
            }
            out.ok = true;
        } catch (const std::exception& e) {
            out.ok = false;
            out.error = e.what();
        }
    };

    const int jobs = std::max(1, std::min<int>(resolve_jobs(jobs_override, spec.jobs),
                                               static_cast<int>(tasks.size())));
    if (jobs == 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) execute(tasks[i], summary.runs[i]);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                execute(tasks[i], summary.runs[i]);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // aggregate in point order
    for (int p = 0; p < static_cast<int>(points.size()); ++p) {
        CampaignPointSummary ps;
        ps.label = points[p].label;
        ps.series = points[p].series;
        ps.parameter = points[p].parameter;
        std::vector<double> lfpz, lc, msize;
        for (const auto& run : summary.runs) {
            if (run.point != p) continue;
            if (!run.ok) {
                summary.failures.push_back(run.point_label + " r" + std::to_string(run.replicate) + ": " + run.error);
                continue;
            }
            if (run.ld.fpz_ok) lfpz.push_back(run.ld.l_fpz);
            if (run.lc > 0.0) lc.push_back(run.lc);
            msize.push_back(run.ld.record.mean_mesh_size);
            ++ps.completed;
        }
        ps.mean_lfpz = mean_of(lfpz);
        ps.std_lfpz = std_of(lfpz);
        ps.mean_lc = mean_of(lc);
        ps.std_lc = std_of(lc);
        ps.mean_mesh_size = mean_of(msize);
        summary.points.push_back(ps);
    }

    // trend fits over point means; the mesh-size study regresses on the
    // realized mean element size
    std::vector<std::pair<double, double>> lf_pts, lc_pts;
    for (const auto& ps : summary.points) {
        if (ps.completed == 0) continue;
        const double x = spec.sweep.kind == CampaignSweep::Kind::mesh_size ? ps.mean_mesh_size : ps.parameter;
        if (ps.mean_lfpz > 0.0) lf_pts.emplace_back(x, ps.mean_lfpz);
        if (ps.mean_lc > 0.0) lc_pts.emplace_back(x, ps.mean_lc);
    }
    if (lf_pts.size() >= 2) {
        summary.lfpz_fit = ols_fit(lf_pts);
        summary.lfpz_fit_ok = true;
    }
    if (lc_pts.size() >= 2) {
        summary.lc_fit = ols_fit(lc_pts);
        summary.lc_fit_ok = true;
    }
    return summary;
}

namespace {

std::string runs_csv(const CampaignSummary& summary) {
    std::string out =
        "point,label,parameter,replicate,mesh_seed,grain_seed,ok,lfpz,sigma,gf,ws,lc,"
        "events_ld,events_dd,mean_mesh_size,achieved_fraction,config_hash,error\n";
    for (const auto& r : summary.runs) {
        out += std::to_string(r.point) + "," + r.point_label + "," + num17(r.parameter) + "," +
               std::to_string(r.replicate) + "," + std::to_string(r.ld.config.mesh_seed) + "," +
               std::to_string(r.ld.config.grain_seed) + "," + (r.ok ? "1" : "0") + ",";
        if (r.ok) {
            out += (r.ld.fpz_ok ? num17(r.ld.l_fpz) : std::string()) + "," + (r.ld.fpz_ok ? num17(r.ld.sigma) : std::string()) + "," +
                   num17(r.ld.gf) + "," + (r.dd ? num17(r.ws) : std::string()) + "," + (r.dd ? num17(r.lc) : std::string()) + "," +
                   std::to_string(r.ld.record.events.size()) + "," +
                   (r.dd ? std::to_string(r.dd->record.events.size()) : std::string()) + "," +
                   num17(r.ld.record.mean_mesh_size) + "," + num17(r.ld.grains.achieved_fraction) + "," +
                   r.ld.record.config_hash + ",";
        } else {
            out += ",,,,,,,,,,";
        }
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        out += err + "\n";
    }
    return out;
}

std::string points_csv(const CampaignSummary& summary) {
    std::string out = "label,series,parameter,completed,mean_lfpz,std_lfpz,mean_lc,std_lc,mean_mesh_size\n";
    for (const auto& p : summary.points)
        out += p.label + "," + p.series + "," + num17(p.parameter) + "," + std::to_string(p.completed) + "," +
               num17(p.mean_lfpz) + "," + num17(p.std_lfpz) + "," + num17(p.mean_lc) + "," +
               num17(p.std_lc) + "," + num17(p.mean_mesh_size) + "\n";
    return out;
}

std::string summary_json(const CampaignSummary& summary, const CampaignSpec& spec) {
    std::string out = "{\n\"master_seed\": " + std::to_string(spec.master_seed) +
                      ",\n\"replicates\": " + std::to_string(spec.replicates) + ",\n\"points\": [";
    for (std::size_t i = 0; i < summary.points.size(); ++i) {
        const auto& p = summary.points[i];
        out += (i ? ",\n" : "\n");
        out += "{\"label\": \"" + p.label + "\", \"parameter\": " + num17(p.parameter) +
               ", \"completed\": " + std::to_string(p.completed) + ", \"mean_lfpz\": " + num17(p.mean_lfpz) +
               ", \"std_lfpz\": " + num17(p.std_lfpz) + ", \"mean_lc\": " + num17(p.mean_lc) +
               ", \"std_lc\": " + num17(p.std_lc) + ", \"mean_mesh_size\": " + num17(p.mean_mesh_size) + "}";
    }
    out += "],\n";
    if (summary.lfpz_fit_ok)
        out += "\"lfpz_fit\": {\"slope\": " + num17(summary.lfpz_fit.slope) +
               ", \"intercept\": " + num17(summary.lfpz_fit.intercept) +
               ", \"r2\": " + num17(summary.lfpz_fit.r2) + "},\n";
    if (summary.lc_fit_ok)
        out += "\"lc_fit\": {\"slope\": " + num17(summary.lc_fit.slope) +
               ", \"intercept\": " + num17(summary.lc_fit.intercept) +
               ", \"r2\": " + num17(summary.lc_fit.r2) + "},\n";
    out += "\"failures\": [";
    for (std::size_t i = 0; i < summary.failures.size(); ++i) {
        std::string f = summary.failures[i];
        std::replace(f.begin(), f.end(), '"', '\'');
        out += (i ? ", \"" : "\"") + f + "\"";
    }
    out += "]\n}\n";
    return out;
}

std::string curve_csv(const std::vector<std::pair<double, double>>& pts) {
    std::string out = "displacement,force\n";
    for (const auto& [d, f] : pts) out += num17(d) + "," + num17(f) + "\n";
    return out;
}

std::string raster_csv(const Raster& r) {
    std::string out;
    for (int iy = 0; iy < r.ny; ++iy) {
        for (int ix = 0; ix < r.nx; ++ix) {
            out += num17(r.values[static_cast<std::size_t>(iy) * r.nx + ix]);
            out += (ix + 1 < r.nx) ? "," : "\n";
        }
    }
    return out;
}

std::string analysis_json(const RunResult& r) {
    std::string out = "{\n\"config_hash\": \"" + r.record.config_hash + "\",\n\"protocol\": \"" +
                      r.record.protocol + "\",\n\"events\": " + std::to_string(r.record.events.size()) +
                      ",\n\"terminated_reason\": \"" + r.record.terminated_reason + "\"";
    if (!r.record.events.empty()) {
        out += ",\n\"Gf\": " + num17(r.gf);
        out += ",\n\"Ws\": " + num17(energy_density_Ws(r.record));
    }
    if (r.fpz_ok) {
        out += ",\n\"l_fpz\": " + num17(r.l_fpz) + ",\n\"sigma_fit\": " + num17(r.sigma);
    } else if (!r.fpz_error.empty()) {
        std::string e = r.fpz_error;
        std::replace(e.begin(), e.end(), '"', '\'');
        out += ",\n\"fpz_error\": \"" + e + "\"";
    }
    out += "\n}\n";
    return out;
}

}  // namespace

void emit_run_outputs(const RunResult& result, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const std::string base = out_dir + "/";
    write_text_file(base + "record.json", record_to_json(result.record));
    write_text_file(base + "events.csv", events_to_csv(result.record));
    const auto curve = result.record.load_curve();
    write_text_file(base + "loadcurve.csv", curve_csv(curve));
    if (curve.size() >= 2) write_text_file(base + "envelope.csv", curve_csv(envelope_curve(curve).points));
    write_text_file(base + "analysis.json", analysis_json(result));
    {
        std::string log = "event_index,cg_iterations,cg_residual\n";
        for (const auto& e : result.record.events)
            log += std::to_string(e.index) + "," + std::to_string(e.solver_iterations) + "," +
                   num17(e.solver_residual) + "\n";
        write_text_file(base + "solver.csv", log);
    }
    if (!result.record.events.empty()) {
        const EnergyProfile profile = energy_profile(result.record, result.config.analysis.fpz_energy,
                                                     result.config.analysis.macrocrack_threshold);
        std::string prof = "coordinate,energy,cumulative_fraction\n";
        for (std::size_t k = 0; k < profile.samples.size(); ++k)
            prof += num17(profile.samples[k].first) + "," + num17(profile.samples[k].second) + "," +
                    num17(profile.cumulative[k].second) + "\n";
        write_text_file(base + "profile.csv", prof);

        const MacrocrackResult crack = macrocrack_direction(result.record, result.config.analysis.macrocrack_threshold);
        write_text_file(base + "crack.svg", crack_pattern_svg(result.record, crack, &result.grains));
        const Raster raster = energy_density_map(result.record, result.config.analysis.density_cell,
                                                 result.config.analysis.fpz_energy);
        write_text_file(base + "density.csv", raster_csv(raster));
        write_text_file(base + "density.svg", raster_heatmap_svg(raster, "dissipated energy density"));
        if (curve.size() >= 2) {
            SvgPlot plot("load curve", "displacement [mm]", "force [N/mm]");
            plot.add_line(curve, "#888", false, "raw");
            plot.add_line(envelope_curve(curve).points, "#c03030", false, "envelope");
            write_text_file(base + "loadcurve.svg", plot.render());
        }
    }
    std::string phases = "element_id,phase\n";
    for (std::size_t i = 0; i < result.labels.size(); ++i)
        phases += std::to_string(i) + "," + to_string(result.labels[i]) + "\n";
    write_text_file(base + "elements.csv", phases);
}

void emit_outputs(const CampaignSummary& summary, const CampaignSpec& spec, const std::string& out_dir) {
    fs::create_directories(out_dir);
    write_text_file(out_dir + "/runs.csv", runs_csv(summary));
    write_text_file(out_dir + "/points.csv", points_csv(summary));
    write_text_file(out_dir + "/summary.json", summary_json(summary, spec));

    const char* xlabel = "swept parameter";
    switch (spec.sweep.kind) {
        case CampaignSweep::Kind::path_a:
        case CampaignSweep::Kind::path_b: xlabel = "inclusion diameter d [mm]"; break;
        case CampaignSweep::Kind::path_c: xlabel = "surface fraction P_a [-]"; break;
        case CampaignSweep::Kind::ligament: xlabel = "max inclusion size d_max [mm]"; break;
        case CampaignSweep::Kind::mesh_size: xlabel = "mean mesh size [mm]"; break;
        case CampaignSweep::Kind::none: break;
    }
    {
        SvgPlot plot("FPZ width vs " + std::string(xlabel), xlabel, "l_FPZ [mm]");
        std::vector<std::pair<double, double>> pts;
        std::vector<double> errs;
        for (const auto& p : summary.points) {
            if (p.completed == 0 || p.mean_lfpz <= 0.0) continue;
            const double x = spec.sweep.kind == CampaignSweep::Kind::mesh_size ? p.mean_mesh_size : p.parameter;
            pts.emplace_back(x, p.mean_lfpz);
            errs.push_back(p.std_lfpz);
        }
        plot.add_points(pts, "#3050c0", 4.0, "mean l_FPZ");
        plot.add_errorbars(pts, errs, "#3050c0");
        if (summary.lfpz_fit_ok && !pts.empty()) {
            double x_lo = pts.front().first, x_hi = pts.front().first;
            for (const auto& [x, y] : pts) { x_lo = std::min(x_lo, x); x_hi = std::max(x_hi, x); }
            plot.add_line({{x_lo, summary.lfpz_fit.intercept + summary.lfpz_fit.slope * x_lo},
                           {x_hi, summary.lfpz_fit.intercept + summary.lfpz_fit.slope * x_hi}},
                          "#c03030", false, "trend");
        }
        write_text_file(out_dir + "/lfpz_vs_parameter.svg", plot.render());
    }
    if (spec.measure_lc) {
        SvgPlot plot("characteristic length vs " + std::string(xlabel), xlabel, "l_c [mm]");
        std::vector<std::pair<double, double>> pts;
        std::vector<double> errs;
        for (const auto& p : summary.points) {
            if (p.completed == 0 || p.mean_lc <= 0.0) continue;
            pts.emplace_back(p.parameter, p.mean_lc);
            errs.push_back(p.std_lc);
        }
        plot.add_points(pts, "#208040", 4.0, "mean l_c");
        plot.add_errorbars(pts, errs, "#208040");
        write_text_file(out_dir + "/lc_vs_parameter.svg", plot.render());
    }

    for (const auto& run : summary.runs) {
        if (!run.ok) continue;
        const std::string dir = out_dir + "/runs/" + run.point_label + "_r" + std::to_string(run.replicate);
        emit_run_outputs(run.ld, dir);
        if (run.dd) emit_run_outputs(*run.dd, dir + "/dd");
    }
}

}  // namespace latfrac
