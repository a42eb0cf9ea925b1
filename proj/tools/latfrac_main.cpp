#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "latfrac/campaign.hpp"
#include "latfrac/svg.hpp"

namespace fs = std::filesystem;
using namespace latfrac;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string out_dir = "latfrac-out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_jobs = false) {
    cmd->add_option("--config", o.config_path, "Run configuration JSON file");
    cmd->add_option("--preset", o.preset, "Configuration preset")
        ->check(CLI::IsMember(preset_names()));
    cmd->add_option("--out", o.out_dir, "Output directory");
    cmd->add_option("--seed", o.seed, "Override the mesh seed (single runs) or master seed (campaigns)")
        ->each([&](const std::string&) { o.seed_set = true; });
    if (with_jobs) cmd->add_option("--jobs", o.jobs, "Worker threads (fallback: LATFRAC_JOBS, then hardware)");
}

// --config wins over --preset; a config file can itself name a preset to
// start from.
RunConfig load_run_config(const CommonOpts& o) {
    RunConfig cfg;
    if (!o.config_path.empty()) cfg = parse_config_file(o.config_path);
    else if (!o.preset.empty()) cfg = preset_config(o.preset);
    else throw std::invalid_argument("give --config or --preset");
    if (o.seed_set) cfg.mesh_seed = o.seed;
    return cfg;
}

GrainStructure grains_for(const RunConfig& cfg) {
    switch (cfg.grains.spec.kind) {
        case GradingSpec::Kind::monodisperse:
            return place_monodisperse(cfg.specimen.outline, cfg.grains.spec.d, std::nullopt,
                                      cfg.grains.spec.target_fraction, cfg.grains.gap_min, cfg.grain_seed);
        case GradingSpec::Kind::fuller:
            return place_fuller(cfg.specimen.outline, cfg.grains.spec.d_min, cfg.grains.spec.d_max,
                                cfg.grains.spec.target_fraction, cfg.grains.spec.n_classes, cfg.grains.gap_min,
                                cfg.grain_seed, cfg.grains.spec.fuller_exponent);
        case GradingSpec::Kind::none:
        default: {
            GrainStructure g;
            g.outline = cfg.specimen.outline;
            g.seed = cfg.grain_seed;
            return g;
        }
    }
}

int cmd_mesh(const CommonOpts& o) {
    const RunConfig cfg = load_run_config(o);
    LatticeMesh mesh = generate_mesh(cfg.specimen.outline, cfg.specimen.l_m, cfg.mesh_seed, cfg.specimen.mesh_options);
    for (const Rect& notch : cfg.specimen.notches) mesh = carve_notch(mesh, notch);
    fs::create_directories(o.out_dir);
    write_text_file(o.out_dir + "/mesh.json", mesh_to_json(mesh));
    std::printf("mesh: %zu nodes, %zu elements, mean size %.4f mm -> %s/mesh.json\n",
                mesh.nodes.size(), mesh.elements.size(), mesh.mean_size, o.out_dir.c_str());
    return 0;
}

int cmd_grains(const CommonOpts& o) {
    RunConfig cfg = load_run_config(o);
    if (o.seed_set) cfg.grain_seed = o.seed;
    const GrainStructure g = grains_for(cfg);
    fs::create_directories(o.out_dir);
    write_text_file(o.out_dir + "/grains.json", grains_to_json(g));
    std::printf("grains: %zu inclusions, achieved fraction %.4f -> %s/grains.json\n",
                g.inclusions.size(), g.achieved_fraction, o.out_dir.c_str());
    return 0;
}

int cmd_run(const CommonOpts& o) {
    const RunConfig cfg = load_run_config(o);
    const RunResult res = run_single(cfg);
    emit_run_outputs(res, o.out_dir);
    std::printf("run %s: %zu events (%s), l_FPZ %s -> %s\n", res.record.config_hash.c_str(),
                res.record.events.size(), res.record.terminated_reason.c_str(),
                res.fpz_ok ? (std::to_string(res.l_fpz) + " mm").c_str() : "n/a", o.out_dir.c_str());
    return 0;
}

int cmd_analyze(const std::string& record_path, const std::string& out_dir) {
    SimulationRecord rec = record_from_json(read_text_file(record_path));
    RunResult res;
    res.record = rec;
    if (!rec.events.empty()) res.gf = fracture_energy_Gf(rec);
    try {
        const FpzResult f = fpz_width(rec);
        res.l_fpz = f.l_fpz;
        res.sigma = f.sigma;
        res.fpz_ok = true;
    } catch (const std::exception& e) {
        res.fpz_error = e.what();
    }
    emit_run_outputs(res, out_dir);
    std::printf("analyzed %s -> %s\n", record_path.c_str(), out_dir.c_str());
    return 0;
}

int cmd_campaign(const CommonOpts& o) {
    CampaignSpec spec;
    if (!o.config_path.empty()) spec = parse_campaign_file(o.config_path);
    else throw std::invalid_argument("campaign needs --config");
    if (o.seed_set) spec.master_seed = o.seed;
    const CampaignSummary summary = run_campaign(spec, o.jobs);
    emit_outputs(summary, spec, o.out_dir);
    std::printf("campaign: %zu runs, %zu failures -> %s\n", summary.runs.size(), summary.failures.size(),
                o.out_dir.c_str());
    for (const auto& p : summary.points)
        std::printf("  %-16s param %-8g mean l_FPZ %8.3f +- %-8.3f%s\n", p.label.c_str(), p.parameter,
                    p.mean_lfpz, p.std_lfpz,
                    p.mean_lc > 0 ? ("  l_c " + std::to_string(p.mean_lc)).c_str() : "");
    return summary.failures.empty() ? 0 : 1;
}

int cmd_plot(const std::string& record_path, const std::string& out_dir) {
    SimulationRecord rec = record_from_json(read_text_file(record_path));
    fs::create_directories(out_dir);
    const auto curve = rec.load_curve();
    if (curve.size() >= 2) {
        SvgPlot plot("load curve", "displacement [mm]", "force [N/mm]");
        plot.add_line(curve, "#888", false, "raw");
        plot.add_line(envelope_curve(curve).points, "#c03030", false, "envelope");
        write_text_file(out_dir + "/loadcurve.svg", plot.render());
    }
    if (!rec.events.empty()) {
        const MacrocrackResult crack = macrocrack_direction(rec);
        write_text_file(out_dir + "/crack.svg", crack_pattern_svg(rec, crack));
        write_text_file(out_dir + "/density.svg",
                        raster_heatmap_svg(energy_density_map(rec, 2.0), "dissipated energy density"));
    }
    std::printf("plots -> %s\n", out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"latfrac: 2D lattice fracture simulator (FPZ width and characteristic length)"};
    app.require_subcommand(1);

    CommonOpts mesh_o, grains_o, run_o, campaign_o;
    std::string record_path, analyze_out = "latfrac-out", plot_out = "latfrac-out";

    add_common(app.add_subcommand("mesh", "Generate a lattice mesh and write mesh.json"), mesh_o);
    add_common(app.add_subcommand("grains", "Generate an inclusion structure and write grains.json"), grains_o);
    add_common(app.add_subcommand("run", "Run one quasi-static simulation with analysis"), run_o);

    auto* analyze = app.add_subcommand("analyze", "Post-process an existing record.json");
    analyze->add_option("--record", record_path, "record.json path")->required();
    analyze->add_option("--out", analyze_out, "Output directory");

    add_common(app.add_subcommand("campaign", "Run a sweep campaign from a campaign JSON"), campaign_o, true);

    auto* material = app.add_subcommand("material", "Material table helpers");
    auto* material_default = material->add_subcommand("default", "Print the default material JSON");

    auto* plot = app.add_subcommand("plot", "Re-render SVG plots from a record.json");
    plot->add_option("--record", record_path, "record.json path")->required();
    plot->add_option("--out", plot_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("mesh")) return cmd_mesh(mesh_o);
        if (app.got_subcommand("grains")) return cmd_grains(grains_o);
        if (app.got_subcommand("run")) return cmd_run(run_o);
        if (app.got_subcommand("analyze")) return cmd_analyze(record_path, analyze_out);
        if (app.got_subcommand("campaign")) return cmd_campaign(campaign_o);
        if (app.got_subcommand("plot")) return cmd_plot(record_path, plot_out);
        if (app.got_subcommand("material")) {
            if (material->got_subcommand(material_default)) {
                std::fputs(default_material_json().c_str(), stdout);
                return 0;
            }
            std::fputs("usage: latfrac material default\n", stderr);
            return 2;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
