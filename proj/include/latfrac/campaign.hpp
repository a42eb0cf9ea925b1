#ifndef LATFRAC_CAMPAIGN_HPP
#define LATFRAC_CAMPAIGN_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latfrac/analysis.hpp"
#include "latfrac/engine.hpp"

namespace latfrac {

struct GrainConfig {
    GradingSpec spec;       // none | monodisperse | fuller
    double gap_min = 0.0;   // mm between disk rims
};

struct AnalysisConfig {
    EnergyKind fpz_energy = EnergyKind::actual;
    double macrocrack_threshold = 0.5;
    double density_cell = 2.0;  // mm
};

struct RunConfig {
    SpecimenConfig specimen;
    MaterialTable material;
    GrainConfig grains;
    std::uint64_t mesh_seed = 1;
    std::uint64_t grain_seed = 2;
    StopRules run;
    AnalysisConfig analysis;

    std::string canonical_json() const;
    std::string hash() const;  // FNV-1a of the canonical form, hex
};

// Known preset geometries. ld/dd-40x160 are the bar-loaded slender
// specimens; specimen-90x60 the wider direct-tension geometry; the
// ligament-{L,M,S,XS} family is the 100x100 square with a single edge notch
// of depth 10/20/35/50.
RunConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

RunConfig parse_config_json(const std::string& text);
RunConfig parse_config_file(const std::string& path);
std::string default_material_json();

// One full simulation with analysis attached.
struct RunResult {
    RunConfig config;
    SimulationRecord record;
    GrainStructure grains;
    std::vector<Phase> labels;     // per element, bars included
    double l_fpz = 0.0;
    double sigma = 0.0;
    double gf = 0.0;               // only meaningful when events exist
    bool fpz_ok = false;
    std::string fpz_error;
};

RunResult run_single(const RunConfig& config);

// Variant that bypasses grain generation; the campaign paths with shared
// inclusion centers pass the prebuilt structure.
RunResult run_single_with_grains(const RunConfig& config, const GrainStructure* grains_override);

struct CampaignSweep {
    enum class Kind { none, path_a, path_b, path_c, ligament, mesh_size };
    Kind kind = Kind::none;
    std::vector<double> d_values;         // path_a / path_b
    std::vector<double> fractions;        // path_c
    double fixed_d = 8.0;                 // path_c
    double fixed_fraction = 0.4;          // path_b anchor / path_a anchor fraction
    std::vector<std::string> presets;     // ligament geometries
    std::vector<double> d_max_values;     // ligament
    double fuller_d_min = 3.15;
    double fuller_fraction = 0.45;
    std::vector<double> mesh_sizes;       // mesh_size study
};

struct CampaignSpec {
    RunConfig base;
    CampaignSweep sweep;
    int replicates = 3;
    std::uint64_t master_seed = 1;
    bool measure_lc = false;  // adds a paired DD run per LD run
    int jobs = 0;             // 0: --jobs / LATFRAC_JOBS / hardware
};

CampaignSpec parse_campaign_json(const std::string& text);
CampaignSpec parse_campaign_file(const std::string& path);

struct CampaignRun {
    int point = 0;
    int replicate = 0;
    std::string point_label;
    double parameter = 0.0;  // swept value (d, P_a, d_max, or realized mesh size)
    RunResult ld;            // the damage-localizing run (protocol from the point config)
    std::optional<RunResult> dd;
    double lc = 0.0;
    double ws = 0.0;
    bool ok = false;
    std::string error;
};

struct CampaignPointSummary {
    std::string label;
    std::string series;  // ligament sweeps group per geometry preset
    double parameter = 0.0;
    int completed = 0;
    double mean_lfpz = 0.0, std_lfpz = 0.0;
    double mean_lc = 0.0, std_lc = 0.0;
    double mean_mesh_size = 0.0;
};

struct CampaignSummary {
    std::vector<CampaignRun> runs;
    std::vector<CampaignPointSummary> points;
    OlsFit lfpz_fit;   // over point means vs parameter
    OlsFit lc_fit;
    bool lfpz_fit_ok = false;
    bool lc_fit_ok = false;
    std::vector<std::string> failures;
};

// Runs every (point x replicate) task on a small worker pool and reduces in
// deterministic point/replicate order; results are a pure function of
// (spec, master seed).
CampaignSummary run_campaign(const CampaignSpec& spec, int jobs_override = 0);

// CSV tables, summary JSON, SVG plots, and per-run artifacts under out_dir.
void emit_outputs(const CampaignSummary& summary, const CampaignSpec& spec, const std::string& out_dir);

// Single-run artifact emission (record, event log, curves, analysis, plots).
void emit_run_outputs(const RunResult& result, const std::string& out_dir);

int resolve_jobs(int cli_jobs, int spec_jobs);

}  // namespace latfrac

#endif
