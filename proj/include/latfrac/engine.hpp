#ifndef LATFRAC_ENGINE_HPP
#define LATFRAC_ENGINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "latfrac/constitutive.hpp"
#include "latfrac/mesostructure.hpp"
#include "latfrac/solver.hpp"

namespace latfrac {

enum class ProtocolKind {
    ld,      // notched, stiff bars glued over each end segment
    dd,      // unnotched, stiff bars glued over the whole height (PIED)
    direct,  // top boundary displacement imposed, bottom held
};

const char* to_string(ProtocolKind k);
ProtocolKind protocol_from_string(const std::string& s);

struct LoadProtocol {
    ProtocolKind kind = ProtocolKind::direct;
    double bar_width = 2.0;       // mm
    double glue_fraction = 0.25;  // LD: glued length at each end, as a height fraction
};

struct SpecimenConfig {
    Rect outline = Rect::sized(40.0, 160.0);
    std::vector<Rect> notches;
    double l_m = 2.0;
    MeshOptions mesh_options;
    LoadProtocol protocol;
};

struct Specimen {
    LatticeMesh mesh;  // bars included; mesh.domain is the bare outline
    GrainStructure grains;
    std::vector<Phase> labels;
    std::vector<ElementState> states;
    std::vector<int> bar_elements;
    BoundaryConditions bc;            // unit loading pattern
    std::vector<int> top_imposed;     // nodes carrying the moving grip
    std::vector<int> bottom_imposed;
    double pattern_magnitude = 1.0;   // grip separation at unit pattern [mm]
    Vec2 loading_axis{0.0, 1.0};
    double specimen_area = 0.0;       // outline minus notches [mm^2], bars excluded
    MaterialTable material;
    SpecimenConfig config;
};

Specimen build_specimen(const SpecimenConfig& config, const GrainStructure& grains,
                        const MaterialTable& material, std::uint64_t mesh_seed);

struct BreakEvent {
    int index = 0;
    int element_id = -1;
    Phase phase = Phase::matrix;
    Vec2 midpoint;
    double eta_min = 0.0;
    double displacement = 0.0;  // mm (grip separation at the event)
    double force = 0.0;         // N per unit thickness
    double e_nominal = 0.0;     // N*mm
    double e_actual = 0.0;
    // element data carried along so post-processing needs no mesh
    double eff_width = 0.0;
    double Kn = 0.0, Kt = 0.0;
    double sigma_n0 = 0.0, sigma_t0 = 0.0;
    double opening = 0.0;  // mm, filled by final_openings
    long solver_iterations = 0;      // of the reference solve behind this event
    double solver_residual = 0.0;    // final gradient norm [N/mm]
};

struct StopRules {
    double reaction_ratio = 1e-6;  // stop when unit reaction falls below ratio * initial
    long max_events = 1000000;
    SolverOptions solver;
};

struct SimulationRecord {
    std::vector<BreakEvent> events;
    std::string terminated_reason;
    double initial_unit_reaction = 0.0;
    double final_unit_reaction = 0.0;
    double pattern_magnitude = 1.0;
    double mean_mesh_size = 0.0;
    double specimen_area = 0.0;
    Rect outline;
    std::string protocol;
    std::uint64_t mesh_seed = 0;
    std::uint64_t grain_seed = 0;
    std::string config_hash;
    long solver_iterations_total = 0;

    std::vector<std::pair<double, double>> load_curve() const {
        std::vector<std::pair<double, double>> c;
        c.reserve(events.size());
        for (const auto& e : events) c.emplace_back(e.displacement, e.force);
        return c;
    }
};

// Event-driven quasi-static run: solve the unit reference state, scale to
// the weakest element's failure surface, break it (ties at relative 1e-12 go
// to the lowest element id), record, repeat. Mutates specimen states.
SimulationRecord run_quasistatic(Specimen& specimen, const StopRules& rules = {});

// Re-solve at the last recorded load state with every broken element removed
// and store each broken element's normal opening into the record and states.
void final_openings(Specimen& specimen, SimulationRecord& record, const SolverOptions& options = {});

std::string record_to_json(const SimulationRecord& record);
SimulationRecord record_from_json(const std::string& text);
std::string events_to_csv(const SimulationRecord& record);

}  // namespace latfrac

#endif
