#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "latfrac/campaign.hpp"
#include "latfrac/svg.hpp"

namespace py = pybind11;
using namespace latfrac;

namespace {

RunResult run_from_json(const std::string& config_json) {
    return run_single(parse_config_json(config_json));
}

std::vector<std::pair<double, double>> envelope_points(const std::vector<std::pair<double, double>>& raw) {
    return envelope_curve(raw).points;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "2D lattice-element fracture simulator: meshes, take-and-place mesostructures, "
              "event-driven quasi-static failure, FPZ and characteristic-length analysis";

    py::class_<Vec2>(m, "Vec2")
        .def(py::init<double, double>())
        .def_readwrite("x", &Vec2::x)
        .def_readwrite("y", &Vec2::y)
        .def("__repr__", [](const Vec2& v) {
            return "Vec2(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ")";
        });

    py::class_<Rect>(m, "Rect")
        .def(py::init<double, double, double, double>())
        .def_static("sized", &Rect::sized)
        .def_readwrite("x0", &Rect::x0)
        .def_readwrite("y0", &Rect::y0)
        .def_readwrite("x1", &Rect::x1)
        .def_readwrite("y1", &Rect::y1)
        .def("width", &Rect::width)
        .def("height", &Rect::height)
        .def("area", &Rect::area);

    py::class_<Node>(m, "Node")
        .def_readonly("pos", &Node::pos)
        .def_property_readonly("tag", [](const Node& n) { return std::string(to_string(n.tag)); });

    py::class_<ElementGeom>(m, "ElementGeom")
        .def_readonly("node_i", &ElementGeom::node_i)
        .def_readonly("node_j", &ElementGeom::node_j)
        .def_readonly("length", &ElementGeom::length)
        .def_readonly("eff_width", &ElementGeom::eff_width)
        .def_readonly("n0", &ElementGeom::n0)
        .def_readonly("t0", &ElementGeom::t0);

    py::class_<LatticeMesh>(m, "LatticeMesh")
        .def_readonly("nodes", &LatticeMesh::nodes)
        .def_readonly("elements", &LatticeMesh::elements)
        .def_readonly("mean_size", &LatticeMesh::mean_size)
        .def_readonly("min_size", &LatticeMesh::min_size)
        .def_readonly("seed", &LatticeMesh::seed)
        .def_property_readonly("node_count", [](const LatticeMesh& m_) { return m_.nodes.size(); })
        .def_property_readonly("element_count", [](const LatticeMesh& m_) { return m_.elements.size(); })
        .def_property_readonly("triangle_count", [](const LatticeMesh& m_) { return m_.triangles.size(); })
        .def("triangle_area_sum", &LatticeMesh::triangle_area_sum)
        .def("to_json", &mesh_to_json);

    m.def("generate_mesh",
          [](const Rect& domain, double l_m, std::uint64_t seed, double perturbation_ratio) {
              MeshOptions opt;
              opt.perturbation_ratio = perturbation_ratio;
              return generate_mesh(domain, l_m, seed, opt);
          },
          py::arg("domain"), py::arg("l_m"), py::arg("seed"), py::arg("perturbation_ratio") = 0.4);
    m.def("carve_notch", &carve_notch, py::arg("mesh"), py::arg("notch"));
    m.def("mesh_from_json", &mesh_from_json);
    m.def("validate_mesh", &validate_mesh);

    py::class_<Inclusion>(m, "Inclusion")
        .def_readonly("center", &Inclusion::center)
        .def_readonly("diameter", &Inclusion::diameter);

    py::class_<GrainStructure>(m, "GrainStructure")
        .def_readonly("inclusions", &GrainStructure::inclusions)
        .def_readonly("achieved_fraction", &GrainStructure::achieved_fraction)
        .def_readonly("seed", &GrainStructure::seed)
        .def("to_json", &grains_to_json);

    m.def("place_monodisperse",
          [](const Rect& outline, double d, double fraction, double gap_min, std::uint64_t seed) {
              return place_monodisperse(outline, d, std::nullopt, fraction, gap_min, seed);
          },
          py::arg("outline"), py::arg("d"), py::arg("fraction"), py::arg("gap_min"), py::arg("seed"));
    m.def("place_monodisperse_count",
          [](const Rect& outline, double d, int count, double gap_min, std::uint64_t seed) {
              return place_monodisperse(outline, d, count, std::nullopt, gap_min, seed);
          },
          py::arg("outline"), py::arg("d"), py::arg("count"), py::arg("gap_min"), py::arg("seed"));
    m.def("rescale_diameters", &rescale_diameters, py::arg("grains"), py::arg("new_d"), py::arg("gap_min"));
    m.def("place_fuller", &place_fuller, py::arg("outline"), py::arg("d_min"), py::arg("d_max"),
          py::arg("fraction"), py::arg("n_classes"), py::arg("gap_min"), py::arg("seed"), py::arg("q") = 0.5);
    m.def("fuller_passing", &fuller_passing, py::arg("D"), py::arg("d_max"), py::arg("q") = 0.5);
    m.def("grains_from_json", &grains_from_json);
    m.def("classify_elements", [](const LatticeMesh& mesh, const GrainStructure& grains) {
        std::vector<std::string> out;
        for (Phase p : classify_elements(mesh, grains)) out.emplace_back(to_string(p));
        return out;
    });

    m.def("moduli_from_elastic", [](double E, double nu) {
        double kn, kt;
        moduli_from_elastic(E, nu, kn, kt);
        return std::make_pair(kn, kt);
    }, py::arg("E"), py::arg("nu"));
    m.def("elastic_from_moduli", [](double kn, double kt) {
        const ElasticConstants ec = elastic_from_moduli(kn, kt);
        return std::make_pair(ec.E, ec.nu);
    }, py::arg("Kn"), py::arg("Kt"));

    py::class_<PhaseSpec>(m, "PhaseSpec")
        .def_readonly("name", &PhaseSpec::name)
        .def_readonly("Kn", &PhaseSpec::Kn_bar)
        .def_readonly("Kt", &PhaseSpec::Kt_bar)
        .def_readonly("sigma_n0", &PhaseSpec::sigma_n0)
        .def_readonly("sigma_t0", &PhaseSpec::sigma_t0)
        .def_readonly("breakable", &PhaseSpec::breakable);

    py::class_<MaterialTable>(m, "MaterialTable")
        .def_readonly("matrix", &MaterialTable::matrix)
        .def_readonly("inclusion", &MaterialTable::inclusion)
        .def_readonly("itz", &MaterialTable::itz)
        .def_readonly("bar", &MaterialTable::bar)
        .def_readonly("exponent", &MaterialTable::exponent);

    m.def("default_material", &default_material);
    m.def("default_material_json", &default_material_json);
    m.def("failure_value",
          static_cast<double (*)(double, double, double, const PhaseSpec&, double)>(&failure_value),
          py::arg("fn"), py::arg("ft"), py::arg("A"), py::arg("phase"), py::arg("n"));
    m.def("failure_scale",
          static_cast<double (*)(double, double, double, const PhaseSpec&, double)>(&failure_scale),
          py::arg("fn"), py::arg("ft"), py::arg("A"), py::arg("phase"), py::arg("n"));

    py::class_<BreakEvent>(m, "BreakEvent")
        .def_readonly("index", &BreakEvent::index)
        .def_readonly("element_id", &BreakEvent::element_id)
        .def_readonly("midpoint", &BreakEvent::midpoint)
        .def_readonly("eta_min", &BreakEvent::eta_min)
        .def_readonly("displacement", &BreakEvent::displacement)
        .def_readonly("force", &BreakEvent::force)
        .def_readonly("e_nominal", &BreakEvent::e_nominal)
        .def_readonly("e_actual", &BreakEvent::e_actual)
        .def_readonly("opening", &BreakEvent::opening)
        .def_property_readonly("phase", [](const BreakEvent& e) { return std::string(to_string(e.phase)); });

    py::class_<SimulationRecord>(m, "SimulationRecord")
        .def_readonly("events", &SimulationRecord::events)
        .def_readonly("terminated_reason", &SimulationRecord::terminated_reason)
        .def_readonly("initial_unit_reaction", &SimulationRecord::initial_unit_reaction)
        .def_readonly("mean_mesh_size", &SimulationRecord::mean_mesh_size)
        .def_readonly("specimen_area", &SimulationRecord::specimen_area)
        .def_readonly("protocol", &SimulationRecord::protocol)
        .def_readonly("config_hash", &SimulationRecord::config_hash)
        .def("load_curve", &SimulationRecord::load_curve)
        .def("to_json", &record_to_json)
        .def("events_csv", &events_to_csv);

    m.def("record_from_json", &record_from_json);

    py::class_<FpzResult>(m, "FpzResult")
        .def_readonly("l_fpz", &FpzResult::l_fpz)
        .def_readonly("sigma", &FpzResult::sigma)
        .def_readonly("center", &FpzResult::center)
        .def_readonly("residual", &FpzResult::residual)
        .def_readonly("angle", &FpzResult::angle)
        .def_readonly("degenerate", &FpzResult::degenerate);

    m.def("fracture_energy", &fracture_energy_Gf, py::arg("record"));
    m.def("energy_density", &energy_density_Ws, py::arg("record"), py::arg("volume") = 0.0);
    m.def("characteristic_length", &characteristic_length, py::arg("Gf"), py::arg("Ws"));
    m.def("fpz_width",
          [](const SimulationRecord& rec, const std::string& energy, double threshold) {
              return fpz_width(rec, energy == "nominal" ? EnergyKind::nominal : EnergyKind::actual, threshold);
          },
          py::arg("record"), py::arg("energy") = "actual", py::arg("macrocrack_threshold") = 0.5);
    m.def("envelope_curve", &envelope_points, py::arg("raw"));

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("record", &RunResult::record)
        .def_readonly("grains", &RunResult::grains)
        .def_readonly("l_fpz", &RunResult::l_fpz)
        .def_readonly("sigma", &RunResult::sigma)
        .def_readonly("gf", &RunResult::gf)
        .def_readonly("fpz_ok", &RunResult::fpz_ok);

    m.def("run_simulation", &run_from_json, py::arg("config_json"),
          "Run one quasi-static simulation from a run-config JSON string");
    m.def("preset_config_json", [](const std::string& name) { return preset_config(name).canonical_json(); });
    m.def("preset_names", &preset_names);
    m.def("config_hash", [](const std::string& config_json) { return parse_config_json(config_json).hash(); });
}
