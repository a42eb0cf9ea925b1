"""2D lattice-element fracture simulator.

Thin wrapper around the compiled `_core` extension: mesh generation,
take-and-place mesostructures, the event-driven quasi-static failure engine,
and the FPZ / characteristic-length analysis."""

from ._core import (  # noqa: F401
    BreakEvent,
    ElementGeom,
    FpzResult,
    GrainStructure,
    Inclusion,
    LatticeMesh,
    MaterialTable,
    Node,
    PhaseSpec,
    Rect,
    RunResult,
    SimulationRecord,
    Vec2,
    carve_notch,
    characteristic_length,
    classify_elements,
    config_hash,
    default_material,
    default_material_json,
    elastic_from_moduli,
    energy_density,
    envelope_curve,
    failure_scale,
    failure_value,
    fracture_energy,
    fpz_width,
    fuller_passing,
    generate_mesh,
    grains_from_json,
    mesh_from_json,
    moduli_from_elastic,
    place_fuller,
    place_monodisperse,
    place_monodisperse_count,
    preset_config_json,
    preset_names,
    record_from_json,
    rescale_diameters,
    run_simulation,
    validate_mesh,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
