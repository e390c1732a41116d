"""Qubit energy relaxation from a resonant TLS defect bath on a transmon."""

from .constants import DEFAULT_QUBIT_FREQ
from .geometry import (
    DeviceGeometry,
    Position,
    Positions,
    Rect,
    default_transmon_geometry,
    sample_positions,
)
from .fieldmap import (
    FieldMap,
    SyntheticFieldParams,
    field_at,
    fields_at,
    load_field_map,
    save_field_map,
    scale_to_single_photon,
    synthetic_field,
)
from .ensemble import (
    EnsembleSpec,
    RetainedSet,
    TlsDefect,
    TlsEnsemble,
    sample_ensemble,
    select_top_k,
    tls_relaxation_time,
    tls_tls_coupling,
)
from .model import (
    CollapseChannel,
    InitialState,
    ModelMatrices,
    build_collapse,
    build_hamiltonian,
    initial_state,
)
from .engine import (
    BACKEND,
    IntegrationError,
    IntegratorConfig,
    Trajectory,
    evolve_fast,
    evolve_full,
    lindblad_rhs,
    observables,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CollapseChannel",
    "DEFAULT_QUBIT_FREQ",
    "DeviceGeometry",
    "EnsembleSpec",
    "FieldMap",
    "InitialState",
    "IntegrationError",
    "IntegratorConfig",
    "ModelMatrices",
    "Position",
    "Positions",
    "Rect",
    "RetainedSet",
    "SyntheticFieldParams",
    "TlsDefect",
    "TlsEnsemble",
    "Trajectory",
    "build_collapse",
    "build_hamiltonian",
    "default_transmon_geometry",
    "evolve_fast",
    "evolve_full",
    "field_at",
    "fields_at",
    "initial_state",
    "lindblad_rhs",
    "load_field_map",
    "observables",
    "sample_ensemble",
    "sample_positions",
    "save_field_map",
    "scale_to_single_photon",
    "select_top_k",
    "synthetic_field",
    "tls_relaxation_time",
    "tls_tls_coupling",
]
