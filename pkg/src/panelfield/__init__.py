"""Exact influence fields of uniform rectangular source panels.

Closed-form potential and force of a unit-density rectangular panel, valid
from the far field down to points nanounits from the surface; brute-force
quadrature and nodal point-source comparators; plate/cube meshes with edge
grading; and a collocation boundary-element solver that reproduces unit
plate and cube capacitances.
"""

from .backend import active_backend, numba_available, set_num_threads
from .errors import (
    CoincidentSource,
    EdgeSingularity,
    InvalidGrading,
    NonFinite,
    OnSurfaceAmbiguity,
    PanelFieldError,
    SingularMatrix,
    ToleranceNotMet,
)
from .geometry import (
    Frame,
    GradingSpec,
    Mesh,
    Panel,
    grade_breakpoints,
    mesh_cube,
    mesh_plate,
    to_global,
    to_local,
)
from .kernel import (
    EvalPoint,
    FootprintClass,
    InfluenceValues,
    KernelIntermediates,
    PanelExtent,
    UNIT_PANEL,
    classify_footprint,
    edge_distance,
    eps_geo,
    force_complex_form,
    force_exact,
    influence,
    influence_batch,
    intermediates,
    potential_batch,
    potential_centroid,
    potential_complex_form,
    potential_exact,
)
from .oracle import (
    PointSourceGrid,
    QuadratureResult,
    QuadratureSpec,
    force_quadrature,
    influence_quadrature,
    normalized_error,
    panel_distance,
    point_source_influence,
    potential_quadrature,
)
from .solver import (
    BoundaryCondition,
    InfluenceMatrix,
    Solution,
    assemble,
    build_mesh,
    capacitance,
    convergence_study,
    densities_csv,
    field_at,
    field_at_many,
    solution_summary,
    solve,
    summary_json,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
