"""Bifurcation atlas toolkit for a scaled Holling-Leslie predator-prey model."""

from .model import (  # noqa: F401
    Params,
    State,
    Equilibrium,
    EquilibriumClass,
    Tolerances,
    OriginRegime,
    OriginStructure,
    DomainError,
    rhs_original,
    rhs_rescaled,
    solve_equilibria,
    jacobian,
    classify_equilibrium,
    origin_structure,
)
from .bifcurves import (  # noqa: F401
    BifCurve,
    BifKind,
    CurvePoint,
    GHPoint,
    bt_curve,
    codim3_points,
    cusp_point,
    gh_branches,
    gh_points,
    hopf_curve,
    neutral_saddle_curve,
    section_polyline,
    slice_section,
    turning_curve,
)
from .dynamics import (  # noqa: F401
    CycleStability,
    LimitCycle,
    PoincareSection,
    Trajectory,
    TrajectoryEnd,
    find_limit_cycles,
    loop_defect,
    poincare_map,
    separatrices,
)
from .lyapunov import (  # noqa: F401
    canonicalize,
    first_focal_value,
    hopf_stability_poly,
    second_focal_value,
)
from .nonlocal_curves import (  # noqa: F401
    ContinuationStall,
    MeasureFailure,
    SeedFailure,
    continue_curve,
    double_cycle_run,
    double_cycle_section,
    loop_run,
    loop_section,
    nonlocal_sections,
    seed_double_cycle_curve,
    seed_loop_curve,
)
from .atlas import (  # noqa: F401
    NonRoughParameters,
    PortraitSignature,
    SliceDiagram,
    TransitionViolation,
    UnmatchedSignatureWarning,
    build_slice,
    classify_portrait,
    default_window,
    transition_audit,
)
from .svgplot import render_curves  # noqa: F401

__version__ = "0.1.0"
