"""Architecture-singularity distance of linear pentapods.

The package measures how far a pentapod design sits from the nearest
architecturally singular design and returns that design. ``pipeline`` is the
usual entry point; ``cli`` wraps it for the shell.
"""
from .cases import ALL_CASES, CaseError, CaseId, CaseProblem, SingularDesign, embed, enumerate_combinations
from .geometry import (
    GeometryError,
    PentapodDesign,
    conic_index,
    distance,
    distance_sq,
    min_enclosing_ball,
    rescale,
    sweep_point,
)
from .pipeline import (
    CaseResult,
    GlobalResult,
    PipelineConfig,
    SweepRow,
    architecture_distance,
    export_results,
    min_over_case,
    sweep,
)
from .solvers import SolveConfig, SolutionSet

__version__ = "0.1.0"

__all__ = [
    "ALL_CASES",
    "CaseError",
    "CaseId",
    "CaseProblem",
    "CaseResult",
    "GeometryError",
    "GlobalResult",
    "PentapodDesign",
    "PipelineConfig",
    "SingularDesign",
    "SolutionSet",
    "SolveConfig",
    "SweepRow",
    "architecture_distance",
    "conic_index",
    "distance",
    "distance_sq",
    "embed",
    "enumerate_combinations",
    "export_results",
    "min_enclosing_ball",
    "min_over_case",
    "rescale",
    "sweep",
    "sweep_point",
    "__version__",
]
