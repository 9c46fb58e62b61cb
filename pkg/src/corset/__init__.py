"""corset: finite truncations of the model geometries of relatively
hyperbolic groups, with quasiconvexity and distortion diagnostics.

The package builds Cayley balls, coned-off balls, and cusped (horoball-
augmented) balls over a catalog of concrete groups, and runs hyperbolicity
estimators, coset-penetration and fineness probes, quasiconvexity profiles,
and subgroup distortion computations on them.
"""

from .balls import CayleyBall, GeodesicPath, ball_enumerate, DEFAULT_VERTEX_BUDGET
from .coned import ConedBall, RelativePath, bcp_probe, fineness_probe
from .cusped import CuspedBall, HoroballGraph, build_horoball, horoball_lemma_probe, qc3_probe
from .distortion import (
    DistortionTable,
    GrowthFunction,
    distortion_sandwich_check,
    distortion_table,
    dominance_check,
    superadditive_closure,
)
from .errors import (
    CorsetError,
    DomainError,
    InsufficientDepthError,
    InsufficientRadiusError,
    InvariantViolationError,
    RepresentationError,
    ResourceBudgetError,
    SpecError,
)
from .groups import (
    AbelianGroup,
    FreeGroup,
    FreeProductGroup,
    HeisenbergGroup,
    MappingTorusGroup,
    group_from_spec,
)
from .hyperbolicity import DeltaEstimate, delta_estimate
from .qc import (
    QCReport,
    Saturation,
    TransitionDecomposition,
    coset_intersection_bound,
    deep_decomposition,
    induced_peripheral_probe,
    lift,
    qc5_profile,
    saturation,
    transition_criterion_check,
    transition_points,
)
from .subgroups import MembershipAnswer, PeripheralStructure, PeripheralSubgroup, SubgroupSpec

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
