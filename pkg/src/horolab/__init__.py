"""Numerical laboratory for commuting parabolic actions on truncated
weight-basis models: invariant distributions of the time-T horocycle
map, coboundary and joint-transfer solvers, the splitting projector and
its three-stage cascade for vector-field sections, and exact
constant-section cohomology."""

from .errors import (
    AnnihilatorViolation,
    AssertionFailed,
    ColumnObstruction,
    CompatibilityViolation,
    ConfigError,
    ConfigParse,
    DegenerateTruncation,
    HorolabError,
    IllConditioned,
    InvalidCasimir,
    NegativeOrderUnsupported,
    RankDeficient,
    SchemaViolation,
    StageObstruction,
    TruncationTooSmall,
)
from .rep_core import (
    RepParams,
    TruncatedRep,
    bracket_residuals,
    build_rep,
    casimir_residual,
    horocycle_map,
    horocycle_map_padded,
    sobolev_norm,
    sobolev_weights,
)
from .tensor_rep import (
    ComponentList,
    TensorRep,
    acceptance_components,
    apply_l1,
    apply_l2,
    build_tensor,
    glue,
    l_op,
    tensor_sobolev_norm,
    tensor_sobolev_weights,
)
from .inv_dist import (
    DecayReport,
    DistributionSet,
    annihilator_project,
    decay_report,
    dual_basis,
    flow_invariant_distributions,
    invariant_distributions,
    kernel_clean,
    kernel_distance,
    span_residual,
)
from .cocycle_solver import (
    CoboundarySolution,
    SplitResult,
    TransferSolution,
    delta2_check,
    solve_coboundary,
    solve_transfer,
    split,
    splitting_R,
)
from .vf_cohomology import (
    CascadeResult,
    CohomologyResult,
    ConstVf,
    VfSection,
    adjoint_identities_check,
    apply_bbl,
    bbl_op,
    cascade_split,
    constant_cohomology,
    delta_v2_check,
    pushforward_matrix,
)
from .lab_cli import ExperimentConfig, RunReport, load_config, run

__version__ = "0.1.0"

__all__ = [
    "AnnihilatorViolation",
    "AssertionFailed",
    "ColumnObstruction",
    "CompatibilityViolation",
    "ConfigError",
    "ConfigParse",
    "DegenerateTruncation",
    "HorolabError",
    "IllConditioned",
    "InvalidCasimir",
    "NegativeOrderUnsupported",
    "RankDeficient",
    "SchemaViolation",
    "StageObstruction",
    "TruncationTooSmall",
    "RepParams",
    "TruncatedRep",
    "bracket_residuals",
    "build_rep",
    "casimir_residual",
    "horocycle_map",
    "horocycle_map_padded",
    "sobolev_norm",
    "sobolev_weights",
    "ComponentList",
    "TensorRep",
    "acceptance_components",
    "apply_l1",
    "apply_l2",
    "build_tensor",
    "glue",
    "l_op",
    "tensor_sobolev_norm",
    "tensor_sobolev_weights",
    "DecayReport",
    "DistributionSet",
    "annihilator_project",
    "decay_report",
    "dual_basis",
    "flow_invariant_distributions",
    "invariant_distributions",
    "kernel_clean",
    "kernel_distance",
    "span_residual",
    "CoboundarySolution",
    "SplitResult",
    "TransferSolution",
    "delta2_check",
    "solve_coboundary",
    "solve_transfer",
    "split",
    "splitting_R",
    "CascadeResult",
    "CohomologyResult",
    "ConstVf",
    "VfSection",
    "adjoint_identities_check",
    "apply_bbl",
    "bbl_op",
    "cascade_split",
    "constant_cohomology",
    "delta_v2_check",
    "pushforward_matrix",
    "ExperimentConfig",
    "RunReport",
    "load_config",
    "run",
]
