"""Difference invariants and variational calculus on lattice paths.

Three actions of SL(2)-type groups on the plane and the line come with
closed-form moving frames. The package computes their generating
difference invariants, transport (Maurer-Cartan) matrices, the
invariantized Euler-Lagrange equations and Noether conservation laws
of arbitrary invariant Lagrangians, and rebuilds solution paths from
solved invariant data through the eigenbasis recurrences. A numeric
oracle harness and a randomized property suite keep every identity
checkable.
"""

from .config import epsilon, reset_epsilon, set_epsilon
from .conservation import (
    ConservationRecord,
    first_integral,
    first_integral_profile,
    noether_constant,
    structure_defect,
)
from .frames import (
    InvariantSequence,
    LatticePath,
    frame_at,
    invariants_of,
    maurer_cartan,
    path_from_invariants,
    transform_path,
    verify_frame_identities,
)
from .groups import (
    ActionKind,
    SA2Element,
    SL2Element,
    act,
    adjoint_matrix,
    compose,
    identity,
)
from .operators import build_syzygy, curvature_consistency, syzygy_residual
from .reconstruct import (
    ReconstructionData,
    reconstruct_path,
    reconstruction_data,
    reconstruction_data_from_invariants,
    reconstruction_seed,
)
from .solver import (
    SolveConfig,
    constant_extremal,
    extremal_path_by_gradient,
    oracle_compare,
    random_extremal_path,
    step_el_forward,
)
from .variational import (
    InvariantLagrangian,
    el_equations,
    el_residual,
    lagrangian_from_callable,
    polynomial_lagrangian,
    total_action,
)
from .verify import run_property_suite

__version__ = "0.1.0"

__all__ = [
    "ActionKind",
    "ConservationRecord",
    "InvariantLagrangian",
    "InvariantSequence",
    "LatticePath",
    "ReconstructionData",
    "SA2Element",
    "SL2Element",
    "SolveConfig",
    "act",
    "adjoint_matrix",
    "build_syzygy",
    "compose",
    "constant_extremal",
    "curvature_consistency",
    "el_equations",
    "el_residual",
    "epsilon",
    "extremal_path_by_gradient",
    "first_integral",
    "first_integral_profile",
    "frame_at",
    "identity",
    "invariants_of",
    "lagrangian_from_callable",
    "maurer_cartan",
    "noether_constant",
    "oracle_compare",
    "path_from_invariants",
    "polynomial_lagrangian",
    "random_extremal_path",
    "reconstruct_path",
    "reconstruction_data",
    "reconstruction_data_from_invariants",
    "reconstruction_seed",
    "reset_epsilon",
    "run_property_suite",
    "set_epsilon",
    "step_el_forward",
    "structure_defect",
    "syzygy_residual",
    "total_action",
    "transform_path",
    "verify_frame_identities",
]
