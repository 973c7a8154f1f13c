"""Registered example systems.

Importing this package registers every system under its name; use
:func:`get_system` to build one.
"""

from .base import (
    CandidateSpec,
    SystemDescriptor,
    UnknownCandidate,
    UnknownSystem,
    get_system,
    register,
    system_description,
    system_names,
    system_parameters,
)
from . import mechanics, geodesic, lie, monopole, timedep  # noqa: F401  (registration)
from .geodesic import Metric, euclidean, geodetic_solution_check, minkowski
from .lie import lie_group_invariant_solution_check, rigid_body_solution_check, rigid_body_terms
from .monopole import isotropic_candidate, monopole_ks_lagrangian_check
from .timedep import homogeneous_extension, td_hj_residual

__all__ = [
    "CandidateSpec", "SystemDescriptor", "UnknownCandidate", "UnknownSystem",
    "get_system", "register", "system_description", "system_names", "system_parameters",
    "Metric", "euclidean", "minkowski", "geodetic_solution_check",
    "lie_group_invariant_solution_check", "rigid_body_solution_check", "rigid_body_terms",
    "isotropic_candidate", "monopole_ks_lagrangian_check",
    "homogeneous_extension", "td_hj_residual",
]
