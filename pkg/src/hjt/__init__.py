"""Numerical toolkit for geometric Hamilton-Jacobi theory.

Candidate solutions (vector fields on configuration space or 1-forms on it)
are checked against Lagrangian, Hamiltonian or symplectic dynamics on
sample grids, in a generalized mode (invariance of the image) and a
standard mode (additionally isotropic image). Complete solutions are built
from first integrals by solving for velocities leaf by leaf.
"""

from .geometry import CENTRAL, DUAL, DiffConfig, FormMatrix, ScalarField, SectionField
from .dynamics import HamiltonianSystem, LagrangianSystem, SymplecticSode, integrate
from .hj_lagrangian import CandidateVectorField, verify
from .hj_hamiltonian import CandidateOneForm, verify_h
from .foliations import IntegralFamily, build_complete_solution, involution_matrix, solve_leaf
from .sampling import Grid, ResidualReport
from .systems import get_system, system_names

__all__ = [
    "CENTRAL", "DUAL", "DiffConfig", "FormMatrix", "ScalarField", "SectionField",
    "HamiltonianSystem", "LagrangianSystem", "SymplecticSode", "integrate",
    "CandidateVectorField", "verify", "CandidateOneForm", "verify_h",
    "IntegralFamily", "build_complete_solution", "involution_matrix", "solve_leaf",
    "Grid", "ResidualReport", "get_system", "system_names",
]
__version__ = "0.1.0"
