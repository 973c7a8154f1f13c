"""Residuals and verdicts for the Hamiltonian Hamilton–Jacobi problems.

A candidate is a 1-form ``α = a_i(q) dq^i``, seen as a section of T*Q. Its
associated vector field is ``X = ∂H/∂p(q, a(q))``; α solves the generalized
problem when ``i(X)dα + d(α*H) = 0`` and the standard one when moreover
``dα = 0`` (then ``H∘α`` is locally constant).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .dynamics import HamiltonianSystem, LagrangianSystem, hamiltonian_field, hamiltonian_vector_field, integrate, lagrangian_jets
from .errors import GuardViolation, SingularHessian
from .geometry import (
    DUAL,
    DiffConfig,
    ScalarField,
    SectionField,
    form_from_jacobian,
    grad,
    hessian,
    interior_product,
    is_singular,
    jacobian,
)
from .hj_lagrangian import CandidateVectorField, _field, _freeze_branches
from .sampling import ResidualReport, as_points, ordered_map

H_MODES = ("generalized", "standard")


@dataclass(frozen=True)
class CandidateOneForm:
    field: SectionField
    params: Mapping[str, float] = field(default_factory=dict)
    name: str = ""

    @property
    def n(self) -> int:
        return self.field.base_dim

    def __call__(self, q) -> np.ndarray:
        return self.field(q)

    def guard(self, q) -> bool:
        return bool(self.field.guard(q))


def exact_oneform(W: ScalarField, name: str = "") -> CandidateOneForm:
    """``α = dW`` with its Jacobian given by the Hessian of W."""

    def comps(q):
        return list(grad(W, np.array([float(c) for c in q])))

    sec = SectionField(
        W.arity,
        comps,
        W.guard,
        kind="oneform",
        name=name or f"d{W.name}",
        jac_fn=lambda q: hessian(W, q),
    )
    return CandidateOneForm(sec, name=name or f"d{W.name}")


def _section_point(sys: HamiltonianSystem, alpha, q, cfg):
    F = _field(alpha)
    q = np.asarray(q, dtype=float)
    a = F(q)
    x = np.concatenate([q, a])
    if not sys.H.guard(x):
        raise GuardViolation(x, "section point")
    return q, a, jacobian(F, q, cfg), grad(sys.H, x, cfg)


def associated_field(sys: HamiltonianSystem, alpha, q, cfg: DiffConfig = DUAL) -> np.ndarray:
    """``X(q) = ∂H/∂p(q, a(q))``."""
    _, _, _, g = _section_point(sys, alpha, q, cfg)
    return g[sys.n :]


def _hj2(n, Ja, g):
    X = g[n:]
    d_alpha = form_from_jacobian(Ja)
    d_alpha_H = g[:n] + Ja.T @ X
    return interior_product(X, d_alpha) + d_alpha_H


def hamiltonian_residual(sys: HamiltonianSystem, alpha, q, cfg: DiffConfig = DUAL) -> np.ndarray:
    """Components of ``i(X)dα + d(α*H)``."""
    _, _, Ja, g = _section_point(sys, alpha, q, cfg)
    return _hj2(sys.n, Ja, g)


def relatedness_residual(sys: HamiltonianSystem, alpha, q, cfg: DiffConfig = DUAL) -> np.ndarray:
    """Vertical part of ``Tα∘X − Z_H∘α``."""
    q, a, Ja, g = _section_point(sys, alpha, q, cfg)
    n = sys.n
    X = g[n:]
    T_alpha = np.vstack([np.eye(n), Ja])
    diff = T_alpha @ X - hamiltonian_field(sys, np.concatenate([q, a]), cfg)
    return diff[n:]


def classical_hj_residual(sys: HamiltonianSystem, W: ScalarField, grid, cfg: DiffConfig = DUAL):
    """Values of ``H(q, ∂W/∂q)`` over the samples and their spread (max − min)."""
    pts = as_points(grid, W.guard)
    vals = np.array([sys.H(np.concatenate([q, grad(W, q, cfg)])) for q in pts])
    return vals, float(vals.max() - vals.min())


def legendre_bridge(lsys: LagrangianSystem, X, cfg: DiffConfig = DUAL) -> CandidateOneForm:
    """``α = FL∘X``, i.e. ``a(q) = ∂L/∂v(q, w(q))``."""
    F = _field(X)
    n = lsys.n

    def comps(q):
        q = np.array([float(c) for c in q])
        return list(lagrangian_jets(lsys, q, F(q), cfg).L_v)

    def jac(q):
        q = np.asarray(q, dtype=float)
        jets = lagrangian_jets(lsys, q, F(q), cfg)
        if is_singular(jets.W):
            raise SingularHessian(f"Legendre map not invertible at q={tuple(q)}")
        return jets.L_vq + jets.W @ jacobian(F, q, cfg)

    def guard(q):
        if not F.guard(q):
            return False
        return bool(lsys.L.guard(np.concatenate([np.asarray(q, dtype=float), F(q)])))

    params = X.params if isinstance(X, CandidateVectorField) else {}
    name = f"FL[{F.name}]"
    return CandidateOneForm(SectionField(n, comps, guard, kind="oneform", name=name, jac_fn=jac), params, name)


def _channels(mode):
    if mode == "generalized":
        return ("hamiltonian",)
    if mode == "standard":
        return ("hamiltonian", "closedness", "constancy")
    raise ValueError(f"unknown mode {mode!r}; expected one of {H_MODES}")


def _sample(sys, alpha, q, cfg, mode):
    q, a, Ja, g = _section_point(sys, alpha, q, cfg)
    vals = {
        "hamiltonian": float(np.max(np.abs(_hj2(sys.n, Ja, g)))),
        "energy": float(sys.H(np.concatenate([q, a]))),
    }
    if mode == "standard":
        vals["closedness"] = form_from_jacobian(Ja).max_abs()
        vals["d_pullback_energy"] = float(np.max(np.abs(g[: sys.n] + Ja.T @ g[sys.n :])))
    return vals


def verify_h(
    sys: HamiltonianSystem,
    alpha,
    grid,
    tol: float,
    mode: str = "generalized",
    cfg: DiffConfig = DUAL,
    threads: Optional[int] = None,
) -> ResidualReport:
    channels = _channels(mode)
    F = _field(alpha)
    pts = as_points(grid, F.guard)
    _freeze_branches(F, pts)
    results = ordered_map(lambda q: _sample(sys, F, q, cfg, mode), pts, threads)
    samples = [(tuple(float(c) for c in p), vals) for p, vals in zip(pts, results)]
    aggregates = {}
    if mode == "standard":
        aggregates["constancy"] = float(np.std([v["energy"] for v in results]))
    return ResidualReport(mode, tol, channels, samples, aggregates)


def projection_distance_h(sys: HamiltonianSystem, alpha, q0, dt: float = 1e-3, steps: int = 1000, cfg: DiffConfig = DUAL):
    """Sup-distance between ``α`` lifted along integral curves of its field and Z_H."""
    F = _field(alpha)
    q0 = np.asarray(q0, dtype=float)
    base = integrate(lambda q: associated_field(sys, F, q, cfg), q0, dt, steps, guard=F.guard)
    full = integrate(hamiltonian_vector_field(sys, cfg), np.concatenate([q0, F(q0)]), dt, steps)
    k = min(len(base.states), len(full.states))
    lifted = np.array([np.concatenate([q, F(q)]) for q in base.states[:k]])
    return float(np.max(np.abs(lifted - full.states[:k]))), base, full
