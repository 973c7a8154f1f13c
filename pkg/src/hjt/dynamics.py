"""Canonical objects built from a Lagrangian or Hamiltonian, and flows.

Coordinates on TQ are ``(q^1..q^n, v^1..v^n)`` and on T*Q
``(q^1..q^n, p_1..p_n)``; 1-forms on these spaces are given in the basis
``(dq, dv)`` resp. ``(dq, dp)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import ad
from .errors import (
    GuardViolation,
    GuardViolationAtStep,
    InconsistentSingularSystem,
    NewtonDiverged,
    NonFinite,
    NumericallySingular,
)
from .geometry import DUAL, DiffConfig, FormMatrix, ScalarField, form_from_jacobian, grad, is_singular, jet2

SINGULAR_CONSISTENCY_TOL = 1e-8


@dataclass(frozen=True)
class LagrangianSystem:
    n: int
    L: ScalarField
    name: str = ""

    def __post_init__(self):
        if self.L.arity != 2 * self.n:
            raise ValueError("a Lagrangian on TQ needs 2n arguments")

    def guard(self, x) -> bool:
        return bool(self.L.guard(x))

    def is_regular(self, q, v, cfg: DiffConfig = DUAL) -> bool:
        return not is_singular(fiber_hessian(self, q, v, cfg))


@dataclass(frozen=True)
class HamiltonianSystem:
    n: int
    H: ScalarField
    name: str = ""

    def __post_init__(self):
        if self.H.arity != 2 * self.n:
            raise ValueError("a Hamiltonian on T*Q needs 2n arguments")

    def guard(self, x) -> bool:
        return bool(self.H.guard(x))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    aborted_at: Optional[int] = None

    @property
    def complete(self) -> bool:
        return self.aborted_at is None

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class LagrangianJets:
    """Value, gradient and Hessian of L at one point of TQ, split by blocks."""

    n: int
    value: float
    grad: np.ndarray
    hess: np.ndarray

    @property
    def L_q(self):
        return self.grad[: self.n]

    @property
    def L_v(self):
        return self.grad[self.n :]

    @property
    def W(self):
        return self.hess[self.n :, self.n :]

    @property
    def L_vq(self):
        """``L_vq[i, j] = ∂²L/∂v^i∂q^j``."""
        return self.hess[self.n :, : self.n]


def _split(x, n):
    x = np.asarray(x, dtype=float).reshape(-1)
    return x[:n], x[n:]


def lagrangian_jets(sys: LagrangianSystem, q, v, cfg: DiffConfig = DUAL) -> LagrangianJets:
    x = np.concatenate([np.asarray(q, dtype=float), np.asarray(v, dtype=float)])
    val, g, h = jet2(sys.L, x, cfg)
    return LagrangianJets(sys.n, val, g, h)


def fiber_hessian(sys: LagrangianSystem, q, v, cfg: DiffConfig = DUAL) -> np.ndarray:
    return lagrangian_jets(sys, q, v, cfg).W


def cartan_forms(sys: LagrangianSystem, x, cfg: DiffConfig = DUAL):
    """``θ_L = (∂L/∂v) dq`` and ``ω_L = -dθ_L`` at ``x = (q, v)``."""
    n = sys.n
    q, v = _split(x, n)
    jets = lagrangian_jets(sys, q, v, cfg)
    theta = np.concatenate([jets.L_v, np.zeros(n)])
    J_theta = np.zeros((2 * n, 2 * n))
    J_theta[:n, :] = jets.hess[n:, :]
    return theta, -form_from_jacobian(J_theta)


def energy(sys: LagrangianSystem, x, cfg: DiffConfig = DUAL) -> float:
    q, v = _split(x, sys.n)
    x = np.concatenate([q, v])
    g = grad(sys.L, x, cfg)
    return float(v @ g[sys.n :] - sys.L(x))


@dataclass(frozen=True)
class SodeSolution:
    accel: np.ndarray
    singular: bool
    consistency: float


def solve_sode(jets: LagrangianJets, v, tol: float = SINGULAR_CONSISTENCY_TOL) -> SodeSolution:
    """Solve ``W a = ∂L/∂q − (∂²L/∂v∂q) v``.

    For singular ``W`` the minimum-norm least-squares solution is returned
    if it is consistent; otherwise the dynamics has no SODE solution here.
    """
    W = jets.W
    rhs = jets.L_q - jets.L_vq @ np.asarray(v, dtype=float)
    if not is_singular(W):
        return SodeSolution(np.linalg.solve(W, rhs), False, 0.0)
    a, *_ = np.linalg.lstsq(W, rhs, rcond=1e-10)
    res = float(np.linalg.norm(W @ a - rhs))
    scale = max(1.0, float(np.linalg.norm(rhs)))
    if res > tol * scale:
        raise InconsistentSingularSystem(f"singular dynamics has no solution (residual {res:.3e})")
    return SodeSolution(a, True, res)


def lagrangian_sode(sys: LagrangianSystem, x, cfg: DiffConfig = DUAL) -> SodeSolution:
    q, v = _split(x, sys.n)
    return solve_sode(lagrangian_jets(sys, q, v, cfg), v)


def sode_field(sys: LagrangianSystem, cfg: DiffConfig = DUAL) -> Callable:
    """Γ_L as a plain vector field on TQ (min-norm gauge when singular)."""
    n = sys.n

    def field(x):
        q, v = _split(x, n)
        return np.concatenate([v, lagrangian_sode(sys, x, cfg).accel])

    field.guard = sys.L.guard
    return field


def hamiltonian_field(sys: HamiltonianSystem, x, cfg: DiffConfig = DUAL) -> np.ndarray:
    """``Z_H = (∂H/∂p, −∂H/∂q)``."""
    g = grad(sys.H, x, cfg)
    return np.concatenate([g[sys.n :], -g[: sys.n]])


def hamiltonian_vector_field(sys: HamiltonianSystem, cfg: DiffConfig = DUAL) -> Callable:
    def field(x):
        return hamiltonian_field(sys, x, cfg)

    field.guard = sys.H.guard
    return field


def legendre(sys: LagrangianSystem, x, cfg: DiffConfig = DUAL) -> np.ndarray:
    """``FL(q, v) = (q, ∂L/∂v)``."""
    q, v = _split(x, sys.n)
    g = grad(sys.L, np.concatenate([q, v]), cfg)
    return np.concatenate([q, g[sys.n :]])


def fiber_derivative_h(sys: HamiltonianSystem, x, cfg: DiffConfig = DUAL) -> np.ndarray:
    """``FH(q, p) = (q, ∂H/∂p)``."""
    q, _ = _split(x, sys.n)
    g = grad(sys.H, x, cfg)
    return np.concatenate([q, g[sys.n :]])


def invert_legendre(sys: LagrangianSystem, q, p, seed_v, cfg: DiffConfig = DUAL, max_iter: int = 50, tol: float = 1e-12):
    """Newton solve of ``∂L/∂v(q, v) = p`` for ``v``."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    v = np.array(seed_v, dtype=float)
    for _ in range(max_iter):
        jets = lagrangian_jets(sys, q, v, cfg)
        r = jets.L_v - p
        if np.max(np.abs(r)) <= tol * max(1.0, float(np.max(np.abs(p)))):
            return v
        if is_singular(jets.W):
            raise NumericallySingular("fiber Hessian singular during Legendre inversion")
        v = v - np.linalg.solve(jets.W, r)
        if not np.all(np.isfinite(v)):
            break
    raise NewtonDiverged(f"Legendre inversion did not converge at q={tuple(q)}, p={tuple(p)}")


def matched_hamiltonian(sys: LagrangianSystem, seed: Optional[Callable] = None, cfg: DiffConfig = DUAL) -> HamiltonianSystem:
    """``H(q, p) = p·v* − L(q, v*)`` with ``∂L/∂v(q, v*) = p``.

    The gradient is exact through the Legendre identities
    ``∂H/∂p = v*`` and ``∂H/∂q = −∂L/∂q(q, v*)``.
    """
    n = sys.n
    seed = seed or (lambda q, p: p)

    def vstar(x):
        x = np.array([ad.value(c) for c in x], dtype=float)
        q, p = x[:n], x[n:]
        return q, p, invert_legendre(sys, q, p, seed(q, p), cfg)

    def H(x):
        if isinstance(x[0], ad.Dual):
            raise TypeError("matched Hamiltonian is evaluated on floats; use its exact gradient")
        q, p, v = vstar(x)
        return float(p @ v - sys.L(np.concatenate([q, v])))

    def H_grad(x):
        q, p, v = vstar(x)
        g = grad(sys.L, np.concatenate([q, v]), cfg)
        return np.concatenate([-g[:n], v])

    def guard(x):
        try:
            q, p, v = vstar(x)
        except (NewtonDiverged, NumericallySingular, GuardViolation):
            return False
        return sys.L.guard(np.concatenate([q, v]))

    return HamiltonianSystem(n, ScalarField(2 * n, H, guard, name=f"H[{sys.name}]", grad_fn=H_grad), name=f"H[{sys.name}]")


def _rk4_step(field, x, dt):
    k1 = field(x)
    k2 = field(x + 0.5 * dt * k1)
    k3 = field(x + 0.5 * dt * k2)
    k4 = field(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(
    field: Callable,
    x0,
    dt: float,
    steps: int,
    guard: Optional[Callable] = None,
    project: Optional[Callable] = None,
    strict: bool = False,
) -> Trajectory:
    """Fixed-step classical RK4.

    Stops at the first step whose stages or result leave the guarded
    domain. The partial trajectory is returned with ``aborted_at`` set, or
    raised inside :class:`GuardViolationAtStep` when ``strict``.
    ``project`` maps each accepted state back onto a constraint set.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    guard = guard or getattr(field, "guard", None) or (lambda x: True)
    x = np.array(x0, dtype=float)
    if not guard(x):
        raise GuardViolation(x, "initial state")
    states = np.empty((steps + 1, len(x)))
    states[0] = x
    for k in range(steps):
        try:
            nxt = _rk4_step(lambda y: np.asarray(field(y), dtype=float), x, dt)
            if project is not None:
                nxt = project(nxt)
            ok = bool(np.all(np.isfinite(nxt))) and guard(nxt)
        except (GuardViolation, NonFinite, ZeroDivisionError, ValueError):
            ok = False
        if not ok:
            traj = Trajectory(dt * np.arange(k + 1), states[: k + 1].copy(), aborted_at=k + 1)
            if strict:
                raise GuardViolationAtStep(k + 1, traj)
            return traj
        x = nxt
        states[k + 1] = x
    return Trajectory(dt * np.arange(steps + 1), states)


@dataclass(frozen=True)
class SymplecticSode:
    """A second-order field on TQ with a symplectic form and an energy.

    Covers dynamics that have no global Lagrangian: ``i(Γ)ω = dE`` holds but
    ``ω`` need not be exact. ``omega`` maps a point to a component matrix
    and may be evaluated on first-order jets.
    """

    n: int
    accel: Callable
    omega: Callable
    E: ScalarField
    name: str = ""

    def guard(self, x) -> bool:
        return bool(self.E.guard(x))

    def field(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.concatenate([x[self.n :], np.asarray(self.accel(x), dtype=float)])

    def omega_at(self, x) -> FormMatrix:
        m = self.omega(list(np.asarray(x, dtype=float)))
        return FormMatrix(np.array([[ad.value(c) for c in row] for row in m], dtype=float))

    def vector_field(self) -> Callable:
        def field(x):
            return self.field(x)

        field.guard = self.E.guard
        return field
