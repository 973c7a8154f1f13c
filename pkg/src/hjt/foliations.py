"""Complete solutions from families of first integrals.

Given n first integrals ``f_i(q, v)`` whose fiber Jacobian ``∂f/∂v`` is
invertible, fixing their values ``λ`` and solving for the velocities gives a
vector field ``X_λ`` on Q whose image is an invariant leaf. The leaves are
Lagrangian exactly when the integrals are in involution.

Poisson bracket convention: ``{f, g} = df · P · dg`` with ``P = -ω⁻¹``
(component matrix of ω as in :mod:`hjt.geometry`). Under the Legendre map
this is the canonical bracket ``∂f/∂q·∂g/∂p − ∂f/∂p·∂g/∂q``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .dynamics import HamiltonianSystem, SymplecticSode, cartan_forms, hamiltonian_field, lagrangian_sode
from .errors import DegenerateFiberJacobian, EmptyGrid, GuardViolation, NewtonDiverged, NonFinite, SingularOmega
from .geometry import COND_LIMIT, DUAL, DiffConfig, FormMatrix, ScalarField, SectionField, grad
from .hj_lagrangian import CandidateVectorField
from .sampling import as_points

DEGENERACY_THRESHOLD = 1e-8


@dataclass(frozen=True)
class IntegralFamily:
    n: int
    integrals: tuple
    labels: tuple = ()

    def __post_init__(self):
        if len(self.integrals) < 1:
            raise ValueError("an integral family needs at least one function")
        for f in self.integrals:
            if f.arity != 2 * self.n:
                raise ValueError("integrals live on TQ (2n coordinates)")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f.name or f"f{i + 1}" for i, f in enumerate(self.integrals)))

    def __len__(self):
        return len(self.integrals)

    def values(self, x) -> np.ndarray:
        return np.array([f(x) for f in self.integrals])

    def gradients(self, x, cfg: DiffConfig = DUAL) -> np.ndarray:
        return np.array([grad(f, x, cfg) for f in self.integrals])

    def guard(self, x) -> bool:
        return all(f.guard(x) for f in self.integrals)


@dataclass(frozen=True)
class LeafSolveConfig:
    newton_tol: float = 1e-10
    max_iter: int = 50

    def __post_init__(self):
        if self.newton_tol <= 0:
            raise ValueError("newton_tol must be positive")


def _fiber_jacobian(fam: IntegralFamily, x, cfg=DUAL):
    G = fam.gradients(x, cfg)
    return G[:, fam.n :], G[:, : fam.n]


def _relative_det(J) -> float:
    scale = float(np.prod(np.linalg.norm(J, axis=1)))
    if scale == 0.0:
        return 0.0
    return abs(float(np.linalg.det(J))) / scale


def fiber_independence(fam: IntegralFamily, x, cfg: DiffConfig = DUAL) -> float:
    """``|det(∂f_i/∂v^j)|`` at ``x = (q, v)``."""
    Jv, _ = _fiber_jacobian(fam, x, cfg)
    return abs(float(np.linalg.det(Jv)))


def solve_leaf(fam: IntegralFamily, q, lam, seed_v, cfg: LeafSolveConfig = LeafSolveConfig()) -> np.ndarray:
    """Newton iteration on ``v -> f(q, v) − λ``."""
    q = np.asarray(q, dtype=float)
    lam = np.asarray(lam, dtype=float)
    v = np.array(seed_v, dtype=float)
    for it in range(cfg.max_iter + 1):
        x = np.concatenate([q, v])
        try:
            r = fam.values(x) - lam
            Jv, _ = _fiber_jacobian(fam, x)
        except (GuardViolation, NonFinite) as exc:
            raise NewtonDiverged(f"leaf iteration left the domain at q={tuple(q)}") from exc
        if np.max(np.abs(r)) <= cfg.newton_tol:
            # one more step polishes to roundoff without changing the branch
            if _relative_det(Jv) > DEGENERACY_THRESHOLD:
                v_pol = v - np.linalg.solve(Jv, r)
                try:
                    if np.max(np.abs(fam.values(np.concatenate([q, v_pol])) - lam)) <= np.max(np.abs(r)):
                        return v_pol
                except (GuardViolation, NonFinite):
                    pass
            return v
        if it == cfg.max_iter:
            break
        if _relative_det(Jv) <= DEGENERACY_THRESHOLD:
            if it == 0:
                raise DegenerateFiberJacobian(f"fiber Jacobian degenerate at q={tuple(q)}, v={tuple(v)}")
            break
        v = v - np.linalg.solve(Jv, r)
        if not np.all(np.isfinite(v)):
            break
    raise NewtonDiverged(f"leaf solve did not converge at q={tuple(q)}, λ={tuple(lam)}")


class _LeafSolver:
    """Evaluates ``X_λ(q)`` with branch continuity.

    Each solve is seeded from the nearest already-solved base point, falling
    back to the user seed. ``prepare`` solves a point set in a fixed order
    and then freezes the memo, so later (possibly concurrent) evaluations see
    the same seeds whatever their order.
    """

    def __init__(self, fam, lam, seed, cfg):
        self.fam = fam
        self.lam = np.asarray(lam, dtype=float)
        self.seed = seed
        self.cfg = cfg
        self.memo = {}
        self.keys = np.empty((16, fam.n))
        self.values = []
        self.frozen = False
        self.lock = threading.Lock()

    def _seed_for(self, q):
        with self.lock:
            count = len(self.values)
            keys = self.keys[:count]
            if count:
                i = int(np.argmin(np.sum((keys - q) ** 2, axis=1)))
                return self.values[i]
        return np.asarray(self.seed(q) if callable(self.seed) else self.seed, dtype=float)

    def _remember(self, key, q, v):
        with self.lock:
            if key in self.memo:
                return
            count = len(self.values)
            if count == len(self.keys):
                self.keys = np.concatenate([self.keys, np.empty_like(self.keys)])
            self.keys[count] = q
            self.values.append(v)
            self.memo[key] = v

    def velocity(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        key = tuple(q)
        with self.lock:
            hit = self.memo.get(key)
        if hit is not None:
            return hit
        v = solve_leaf(self.fam, q, self.lam, self._seed_for(q), self.cfg)
        if not self.frozen:
            self._remember(key, q, v)
        return v

    def prepare(self, points):
        self.frozen = False
        for p in points:
            try:
                self.velocity(p)
            except (NewtonDiverged, DegenerateFiberJacobian):
                pass
        self.frozen = True

    def __call__(self, q):
        return list(self.velocity(np.array([float(c) for c in q])))

    def jacobian(self, q):
        """``∂v/∂q = −(∂f/∂v)⁻¹ ∂f/∂q`` on the leaf."""
        q = np.asarray(q, dtype=float)
        Jv, Jq = _fiber_jacobian(self.fam, np.concatenate([q, self.velocity(q)]))
        return -np.linalg.solve(Jv, Jq)

    def guard(self, q):
        try:
            self.velocity(np.asarray(q, dtype=float))
        except (NewtonDiverged, DegenerateFiberJacobian, GuardViolation):
            return False
        return True


def build_complete_solution(
    fam: IntegralFamily,
    sys,
    lam,
    seed,
    cfg: LeafSolveConfig = LeafSolveConfig(),
    domain: Optional[Callable] = None,
    name: str = "",
) -> CandidateVectorField:
    """``X_λ(q)`` obtained by solving ``f(q, v) = λ`` for ``v``.

    ``seed`` is a velocity vector or a callable ``q -> v``. ``domain``
    optionally restricts the base points before any solve is attempted.
    """
    solver = _LeafSolver(fam, lam, seed, cfg)

    def guard(q):
        if domain is not None and not domain(q):
            return False
        return solver.guard(q)

    label = name or f"X[{','.join(fam.labels)}]"
    sec = SectionField(fam.n, solver, guard, kind="vector", name=label, jac_fn=solver.jacobian)
    params = {f"lambda{i + 1}": float(c) for i, c in enumerate(np.asarray(lam, dtype=float))}
    return CandidateVectorField(sec, params, label)


def _dphi_det(fam, q, lam, v, cfg, h=1e-6):
    n = fam.n
    D = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        vp = solve_leaf(fam, q, lam + e, v, cfg)
        vm = solve_leaf(fam, q, lam - e, v, cfg)
        D[:, j] = (vp - vm) / (2.0 * h)
    return float(np.linalg.det(D))


def transversality_check(
    fam: IntegralFamily,
    lam_points: Sequence,
    q_points: Sequence,
    seed,
    cfg: LeafSolveConfig = LeafSolveConfig(),
):
    """Minimum over the grid of ``min(|det DΦ|, 1/|det DΦ|)``.

    ``Φ(q, λ) = (q, X_λ(q))``; its Jacobian determinant equals
    ``det ∂v/∂λ`` and is obtained by differencing leaf solves in λ. The
    measure tends to zero both where Φ collapses and where it blows up
    (the fiber Jacobian of the integrals degenerating). Returns
    ``(measure, dets)`` with unsolvable cells skipped.
    """
    dets = []
    for lam in lam_points:
        lam = np.asarray(lam, dtype=float)
        solver = _LeafSolver(fam, lam, seed, cfg)
        for q in q_points:
            q = np.asarray(q, dtype=float)
            try:
                v = solver.velocity(q)
                dets.append(_dphi_det(fam, q, lam, v, cfg))
            except (NewtonDiverged, DegenerateFiberJacobian):
                continue
    if not dets:
        raise EmptyGrid("no solvable (q, λ) cells")
    a = np.abs(np.array(dets))
    with np.errstate(divide="ignore"):
        measure = np.minimum(a, np.where(a > 0, 1.0 / a, 0.0))
    return float(measure.min()), np.array(dets)


def _omega_at(sys, x):
    if isinstance(sys, SymplecticSode):
        return sys.omega_at(x)
    if isinstance(sys, HamiltonianSystem):
        n = sys.n
        Om = np.zeros((2 * n, 2 * n))
        Om[:n, n:] = np.eye(n)
        Om[n:, :n] = -np.eye(n)
        return FormMatrix(Om)
    return cartan_forms(sys, x)[1]


def bracket_matrix(sys, x) -> np.ndarray:
    """``P = -ω⁻¹`` at ``x``, exactly antisymmetric."""
    Om = _omega_at(sys, x).entries
    if np.linalg.cond(Om) > COND_LIMIT:
        raise SingularOmega(f"ω is degenerate at {tuple(np.asarray(x, dtype=float))}")
    P = -np.linalg.inv(Om)
    return (P - P.T) / 2.0


def _bracket(P, df, dg) -> float:
    m = len(df)
    total = 0.0
    for a in range(m):
        for b in range(a + 1, m):
            total += P[a, b] * (df[a] * dg[b] - df[b] * dg[a])
    return total


def poisson_bracket(sys, f: ScalarField, g: ScalarField, x, cfg: DiffConfig = DUAL) -> float:
    x = np.asarray(x, dtype=float)
    return _bracket(bracket_matrix(sys, x), grad(f, x, cfg), grad(g, x, cfg))


def involution_matrix(fam: IntegralFamily, sys, grid, cfg: DiffConfig = DUAL) -> np.ndarray:
    """Entry ``(i, j)``: max over the samples of ``|{f_i, f_j}|``."""
    pts = as_points(grid, fam.guard)
    k = len(fam)
    table = np.zeros((k, k))
    for x in pts:
        P = bracket_matrix(sys, x)
        G = fam.gradients(x, cfg)
        for i in range(k):
            for j in range(i + 1, k):
                b = abs(_bracket(P, G[i], G[j]))
                if b > table[i, j]:
                    table[i, j] = table[j, i] = b
    return table


def _dynamics_vector(sys, x):
    if isinstance(sys, SymplecticSode):
        return sys.field(x)
    if isinstance(sys, HamiltonianSystem):
        return hamiltonian_field(sys, x)
    n = sys.n
    return np.concatenate([x[n:], lagrangian_sode(sys, x).accel])


def first_integral_defect(fam: IntegralFamily, sys, x, cfg: DiffConfig = DUAL) -> np.ndarray:
    """``df_i · Γ`` at ``x``; zero for genuine first integrals."""
    x = np.asarray(x, dtype=float)
    return fam.gradients(x, cfg) @ _dynamics_vector(sys, x)


def invert_phi(fam: IntegralFamily, q, v, lam_seed, cfg: LeafSolveConfig = LeafSolveConfig(), h: float = 1e-6, max_iter: int = 30):
    """``pr₂∘Φ⁻¹(q, v)``: the λ whose leaf passes through ``(q, v)``.

    Solved by Newton on ``λ -> X_λ(q) − v`` with a differenced Jacobian, so
    it never evaluates the integrals at ``(q, v)`` directly.
    """
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    lam = np.array(lam_seed, dtype=float)
    n = fam.n
    for _ in range(max_iter):
        r = solve_leaf(fam, q, lam, v, cfg) - v
        if np.max(np.abs(r)) <= 1e-12 * max(1.0, float(np.max(np.abs(v)))):
            return lam
        D = np.empty((n, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = h
            D[:, j] = (solve_leaf(fam, q, lam + e, v, cfg) - solve_leaf(fam, q, lam - e, v, cfg)) / (2.0 * h)
        lam = lam - np.linalg.solve(D, r)
    raise NewtonDiverged(f"could not invert Φ at q={tuple(q)}, v={tuple(v)}")
