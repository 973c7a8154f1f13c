"""Residuals and verdicts for the Lagrangian Hamilton–Jacobi problems.

A candidate is a vector field ``X(q) = (q, w(q))`` on Q. It solves the
generalized problem when ``Im X`` is invariant under the dynamics, i.e.
``(∂w/∂q) w = a(q, w(q))``, and the standard problem when in addition
``X*ω_L = 0`` (then ``E_L∘X`` is locally constant).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Union

import numpy as np

from .dynamics import (
    LagrangianSystem,
    SymplecticSode,
    cartan_forms,
    integrate,
    lagrangian_jets,
    solve_sode,
    sode_field,
)
from .errors import GuardViolation, SingularHessian
from .geometry import (
    DUAL,
    DiffConfig,
    FormMatrix,
    SectionField,
    exterior_derivative,
    grad,
    interior_product,
    is_singular,
    jacobian,
)
from .sampling import ResidualReport, as_points, ordered_map

CLOSEDNESS_CFG = DiffConfig(mode="central", step=1e-5)

MODES = ("generalized", "standard", "singular_isotropy")


@dataclass(frozen=True)
class CandidateVectorField:
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


def _field(X) -> SectionField:
    return X if isinstance(X, SectionField) else X.field


def _freeze_branches(F: SectionField, pts):
    """Fix the branch memo of a leaf-solved field before any fan-out.

    Fields built from first integrals remember solved velocities to seed
    neighbouring solves; warming them in lattice order makes the results
    independent of the number of worker threads.
    """
    prep = getattr(F.fn, "prepare", None)
    if prep is not None:
        prep(pts)


def graph_map(X) -> SectionField:
    """``q -> (q, w(q))`` as a map into TQ."""
    F = _field(X)
    n = F.base_dim

    def phi(q):
        return list(q) + list(F.fn(q))

    return SectionField(n, phi, F.guard, kind="map", name=f"graph[{F.name}]", out_dim=2 * n)


@dataclass(frozen=True)
class GraphData:
    """Everything the residuals need at one base point."""

    q: np.ndarray
    w: np.ndarray
    Jw: np.ndarray
    jets: object

    @property
    def graph_jacobian(self) -> np.ndarray:
        n = len(self.q)
        return np.vstack([np.eye(n), self.Jw])


def graph_data(sys: LagrangianSystem, X, q, cfg: DiffConfig = DUAL) -> GraphData:
    F = _field(X)
    q = np.asarray(q, dtype=float)
    w = F(q)
    x = np.concatenate([q, w])
    if not sys.L.guard(x):
        raise GuardViolation(x, "graph point")
    return GraphData(q, w, jacobian(F, q, cfg), lagrangian_jets(sys, q, w, cfg))


def _kernel_projector(W, rel=1e-10):
    u, s, vt = np.linalg.svd(W)
    cut = rel * (s[0] if s.size and s[0] > 0 else 1.0)
    null = vt[s <= cut]
    return null.T @ null


def _sode_parts(g: GraphData):
    sol = solve_sode(g.jets, g.w)
    full = g.Jw @ g.w - sol.accel
    if sol.singular:
        return full - _kernel_projector(g.jets.W) @ full, full, True
    return full, full, False


def sode_residual(sys: LagrangianSystem, X, q, cfg: DiffConfig = DUAL) -> np.ndarray:
    """``(∂w/∂q) w − a(q, w(q))``.

    For singular L the part lying in ``Ker W`` is gauge and is removed; use
    :func:`sode_residual_full` for the raw vertical deviation.
    """
    return _sode_parts(graph_data(sys, X, q, cfg))[0]


def sode_residual_full(sys: LagrangianSystem, X, q, cfg: DiffConfig = DUAL) -> np.ndarray:
    return _sode_parts(graph_data(sys, X, q, cfg))[1]


def _oneform(g: GraphData) -> np.ndarray:
    j = g.jets
    return j.W @ (g.Jw @ g.w) + j.L_vq @ g.w - j.L_q


def hj_oneform_residual(sys: LagrangianSystem, X, q, cfg: DiffConfig = DUAL) -> np.ndarray:
    """``W (∂w/∂q) w + (∂²L/∂v∂q) w − ∂L/∂q`` on ``v = w(q)``; needs no inverse of W."""
    return _oneform(graph_data(sys, X, q, cfg))


def hessian_relation_check(sys: LagrangianSystem, X, q, cfg: DiffConfig = DUAL) -> float:
    g = graph_data(sys, X, q, cfg)
    if is_singular(g.jets.W):
        raise SingularHessian(f"fiber Hessian singular at q={tuple(g.q)}")
    return float(np.linalg.norm(_oneform(g) - g.jets.W @ _sode_parts(g)[0]))


def _pullback_omega(sys, g: GraphData, cfg) -> FormMatrix:
    _, omega = cartan_forms(sys, np.concatenate([g.q, g.w]), cfg)
    J = g.graph_jacobian
    return FormMatrix(J.T @ omega.entries @ J)


def _d_pullback_energy(g: GraphData) -> np.ndarray:
    j = g.jets
    # E_L = v·L_v − L: ∂E/∂q = L_vqᵀ v − L_q, ∂E/∂v = W v
    return (j.L_vq.T @ g.w - j.L_q) + g.Jw.T @ (j.W @ g.w)


def standard_checks(sys: LagrangianSystem, X, q, cfg: DiffConfig = DUAL):
    """``(X*ω_L, d(X*E_L))`` at ``q``."""
    g = graph_data(sys, X, q, cfg)
    return _pullback_omega(sys, g, cfg), _d_pullback_energy(g)


def hj_oneform_geometric(sys: LagrangianSystem, X, q, cfg: DiffConfig = DUAL) -> np.ndarray:
    """``−i_X X*ω_L + d(X*E_L)`` assembled from the pulled-back forms."""
    g = graph_data(sys, X, q, cfg)
    return -interior_product(g.w, _pullback_omega(sys, g, cfg)) + _d_pullback_energy(g)


def energy_on_graph(sys: LagrangianSystem, X, q, cfg: DiffConfig = DUAL) -> float:
    g = graph_data(sys, X, q, cfg)
    return float(g.w @ g.jets.L_v - g.jets.value)


def pullback_theta(sys: LagrangianSystem, X) -> SectionField:
    """``X*θ_L = ∂L/∂v(q, w(q)) dq`` as a 1-form on Q (float evaluation only)."""
    F = _field(X)
    n = sys.n

    def comps(q):
        q = np.asarray(q, dtype=float)
        return list(grad(sys.L, np.concatenate([q, F(q)]))[n:])

    return SectionField(n, comps, F.guard, kind="oneform", name=f"X*theta[{F.name}]")


def closedness(sys: LagrangianSystem, X, q, cfg: DiffConfig = CLOSEDNESS_CFG) -> FormMatrix:
    """``d(X*θ_L)``, differentiated by central differences of the pulled-back form."""
    return exterior_derivative(pullback_theta(sys, X), q, cfg)


# ---------------------------------------------------------------------------
# second-order systems given by (Γ, ω, E) without a global Lagrangian


def _symplectic_point(sys: SymplecticSode, X, q, cfg):
    F = _field(X)
    q = np.asarray(q, dtype=float)
    w = F(q)
    x = np.concatenate([q, w])
    if not sys.guard(x):
        raise GuardViolation(x, "graph point")
    Jw = jacobian(F, q, cfg)
    J = np.vstack([np.eye(len(q)), Jw])
    pull = FormMatrix(J.T @ sys.omega_at(x).entries @ J)
    dE = J.T @ grad(sys.E, x, cfg)
    sode = Jw @ w - np.asarray(sys.accel(x), dtype=float)
    oneform = -interior_product(w, pull) + dE
    return w, sode, oneform, pull, dE, float(sys.E(x))


def symplectic_residuals(sys: SymplecticSode, X, q, cfg: DiffConfig = DUAL) -> dict:
    w, sode, oneform, pull, dE, e = _symplectic_point(sys, X, q, cfg)
    return {"sode": sode, "oneform": oneform, "pullback_omega": pull, "d_pullback_energy": dE, "energy": e}


# ---------------------------------------------------------------------------
# verdicts


def _channels(mode: str, regular: bool) -> tuple:
    if mode == "generalized":
        return ("oneform", "sode") if regular else ("oneform",)
    if mode == "standard":
        base = ("oneform", "sode") if regular else ("oneform",)
        return base + ("pullback_omega", "d_pullback_energy")
    if mode == "singular_isotropy":
        return ("oneform", "pullback_omega")
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def _lagrangian_sample(sys, X, q, cfg, mode):
    g = graph_data(sys, X, q, cfg)
    sode, full, singular = _sode_parts(g)
    vals = {
        "oneform": float(np.max(np.abs(_oneform(g)))),
        "sode": float(np.max(np.abs(sode))),
        "energy": float(g.w @ g.jets.L_v - g.jets.value),
    }
    if singular:
        vals["sode_full"] = float(np.max(np.abs(full)))
    if mode != "generalized":
        pull = _pullback_omega(sys, g, cfg)
        vals["pullback_omega"] = pull.max_abs()
        vals["d_pullback_energy"] = float(np.max(np.abs(_d_pullback_energy(g))))
        closed = closedness(sys, X, q)
        vals["closedness"] = closed.max_abs()
        vals["isotropy_consistency"] = (pull + closed).max_abs()
    return singular, vals


def _symplectic_sample(sys, X, q, cfg, mode):
    w, sode, oneform, pull, dE, e = _symplectic_point(sys, X, q, cfg)
    vals = {
        "oneform": float(np.max(np.abs(oneform))),
        "sode": float(np.max(np.abs(sode))),
        "energy": e,
    }
    if mode != "generalized":
        vals["pullback_omega"] = pull.max_abs()
        vals["d_pullback_energy"] = float(np.max(np.abs(dE)))
    return False, vals


def verify(
    sys: Union[LagrangianSystem, SymplecticSode],
    X,
    grid,
    tol: float,
    mode: str = "generalized",
    cfg: DiffConfig = DUAL,
    threads: Optional[int] = None,
) -> ResidualReport:
    """Check a candidate over a sample set.

    ``grid`` is a :class:`~hjt.sampling.Grid` or a sequence of points; points
    outside the candidate's guard are dropped.
    """
    _channels(mode, True)
    F = _field(X)
    pts = as_points(grid, F.guard)
    _freeze_branches(F, pts)
    sample = _symplectic_sample if isinstance(sys, SymplecticSode) else _lagrangian_sample
    results = ordered_map(lambda q: sample(sys, F, q, cfg, mode), pts, threads)
    regular = not any(s for s, _ in results)
    samples = [(tuple(float(c) for c in p), vals) for p, (_, vals) in zip(pts, results)]
    return ResidualReport(mode, tol, _channels(mode, regular), samples)


def energy_spread(report: ResidualReport) -> float:
    return float(np.std(report.values("energy")))


def projection_distance(
    sys: Union[LagrangianSystem, SymplecticSode],
    X,
    q0,
    dt: float = 1e-3,
    steps: int = 1000,
    cfg: DiffConfig = DUAL,
    flow: Optional[Callable] = None,
):
    """Sup-distance between the lifted integral curve of X and the dynamics.

    Integrates ``q' = w(q)`` on Q and the full dynamics on TQ from
    ``(q0, w(q0))``; returns ``(distance, base_trajectory, lifted_trajectory)``.
    ``flow`` replaces the dynamics, e.g. a gauge-fixed field for a singular
    Lagrangian.
    """
    F = _field(X)
    q0 = np.asarray(q0, dtype=float)
    base = integrate(lambda q: F(q), q0, dt, steps, guard=F.guard)
    if flow is not None:
        full = integrate(flow, np.concatenate([q0, F(q0)]), dt, steps)
    elif isinstance(sys, SymplecticSode):
        full = integrate(sys.field, np.concatenate([q0, F(q0)]), dt, steps, guard=sys.guard)
    else:
        full = integrate(sode_field(sys, cfg), np.concatenate([q0, F(q0)]), dt, steps)
    k = min(len(base.states), len(full.states))
    lifted = np.array([np.concatenate([q, F(q)]) for q in base.states[:k]])
    dist = float(np.max(np.abs(lifted - full.states[:k])))
    return dist, base, full
