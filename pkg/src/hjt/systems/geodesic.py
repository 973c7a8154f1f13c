"""Metrics, geodetic vector fields and the relativistic particle."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import ad
from ..dynamics import LagrangianSystem
from ..errors import NullVector
from ..geometry import DUAL, DiffConfig, FormMatrix, ScalarField, SectionField, exterior_derivative, jacobian
from ..hj_lagrangian import CandidateVectorField, _field
from ..sampling import Grid
from .base import CandidateSpec, SystemDescriptor, register


@dataclass(frozen=True)
class Metric:
    """Symmetric metric ``g(q)``; ``fn`` returns nested rows and accepts jets."""

    n: int
    fn: Callable
    signature: str = "riemannian"

    def matrix(self, q) -> np.ndarray:
        return np.array([[ad.value(c) for c in row] for row in self.fn(list(np.asarray(q, dtype=float)))], dtype=float)

    def derivatives(self, q, cfg: DiffConfig = DUAL) -> np.ndarray:
        """``dg[k, i, j] = ∂_k g_ij``."""
        n = self.n
        flat = SectionField(n, lambda x: [c for row in self.fn(x) for c in row], out_dim=n * n, name="metric")
        J = jacobian(flat, q, cfg)
        return J.T.reshape(n, n, n)

    def christoffel(self, q, cfg: DiffConfig = DUAL) -> np.ndarray:
        """``Γ[i, j, k] = ½ g^{il}(∂_j g_lk + ∂_k g_lj − ∂_l g_jk)``."""
        g = self.matrix(q)
        dg = self.derivatives(q, cfg)
        lower = 0.5 * (dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg)
        return np.einsum("il,ljk->ijk", np.linalg.inv(g), lower)


def euclidean(n: int = 2) -> Metric:
    return Metric(n, lambda q: [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)])


def minkowski(n: int = 2) -> Metric:
    """``diag(1, −1, …, −1)``: the first coordinate is time."""
    return Metric(n, lambda q: [[(1.0 if i == 0 else -1.0) if i == j else 0.0 for j in range(n)] for i in range(n)],
                  signature="lorentzian")


def _quad(g, u, w):
    n = len(u)
    return sum(g[i][j] * u[i] * w[j] for i in range(n) for j in range(n))


@dataclass(frozen=True)
class GeodeticCheck:
    nabla_residual: np.ndarray
    closedness: FormMatrix
    lam: float
    nabla: np.ndarray


def covariant_self_derivative(metric: Metric, X, q, cfg: DiffConfig = DUAL) -> np.ndarray:
    """``∇_X X = (∂X/∂q) X + Γ(X, X)``."""
    F = _field(X)
    q = np.asarray(q, dtype=float)
    x = F(q)
    return jacobian(F, q, cfg) @ x + np.einsum("ijk,j,k->i", metric.christoffel(q, cfg), x, x)


def geodetic_solution_check(metric: Metric, X, q, cfg: DiffConfig = DUAL, quadratic: bool = False) -> GeodeticCheck:
    """Geodetic and wavefront conditions for a candidate field.

    Default: ``∇_XX − λX`` with ``λ = g(∇_XX, X)/g(X, X)`` and ``d(X̂♭)`` for
    the unit field ``X̂``. With ``quadratic=True``: ``∇_XX`` itself and
    ``d(X♭)``.
    """
    F = _field(X)
    q = np.asarray(q, dtype=float)
    g = metric.matrix(q)
    x = F(q)
    gxx = float(x @ g @ x)
    if gxx <= 0:
        raise NullVector(f"g(X, X) = {gxx:.3e} is not positive at {tuple(q)}")
    nabla = covariant_self_derivative(metric, F, q, cfg)
    lam = float(nabla @ g @ x) / gxx

    def flat(qq):
        gq = metric.fn(qq)
        xq = F.fn(qq)
        low = [sum(gq[i][j] * xq[j] for j in range(metric.n)) for i in range(metric.n)]
        if quadratic:
            return low
        norm = ad.sqrt(_quad(gq, xq, xq))
        return [c / norm for c in low]

    closed = exterior_derivative(SectionField(metric.n, flat, F.guard, kind="oneform", name="X_flat"), q, cfg)
    residual = nabla if quadratic else nabla - lam * x
    return GeodeticCheck(residual, closed, 0.0 if quadratic else lam, nabla)


def relativistic_lagrangian(metric: Metric) -> LagrangianSystem:
    n = metric.n

    def L(x):
        return ad.sqrt(_quad(metric.fn(x[:n]), x[n:], x[n:]))

    def guard(x):
        return _quad(metric.matrix(x[:n]), x[n:], x[n:]) > 1e-12

    return LagrangianSystem(n, ScalarField(2 * n, L, guard, name="L_rel"), "relativistic")


def geodesic_spray(metric: Metric, cfg: DiffConfig = DUAL):
    """Affinely parametrized geodesics: ``v̇ = −Γ(v, v)``."""
    n = metric.n

    def field(x):
        x = np.asarray(x, dtype=float)
        v = x[n:]
        return np.concatenate([v, -np.einsum("ijk,j,k->i", metric.christoffel(x[:n], cfg), v, v)])

    return field


def _unit_constant(p):
    c = np.array([p["c1"], p["c2"]], dtype=float)
    c = c / np.linalg.norm(c)
    return CandidateVectorField(SectionField(2, lambda q: [c[0] + 0 * q[0], c[1] + 0 * q[0]], kind="vector", name="X_unit"), dict(p), "X_unit")


def _radial(p):
    def w(q):
        r = ad.sqrt(q[0] ** 2 + q[1] ** 2)
        return [q[0] / r, q[1] / r]

    return CandidateVectorField(SectionField(2, w, lambda q: q[0] ** 2 + q[1] ** 2 > 1e-6, kind="vector", name="X_radial"), dict(p), "X_radial")


def _rotational(p):
    def w(q):
        r = ad.sqrt(q[0] ** 2 + q[1] ** 2)
        return [-q[1] / r, q[0] / r]

    return CandidateVectorField(SectionField(2, w, lambda q: q[0] ** 2 + q[1] ** 2 > 1e-6, kind="vector", name="X_rot"), dict(p), "X_rot")


@register("relativistic", "L = sqrt(g(v, v)) on the plane; metric = euclidean | minkowski")
def relativistic(metric: str = "euclidean") -> SystemDescriptor:
    if metric == "euclidean":
        g = euclidean(2)
        box = ((-2, 2), (-2, 2), (-2, 2), (-2, 2))
    elif metric == "minkowski":
        g = minkowski(2)
        box = ((-2, 2), (-2, 2), (0.5, 2), (-0.4, 0.4))
    else:
        raise ValueError(f"unknown metric {metric!r}; expected euclidean or minkowski")
    L = relativistic_lagrangian(g)
    annulus = Grid.box([(0.3, 1.5), (0.3, 1.5)], 10)
    cands = {
        "X_unit": CandidateSpec("X_unit", "vector", _unit_constant, {"c1": 1.0, "c2": 0.0},
                                Grid.box([(-1, 1), (-1, 1)], 10), "standard", "constant unit field",
                                formulas=("c1/sqrt(c1^2 + c2^2)", "c2/sqrt(c1^2 + c2^2)")),
    }
    if metric == "euclidean":
        cands["X_radial"] = CandidateSpec("X_radial", "vector", _radial, {}, annulus, "standard", "unit radial field",
                                          formulas=("q1/sqrt(q1^2 + q2^2)", "q2/sqrt(q1^2 + q2^2)"))
        cands["X_rot"] = CandidateSpec("X_rot", "vector", _rotational, {}, annulus, "none", "unit rotational field",
                                       formulas=("-q2/sqrt(q1^2 + q2^2)", "q1/sqrt(q1^2 + q2^2)"))
    return SystemDescriptor(
        "relativistic", lagrangian=L, candidates=cands,
        flow=geodesic_spray(g), flow_guard=L.guard,
        conserved={"speed2": ScalarField(4, lambda x: _quad(g.fn(x[:2]), x[2:], x[2:]), name="g(v,v)")},
        state_box=box, x0=(0.0, 0.0, 1.0, 0.0),
        metadata={"metric": g, "gauge": "lambda=0", "singular": True},
        description=f"relativistic particle, {metric} metric",
    )
