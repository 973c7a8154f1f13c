"""Differentiation and exterior-calculus kernel.

Everything here works on small dense arrays. Derivatives come either from
forward-mode jets (``mode="dual"``) or from central differences
(``mode="central"``); the two are independent and are used to check each
other.

Component conventions
---------------------
A 2-form ``Ω`` is stored as an antisymmetric matrix with
``Ω[i, j] = Ω(∂_i, ∂_j)``, i.e. ``Ω = Σ_{i<j} Ω[i, j] dx^i ∧ dx^j``.
For a 1-form ``β = β_i dx^i`` this gives ``dβ[j, i] = ∂_j β_i − ∂_i β_j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import ad
from .errors import DimensionMismatch, GuardViolation, NonFinite, NumericallySingular

COND_LIMIT = 1e12


@dataclass(frozen=True)
class DiffConfig:
    mode: str = "dual"
    step: float = 1e-6
    richardson: bool = False
    hess_step: float = 1e-4

    def __post_init__(self):
        if self.mode not in ("dual", "central"):
            raise ValueError(f"unknown differentiation mode {self.mode!r}")
        if self.step <= 0 or self.hess_step <= 0:
            raise ValueError("finite-difference steps must be positive")


DUAL = DiffConfig()
CENTRAL = DiffConfig(mode="central")


def _always(x) -> bool:
    return True


def _check_point(guard, x, what="point"):
    if not guard(x):
        raise GuardViolation(x, what)


@dataclass(frozen=True)
class ScalarField:
    """Smooth real function on a guarded open subset of R^m.

    ``fn`` receives a sequence of coordinates which may be floats or jets
    and must use :mod:`hjt.ad` for elementary functions. ``grad_fn`` lets a
    field supply an exact gradient when it cannot be evaluated on jets.
    """

    arity: int
    fn: Callable
    guard: Callable = _always
    name: str = ""
    grad_fn: Optional[Callable] = None

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be positive")

    def _coords(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.arity:
            raise DimensionMismatch(f"{self.name or 'field'} expects {self.arity} coordinates, got {x.shape[0]}")
        _check_point(self.guard, x)
        return x

    def __call__(self, x) -> float:
        x = self._coords(x)
        y = float(ad.value(self.fn(list(x))))
        if not np.isfinite(y):
            raise NonFinite(f"{self.name or 'field'} is not finite at {tuple(x)}")
        return y

    def evaluate_jets(self, xs):
        """Evaluate on already-seeded jets (guard checked on their values)."""
        _check_point(self.guard, np.array([ad.value(c) for c in xs]))
        return self.fn(list(xs))


@dataclass(frozen=True)
class SectionField:
    """Map ``q -> components``; a vector field, a 1-form or a general map.

    ``out_dim`` defaults to ``base_dim`` (sections of TQ or T*Q); general
    maps such as graph embeddings set it explicitly. ``jac_fn`` supplies an
    exact Jacobian for sections that cannot be evaluated on jets.
    """

    base_dim: int
    fn: Callable
    guard: Callable = _always
    kind: str = "vector"
    name: str = ""
    out_dim: Optional[int] = None
    jac_fn: Optional[Callable] = None

    @property
    def dim(self) -> int:
        return self.base_dim if self.out_dim is None else self.out_dim

    def _coords(self, q):
        q = np.asarray(q, dtype=float).reshape(-1)
        if q.shape[0] != self.base_dim:
            raise DimensionMismatch(f"{self.name or 'section'} expects {self.base_dim} coordinates, got {q.shape[0]}")
        _check_point(self.guard, q)
        return q

    def __call__(self, q) -> np.ndarray:
        q = self._coords(q)
        out = np.array([ad.value(c) for c in self.fn(list(q))], dtype=float)
        if out.shape[0] != self.dim:
            raise DimensionMismatch(f"{self.name or 'section'} returned {out.shape[0]} components, expected {self.dim}")
        if not np.all(np.isfinite(out)):
            raise NonFinite(f"{self.name or 'section'} is not finite at {tuple(q)}")
        return out


@dataclass(frozen=True)
class FormMatrix:
    """Component matrix of a 2-form; antisymmetrized on construction."""

    entries: np.ndarray = field(repr=True)

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch("a 2-form needs a square component matrix")
        anti = (m - m.T) / 2.0
        anti.setflags(write=False)
        object.__setattr__(self, "entries", anti)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __call__(self, u, w) -> float:
        return float(np.asarray(u) @ self.entries @ np.asarray(w))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries))) if self.dim else 0.0

    def __neg__(self):
        return FormMatrix(-self.entries)

    def __add__(self, other):
        return FormMatrix(self.entries + _entries(other))

    def __sub__(self, other):
        return FormMatrix(self.entries - _entries(other))


def _entries(form) -> np.ndarray:
    return form.entries if isinstance(form, FormMatrix) else np.asarray(form, dtype=float)


def _finite(arr, what):
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"non-finite {what}")
    return arr


# ---------------------------------------------------------------------------
# scalar derivatives


def grad(f: ScalarField, x, cfg: DiffConfig = DUAL) -> np.ndarray:
    x = f._coords(x)
    if cfg.mode == "central":
        return _finite(_central_grad(f, x, cfg.step, cfg.richardson), "gradient")
    if f.grad_fn is not None:
        return _finite(f.grad_fn(x), "gradient")
    y = f.fn(ad.seed_first(x))
    if not np.isfinite(ad.value(y)):
        raise NonFinite(f"{f.name or 'field'} is not finite at {tuple(x)}")
    return _finite(ad.gradient_of(y, f.arity), "gradient")


def _central_grad(f, x, h, richardson):
    def diff(step):
        g = np.empty(len(x))
        for i in range(len(x)):
            e = np.zeros(len(x))
            e[i] = step
            g[i] = (f(x + e) - f(x - e)) / (2.0 * step)
        return g

    if richardson:
        return (4.0 * diff(h / 2.0) - diff(h)) / 3.0
    return diff(h)


def hessian_raw(f: ScalarField, x, cfg: DiffConfig = DUAL) -> np.ndarray:
    """Hessian before symmetrization."""
    x = f._coords(x)
    m = len(x)
    if cfg.mode == "central":
        h = cfg.hess_step
        fx = f(x)
        out = np.empty((m, m))
        for i in range(m):
            ei = np.zeros(m)
            ei[i] = h
            out[i, i] = (f(x + ei) - 2.0 * fx + f(x - ei)) / (h * h)
            for j in range(m):
                if j == i:
                    continue
                ej = np.zeros(m)
                ej[j] = h
                out[i, j] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * h * h)
        return _finite(out, "Hessian")
    y = f.fn(ad.seed_second(x))
    if not np.isfinite(ad.value(y)):
        raise NonFinite(f"{f.name or 'field'} is not finite at {tuple(x)}")
    return _finite(ad.hessian_of(y, m), "Hessian")


def hessian_with_asymmetry(f: ScalarField, x, cfg: DiffConfig = DUAL):
    raw = hessian_raw(f, x, cfg)
    asym = float(np.max(np.abs(raw - raw.T))) if raw.size else 0.0
    return (raw + raw.T) / 2.0, asym


def hessian(f: ScalarField, x, cfg: DiffConfig = DUAL) -> np.ndarray:
    return hessian_with_asymmetry(f, x, cfg)[0]


def jet2(f: ScalarField, x, cfg: DiffConfig = DUAL):
    """Value, gradient and symmetrized Hessian, in one pass in dual mode."""
    x = f._coords(x)
    m = len(x)
    if cfg.mode == "central" or f.grad_fn is not None:
        return f(x), grad(f, x, cfg), hessian(f, x, cfg)
    y = f.fn(ad.seed_second(x))
    val = ad.value(y)
    if not np.isfinite(val):
        raise NonFinite(f"{f.name or 'field'} is not finite at {tuple(x)}")
    h = _finite(ad.hessian_of(y, m), "Hessian")
    return float(val), _finite(ad.gradient_of(y, m), "gradient"), (h + h.T) / 2.0


# ---------------------------------------------------------------------------
# maps and sections


def jacobian(F: SectionField, q, cfg: DiffConfig = DUAL) -> np.ndarray:
    """``J[a, j] = ∂F^a/∂q^j``."""
    q = F._coords(q)
    n = len(q)
    if cfg.mode == "central":
        def diff(h):
            J = np.empty((F.dim, n))
            for j in range(n):
                e = np.zeros(n)
                e[j] = h
                J[:, j] = (F(q + e) - F(q - e)) / (2.0 * h)
            return J

        J = (4.0 * diff(cfg.step / 2.0) - diff(cfg.step)) / 3.0 if cfg.richardson else diff(cfg.step)
        return _finite(J, "Jacobian")
    if F.jac_fn is not None:
        return _finite(F.jac_fn(q), "Jacobian")
    out = F.fn(ad.seed_first(q))
    if len(out) != F.dim:
        raise DimensionMismatch(f"{F.name or 'section'} returned {len(out)} components, expected {F.dim}")
    J = np.array([ad.gradient_of(c, n) for c in out])
    vals = np.array([ad.value(c) for c in out])
    _finite(vals, "section value")
    return _finite(J, "Jacobian")


def form_from_jacobian(J) -> FormMatrix:
    """Exterior derivative of a 1-form given the Jacobian of its components."""
    J = np.asarray(J, dtype=float)
    return FormMatrix(J.T - J)


def exterior_derivative(beta: SectionField, x, cfg: DiffConfig = DUAL) -> FormMatrix:
    return form_from_jacobian(jacobian(beta, x, cfg))


def exterior_derivative_2form(omega: Callable, x, cfg: DiffConfig = DUAL, guard: Callable = _always) -> np.ndarray:
    """Components ``(dΩ)[i,j,k] = ∂_iΩ_jk + ∂_jΩ_ki + ∂_kΩ_ij``.

    ``omega`` maps a point to a component matrix and may be evaluated on
    jets in dual mode.
    """
    x = np.asarray(x, dtype=float)
    m = len(x)
    _check_point(guard, x)
    if cfg.mode == "central":
        h = cfg.step
        D = np.empty((m, m, m))
        for i in range(m):
            e = np.zeros(m)
            e[i] = h
            D[i] = (_entries_of(omega(x + e)) - _entries_of(omega(x - e))) / (2.0 * h)
    else:
        comps = omega(ad.seed_first(x))
        D = np.empty((m, m, m))
        for j in range(m):
            for k in range(m):
                D[:, j, k] = ad.gradient_of(comps[j][k], m)
    return D + D.transpose(1, 2, 0) + D.transpose(2, 0, 1)


def _entries_of(val):
    if isinstance(val, FormMatrix):
        return val.entries
    return np.array([[ad.value(c) for c in row] for row in val], dtype=float)


def pullback_oneform(phi: SectionField, beta: Callable, x, cfg: DiffConfig = DUAL) -> np.ndarray:
    """``(φ*β)_j = β_k(φ(x)) ∂φ^k/∂x^j``; ``beta`` maps a point to components."""
    J = jacobian(phi, x, cfg)
    return J.T @ np.asarray(beta(phi(x)), dtype=float)


def pullback_twoform(phi: SectionField, omega: Callable, x, cfg: DiffConfig = DUAL) -> FormMatrix:
    J = jacobian(phi, x, cfg)
    return FormMatrix(J.T @ _entries(omega(phi(x))) @ J)


def interior_product(v, omega) -> np.ndarray:
    """``(i_v Ω)_i = v^j Ω_ji``."""
    v = np.asarray(v, dtype=float)
    E = _entries(omega)
    if E.shape != (len(v), len(v)):
        raise DimensionMismatch(f"vector of length {len(v)} against form of shape {E.shape}")
    return E.T @ v


def solve(A, b, what="matrix") -> np.ndarray:
    """Dense LU solve, refusing numerically singular systems."""
    A = np.asarray(A, dtype=float)
    if np.linalg.cond(A) > COND_LIMIT:
        raise NumericallySingular(f"{what} is numerically singular")
    return np.linalg.solve(A, b)


def is_singular(A) -> bool:
    A = np.asarray(A, dtype=float)
    return A.size > 0 and np.linalg.cond(A) > COND_LIMIT
