"""Time-dependent systems through the homogeneous extended Lagrangian."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..dynamics import HamiltonianSystem, LagrangianSystem
from ..geometry import DUAL, DiffConfig, ScalarField, grad
from .base import SystemDescriptor, register


class Extension(NamedTuple):
    system: LagrangianSystem
    i: object
    p: object


def homogeneous_extension(L_td: ScalarField, n: int) -> Extension:
    """``L̂(x⁰, x, w⁰, w) = w⁰ L(x⁰, x, w/w⁰)`` on ``w⁰ > 0``.

    ``L_td`` takes ``(t, q, v)``. Extended coordinates are ordered
    ``(x⁰, x¹..xⁿ, w⁰, w¹..wⁿ)`` so that positions come first, as for any
    Lagrangian system here. Also returns the charts
    ``i(t, q, v) = (t, q, 1, v)`` and ``p(x⁰, x, w⁰, w) = (x⁰, x, w/w⁰)``.
    """
    if L_td.arity != 2 * n + 1:
        raise ValueError("a time-dependent Lagrangian takes (t, q, v)")
    m = n + 1

    def L_hat(z):
        w0 = z[m]
        return w0 * L_td.fn([z[0]] + list(z[1:m]) + [c / w0 for c in z[m + 1:]])

    def guard(z):
        z = np.asarray(z, dtype=float)
        if z[m] <= 0:
            return False
        return bool(L_td.guard(np.concatenate([z[:m], z[m + 1:] / z[m]])))

    def i_map(t, q, v):
        return np.concatenate([[float(t)], np.atleast_1d(np.asarray(q, dtype=float)), [1.0], np.atleast_1d(np.asarray(v, dtype=float))])

    def p_map(z):
        z = np.asarray(z, dtype=float)
        return np.concatenate([z[:m], z[m + 1:] / z[m]])

    sys = LagrangianSystem(m, ScalarField(2 * m, L_hat, guard, name=f"hat[{L_td.name}]"), f"hat[{L_td.name}]")
    return Extension(sys, i_map, p_map)


def td_energy(L_td: ScalarField, n: int, t, q, v, cfg: DiffConfig = DUAL) -> float:
    """``E_L = v·∂L/∂v − L`` at fixed time."""
    x = np.concatenate([[float(t)], np.asarray(q, dtype=float), np.asarray(v, dtype=float)])
    g = grad(L_td, x, cfg)
    return float(np.asarray(v, dtype=float) @ g[1 + n:] - L_td(x))


def td_hj_residual(H_td: ScalarField, S: ScalarField, t, q, cfg: DiffConfig = DUAL) -> float:
    """``∂S/∂t + H(t, q, ∂S/∂q)``; ``S`` takes ``(t, q)``, ``H_td`` takes ``(t, q, p)``."""
    x = np.concatenate([[float(t)], np.atleast_1d(np.asarray(q, dtype=float))])
    dS = grad(S, x, cfg)
    return float(dS[0] + H_td(np.concatenate([x, dS[1:]])))


@register("td_forced", "forced particle on the line, L = ½v² + f t q, homogeneously extended")
def forced_particle(f: float = 1.0) -> SystemDescriptor:
    f = float(f)
    L_td = ScalarField(3, lambda x: 0.5 * x[2] ** 2 + f * x[0] * x[1], name="L_forced")
    ext = homogeneous_extension(L_td, 1)
    H_td = ScalarField(3, lambda x: 0.5 * x[2] ** 2 - f * x[0] * x[1], name="H_forced")
    return SystemDescriptor(
        "td_forced", lagrangian=ext.system,
        hamiltonian=HamiltonianSystem(1, ScalarField(2, lambda x: 0.5 * x[1] ** 2, name="H_autonomous")) if f == 0 else None,
        state_box=((-1, 1), (-1, 1), (0.5, 2), (-1, 1)),
        x0=(0.0, 0.0, 1.0, 1.0),
        metadata={"L_td": L_td, "H_td": H_td, "i": ext.i, "p": ext.p, "singular": True},
        description="forced particle in the extended homogeneous formalism",
    )
