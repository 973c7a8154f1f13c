"""Charged particle in a magnetic monopole field and its KS lift.

The magnetic term of the symplectic form is taken with the sign that makes
``i(Γ)ω = dH`` for the acceleration ``(n/r³) x × v``:
``ω = dxⁱ∧dvⁱ + (n/2r³) ε_ijk xⁱ dxʲ∧dxᵏ``.
"""

from __future__ import annotations

import numpy as np

from .. import ad
from ..dynamics import LagrangianSystem, SymplecticSode, cartan_forms
from ..errors import ZeroPoint
from ..foliations import IntegralFamily, build_complete_solution
from ..geometry import DUAL, DiffConfig, ScalarField, SectionField, jacobian
from ..hj_lagrangian import CandidateVectorField
from ..sampling import Axis, Grid
from .base import CandidateSpec, SystemDescriptor, register

R_MIN = 1e-6

_LEVI = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _LEVI[_i, _j, _k] = 1.0
    _LEVI[_i, _k, _j] = -1.0


def _r(x):
    return ad.sqrt(x[0] ** 2 + x[1] ** 2 + x[2] ** 2)


def _cross(a, b):
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def _state_guard(x):
    return float(np.sqrt(x[0] ** 2 + x[1] ** 2 + x[2] ** 2)) > R_MIN


def monopole_acceleration(n: float):
    def accel(x):
        r = _r(x)
        c = _cross(x[:3], x[3:6])
        return [n * ci / r ** 3 for ci in c]

    return accel


def monopole_omega(n: float):
    """Component matrix of ω on ``(x, v)``; accepts jets."""

    def omega(x):
        r = _r(x)
        coef = n / r ** 3
        zero = 0 * x[0]
        m = [[zero for _ in range(6)] for _ in range(6)]
        for i in range(3):
            m[i][3 + i] = zero + 1.0
            m[3 + i][i] = zero - 1.0
        # (n/2r³) ε_ijk xⁱ dxʲ∧dxᵏ has components B[j][k] = (n/r³) ε_ijk xⁱ
        for j in range(3):
            for k in range(3):
                if j != k:
                    m[j][k] = coef * sum(_LEVI[i, j, k] * x[i] for i in range(3))
        return m

    return omega


def monopole_integrals(n: float) -> dict:
    def l(i):
        return ScalarField(6, lambda x: _cross(x[:3], x[3:6])[i] + n * x[i] / _r(x), _state_guard, name=f"l{i + 1}")

    H = ScalarField(6, lambda x: 0.5 * (x[3] ** 2 + x[4] ** 2 + x[5] ** 2), _state_guard, name="H")

    def l2(x):
        c = _cross(x[:3], x[3:6])
        r = _r(x)
        return sum((c[i] + n * x[i] / r) ** 2 for i in range(3))

    return {"H": H, "l1": l(0), "l2": l(1), "l3": l(2), "l_sq": ScalarField(6, l2, _state_guard, name="l^2")}


def monopole_sode(n: float) -> SymplecticSode:
    fs = monopole_integrals(n)
    return SymplecticSode(3, monopole_acceleration(n), monopole_omega(n), fs["H"], name=f"monopole(n={n:g})")


# ---------------------------------------------------------------------------
# candidates


REF_X = (1.0, 0.5, 0.8)
REF_V = (0.3, 1.0, -0.2)
REF_HALF_WIDTH = 0.15


def _radial(p):
    c = p["c"]

    def w(q):
        r = _r(q)
        return [c * q[0] / r, c * q[1] / r, c * q[2] / r]

    sec = SectionField(3, w, lambda q: float(np.linalg.norm(q)) > R_MIN, kind="vector", name="Y_radial")
    return CandidateVectorField(sec, dict(p), "Y_radial")


def _reference_box(q):
    return all(abs(q[i] - REF_X[i]) <= REF_HALF_WIDTH + 1e-12 for i in range(3))


def _built(n, names, label):
    fs = monopole_integrals(n)
    fam = IntegralFamily(3, tuple(fs[k] for k in names), tuple(names))

    def build(p):
        lam = [p[f"lam{i + 1}"] for i in range(3)]
        X = build_complete_solution(fam, None, lam, list(REF_V), domain=_reference_box, name=label)
        return CandidateVectorField(X.field, dict(p), label)

    x_ref = np.array(REF_X + REF_V)
    defaults = {f"lam{i + 1}": float(fs[k](x_ref)) for i, k in enumerate(names)}
    return fam, build, defaults


def isotropic_candidate(n: float, params=None) -> CandidateVectorField:
    """Local leaf of the involutive integrals ``(H, l², l₃)``.

    Exists only on a neighbourhood of the reference state; the monopole
    descriptor deliberately does not register it as a candidate.
    """
    _, build, defaults = _built(n, ("H", "l_sq", "l3"), "Y_Hl2l3")
    return build({**defaults, **(params or {})})


@register("monopole", "charged particle in a monopole field; parameter n (coupling)")
def monopole_system(n: float = 1.0) -> SystemDescriptor:
    n = float(n)
    sode = monopole_sode(n)
    fs = monopole_integrals(n)
    fam12, build12, defaults12 = _built(n, ("H", "l1", "l2"), "Y_Hl12")
    fam_inv, _, _ = _built(n, ("H", "l_sq", "l3"), "Y_Hl2l3")
    local = Grid(tuple(Axis(c - REF_HALF_WIDTH, c + REF_HALF_WIDTH, 5) for c in REF_X))
    shell = Grid.box([(0.5, 1.5), (-1.0, 1.0), (-1.0, 1.0)], 6)
    cands = {
        "Y_radial": CandidateSpec("Y_radial", "vector", _radial, {"c": 1.0}, shell, "generalized",
                                  "radial field c x/r", formulas=tuple(
                                      f"c*q{i}/sqrt(q1^2 + q2^2 + q3^2)" for i in (1, 2, 3))),
        "Y_Hl12": CandidateSpec("Y_Hl12", "vector", build12, defaults12, local, "generalized",
                                "leaf of the non-involutive integrals H, l1, l2 near a reference state",
                                family="Hl12", lam=lambda p: [p["lam1"], p["lam2"], p["lam3"]],
                                seed=lambda p: list(REF_V)),
    }
    return SystemDescriptor(
        "monopole", symplectic=sode, candidates=cands,
        integrals={"Hl12": fam12, "Hl2l3": fam_inv},
        conserved={k: fs[k] for k in ("H", "l1", "l2", "l3")},
        state_box=((-1.5, 1.5),) * 3 + ((-1, 1),) * 3,
        x0=(1.0, 0.0, 0.0, 0.0, 1.0, 0.0),
        metadata={"n": n},
        description=f"monopole with n = {n:g}",
    )


# ---------------------------------------------------------------------------
# Kustaanheimo–Stiefel lift


def _ks(y):
    return [2 * (y[0] * y[1] + y[2] * y[3]), 2 * (y[0] * y[2] - y[1] * y[3]), y[0] ** 2 + y[3] ** 2 - y[1] ** 2 - y[2] ** 2]


def _ks_tangent(y, u):
    return [
        2 * (y[0] * u[1] + u[0] * y[1] + u[2] * y[3] + y[2] * u[3]),
        2 * (y[0] * u[2] + u[0] * y[2] - u[1] * y[3] - y[1] * u[3]),
        2 * (y[0] * u[0] + y[3] * u[3] - y[1] * u[1] - y[2] * u[2]),
    ]


def _nonzero(y):
    y = np.asarray(y, dtype=float)
    if y.shape != (4,):
        raise ValueError("KS coordinates are 4-vectors")
    if np.linalg.norm(y) <= R_MIN:
        raise ZeroPoint("the KS map is singular at y = 0")
    return y


def ks_map(y) -> np.ndarray:
    """``π(s) = s σ₃ s†`` read off in Pauli components.

    The coordinate formulas correspond to the spinor chart
    ``s = y⁰I + i(y²σ₁ − y¹σ₂ + y³σ₃)``.
    """
    return np.array(_ks(_nonzero(y)))


def ks_tangent(y, u):
    """``Tπ(y, u) = (π(y), Dπ(y)·u)``."""
    y = _nonzero(y)
    return np.array(_ks(y)), np.array(_ks_tangent(y, np.asarray(u, dtype=float)))


def ks_lift_map() -> SectionField:
    """``Tπ`` as a map R⁸ → R⁶."""
    return SectionField(8, lambda z: _ks(z[:4]) + _ks_tangent(z[:4], z[4:]),
                        lambda z: float(np.linalg.norm(z[:4])) > R_MIN, kind="map", name="T_pi", out_dim=6)


def ks_lagrangian(n: float) -> LagrangianSystem:
    """``L = ½|Dπ(y)u|² + i n Tr(σ₃ s⁻¹ṡ)``.

    With ``s⁻¹ = s†/|y|²``, ``Tr(σ₃ s†ṡ) = 2i(y⁰u³ − y³u⁰ + y¹u² − y²u¹)``, so
    the magnetic term is ``−2n(y⁰u³ − y³u⁰ + y¹u² − y²u¹)/|y|²``.
    """

    def L(z):
        y, u = z[:4], z[4:]
        v = _ks_tangent(y, u)
        kin = 0.5 * (v[0] ** 2 + v[1] ** 2 + v[2] ** 2)
        twist = y[0] * u[3] - y[3] * u[0] + y[1] * u[2] - y[2] * u[1]
        return kin - 2 * n * twist / (y[0] ** 2 + y[1] ** 2 + y[2] ** 2 + y[3] ** 2)

    return LagrangianSystem(4, ScalarField(8, L, lambda z: float(np.linalg.norm(z[:4])) > R_MIN, name="L_KS"), "ks")


def monopole_ks_lagrangian_check(n: float, y, u, cfg: DiffConfig = DUAL) -> float:
    """Max-norm of ``(Tπ)*ω − ω_L`` at ``(y, u)``."""
    y = _nonzero(y)
    z = np.concatenate([y, np.asarray(u, dtype=float)])
    T = ks_lift_map()
    J = jacobian(T, z, cfg)
    Om = np.array(monopole_omega(float(n))(list(T(z))), dtype=float)
    pulled = J.T @ Om @ J
    _, omega_L = cartan_forms(ks_lagrangian(float(n)), z, cfg)
    return float(np.max(np.abs(pulled - omega_L.entries)))


@register("monopole_ks", "KS lift of the monopole: singular Lagrangian on R⁴∖{0}; parameter n")
def monopole_ks_system(n: float = 1.0) -> SystemDescriptor:
    n = float(n)
    L = ks_lagrangian(n)
    return SystemDescriptor(
        "monopole_ks", lagrangian=L,
        state_box=((-1, 1),) * 8, x0=(1.0, 0.0, 0.0, 0.0, 0.0, 0.3, 0.1, 0.0),
        metadata={"n": n, "singular": True},
        description=f"KS-lifted monopole with n = {n:g}",
    )
