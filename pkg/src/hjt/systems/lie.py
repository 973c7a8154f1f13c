"""Matrix Lie groups: free motion on SU(2) and the rigid body on SO(3).

SU(2) is parametrized by ``y ∈ R⁴`` through ``s = y⁰ I + i y·σ``; SO(3)
elements are real 3×3 matrices, with so(3) identified with R³ by the hat
map and paired by ``⟨a, b⟩ = ½ Tr(âᵀ b̂) = a·b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .. import ad
from ..dynamics import HamiltonianSystem, LagrangianSystem, cartan_forms
from ..errors import NotInAlgebra, SingularInertia
from ..geometry import DUAL, DiffConfig, ScalarField, SectionField, exterior_derivative, grad, jacobian
from .base import SystemDescriptor, register

ALGEBRA_TOL = 1e-10

SIGMA = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex)


# ---------------------------------------------------------------------------
# SU(2)


def su2_basis() -> np.ndarray:
    """``t_a = −(i/2) σ_a``, so that ``[t₁, t₂] = t₃``."""
    return -0.5j * SIGMA


def su2_matrix(y) -> np.ndarray:
    y0, y1, y2, y3 = (float(c) for c in y)
    return np.array([[y0 + 1j * y3, y2 + 1j * y1], [-y2 + 1j * y1, y0 - 1j * y3]])


def su2_coords(s) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    return np.array([s[0, 0].real, s[0, 1].imag, s[0, 1].real, s[0, 0].imag])


def su2_project(y) -> np.ndarray:
    """Nearest unit quaternion (polar projection onto SU(2))."""
    y = np.asarray(y, dtype=float)
    return y / np.linalg.norm(y)


def su2_algebra_coords(xi) -> np.ndarray:
    """``c`` with ``ξ = i c·σ``; raises unless ξ is antihermitian and traceless."""
    xi = np.asarray(xi, dtype=complex)
    if xi.shape != (2, 2) or np.max(np.abs(xi + xi.conj().T)) > ALGEBRA_TOL or abs(np.trace(xi)) > ALGEBRA_TOL:
        raise NotInAlgebra("expected a traceless antihermitian 2×2 matrix")
    return np.array([(np.trace(xi @ SIGMA[a]) / 2j).real for a in range(3)])


def su2_left_translate(y, c):
    """Coordinates of ``s(y)·(i c·σ)``; works on jets."""
    y0, y1, y2, y3 = y
    yv = (y1, y2, y3)
    dot = yv[0] * c[0] + yv[1] * c[1] + yv[2] * c[2]
    cross = (yv[1] * c[2] - yv[2] * c[1], yv[2] * c[0] - yv[0] * c[2], yv[0] * c[1] - yv[1] * c[0])
    return [-dot] + [y0 * c[i] - cross[i] for i in range(3)]


def su2_free_lagrangian() -> LagrangianSystem:
    """``L = ½ Tr[(s⁻¹ṡ)²]`` in the coordinates ``(y, u = ẏ)``.

    With ``s⁻¹ṡ = (a₀ I + i b·σ)/|y|²``, ``a₀ = y·u`` (all four components)
    and ``b = y⁰ū − u⁰ȳ + ȳ×ū``, the trace gives ``(a₀² − |b|²)/|y|⁴``.
    """

    def L(x):
        y, u = x[:4], x[4:]
        a0 = sum(y[i] * u[i] for i in range(4))
        yv, uv = y[1:], u[1:]
        cross = (yv[1] * uv[2] - yv[2] * uv[1], yv[2] * uv[0] - yv[0] * uv[2], yv[0] * uv[1] - yv[1] * uv[0])
        b = [y[0] * uv[i] - u[0] * yv[i] + cross[i] for i in range(3)]
        r2 = sum(c * c for c in y)
        return (a0 * a0 - sum(c * c for c in b)) / (r2 * r2)

    def guard(x):
        return float(np.sum(np.asarray(x[:4], dtype=float) ** 2)) > 1e-12

    return LagrangianSystem(4, ScalarField(8, L, guard, name="L_su2"), "su2_free")


class LieCheck(NamedTuple):
    pullback_value: float
    closed_form: float
    contraction: float


def lie_group_invariant_solution_check(xi, zeta1, zeta2, g, cfg: DiffConfig = DUAL) -> LieCheck:
    """Pullback of ω_L through ``X(s) = sξ`` on the left-invariant fields ``sζ₁``, ``sζ₂``.

    ``pullback_value`` is computed numerically from the Cartan 2-form of
    :func:`su2_free_lagrangian`; ``closed_form`` is ``Tr(ξ[ζ₁, ζ₂])``;
    ``contraction`` is the numerical value with ``ζ₁ = ξ``.
    """
    c = su2_algebra_coords(xi)
    z1 = su2_algebra_coords(zeta1)
    z2 = su2_algebra_coords(zeta2)
    y = su2_coords(g) if np.asarray(g).shape == (2, 2) else np.asarray(g, dtype=float)
    lsys = su2_free_lagrangian()
    X = SectionField(4, lambda yy: su2_left_translate(yy, c), kind="vector", name="X_xi")
    Jx = jacobian(X, y, cfg)
    _, omega = cartan_forms(lsys, np.concatenate([y, X(y)]), cfg)
    J = np.vstack([np.eye(4), Jx])
    pull = J.T @ omega.entries @ J
    Y1 = np.array(su2_left_translate(y, z1))
    Y2 = np.array(su2_left_translate(y, z2))
    Yx = np.array(su2_left_translate(y, c))
    xi_m = np.asarray(xi, dtype=complex)
    z1m, z2m = np.asarray(zeta1, dtype=complex), np.asarray(zeta2, dtype=complex)
    closed = np.trace(xi_m @ (z1m @ z2m - z2m @ z1m)).real
    return LieCheck(float(Y1 @ pull @ Y2), float(closed), float(Yx @ pull @ Y1))


# ---------------------------------------------------------------------------
# SO(3)


def hat(w):
    return [[0 * w[0], -w[2], w[1]], [w[2], 0 * w[0], -w[0]], [-w[1], w[0], 0 * w[0]]]


def hat_np(w) -> np.ndarray:
    return np.array(hat([float(c) for c in w]), dtype=float)


def vee(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    return np.array([A[2, 1], A[0, 2], A[1, 0]])


def so3_project(M) -> np.ndarray:
    """Polar projection onto SO(3)."""
    U, _, Vt = np.linalg.svd(np.asarray(M, dtype=float).reshape(3, 3))
    R = U @ Vt
    if np.linalg.det(R) < 0:
        U[:, -1] *= -1
        R = U @ Vt
    return R


def random_so3(rng: np.random.Generator) -> np.ndarray:
    return so3_project(rng.normal(size=(3, 3)))


def check_so3_algebra(zeta) -> np.ndarray:
    z = np.asarray(zeta, dtype=float)
    if z.shape == (3, 3):
        if np.max(np.abs(z + z.T)) > ALGEBRA_TOL:
            raise NotInAlgebra("expected an antisymmetric 3×3 matrix")
        return vee(z)
    if z.shape != (3,):
        raise NotInAlgebra("expected an so(3) element as a 3-vector or antisymmetric matrix")
    return z


def Ad(g, zeta) -> np.ndarray:
    """``Ad_g ζ = g ζ̂ g⁻¹`` as a 3-vector."""
    g = np.asarray(g, dtype=float)
    return vee(g @ hat_np(zeta) @ np.linalg.inv(g))


def Ad_star(g, mu) -> np.ndarray:
    """``⟨Ad*_g μ, ζ⟩ = ⟨μ, Ad_g ζ⟩``, computed by trace duality."""
    return np.array([mu @ Ad(g, e) for e in np.eye(3)])


def ad_star(zeta, mu) -> np.ndarray:
    """``⟨ad*_ζ μ, η⟩ = ⟨μ, [ζ, η]⟩`` with the matrix commutator."""
    Z = hat_np(zeta)
    return np.array([mu @ vee(Z @ hat_np(e) - hat_np(e) @ Z) for e in np.eye(3)])


def _inertia(I):
    I = np.asarray(I, dtype=float)
    M = np.diag(I) if I.ndim == 1 else I
    if M.shape != (3, 3) or np.max(np.abs(M - M.T)) > 1e-12:
        raise SingularInertia("inertia must be a symmetric 3×3 matrix or 3 principal moments")
    if np.min(np.linalg.eigvalsh(M)) <= 0:
        raise SingularInertia("inertia must be positive definite")
    return M


def euler_rhs(I, Omega) -> np.ndarray:
    """``Ω̇ = I⁻¹((IΩ) × Ω)``, i.e. ``Ω̇₁ = (I₂ − I₃)Ω₂Ω₃/I₁`` and cyclic.

    With :func:`ad_star` defined through the matrix commutator this reads
    ``IΩ̇ = ad*_Ω(IΩ)``; the form ``IΩ̇ = −ad*_Ω(IΩ)`` is the same equation
    written with ``ad*_ζ = −(ad_ζ)ᵀ``.
    """
    M = _inertia(I)
    Omega = np.asarray(Omega, dtype=float)
    return np.linalg.solve(M, np.cross(M @ Omega, Omega))


def rigid_body_hamiltonian(I) -> HamiltonianSystem:
    """``H(g, P) = ½ m·I⁻¹m`` with ``m = T*_eL_g(P) = vee(gᵀP − Pᵀg)``.

    Coordinates: 9 entries of g (row-major) then 9 entries of the covector P,
    paired with tangent matrices by the Frobenius product.
    """
    Minv = np.linalg.inv(_inertia(I))

    def H(x):
        g = [[x[3 * i + j] for j in range(3)] for i in range(3)]
        P = [[x[9 + 3 * i + j] for j in range(3)] for i in range(3)]
        A = [[sum(g[k][i] * P[k][j] - P[k][i] * g[k][j] for k in range(3)) for j in range(3)] for i in range(3)]
        m = [A[2][1], A[0][2], A[1][0]]
        return 0.5 * sum(m[i] * Minv[i, j] * m[j] for i in range(3) for j in range(3))

    return HamiltonianSystem(9, ScalarField(18, H, name="H_rigid"), "rigid_body")


def right_invariant_oneform(mu) -> SectionField:
    """``α(g) = T*_gR_{g⁻¹} μ`` extended to GL(3) as the matrix ``½ μ̂ g⁻ᵀ``."""
    mu = np.asarray(mu, dtype=float)

    def comps(x):
        g = np.array([[x[3 * i + j] for j in range(3)] for i in range(3)], dtype=object)
        ginv_t = _inverse_3x3(g).T
        M = hat_np(mu) @ ginv_t
        return [0.5 * M[i, j] for i in range(3) for j in range(3)]

    return SectionField(9, comps, kind="oneform", name="alpha_mu")


def _inverse_3x3(g):
    det = (g[0, 0] * (g[1, 1] * g[2, 2] - g[1, 2] * g[2, 1]) - g[0, 1] * (g[1, 0] * g[2, 2] - g[1, 2] * g[2, 0])
           + g[0, 2] * (g[1, 0] * g[2, 1] - g[1, 1] * g[2, 0]))
    cof = np.empty((3, 3), dtype=object)
    for i in range(3):
        for j in range(3):
            rows = [r for r in range(3) if r != i]
            cols = [c for c in range(3) if c != j]
            minor = g[rows[0], cols[0]] * g[rows[1], cols[1]] - g[rows[0], cols[1]] * g[rows[1], cols[0]]
            cof[i, j] = minor if (i + j) % 2 == 0 else -minor
    inv = np.empty((3, 3), dtype=object)
    for i in range(3):
        for j in range(3):
            inv[i, j] = cof[j, i] / det
    return inv


class RigidBodyTerms(NamedTuple):
    contraction: float
    differential: float
    contraction_closed: float
    differential_closed: float

    @property
    def total(self) -> float:
        return self.contraction + self.differential


def rigid_body_terms(I, mu, g, zeta, cfg: DiffConfig = DUAL) -> RigidBodyTerms:
    """Both summands of ``(i(X)dα + d(α*H))(T_eR_g ζ)``.

    Numerical path: ``dα`` from the Jacobian of α on R⁹ evaluated on
    ``(X(g), ζ̂g)`` with ``X(g) = ∂H/∂P(g, α(g))``, and the gradient of
    ``α*H`` along ``ζ̂g``. Closed forms: ``⟨μ, [Ad_g I⁻¹ Ad*_g μ, ζ]⟩`` and
    ``⟨μ, [ζ, Ad_g I⁻¹ Ad*_g μ]⟩``.
    """
    M = _inertia(I)
    mu = np.asarray(mu, dtype=float)
    zeta = check_so3_algebra(zeta)
    g = np.asarray(g, dtype=float)
    H = rigid_body_hamiltonian(M)
    alpha = right_invariant_oneform(mu)
    x = g.reshape(-1)
    a = alpha(x)
    X = grad(H.H, np.concatenate([x, a]), cfg)[9:]
    Y = (hat_np(zeta) @ g).reshape(-1)
    d_alpha = exterior_derivative(alpha, x, cfg)
    pulled = ScalarField(9, lambda gg: H.H.fn(list(gg) + alpha.fn(gg)), name="alpha*H")
    term1 = d_alpha(X, Y)
    term2 = float(grad(pulled, x, cfg) @ Y)
    w = Ad(g, np.linalg.solve(M, Ad_star(g, mu)))
    Z = hat_np(zeta)
    W = hat_np(w)
    c1 = float(mu @ vee(W @ Z - Z @ W))
    c2 = float(mu @ vee(Z @ W - W @ Z))
    return RigidBodyTerms(term1, term2, c1, c2)


def rigid_body_solution_check(I, mu, g, zeta, cfg: DiffConfig = DUAL) -> float:
    """Sum of the two numerically evaluated summands; zero for a solution."""
    if np.allclose(mu, 0.0):
        return 0.0
    return rigid_body_terms(I, mu, g, zeta, cfg).total


def rigid_body_flow(I):
    """``ġ = g Ω̂``, ``Ω̇ = euler_rhs(I, Ω)`` on states ``(g row-major, Ω)``."""
    M = _inertia(I)

    def field(x):
        x = np.asarray(x, dtype=float)
        g = x[:9].reshape(3, 3)
        Om = x[9:]
        return np.concatenate([(g @ hat_np(Om)).reshape(-1), euler_rhs(M, Om)])

    return field


def rigid_body_project(x) -> np.ndarray:
    x = np.array(x, dtype=float)
    x[:9] = so3_project(x[:9]).reshape(-1)
    return x


def spatial_momentum(I, x) -> np.ndarray:
    """``T*_eR_g(λ_g) = g(IΩ)``: the left momentum map along a trajectory."""
    M = _inertia(I)
    x = np.asarray(x, dtype=float)
    return x[:9].reshape(3, 3) @ (M @ x[9:])


@register("rigid_body", "rigid body on SO(3); I1, I2, I3 principal moments")
def rigid_body(I1: float = 1.0, I2: float = 2.0, I3: float = 3.0) -> SystemDescriptor:
    M = np.diag([float(I1), float(I2), float(I3)])
    _inertia(M)
    H = rigid_body_hamiltonian(M)

    def comp(i):
        return ScalarField(12, lambda x: sum(x[3 * i + j] * M[j, j] * x[9 + j] for j in range(3)), name=f"m{i + 1}")

    conserved = {
        "T": ScalarField(12, lambda x: 0.5 * sum(M[j, j] * x[9 + j] ** 2 for j in range(3)), name="T"),
        "L2": ScalarField(12, lambda x: sum((M[j, j] * x[9 + j]) ** 2 for j in range(3)), name="|I Omega|^2"),
        "m1": comp(0), "m2": comp(1), "m3": comp(2),
    }
    return SystemDescriptor(
        "rigid_body", hamiltonian=H, conserved=conserved,
        flow=rigid_body_flow(M), project=rigid_body_project, group_constraint="SO(3)",
        x0=tuple(np.eye(3).reshape(-1)) + (1.0, 0.01, 0.0),
        metadata={"inertia": M, "state_names": [f"g{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)] + ["W1", "W2", "W3"]},
        description="free rigid body, states (g, body angular velocity)",
    )


@register("su2_free", "free motion on SU(2), L = ½ Tr[(s⁻¹ṡ)²] in quaternion coordinates")
def su2_free(**params) -> SystemDescriptor:
    if params:
        raise TypeError(f"su2_free takes no parameters, got {sorted(params)}")
    L = su2_free_lagrangian()
    return SystemDescriptor(
        "su2_free", lagrangian=L, project=lambda x: np.concatenate([su2_project(x[:4]), x[4:]]),
        group_constraint="SU(2)",
        conserved={"E": ScalarField(8, L.L.fn, L.L.guard, name="E")},
        state_box=((-1, 1),) * 8, x0=(1.0, 0.0, 0.0, 0.0, 0.0, 0.3, 0.0, 0.2),
        metadata={},
        description="free motion on SU(2)",
    )
