"""Flat-space mechanical systems: free particle, 2D oscillator and an
alternative oscillator Lagrangian."""

from __future__ import annotations


from .. import ad
from ..dynamics import HamiltonianSystem, LagrangianSystem
from ..foliations import IntegralFamily, build_complete_solution
from ..geometry import ScalarField, SectionField
from ..hj_hamiltonian import CandidateOneForm, exact_oneform
from ..hj_lagrangian import CandidateVectorField
from ..sampling import Grid
from .base import CandidateSpec, SystemDescriptor, register


def _vector(n, fn, guard, name, params):
    return CandidateVectorField(SectionField(n, fn, guard, kind="vector", name=name), dict(params), name)


def _oneform(n, fn, guard, name, params):
    return CandidateOneForm(SectionField(n, fn, guard, kind="oneform", name=name), dict(params), name)


def _sign(x) -> float:
    return -1.0 if x < 0 else 1.0


# ---------------------------------------------------------------------------
# candidate families


def shear_field(p):
    """``X = k ∂₁ + ((k q² − l)/q¹) ∂₂`` on ``q¹ ≠ 0``."""
    k, l = p["k"], p["l"]
    return _vector(2, lambda q: [k + 0 * q[0], (k * q[1] - l) / q[0]], lambda q: abs(q[0]) > 1e-6, "X_kl", p)


def inverse_q1_oneform(p):
    """``α = (c/q¹) dq²``."""
    c = p["c"]
    return _oneform(2, lambda q: [0 * q[0], c / q[0]], lambda q: abs(q[0]) > 1e-6, "alpha_q1", p)


def linear_oneform(p):
    """``α = dW`` with ``W = a·q``."""
    a1, a2 = p["a1"], p["a2"]
    W = ScalarField(2, lambda q: a1 * q[0] + a2 * q[1], name="W_lin")
    cand = exact_oneform(W, "alpha_lin")
    return CandidateOneForm(cand.field, dict(p), "alpha_lin")


def constant_field(p):
    c1, c2 = p["c1"], p["c2"]
    return _vector(2, lambda q: [c1 + 0 * q[0], c2 + 0 * q[0]], lambda q: True, "X_const", p)


def energy_field(p):
    """``X_{E₁,E₂} = (s₁√(2E₁ − q¹²), s₂√(2E₂ − q²²))``."""
    E1, E2 = p["E1"], p["E2"]
    s1, s2 = _sign(p["s1"]), _sign(p["s2"])

    def guard(q):
        return q[0] ** 2 < 2 * E1 and q[1] ** 2 < 2 * E2

    return _vector(2, lambda q: [s1 * ad.sqrt(2 * E1 - q[0] ** 2), s2 * ad.sqrt(2 * E2 - q[1] ** 2)], guard, "X_E", p)


def cl_discriminant(q, C, l):
    return l * l + 4 * q[0] * q[1] * (C - q[0] * q[1])


def cl_field(p):
    """Velocities solving ``f₁ = C``, ``f₄ = l`` for the oscillator.

    ``v¹ = (−l + s√D)/(2q²)`` and ``v² = (l + q² v¹)/q¹ = (l + s√D)/(2q¹)``
    with ``D = l² + 4q¹q²(C − q¹q²)``.
    """
    C, l, s = p["C"], p["l"], _sign(p["s"])

    def guard(q):
        return abs(q[0]) > 1e-6 and abs(q[1]) > 1e-6 and cl_discriminant(q, C, l) > 1e-9

    def w(q):
        r = ad.sqrt(cl_discriminant(q, C, l))
        return [(-l + s * r) / (2 * q[1]), (l + s * r) / (2 * q[0])]

    return _vector(2, w, guard, "X_Cl", p)


XE_FORMULAS = ("s1*sqrt(2*E1 - q1^2)", "s2*sqrt(2*E2 - q2^2)")
XCL_FORMULAS = (
    "(-l + s*sqrt(l^2 + 4*q1*q2*(C - q1*q2)))/(2*q2)",
    "(l + s*sqrt(l^2 + 4*q1*q2*(C - q1*q2)))/(2*q1)",
)


# ---------------------------------------------------------------------------
# integrals of the oscillator


def oscillator_integrals() -> dict:
    f1 = ScalarField(4, lambda x: x[2] * x[3] + x[0] * x[1], name="f1")
    f2 = ScalarField(4, lambda x: x[2] ** 2 + x[0] ** 2, name="f2")
    f3 = ScalarField(4, lambda x: x[3] ** 2 + x[1] ** 2, name="f3")
    f4 = ScalarField(4, lambda x: x[0] * x[3] - x[1] * x[2], name="f4")
    return {"f1": f1, "f2": f2, "f3": f3, "f4": f4}


def _family(fs, *names):
    return IntegralFamily(2, tuple(fs[k] for k in names), tuple(names))


def built_energy_field(lsys, fam):
    def build(p):
        lam = [2 * p["E1"], 2 * p["E2"]]
        # Newton on v² = c − q² keeps the sign of its seed, which fixes the branch
        seed = [_sign(p["s1"]), _sign(p["s2"])]
        E1, E2 = p["E1"], p["E2"]
        X = build_complete_solution(
            fam, lsys, lam, seed,
            domain=lambda q: q[0] ** 2 < 2 * E1 and q[1] ** 2 < 2 * E2,
            name="X_f23",
        )
        return CandidateVectorField(X.field, dict(p), "X_f23")

    return build


def built_cl_field(lsys, fam):
    def build(p):
        ref = cl_field(p)

        def seed(q):
            return ref(q)

        X = build_complete_solution(fam, lsys, [p["C"], p["l"]], seed, domain=ref.guard, name="X_f14")
        return CandidateVectorField(X.field, dict(p), "X_f14")

    return build


# ---------------------------------------------------------------------------
# systems


@register("free", "free particle in the plane, L = ½|v|², H = ½|p|²")
def free_particle(**params) -> SystemDescriptor:
    if params:
        raise TypeError(f"free takes no parameters, got {sorted(params)}")
    L = LagrangianSystem(2, ScalarField(4, lambda x: 0.5 * (x[2] ** 2 + x[3] ** 2), name="L_free"), "free")
    H = HamiltonianSystem(2, ScalarField(4, lambda x: 0.5 * (x[2] ** 2 + x[3] ** 2), name="H_free"), "free")
    v1 = ScalarField(4, lambda x: x[2], name="v1")
    v2 = ScalarField(4, lambda x: x[3], name="v2")
    momenta = IntegralFamily(2, (v1, v2), ("v1", "v2"))
    right = Grid.box([(0.5, 2.0), (-1.0, 1.0)], 15)
    full = Grid.box([(-1.0, 1.0), (-1.0, 1.0)], 15)
    cands = {
        "X_kl": CandidateSpec("X_kl", "vector", shear_field, {"k": 1.0, "l": 0.0}, right, "generalized",
                              "two-parameter shear family, generalized but not standard",
                              formulas=("k", "(k*q2 - l)/q1")),
        "X_const": CandidateSpec("X_const", "vector", constant_field, {"c1": 1.0, "c2": 0.5}, full, "standard",
                                 "constant velocity field", formulas=("c1", "c2")),
        "alpha_q1": CandidateSpec("alpha_q1", "oneform", inverse_q1_oneform, {"c": 1.0}, right, "generalized",
                                  "the 1-form (c/q1) dq2", formulas=("0", "c/q1")),
        "alpha_lin": CandidateSpec("alpha_lin", "oneform", linear_oneform, {"a1": 1.0, "a2": -0.5}, full, "standard",
                                   "exact 1-form d(a·q)", formulas=("a1", "a2")),
        "X_v": CandidateSpec(
            "X_v", "vector",
            lambda p: CandidateVectorField(
                build_complete_solution(momenta, L, [p["c1"], p["c2"]], [p["c1"], p["c2"]], name="X_v").field, dict(p), "X_v"),
            {"c1": 1.0, "c2": 0.5}, full, "standard", "leaf of the momentum integrals v1, v2",
            formulas=("c1", "c2"), family="v12", lam=lambda p: [p["c1"], p["c2"]],
            seed=lambda p: [p["c1"], p["c2"]]),
    }
    return SystemDescriptor(
        "free", lagrangian=L, hamiltonian=H, candidates=cands,
        integrals={"v12": momenta},
        conserved={"E": ScalarField(4, lambda x: 0.5 * (x[2] ** 2 + x[3] ** 2), name="E")},
        state_box=((-2, 2), (-2, 2), (-2, 2), (-2, 2)),
        x0=(0.0, 0.0, 1.0, 2.0),
        metadata={"hyper_regular": True},
        description="free particle in the plane",
    )


def _oscillator_L():
    return LagrangianSystem(
        2, ScalarField(4, lambda x: 0.5 * (x[2] ** 2 + x[3] ** 2 - x[0] ** 2 - x[1] ** 2), name="L_ho"), "ho2d")


@register("ho2d", "isotropic 2D harmonic oscillator, L = ½(|v|² − |q|²)")
def oscillator(**params) -> SystemDescriptor:
    if params:
        raise TypeError(f"ho2d takes no parameters, got {sorted(params)}")
    L = _oscillator_L()
    H = HamiltonianSystem(
        2, ScalarField(4, lambda x: 0.5 * (x[2] ** 2 + x[3] ** 2 + x[0] ** 2 + x[1] ** 2), name="H_ho"), "ho2d")
    fs = oscillator_integrals()
    f23 = _family(fs, "f2", "f3")
    f14 = _family(fs, "f1", "f4")
    e_grid = Grid.box([(-1.3, 1.3), (-0.9, 0.9)], 20)
    cl_grid = Grid.box([(0.2, 0.9), (0.2, 0.9)], 20)
    cands = {
        "XE": CandidateSpec("XE", "vector", energy_field, {"E1": 1.0, "E2": 0.5, "s1": 1.0, "s2": 1.0}, e_grid,
                            "standard", "leaves of f2 = 2E1, f3 = 2E2", formulas=XE_FORMULAS),
        "XCl": CandidateSpec("XCl", "vector", cl_field, {"C": 1.0, "l": 0.0, "s": 1.0}, cl_grid, "generalized",
                             "leaves of f1 = C, f4 = l", formulas=XCL_FORMULAS),
        "X_f23": CandidateSpec("X_f23", "vector", built_energy_field(L, f23), {"E1": 1.0, "E2": 0.5, "s1": 1.0, "s2": 1.0},
                               e_grid, "standard", "XE rebuilt by Newton inversion of f2, f3",
                               formulas=XE_FORMULAS, family="f23", lam=lambda p: [2 * p["E1"], 2 * p["E2"]],
                               seed=lambda p: [_sign(p["s1"]), _sign(p["s2"])]),
        "X_f14": CandidateSpec("X_f14", "vector", built_cl_field(L, f14), {"C": 1.0, "l": 0.0, "s": 1.0}, cl_grid,
                               "generalized", "XCl rebuilt by Newton inversion of f1, f4",
                               formulas=XCL_FORMULAS, family="f14", lam=lambda p: [p["C"], p["l"]],
                               seed=lambda p: cl_field(p)),
        "X_const": CandidateSpec("X_const", "vector", constant_field, {"c1": 1.0, "c2": 0.0},
                                 Grid.box([(-1, 1), (-1, 1)], 15), "none", "constant field, not a solution",
                                 formulas=("c1", "c2")),
    }
    return SystemDescriptor(
        "ho2d", lagrangian=L, hamiltonian=H, candidates=cands,
        integrals={"f23": f23, "f14": f14, "f2": IntegralFamily(2, (fs["f2"],), ("f2",))},
        conserved=dict(fs) | {"E": ScalarField(4, lambda x: 0.5 * (x[2] ** 2 + x[3] ** 2 + x[0] ** 2 + x[1] ** 2), name="E")},
        state_box=((-1.5, 1.5), (-1.5, 1.5), (-1.5, 1.5), (-1.5, 1.5)),
        x0=(1.0, 0.0, 0.0, 1.0),
        metadata={"hyper_regular": True, "functions": fs},
        description="isotropic harmonic oscillator in the plane",
    )


@register("ho2d_alt", "the oscillator with the alternative Lagrangian L' = v1 v2 − q1 q2")
def oscillator_alt(**params) -> SystemDescriptor:
    if params:
        raise TypeError(f"ho2d_alt takes no parameters, got {sorted(params)}")
    L = LagrangianSystem(2, ScalarField(4, lambda x: x[2] * x[3] - x[0] * x[1], name="L_alt"), "ho2d_alt")
    H = HamiltonianSystem(2, ScalarField(4, lambda x: x[2] * x[3] + x[0] * x[1], name="H_alt"), "ho2d_alt")
    fs = oscillator_integrals()
    e_grid = Grid.box([(-1.3, 1.3), (-0.9, 0.9)], 20)
    cands = {
        "XE": CandidateSpec("XE", "vector", energy_field, {"E1": 1.0, "E2": 0.5, "s1": 1.0, "s2": 1.0}, e_grid,
                            "generalized", "the oscillator's XE leaves, seen with the alternative Lagrangian",
                            formulas=XE_FORMULAS),
        "X_const": CandidateSpec("X_const", "vector", constant_field, {"c1": 1.0, "c2": 1.0},
                                 Grid.box([(-1, 1), (-1, 1)], 15), "none", "constant field, not a solution",
                                 formulas=("c1", "c2")),
    }
    return SystemDescriptor(
        "ho2d_alt", lagrangian=L, hamiltonian=H, candidates=cands,
        integrals={"f23": _family(fs, "f2", "f3"), "f14": _family(fs, "f1", "f4")},
        conserved={"E": ScalarField(4, lambda x: x[2] * x[3] + x[0] * x[1], name="E")},
        state_box=((-1.5, 1.5), (-1.5, 1.5), (-1.5, 1.5), (-1.5, 1.5)),
        x0=(1.0, 0.0, 0.0, 1.0),
        metadata={"hyper_regular": True},
        description="oscillator with L' = v1 v2 − q1 q2",
    )
