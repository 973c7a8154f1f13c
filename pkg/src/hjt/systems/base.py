"""System descriptors and the name-addressable registry."""

from __future__ import annotations

import inspect
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from ..dynamics import HamiltonianSystem, LagrangianSystem, SymplecticSode, hamiltonian_vector_field, sode_field
from ..errors import HJTError
from ..sampling import Grid


class _LookupError(HJTError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class UnknownSystem(_LookupError):
    pass


class UnknownCandidate(_LookupError):
    pass


@dataclass(frozen=True)
class CandidateSpec:
    """A registered candidate solution family.

    ``build(params)`` returns a :class:`~hjt.hj_lagrangian.CandidateVectorField`
    (``kind="vector"``) or :class:`~hjt.hj_hamiltonian.CandidateOneForm`
    (``kind="oneform"``). ``expected`` records the strongest mode the family
    is known to pass: ``"standard"``, ``"generalized"`` or ``"none"``.

    ``formulas`` gives closed-form component expressions in the candidate
    expression language (variables ``q1..qn``, the parameters by name).
    Candidates built from integrals name their ``family`` and map their
    parameters to leaf values with ``lam`` and to a leaf-solve seed with
    ``seed``.
    """

    name: str
    kind: str
    build: Callable
    defaults: Mapping = field(default_factory=dict)
    grid: Optional[Grid] = None
    expected: str = "generalized"
    description: str = ""
    formulas: tuple = ()
    family: Optional[str] = None
    lam: Optional[Callable] = None
    seed: Optional[Callable] = None

    def make(self, params: Optional[Mapping] = None):
        merged = dict(self.defaults)
        for k, v in (params or {}).items():
            if k not in merged:
                raise UnknownCandidate(f"candidate {self.name!r} has no parameter {k!r}; known: {sorted(merged)}")
            merged[k] = float(v)
        return self.build(merged)


@dataclass(frozen=True)
class SystemDescriptor:
    """One registered system with its structures and known solutions.

    ``symplectic`` carries systems given directly by ``(Γ, ω, E)``;
    ``flow``/``project`` override the dynamics used for integration (group
    constraints, gauge-fixed singular dynamics); ``conserved`` lists the
    functions whose drift the integrator reports.
    """

    name: str
    lagrangian: Optional[LagrangianSystem] = None
    hamiltonian: Optional[HamiltonianSystem] = None
    symplectic: Optional[SymplecticSode] = None
    candidates: Mapping = field(default_factory=dict)
    integrals: Mapping = field(default_factory=dict)
    conserved: Mapping = field(default_factory=dict)
    flow: Optional[Callable] = None
    flow_guard: Optional[Callable] = None
    project: Optional[Callable] = None
    group_constraint: Optional[str] = None
    state_box: tuple = ()
    x0: tuple = ()
    metadata: Mapping = field(default_factory=dict)
    description: str = ""

    def __post_init__(self):
        if self.lagrangian is None and self.hamiltonian is None and self.symplectic is None:
            raise ValueError("a system needs a Lagrangian, a Hamiltonian or a symplectic description")

    @property
    def n(self) -> int:
        for s in (self.lagrangian, self.hamiltonian, self.symplectic):
            if s is not None:
                return s.n
        raise AssertionError("unreachable")

    @property
    def dynamics(self):
        """The object the Lagrangian-side checks run against."""
        return self.symplectic if self.symplectic is not None else self.lagrangian

    def candidate(self, name: str, params: Optional[Mapping] = None):
        try:
            spec = self.candidates[name]
        except KeyError:
            raise UnknownCandidate(f"system {self.name!r} has no candidate {name!r}; known: {sorted(self.candidates)}") from None
        return spec.make(params)

    def vector_field(self):
        """The phase-space field integrated by default, with its guard."""
        if self.flow is not None:
            f = self.flow
            guard = self.flow_guard or (lambda x: True)
        elif self.symplectic is not None:
            f = self.symplectic.field
            guard = self.symplectic.guard
        elif self.lagrangian is not None:
            f = sode_field(self.lagrangian)
            guard = self.lagrangian.guard
        else:
            f = hamiltonian_vector_field(self.hamiltonian)
            guard = self.hamiltonian.guard
        return f, guard

    def sample_states(self, count: int, rng: np.random.Generator, guard: Optional[Callable] = None) -> list:
        """Uniform random points in ``state_box`` passing ``guard``."""
        lo = np.array([b[0] for b in self.state_box], dtype=float)
        hi = np.array([b[1] for b in self.state_box], dtype=float)
        out = []
        tries = 0
        while len(out) < count:
            tries += 1
            if tries > 1000 * count:
                raise HJTError(f"could not draw {count} guarded states for {self.name!r}")
            x = lo + (hi - lo) * rng.random(len(lo))
            try:
                if guard is None or guard(x):
                    out.append(x)
            except (ArithmeticError, ValueError, HJTError):
                continue
        return out


_FACTORIES: dict = {}
_DESCRIPTIONS: dict = {}


def register(name: str, description: str = ""):
    """Decorator registering ``factory(**params) -> SystemDescriptor``."""

    def deco(factory):
        _FACTORIES[name] = factory
        _DESCRIPTIONS[name] = description
        return factory

    return deco


def get_system(name: str, params: Optional[Mapping] = None) -> SystemDescriptor:
    try:
        factory = _FACTORIES[name]
    except KeyError:
        raise UnknownSystem(f"unknown system {name!r}; known: {sorted(_FACTORIES)}") from None
    return factory(**dict(params or {}))


def system_parameters(name: str) -> list:
    """Named keyword parameters of a system factory."""
    if name not in _FACTORIES:
        raise UnknownSystem(f"unknown system {name!r}; known: {sorted(_FACTORIES)}")
    sig = inspect.signature(_FACTORIES[name])
    return [k for k, p in sig.parameters.items() if p.kind is inspect.Parameter.POSITIONAL_OR_KEYWORD]


def system_names() -> list:
    return sorted(_FACTORIES)


def system_description(name: str) -> str:
    return _DESCRIPTIONS.get(name, "")
