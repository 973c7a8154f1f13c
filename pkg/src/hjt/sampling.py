"""Sample lattices, residual reports and deterministic parallel maps."""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import EmptyGrid, HJTError


@dataclass(frozen=True)
class Axis:
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise HJTError("grid axis needs at least one point")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([0.5 * (self.lo + self.hi)])
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class Grid:
    """Axis-aligned lattice; points come out in row-major lattice order."""

    axes: tuple

    @classmethod
    def box(cls, bounds: Sequence[tuple], count: int = 20) -> "Grid":
        return cls(tuple(Axis(lo, hi, count) for lo, hi in bounds))

    @classmethod
    def parse(cls, text: str) -> "Grid":
        """``"q1:0.5:2:15,q2:-1:1:15"``; axis labels are informative only."""
        axes = []
        for part in text.split(","):
            bits = part.strip().split(":")
            if len(bits) == 4:
                bits = bits[1:]
            if len(bits) != 3:
                raise HJTError(f"bad grid axis {part!r}; expected name:min:max:count")
            axes.append(Axis(float(bits[0]), float(bits[1]), int(bits[2])))
        return cls(tuple(axes))

    @property
    def dim(self) -> int:
        return len(self.axes)

    def points(self, guard: Optional[Callable] = None) -> list:
        pts = [np.array(p) for p in itertools.product(*(a.values() for a in self.axes))]
        if guard is not None:
            pts = [p for p in pts if _safe_guard(guard, p)]
        return pts


def _safe_guard(guard, p) -> bool:
    try:
        return bool(guard(p))
    except (ArithmeticError, ValueError, HJTError):
        return False


def as_points(grid, guard: Optional[Callable] = None) -> list:
    if isinstance(grid, Grid):
        pts = grid.points(guard)
    else:
        pts = [np.asarray(p, dtype=float) for p in grid]
        if guard is not None:
            pts = [p for p in pts if _safe_guard(guard, p)]
    if not pts:
        raise EmptyGrid("no guarded sample points")
    return pts


def num_threads() -> int:
    try:
        return max(1, int(os.environ.get("HJT_NUM_THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(fn: Callable, items: Sequence, threads: Optional[int] = None) -> list:
    """``list(map(fn, items))``, optionally fanned out; order is preserved."""
    threads = num_threads() if threads is None else threads
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass
class ResidualReport:
    """Per-sample residual magnitudes and the verdict against ``tol``.

    Only the channels listed in ``channels`` decide the verdict; the rest of
    each sample's entries are diagnostics. ``aggregates`` holds channels
    that are computed over the whole sample set (spreads).
    """

    mode: str
    tol: float
    channels: tuple
    samples: list = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)

    def __post_init__(self):
        self.max_by_channel = {k: float(v) for k, v in self.aggregates.items()}
        self.argmax = {}
        for point, values in self.samples:
            for name, val in values.items():
                if name not in self.max_by_channel or val > self.max_by_channel[name]:
                    self.max_by_channel[name] = float(val)
                    self.argmax[name] = tuple(float(c) for c in point)

    @property
    def passed(self) -> bool:
        return all(self.max_by_channel.get(c, 0.0) <= self.tol for c in self.channels)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def values(self, channel: str) -> np.ndarray:
        return np.array([vals[channel] for _, vals in self.samples if channel in vals])

    def failing_channels(self) -> list:
        return [c for c in self.channels if self.max_by_channel.get(c, 0.0) > self.tol]
