"""Command-line front end.

Subcommands ``verify``, ``integrate``, ``brackets``, ``scan`` and
``list-systems``. Reports are JSON with sorted keys or CSV with a header
row; floats are printed with 17 significant digits in CSV and with
shortest round-trip text in JSON, so identical runs give identical bytes.

Exit codes: 0 pass, 1 fail, 2 usage or parse error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import integrate
from .errors import EmptyGrid, ExprSyntaxError, ExpressionError, HJTError, NumericalError, UnknownIdentifier
from .expr import compile_expression, coordinate_names, parse_expression
from .foliations import IntegralFamily, involution_matrix, solve_leaf, transversality_check
from .geometry import CENTRAL, DUAL, SectionField
from .hj_hamiltonian import CandidateOneForm, projection_distance_h, verify_h
from .hj_lagrangian import CandidateVectorField, projection_distance, verify
from .sampling import Axis, Grid
from .systems import UnknownCandidate, UnknownSystem, get_system, system_description, system_names, system_parameters

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(HJTError):
    pass


# ---------------------------------------------------------------------------
# configuration

OPTION_KEYS = (
    "system", "candidate", "params", "grid", "tol", "mode", "diff", "format", "out",
    "dt", "steps", "x0", "integrals", "require_involution",
)


@dataclass
class RunConfig:
    command: str
    system: Optional[str] = None
    candidate: Optional[str] = None
    params: dict = field(default_factory=dict)
    grid: Optional[str] = None
    tol: float = 1e-8
    mode: str = "generalized"
    diff: str = "dual"
    format: str = "json"
    out: Optional[str] = None
    dt: float = 1e-3
    steps: int = 1000
    x0: Optional[list] = None
    integrals: Optional[str] = None
    require_involution: bool = False

    def __post_init__(self):
        if self.tol <= 0:
            raise UsageError("--tol must be positive")
        if self.dt <= 0 or self.steps < 1:
            raise UsageError("--dt must be positive and --steps at least 1")
        if self.mode not in ("generalized", "standard", "singular_isotropy"):
            raise UsageError(f"unknown mode {self.mode!r}")
        if self.diff not in ("dual", "central"):
            raise UsageError(f"unknown differentiation mode {self.diff!r}")
        if self.format not in ("json", "csv"):
            raise UsageError(f"unknown format {self.format!r}")

    @property
    def diff_config(self):
        return DUAL if self.diff == "dual" else CENTRAL


def _scalar(text: str):
    try:
        return float(text)
    except ValueError:
        return text.strip()


def parse_params(text: Optional[str]) -> dict:
    """``"k=1,l=0.5"`` to a dict; non-numeric values stay strings."""
    out = {}
    if not text:
        return out
    for part in text.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise UsageError(f"bad parameter {part!r}; expected name=value")
        k, v = part.split("=", 1)
        out[k.strip()] = _scalar(v)
    return out


def parse_vector(text: str) -> list:
    try:
        return [float(c) for c in text.split(",")]
    except ValueError:
        raise UsageError(f"bad vector {text!r}") from None


def parse_grid(text: str):
    """``name:min:max:count,...`` to ``(labels, Grid)``."""
    labels, axes = [], []
    for i, part in enumerate(text.split(",")):
        bits = [b.strip() for b in part.split(":")]
        if len(bits) == 3:
            bits = [f"x{i + 1}"] + bits
        if len(bits) != 4:
            raise UsageError(f"bad grid axis {part!r}; expected name:min:max:count")
        try:
            lo, hi, count = float(bits[1]), float(bits[2]), int(bits[3])
        except ValueError:
            raise UsageError(f"bad grid axis {part!r}") from None
        if count < 1:
            raise UsageError(f"grid axis {bits[0]!r} needs at least one point")
        labels.append(bits[0])
        axes.append(Axis(lo, hi, count))
    return labels, Grid(tuple(axes))


def read_config(path: str, command: str) -> dict:
    """Keys from ``[run]`` then from the section named after the command."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path!r}: {exc}") from None
    values = {}
    for section in ("run", command):
        if parser.has_section(section):
            for k, v in parser.items(section):
                key = k.replace("-", "_")
                if key not in OPTION_KEYS:
                    raise UsageError(f"unknown config key {k!r} in [{section}]")
                values[key] = v
    return values


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hjt", description="Hamilton-Jacobi solution checks")
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config")
    common.add_argument("--system")
    common.add_argument("--params")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--out")
    common.add_argument("--diff", choices=("dual", "central"))
    common.add_argument("--tol", type=float)
    common.add_argument("--grid")
    p = sub.add_parser("verify", parents=[common], help="check a candidate solution")
    p.add_argument("--candidate")
    p.add_argument("--mode", choices=("generalized", "standard", "singular_isotropy"))
    p = sub.add_parser("integrate", parents=[common], help="integrate the dynamics and report drift")
    p.add_argument("--candidate")
    p.add_argument("--dt", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--x0")
    p = sub.add_parser("brackets", parents=[common], help="table of Poisson brackets")
    p.add_argument("--integrals")
    p.add_argument("--require-involution", action="store_true", default=None)
    p = sub.add_parser("scan", parents=[common], help="sweep a complete solution over its parameters")
    p.add_argument("--candidate")
    sub.add_parser("list-systems", parents=[common], help="registered systems and candidates")
    return ap


def make_config(args: argparse.Namespace) -> RunConfig:
    values = read_config(args.config, args.command) if getattr(args, "config", None) else {}
    for key in OPTION_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    kw = {"command": args.command}
    try:
        for key, v in values.items():
            if key == "params":
                kw[key] = parse_params(v) if isinstance(v, str) else v
            elif key in ("tol", "dt"):
                kw[key] = float(v)
            elif key == "steps":
                kw[key] = int(v)
            elif key == "x0":
                kw[key] = parse_vector(v) if isinstance(v, str) else v
            elif key == "require_involution":
                kw[key] = v if isinstance(v, bool) else str(v).strip().lower() in ("1", "true", "yes", "on")
            else:
                kw[key] = v
    except ValueError as exc:
        raise UsageError(f"bad option value: {exc}") from None
    return RunConfig(**kw)


# ---------------------------------------------------------------------------
# output


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def render_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render_csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(c) for c in row] + [""] * (len(header) - len(row)))
    return buf.getvalue()


def _emit(cfg: RunConfig, text: str):
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# systems and candidates


def _split_params(name: str, params: dict):
    known = set(system_parameters(name))
    sys_p = {k: v for k, v in params.items() if k in known}
    cand_p = {k: v for k, v in params.items() if k not in known}
    return sys_p, cand_p


def _system(cfg: RunConfig):
    if not cfg.system:
        raise UsageError("--system is required")
    sys_p, cand_p = _split_params(cfg.system, cfg.params)
    try:
        return get_system(cfg.system, sys_p), cand_p
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad parameters for system {cfg.system!r}: {exc}") from None


def _safe(fn):
    def guard(q):
        try:
            with np.errstate(all="ignore"):
                vals = fn(list(np.asarray(q, dtype=float)))
        except (ArithmeticError, ValueError):
            return False
        return all(math.isfinite(float(v)) for v in vals)

    return guard


def load_candidate_file(path: str, n: int, params: dict):
    """Read a candidate file: ``param k [= value]`` lines and ``w1 =``/``a1 =`` components."""
    declared, comps, kinds = {}, {}, set()
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read candidate file {path!r}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("param "):
            body = line[len("param "):]
            name, _, default = body.partition("=")
            name = name.strip()
            if not name.isidentifier():
                raise UsageError(f"{path}:{lineno}: bad parameter name {name!r}")
            declared[name] = float(default) if default.strip() else None
            continue
        lhs, eq, rhs = line.partition("=")
        lhs = lhs.strip()
        if not eq or len(lhs) < 2 or lhs[0] not in "wa" or not lhs[1:].isdigit():
            raise UsageError(f"{path}:{lineno}: expected 'w<i> = expr', 'a<i> = expr' or 'param name'")
        kinds.add(lhs[0])
        comps[int(lhs[1:])] = (rhs, lineno, raw.index("=") + 1)
    if len(kinds) != 1:
        raise UsageError(f"{path}: components must all be 'w' (vector) or all 'a' (1-form)")
    if sorted(comps) != list(range(1, n + 1)):
        raise UsageError(f"{path}: expected components 1..{n}, got {sorted(comps)}")
    unknown = set(params) - set(declared)
    if unknown:
        raise UnknownCandidate(f"{path}: undeclared parameters {sorted(unknown)}")
    values = {k: params.get(k, v) for k, v in declared.items()}
    missing = [k for k, v in values.items() if v is None]
    if missing:
        raise UsageError(f"{path}: no value for parameters {missing}")
    coords = coordinate_names(n)
    names = set(coords) | set(values)
    fns = []
    for i in range(1, n + 1):
        text, lineno, offset = comps[i]
        try:
            node = parse_expression(text, names)
        except ExprSyntaxError as exc:
            raise UsageError(f"{path}:{lineno}:{exc.col + offset}: {exc.message}") from None
        except UnknownIdentifier as exc:
            raise UsageError(f"{path}:{lineno}:{exc.col + offset}: unknown identifier {exc.name!r}") from None
        fns.append(compile_expression(node, coords, values))

    def w(q):
        return [f(q) for f in fns]

    kind = kinds.pop()
    label = os.path.splitext(os.path.basename(path))[0]
    sec = SectionField(n, w, _safe(w), kind="vector" if kind == "w" else "oneform", name=label)
    if kind == "w":
        return CandidateVectorField(sec, values, label), "vector", None
    return CandidateOneForm(sec, values, label), "oneform", None


def _candidate(desc, cfg: RunConfig, cand_p: dict):
    """``(candidate, kind, registered spec or None)``."""
    name = cfg.candidate
    if not name:
        raise UsageError("--candidate is required")
    if name in desc.candidates:
        spec = desc.candidates[name]
        return spec.make(cand_p), spec.kind, spec
    if os.path.isfile(name):
        return load_candidate_file(name, desc.n, cand_p)
    raise UnknownCandidate(f"system {desc.name!r} has no candidate {name!r}; known: {sorted(desc.candidates)}")


def _sample_grid(desc, cfg: RunConfig, spec, dim: int, count: int = 15):
    if cfg.grid:
        labels, grid = parse_grid(cfg.grid)
        if grid.dim != dim:
            raise UsageError(f"--grid has {grid.dim} axes; expected {dim}")
        return grid
    if spec is not None and spec.grid is not None:
        return spec.grid
    if len(desc.state_box) < dim:
        raise UsageError("this system has no default grid; pass --grid")
    return Grid.box(desc.state_box[:dim], count)


# ---------------------------------------------------------------------------
# verify


def run_verify(cfg: RunConfig):
    desc, cand_p = _system(cfg)
    X, kind, spec = _candidate(desc, cfg, cand_p)
    grid = _sample_grid(desc, cfg, spec, desc.n)
    if kind == "vector":
        report = verify(desc.dynamics, X, grid, cfg.tol, cfg.mode, cfg.diff_config)
    else:
        if desc.hamiltonian is None:
            raise UsageError(f"system {desc.name!r} has no Hamiltonian for a 1-form candidate")
        report = verify_h(desc.hamiltonian, X, grid, cfg.tol, cfg.mode, cfg.diff_config)
    code = EXIT_PASS if report.passed else EXIT_FAIL
    if cfg.format == "json":
        channels = {
            c: {"max": report.max_by_channel.get(c, 0.0), "argmax_point": report.argmax.get(c)}
            for c in report.channels
        }
        diagnostics = {
            c: {"max": v, "argmax_point": report.argmax.get(c)}
            for c, v in report.max_by_channel.items() if c not in report.channels
        }
        return code, render_json({
            "system": desc.name,
            "candidate": cfg.candidate,
            "params": dict(X.params),
            "mode": cfg.mode,
            "tol": cfg.tol,
            "diff": cfg.diff,
            "samples": len(report.samples),
            "channels": channels,
            "diagnostics": diagnostics,
            "failing_channels": report.failing_channels(),
            "verdict": report.verdict,
        })
    names = sorted({k for _, vals in report.samples for k in vals})
    header = coordinate_names(desc.n) + names + ["pass"]
    rows = []
    for point, vals in report.samples:
        ok = all(vals.get(c, 0.0) <= cfg.tol for c in report.channels if c in vals)
        rows.append(list(point) + [vals.get(k) for k in names] + [ok])
    for c, v in sorted(report.aggregates.items()):
        rows.append([f"aggregate:{c}"] + [None] * (desc.n - 1) + [v if k == c else None for k in names])
    return code, render_csv(header, rows)


# ---------------------------------------------------------------------------
# integrate


def _state_names(desc) -> list:
    names = desc.metadata.get("state_names")
    if names:
        return list(names)
    n = desc.n
    if desc.lagrangian is None and desc.symplectic is None and desc.flow is None:
        return coordinate_names(n, "qp")
    dim = len(desc.x0) if desc.x0 else 2 * n
    if dim == 2 * n:
        return coordinate_names(n, "qv")
    return [f"x{i + 1}" for i in range(dim)]


def _conserved_values(desc, states) -> dict:
    out = {}
    for name in sorted(desc.conserved):
        f = desc.conserved[name]
        out[name] = np.array([f(x) for x in states])
    return out


def run_integrate(cfg: RunConfig):
    desc, cand_p = _system(cfg)
    if cfg.candidate:
        return _run_projection(desc, cfg, cand_p)
    if cand_p:
        raise UsageError(f"unknown system parameters {sorted(cand_p)}")
    x0 = np.array(cfg.x0 if cfg.x0 is not None else desc.x0, dtype=float)
    names = _state_names(desc)
    if len(x0) != len(names):
        raise UsageError(f"--x0 needs {len(names)} components")
    field_fn, guard = desc.vector_field()
    traj = integrate(field_fn, x0, cfg.dt, cfg.steps, guard, desc.project)
    cons = _conserved_values(desc, traj.states)
    drift = {k: float(np.max(np.abs(v - v[0]))) for k, v in cons.items()}
    status = "complete" if traj.complete else f"aborted at step {traj.aborted_at}"
    code = EXIT_PASS if traj.complete else EXIT_NUMERIC
    if cfg.format == "json":
        return code, render_json({
            "system": desc.name,
            "dt": cfg.dt,
            "steps": cfg.steps,
            "x0": list(x0),
            "t_final": float(traj.times[-1]),
            "final_state": dict(zip(names, traj.states[-1])),
            "conserved_final": {k: v[-1] for k, v in cons.items()},
            "max_drift": drift,
            "status": status,
            "aborted_at": traj.aborted_at,
        })
    header = ["t"] + names + list(cons)
    rows = [[t] + list(x) + [cons[k][i] for k in cons] for i, (t, x) in enumerate(zip(traj.times, traj.states))]
    rows.append(["max_drift"] + [None] * len(names) + [drift[k] for k in cons])
    rows.append(["status", status])
    return code, render_csv(header, rows)


def _run_projection(desc, cfg: RunConfig, cand_p: dict):
    X, kind, spec = _candidate(desc, cfg, cand_p)
    n = desc.n
    if cfg.x0 is not None:
        q0 = np.array(cfg.x0, dtype=float)
    elif spec is not None and spec.grid is not None:
        pts = spec.grid.points(X.guard)
        if not pts:
            raise EmptyGrid("the candidate's grid has no guarded point")
        q0 = pts[len(pts) // 2]
    else:
        raise UsageError("--x0 (a base point) is required for this candidate")
    if len(q0) != n:
        raise UsageError(f"--x0 needs {n} base coordinates in projection mode")
    if kind == "vector":
        _, base, full = projection_distance(desc.dynamics, X, q0, cfg.dt, cfg.steps, cfg.diff_config, flow=desc.flow)
    else:
        if desc.hamiltonian is None:
            raise UsageError(f"system {desc.name!r} has no Hamiltonian for a 1-form candidate")
        _, base, full = projection_distance_h(desc.hamiltonian, X, q0, cfg.dt, cfg.steps, cfg.diff_config)
    k = min(len(base.states), len(full.states))
    lifted = np.array([np.concatenate([q, X(q)]) for q in base.states[:k]])
    dist = np.max(np.abs(lifted - full.states[:k]), axis=1)
    complete = base.complete and full.complete
    code = EXIT_PASS if complete else EXIT_NUMERIC
    sup = float(dist.max())
    status = "complete" if complete else f"aborted at step {k}"
    names = _state_names(desc) if kind == "vector" else coordinate_names(n, "qp")
    if cfg.format == "json":
        return code, render_json({
            "system": desc.name, "candidate": cfg.candidate, "params": dict(X.params),
            "dt": cfg.dt, "steps": cfg.steps, "q0": list(q0),
            "sup_distance": sup, "status": status,
            "final_lifted": dict(zip(names, lifted[-1])), "final_dynamics": dict(zip(names, full.states[k - 1])),
        })
    header = ["t"] + [f"lift_{s}" for s in names] + [f"flow_{s}" for s in names] + ["distance"]
    rows = [[base.times[i]] + list(lifted[i]) + list(full.states[i]) + [dist[i]] for i in range(k)]
    rows.append(["sup_distance"] + [None] * (2 * len(names)) + [sup])
    rows.append(["status", status])
    return code, render_csv(header, rows)


# ---------------------------------------------------------------------------
# brackets


def _bracket_system(desc):
    return desc.symplectic or desc.lagrangian or desc.hamiltonian


def _integral_family(desc, spec: Optional[str]) -> IntegralFamily:
    if not spec:
        raise UsageError("--integrals is required (a family name or comma-separated function names)")
    if spec in desc.integrals:
        return desc.integrals[spec]
    pool = dict(desc.conserved)
    pool.update(desc.metadata.get("functions", {}))
    names = [s.strip() for s in spec.split(",") if s.strip()]
    missing = [s for s in names if s not in pool]
    if missing:
        known = sorted(set(pool) | set(desc.integrals))
        raise UsageError(f"unknown integrals {missing}; known: {known}")
    return IntegralFamily(desc.n, tuple(pool[s] for s in names), tuple(names))


def run_brackets(cfg: RunConfig):
    desc, cand_p = _system(cfg)
    if cand_p:
        raise UsageError(f"unknown system parameters {sorted(cand_p)}")
    fam = _integral_family(desc, cfg.integrals)
    grid = _sample_grid(desc, cfg, None, 2 * desc.n, count=5)
    table = involution_matrix(fam, _bracket_system(desc), grid, cfg.diff_config)
    worst = float(table.max()) if table.size else 0.0
    involutive = worst <= cfg.tol
    code = EXIT_FAIL if cfg.require_involution and not involutive else EXIT_PASS
    labels = list(fam.labels)
    if cfg.format == "json":
        return code, render_json({
            "system": desc.name, "integrals": labels, "tol": cfg.tol,
            "table": table.tolist(), "max_offdiagonal": worst, "involutive": involutive,
        })
    rows = [[labels[i]] + list(table[i]) for i in range(len(labels))]
    return code, render_csv(["f"] + labels, rows)


# ---------------------------------------------------------------------------
# scan


def _coarse(grid: Grid, cap: int = 6) -> Grid:
    return Grid(tuple(Axis(a.lo, a.hi, min(a.count, cap)) for a in grid.axes))


def _branch_failures(fam, lam, seed, X, pts) -> int:
    """Sample points where the continued branch differs from a direct solve off the seed."""
    bad = 0
    for q in pts:
        start = seed(q) if callable(seed) else seed
        try:
            v = solve_leaf(fam, q, lam, start)
        except NumericalError:
            bad += 1
            continue
        if np.max(np.abs(v - X(q))) > 1e-6:
            bad += 1
    return bad


def run_scan(cfg: RunConfig):
    desc, cand_p = _system(cfg)
    if not cfg.candidate or cfg.candidate not in desc.candidates:
        raise UnknownCandidate(f"scan needs a registered candidate of {desc.name!r}; known: {sorted(desc.candidates)}")
    spec = desc.candidates[cfg.candidate]
    if spec.family is None:
        raise UsageError(f"candidate {spec.name!r} is not built from integrals; scannable: "
                         f"{sorted(k for k, s in desc.candidates.items() if s.family)}")
    if not cfg.grid:
        raise UsageError("--grid over the candidate's parameters is required")
    labels, lam_grid = parse_grid(cfg.grid)
    unknown = [s for s in labels if s not in spec.defaults]
    if unknown:
        raise UnknownCandidate(f"candidate {spec.name!r} has no parameters {unknown}; known: {sorted(spec.defaults)}")
    fam = desc.integrals[spec.family]
    samples = _coarse(spec.grid)
    cells = []
    for cell in lam_grid.points():
        p = dict(spec.defaults)
        p.update(cand_p)
        p.update({k: float(v) for k, v in zip(labels, cell)})
        row = {k: p[k] for k in labels}
        try:
            X = spec.make(p)
            gen = verify(desc.dynamics, X, samples, cfg.tol, "generalized", cfg.diff_config)
            std = verify(desc.dynamics, X, samples, cfg.tol, "standard", cfg.diff_config)
            pts = [np.array(s) for s, _ in gen.samples]
            lam = np.asarray(spec.lam(p), dtype=float)
            measure, _ = transversality_check(fam, [lam], pts, spec.seed(p))
            row.update(status="resolved", generalized=gen.verdict, standard=std.verdict, samples=len(pts),
                       transversality=measure, branch_failures=_branch_failures(fam, lam, spec.seed(p), X, pts))
        except (NumericalError, EmptyGrid) as exc:
            row.update(status="error", generalized=None, standard=None, samples=0, transversality=None,
                       branch_failures=None, error=type(exc).__name__)
        cells.append(row)
    code = EXIT_PASS if all(c["status"] == "resolved" for c in cells) else EXIT_NUMERIC
    if cfg.format == "json":
        return code, render_json({
            "system": desc.name, "candidate": spec.name, "family": list(fam.labels), "tol": cfg.tol,
            "axes": labels, "cells": cells,
        })
    cols = ["status", "generalized", "standard", "samples", "transversality", "branch_failures"]
    return code, render_csv(labels + cols, [[c[k] for k in labels] + [c.get(k) for k in cols] for c in cells])


# ---------------------------------------------------------------------------
# list-systems


def run_list(cfg: RunConfig):
    entries = []
    for name in system_names():
        desc = get_system(name)
        entries.append({
            "name": name,
            "description": system_description(name),
            "n": desc.n,
            "system_params": system_parameters(name),
            "candidates": {
                k: {"kind": s.kind, "expected": s.expected, "params": dict(s.defaults), "formulas": list(s.formulas),
                    "family": s.family}
                for k, s in sorted(desc.candidates.items())
            },
            "integrals": sorted(desc.integrals),
            "conserved": sorted(desc.conserved),
        })
    if cfg.format == "json":
        return EXIT_PASS, render_json({"systems": entries})
    rows = []
    for e in entries:
        if not e["candidates"]:
            rows.append([e["name"], e["n"], "", "", "", e["description"]])
        for k, c in e["candidates"].items():
            rows.append([e["name"], e["n"], k, c["kind"], c["expected"], e["description"]])
    return EXIT_PASS, render_csv(["system", "n", "candidate", "kind", "expected", "description"], rows)


COMMANDS = {
    "verify": run_verify,
    "integrate": run_integrate,
    "brackets": run_brackets,
    "scan": run_scan,
    "list-systems": run_list,
}


def main(argv=None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_PASS
    try:
        cfg = make_config(args)
        code, text = COMMANDS[cfg.command](cfg)
    except (UsageError, UnknownSystem, UnknownCandidate, ExpressionError, EmptyGrid) as exc:
        print(f"hjt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, ArithmeticError) as exc:
        print(f"hjt: numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except HJTError as exc:
        print(f"hjt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # the exit-code contract covers every run
        print(f"hjt: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(cfg, text)
    return code


if __name__ == "__main__":
    sys.exit(main())
