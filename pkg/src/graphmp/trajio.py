"""File formats, synthetic test-curve generation, and result export.

The native trajectory format is a comma-separated text file with a comment
header, chosen for diff-ability: lines starting with '#' carry key: value
metadata, data rows are t,x1..xD in seconds and meters.  Field, stats and
trace exports are plain CSV with documented column orders; all writers are
deterministic (17 significant digits, no clocks, no environment leakage).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .engine import FieldGrid, RolloutStats, TickRecord
from .kernels import KernelParams
from .model import DEFAULT_MAX_GAP, Demonstration, GraphModel


class TrajectoryFormatError(ValueError):
    """Malformed trajectory file; carries the 1-based offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_trajectory(demo: Demonstration, path, name: str = "trajectory") -> None:
    """Write a demonstration in the native format (round-trips at 1e-12)."""
    cols = ",".join(["t"] + [f"x{i + 1}" for i in range(demo.dim)])
    with open(path, "w") as fh:
        fh.write("# trajectory v1\n")
        fh.write(f"# name: {name}\n")
        fh.write(f"# dim: {demo.dim}\n")
        fh.write("# units: m,s\n")
        fh.write(f"# columns: {cols}\n")
        for t, row in zip(demo.times, demo.points):
            fh.write(",".join([_fmt(t)] + [_fmt(v) for v in row]) + "\n")


def read_trajectory(path, dt: float | None = None,
                    max_gap: float = DEFAULT_MAX_GAP) -> Demonstration:
    """Parse a trajectory file strictly; never crashes on malformed input.

    Files whose columns carry no time (bare coordinate CSV, or a columns
    header without 't') are accepted only when dt is given, in which case
    timestamps are synthesized as k * dt.  NaNs, ragged rows and time
    regressions are rejected with the offending line number.
    """
    header: dict[str, str] = {}
    rows: list[list[float]] = []
    row_lines: list[int] = []
    try:
        with open(path) as fh:
            raw = fh.readlines()
    except OSError as exc:
        raise TrajectoryFormatError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(raw, start=1):
        text = line.strip()
        if not text:
            continue
        if text.startswith("#"):
            body = text.lstrip("#").strip()
            if ":" in body:
                key, _, value = body.partition(":")
                header[key.strip().lower()] = value.strip()
            continue
        parts = text.split(",")
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise TrajectoryFormatError(f"non-numeric field in {parts}", lineno)
        if not all(np.isfinite(values)):
            raise TrajectoryFormatError("non-finite value", lineno)
        if rows and len(values) != len(rows[-1]):
            raise TrajectoryFormatError(
                f"row has {len(values)} fields, expected {len(rows[-1])}", lineno)
        rows.append(values)
        row_lines.append(lineno)
    if len(rows) < 2:
        raise TrajectoryFormatError(f"{len(rows)} data rows, need at least 2")

    columns = header.get("columns", "")
    names = [c.strip() for c in columns.split(",")] if columns else []
    has_time = names[0] == "t" if names else dt is None
    data = np.asarray(rows, dtype=float)
    if has_time:
        times, points = data[:, 0], data[:, 1:]
        if points.shape[1] < 1:
            raise TrajectoryFormatError("rows carry a time but no coordinates")
        drops = np.flatnonzero(np.diff(times) <= 0)
        if drops.size:
            raise TrajectoryFormatError("time does not increase", row_lines[drops[0] + 1])
    else:
        if dt is None:
            raise TrajectoryFormatError(
                "file has no time column; pass dt to synthesize timestamps")
        points = data
        times = np.arange(len(rows)) * float(dt)
    try:
        return Demonstration(points, times, max_gap=max_gap)
    except ValueError as exc:
        raise TrajectoryFormatError(str(exc)) from exc


# ---------------------------------------------------------------------------
# synthetic self-intersecting test curve
# ---------------------------------------------------------------------------

#: Angular trims of the open curve; unequal on purpose so the two crossing
#: passages are not symmetric in time and a mid-trajectory time belief has
#: a unique time-consistent branch.
_TRIM_START = 0.15
_TRIM_END = 0.9


def generate_letter_b(n_points: int = 200, center=(0.5, 0.5), width: float = 0.3,
                      height: float = 0.4, duration: float = 6.0) -> Demonstration:
    """Planar two-lobe stroke with exactly one transversal self-intersection.

    The stroke starts near the top, draws the upper lobe down through the
    waist, loops the lower lobe, and exits through the waist again toward
    its endpoint, crossing itself exactly once at the waist.  Sampling is
    arc-length uniform with uniformly spaced timestamps, so the drawn
    speed is constant.
    """
    if n_points < 50:
        raise ValueError(f"need at least 50 points for a faithful curve, got {n_points}")
    a, b = width / 2.0, height / 2.0
    theta = np.linspace(_TRIM_START, 2.0 * np.pi - _TRIM_END, 20 * n_points)
    dense = np.column_stack([
        center[0] + a * np.sin(2.0 * theta),
        center[1] + b * np.cos(theta),
    ])
    seg = np.linalg.norm(np.diff(dense, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    uniform = np.linspace(0.0, arc[-1], n_points)
    points = np.column_stack([
        np.interp(uniform, arc, dense[:, 0]),
        np.interp(uniform, arc, dense[:, 1]),
    ])
    times = np.linspace(0.0, duration, n_points)
    return Demonstration(points, times)


def letter_b_intersection(center=(0.5, 0.5)) -> np.ndarray:
    """Coordinates of the test curve's single self-intersection (its waist)."""
    return np.asarray(center, dtype=float)


# ---------------------------------------------------------------------------
# model save / load
# ---------------------------------------------------------------------------

def save_model(model: GraphModel, path) -> None:
    payload = {
        "format": "graphmp-model-v1",
        "dim": model.dim,
        "kernel": {
            "lambda_pos": model.params.lambda_pos,
            "lambda_time": model.params.lambda_time,
            "mode": model.params.mode.value,
        },
        "states": model.states.tolist(),
        "labels": model.labels.tolist(),
        "goal": model.goal.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_model(path) -> GraphModel:
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("format") != "graphmp-model-v1":
        raise ValueError(f"{path} is not a graphmp model file")
    params = KernelParams(
        lambda_pos=payload["kernel"]["lambda_pos"],
        lambda_time=payload["kernel"]["lambda_time"],
        mode=payload["kernel"]["mode"],
    )
    return GraphModel(
        states=np.asarray(payload["states"], dtype=float),
        labels=np.asarray(payload["labels"], dtype=float),
        params=params,
        goal=np.asarray(payload["goal"], dtype=float),
    )


# ---------------------------------------------------------------------------
# result export
# ---------------------------------------------------------------------------

def write_field(field: FieldGrid, path, meta: dict | None = None) -> None:
    """Field export: one row per grid point, x varying fastest."""
    with open(path, "w") as fh:
        fh.write("# field v1\n")
        for key, value in sorted((meta or {}).items()):
            fh.write(f"# {key}: {value}\n")
        fh.write("# columns: x1,x2,dx1,dx2,sigma,nearest\n")
        for p, d, s, m in zip(field.points, field.displacement, field.sigma, field.nearest):
            fh.write(",".join([_fmt(p[0]), _fmt(p[1]), _fmt(d[0]), _fmt(d[1]),
                               _fmt(s), str(int(m))]) + "\n")


def write_stats(stats: RolloutStats, path, meta: dict | None = None) -> None:
    """Stats export: per-step ensemble rows, then one terminal row per rollout.

    Columns are kind,index,c1..c2D; step rows carry the per-axis mean then
    the per-axis standard deviation, terminal rows carry the distance to
    the goal in c1 and leave the rest empty.
    """
    dim = stats.step_mean.shape[1]
    with open(path, "w") as fh:
        fh.write("# rollout-stats v1\n")
        for key, value in sorted((meta or {}).items()):
            fh.write(f"# {key}: {value}\n")
        cols = [f"mean{i + 1}" for i in range(dim)] + [f"std{i + 1}" for i in range(dim)]
        fh.write(f"# columns: kind,index,{','.join(cols)}\n")
        for k, (mean, std) in enumerate(zip(stats.step_mean, stats.step_std)):
            values = [_fmt(v) for v in mean] + [_fmt(v) for v in std]
            fh.write(",".join(["step", str(k)] + values) + "\n")
        pad = [""] * (2 * dim - 1)
        for r, dist in enumerate(stats.terminal_distances):
            fh.write(",".join(["terminal", str(r), _fmt(dist)] + pad) + "\n")


def read_stats_terminals(path) -> np.ndarray:
    """Terminal-distance column of a stats file (test and scripting helper)."""
    out = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("terminal,"):
                out.append(float(line.split(",")[2]))
    return np.asarray(out)


def write_trace(records: list[TickRecord], path, arm_names=("left", "right"),
                meta: dict | None = None) -> None:
    """Trace export: one row per arm per tick.

    Columns: t,arm,x*,v*,att*,sigma,k*,f*,t_b with D columns per starred
    group (k* is the regulated stiffness diagonal).
    """
    if not records:
        raise ValueError("empty trace")
    dim = records[0].arms[0].x.shape[0]
    star = lambda prefix: [f"{prefix}{i + 1}" for i in range(dim)]
    cols = ["t", "arm"] + star("x") + star("v") + star("att") + ["sigma"] \
        + star("k") + star("f") + ["t_b"]
    with open(path, "w") as fh:
        fh.write("# trace v1\n")
        for key, value in sorted((meta or {}).items()):
            fh.write(f"# {key}: {value}\n")
        fh.write(f"# columns: {','.join(cols)}\n")
        for rec in records:
            for idx, arm in enumerate(rec.arms):
                values = [_fmt(rec.time), arm_names[idx]]
                for group in (arm.x, arm.v, arm.attractor):
                    values += [_fmt(v) for v in group]
                values.append(_fmt(arm.sigma))
                values += [_fmt(v) for v in arm.k_diag]
                values += [_fmt(v) for v in arm.f_ext]
                values.append(_fmt(arm.t_b))
                fh.write(",".join(values) + "\n")


def read_trace(path):
    """Trace rows as (header columns, float matrix with arm as an index column)."""
    cols: list[str] = []
    rows = []
    with open(path) as fh:
        for line in fh:
            text = line.strip()
            if text.startswith("# columns:"):
                cols = text.split(":", 1)[1].strip().split(",")
                continue
            if not text or text.startswith("#"):
                continue
            parts = text.split(",")
            arm = 0.0 if parts[1] == "left" else 1.0
            rows.append([float(parts[0]), arm] + [float(p) for p in parts[2:]])
    return cols, np.asarray(rows)
