"""Chain-graph trajectory model: fit, query, and incremental append.

A demonstration of n timestamped points becomes n-1 training pairs in
(position ⊕ timestamp) space, where the label of each state is simply the
next recorded state.  A query selects the most correlated state and
returns its stored successor, so inference is a linear scan with no
covariance factorization; uncertainty is one minus the winning
correlation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelMode, KernelParams, chain_correlation

#: Default upper bound on the distance between consecutive recorded points.
#: The chain encoding has no interpolation, so demonstrations must be
#: recorded densely enough that hopping node-to-node is a smooth motion.
DEFAULT_MAX_GAP = 0.1


@dataclass(frozen=True, eq=False)
class Demonstration:
    """Timestamped end-effector positions from one teaching pass.

    points: (n, D) positions [m]; times: (n,) strictly increasing [s].
    """

    points: np.ndarray
    times: np.ndarray
    max_gap: float = DEFAULT_MAX_GAP

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=float))
        times = np.asarray(self.times, dtype=float).ravel()
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "times", times)
        n = points.shape[0]
        if n < 2:
            raise ValueError(f"a demonstration needs at least 2 points, got {n}")
        if points.ndim != 2 or points.shape[1] < 1:
            raise ValueError(f"points must be an (n, D) matrix, got shape {points.shape}")
        if times.shape != (n,):
            raise ValueError(f"times shape {times.shape} does not match {n} points")
        if not np.all(np.isfinite(points)) or not np.all(np.isfinite(times)):
            raise ValueError("demonstration contains non-finite values")
        if np.any(np.diff(times) <= 0):
            bad = int(np.argmax(np.diff(times) <= 0)) + 1
            raise ValueError(f"times must be strictly increasing (violated at sample {bad})")
        if not (np.isfinite(self.max_gap) and self.max_gap > 0):
            raise ValueError(f"max_gap must be positive, got {self.max_gap}")
        gaps = np.linalg.norm(np.diff(points, axis=0), axis=1)
        if np.any(gaps > self.max_gap):
            bad = int(np.argmax(gaps > self.max_gap)) + 1
            raise ValueError(
                f"consecutive points {bad - 1} and {bad} are {gaps[bad - 1]:.4f} m apart, "
                f"more than the max gap of {self.max_gap} m; record more densely"
            )

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])


@dataclass(frozen=True, eq=False)
class QueryResult:
    """Outcome of one chain query."""

    goal_pos: np.ndarray
    goal_time: float
    sigma: float
    nearest_index: int


@dataclass(frozen=True, eq=False)
class GraphModel:
    """Fitted chain: states[i] maps to labels[i], both (position ⊕ time).

    Immutable after fit; queries are pure, and both fitting and querying
    touch only (n, D+1) arrays -- never an n x n matrix.
    """

    states: np.ndarray   # (m, D+1)
    labels: np.ndarray   # (m, D+1)
    params: KernelParams
    goal: np.ndarray     # (D+1,)

    def __post_init__(self):
        for name in ("states", "labels", "goal"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.states.shape != self.labels.shape:
            raise ValueError("states and labels must have identical shapes")
        if self.states.shape[0] < 1 or self.states.shape[1] < 2:
            raise ValueError(f"degenerate model of shape {self.states.shape}")
        if self.goal.shape != (self.states.shape[1],):
            raise ValueError("goal must be a single (position ⊕ time) row")

    @property
    def dim(self) -> int:
        return self.states.shape[1] - 1

    @property
    def n_nodes(self) -> int:
        return self.states.shape[0]

    @property
    def node_positions(self) -> np.ndarray:
        return self.states[:, :-1]

    @property
    def node_times(self) -> np.ndarray:
        return self.states[:, -1]

    @property
    def goal_position(self) -> np.ndarray:
        return self.goal[:-1]

    @property
    def goal_time(self) -> float:
        return float(self.goal[-1])


def _from_stream(stream: np.ndarray, params: KernelParams) -> GraphModel:
    """Shift a (position ⊕ time) stream into (state, successor) pairs."""
    return GraphModel(
        states=stream[:-1].copy(),
        labels=stream[1:].copy(),
        params=params,
        goal=stream[-1].copy(),
    )


def fit_from_demonstration(demo: Demonstration, params: KernelParams | None = None) -> GraphModel:
    """Fit a chain model from a demonstration.

    States are the first n-1 (position ⊕ timestamp) rows, labels the rows
    shifted forward by one, and the goal is the final recorded point.
    Cost is linear in n.
    """
    params = params or KernelParams()
    stream = np.column_stack([demo.points, demo.times])
    return _from_stream(stream, params)


def append_session(model: GraphModel, session: Demonstration) -> GraphModel:
    """Concatenate an executed/corrected session onto an existing chain.

    The new state stream is the old chain (including its goal) followed by
    the session samples, and labels are recomputed by shifting over the
    concatenated stream, so a single edge bridges the old goal to the
    session start.  Session clocks restart at zero; they are offset to
    continue monotonically after the previous goal time, with the session's
    own median sampling interval as the bridging gap.
    """
    if session.dim != model.dim:
        raise ValueError(
            f"session dimension {session.dim} does not match model dimension {model.dim}"
        )
    rel_times = session.times - session.times[0]
    gap = float(np.median(np.diff(session.times)))
    new_times = rel_times + model.goal_time + gap
    old_stream = np.vstack([model.states, model.goal[None, :]])
    new_stream = np.column_stack([session.points, new_times])
    return _from_stream(np.vstack([old_stream, new_stream]), model.params)


def joint_correlation(x, t_b: float, model: GraphModel, mode: KernelMode | None = None):
    """Correlation of the query (x, t_b) with every training state.

    mode overrides the model's kernel mode for ablations (e.g. evaluating
    a pose-time model with pose-only correlation).
    """
    params = model.params
    if mode is not None and mode != params.mode:
        params = KernelParams(params.lambda_pos, params.lambda_time, mode)
    return chain_correlation(model.node_positions, model.node_times, x, t_b, params)


def ggp_query(model: GraphModel, x, t_b: float = 0.0,
              mode: KernelMode | None = None) -> QueryResult:
    """Query the chain at (x, t_b).

    The predicted goal is the label of the single most correlated node and
    sigma is 1 minus that winning correlation, so no matrix inversion is
    involved and the cost is O(n * D).
    """
    corr = joint_correlation(x, t_b, model, mode)
    # argmax with lowest-index ties, as nearest_node; corr is finite by
    # construction here, so the public op's revalidation is skipped
    m = int(np.argmax(corr))
    return QueryResult(
        goal_pos=model.labels[m, :-1],
        goal_time=float(model.labels[m, -1]),
        sigma=1.0 - float(corr[m]),
        nearest_index=m,
    )
