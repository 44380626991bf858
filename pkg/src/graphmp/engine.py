"""Session orchestration: teaching, execution ticks, rollouts, vector fields.

This is where the chain model meets the impedance plant.  Each execution
tick queries the chain at the arm's current position and time belief,
advances the time belief to the matched label time, builds a saturated and
uncertainty-regulated command, and steps the dynamics.  Rollout ensembles
reproduce the kinematic attractor-plus-noise ablation, and vector fields
sample the learned policy over a planar grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .coupling import CouplingConfig, DualArmState, coupling_forces
from .gp import GpBaselineModel, gp_query_baseline
from .impedance import (
    ArmState,
    ControlCommand,
    Gains,
    SafetyLimits,
    SimConfig,
    regulation_scale,
    saturate_displacement,
    saturate_stiffness,
    step_dynamics,
)
from .kernels import KernelMode
from .model import Demonstration, GraphModel, append_session, ggp_query


class Phase(Enum):
    IDLE = "idle"
    PASSIVE_TEACHING = "passive_teaching"
    ACTIVE_TEACHING = "active_teaching"
    EXECUTING = "executing"


#: Legal phase transitions; teaching and execution always bounce off idle.
_TRANSITIONS = {
    Phase.IDLE: {Phase.PASSIVE_TEACHING, Phase.ACTIVE_TEACHING, Phase.EXECUTING},
    Phase.PASSIVE_TEACHING: {Phase.IDLE},
    Phase.ACTIVE_TEACHING: {Phase.IDLE},
    Phase.EXECUTING: {Phase.IDLE},
}


def check_transition(current: Phase, target: Phase, has_model: bool) -> None:
    """Validate a phase change; correction and execution need a fitted model."""
    if target not in _TRANSITIONS[current]:
        raise ValueError(f"illegal phase transition {current.value} -> {target.value}")
    if target in (Phase.ACTIVE_TEACHING, Phase.EXECUTING) and not has_model:
        raise ValueError(f"phase {target.value} requires a fitted model")


@dataclass(frozen=True, eq=False)
class ArmTick:
    """Per-arm slice of one simulation tick, for traces and broadcasting."""

    x: np.ndarray
    v: np.ndarray
    attractor: np.ndarray
    sigma: float
    k_diag: np.ndarray
    f_ext: np.ndarray
    t_b: float


@dataclass(frozen=True, eq=False)
class TickRecord:
    time: float
    arms: tuple


@dataclass(frozen=True, eq=False)
class RolloutStats:
    """Ensemble statistics over identically long kinematic rollouts."""

    step_mean: np.ndarray          # (steps + 1, D)
    step_std: np.ndarray           # (steps + 1, D)
    terminal_distances: np.ndarray  # (n_rollouts,)


def run_passive_teaching(point_stream, max_gap: float | None = None) -> Demonstration:
    """Record a (position, timestamp) stream into a demonstration.

    The recording happens with zero stiffness and damping, i.e. the stream
    is taken verbatim; time regressions and sparse sampling are rejected by
    the demonstration invariants.
    """
    points, times = [], []
    for x, t in point_stream:
        points.append(np.asarray(x, dtype=float))
        times.append(float(t))
    if len(points) < 2:
        raise ValueError(f"demonstration stream yielded {len(points)} points, need at least 2")
    kwargs = {} if max_gap is None else {"max_gap": max_gap}
    return Demonstration(np.vstack(points), np.asarray(times), **kwargs)


def execute_tick(model: GraphModel, arm: ArmState, gains: Gains,
                 limits: SafetyLimits, sim: SimConfig, f_ext=None,
                 now: float = 0.0):
    """One closed-loop tick: query, regulate, saturate, step.

    Returns the new arm state (time belief advanced to the matched label
    time), the command that was sent, and a trace record.  gains are the
    nominal gains; force saturation and uncertainty regulation are applied
    here, with damping tracking the regulated stiffness.
    """
    if f_ext is None:
        f_ext = np.zeros(arm.dim)
    q = ggp_query(model, arm.x, arm.t_b)
    sat = saturate_stiffness(gains, limits)
    scale = regulation_scale(q.sigma, limits.sigma_tr)
    delta = saturate_displacement(q.goal_pos - arm.x, sat, limits)
    hat = sat.scaled(scale)
    cmd = ControlCommand(delta_x=delta, stiffness=hat.stiffness)
    stepped = ArmState(x=arm.x, v=arm.v, t_b=q.goal_time)
    new_arm = step_dynamics(stepped, arm.x + delta, hat.stiffness, hat, f_ext, sim)
    record = TickRecord(time=now, arms=(ArmTick(
        x=new_arm.x, v=new_arm.v, attractor=arm.x + delta, sigma=q.sigma,
        k_diag=np.diag(hat.stiffness).copy(), f_ext=np.asarray(f_ext, dtype=float),
        t_b=new_arm.t_b),))
    return new_arm, cmd, record


def execute_dual_tick(model_left: GraphModel, model_right: GraphModel,
                      dual: DualArmState, gains: Gains, limits: SafetyLimits,
                      sim: SimConfig, coupling: CouplingConfig | None = None,
                      f_ext_left=None, f_ext_right=None, now: float = 0.0):
    """Tick both arms with the coupling force folded into each arm's input.

    The coupling pair is computed once from the pre-step states so the
    action-reaction identity holds exactly within the tick.
    """
    dim = dual.left.dim
    f_left = np.zeros(dim) if f_ext_left is None else np.asarray(f_ext_left, dtype=float)
    f_right = np.zeros(dim) if f_ext_right is None else np.asarray(f_ext_right, dtype=float)
    if coupling is not None:
        c_left, c_right = coupling_forces(dual, coupling)
        f_left = f_left + c_left
        f_right = f_right + c_right
    new_left, cmd_left, rec_left = execute_tick(
        model_left, dual.left, gains, limits, sim, f_left, now)
    new_right, cmd_right, rec_right = execute_tick(
        model_right, dual.right, gains, limits, sim, f_right, now)
    record = TickRecord(time=now, arms=(rec_left.arms[0], rec_right.arms[0]))
    return DualArmState(new_left, new_right), (cmd_left, cmd_right), record


def run_execution(model: GraphModel, arm: ArmState, gains: Gains,
                  limits: SafetyLimits, sim: SimConfig, max_ticks: int,
                  force_source=None, stop_at_goal: bool = True):
    """Run execution ticks until the stop rule or the tick budget.

    The stop rule is: within 2 lambda_pos of the goal position and within
    lambda_time of the goal time.  force_source, if given, is called as
    force_source(t, arm) each tick and returns an external force.
    """
    trace = []
    t = 0.0
    for _ in range(max_ticks):
        f = None if force_source is None else force_source(t, arm)
        arm, _, record = execute_tick(model, arm, gains, limits, sim, f, now=t)
        trace.append(record)
        t += sim.dt
        if stop_at_goal and _at_goal(model, arm):
            break
    return arm, trace


def _at_goal(model: GraphModel, arm: ArmState) -> bool:
    near = np.linalg.norm(arm.x - model.goal_position) < 2.0 * model.params.lambda_pos
    synced = abs(arm.t_b - model.goal_time) < model.params.lambda_time
    return bool(near and synced)


def run_active_teaching(model: GraphModel, arm: ArmState, human_force_source,
                        duration: float, gains: Gains, limits: SafetyLimits,
                        sim: SimConfig):
    """Execute under human forces, then append the visited stream and refit.

    The positions actually visited (corrections included) become a new
    session demonstration with clocks restarting at zero; the returned
    model is the original chain with that session concatenated.
    """
    steps = int(round(duration / sim.dt))
    if steps < 2:
        raise ValueError(f"session of {steps} ticks is too short to refit from")
    trace = []
    xs = np.empty((steps, arm.dim))
    ts = np.empty(steps)
    t = 0.0
    for k in range(steps):
        f = human_force_source(t, arm)
        arm, _, record = execute_tick(model, arm, gains, limits, sim, f, now=t)
        trace.append(record)
        t += sim.dt
        xs[k] = arm.x
        ts[k] = t
    session = Demonstration(xs, ts)
    return append_session(model, session), arm, trace


def rollout_ensemble(model: GraphModel, start, n_rollouts: int, n_steps: int,
                     noise_std: float, seed: int,
                     use_time_belief: bool = True) -> RolloutStats:
    """Kinematic attractor-plus-noise rollouts from a common start.

    Each step moves straight to the queried attractor plus isotropic
    Gaussian noise; with the flag off the time belief stays frozen at zero
    and the correlation is evaluated pose-only.  Rollouts are seeded
    independently from one root seed, so results are reproducible and
    order-independent.
    """
    if n_rollouts < 1 or n_steps < 1:
        raise ValueError("n_rollouts and n_steps must be at least 1")
    start = np.asarray(start, dtype=float)
    dim = model.dim
    mode = None if use_time_belief else KernelMode.POSE_ONLY
    paths = np.empty((n_rollouts, n_steps + 1, dim))
    seeds = np.random.SeedSequence(seed).spawn(n_rollouts)
    for r in range(n_rollouts):
        rng = np.random.default_rng(seeds[r])
        x = start.copy()
        t_b = 0.0
        paths[r, 0] = x
        for k in range(1, n_steps + 1):
            q = ggp_query(model, x, t_b, mode=mode)
            x = q.goal_pos + rng.normal(0.0, noise_std, dim) if noise_std > 0 \
                else q.goal_pos.copy()
            if use_time_belief:
                t_b = q.goal_time
            paths[r, k] = x
    terminal = np.linalg.norm(paths[:, -1] - model.goal_position, axis=1)
    return RolloutStats(
        step_mean=paths.mean(axis=0),
        step_std=paths.std(axis=0),
        terminal_distances=terminal,
    )


@dataclass(frozen=True, eq=False)
class FieldGrid:
    """Planar policy field: displacement toward the queried attractor."""

    points: np.ndarray        # (G, 2)
    displacement: np.ndarray  # (G, 2)
    sigma: np.ndarray         # (G,)
    nearest: np.ndarray       # (G,) node index, -1 for the dense baseline


def vector_field(model, bounds, resolution: int, t_b: float = 0.0,
                 mode: str = "ggp") -> FieldGrid:
    """Evaluate the policy on a regular grid (plot harness, 2-D only).

    mode "ggp" expects a GraphModel and conditions the query on t_b; mode
    "gp" expects a GpBaselineModel (position-only).  Grid ordering is row
    major with x varying fastest.
    """
    (x0, x1), (y0, y1) = bounds
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate field bounds {bounds}")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    xs = np.linspace(x0, x1, resolution)
    ys = np.linspace(y0, y1, resolution)
    gx, gy = np.meshgrid(xs, ys)
    points = np.column_stack([gx.ravel(), gy.ravel()])
    disp = np.empty_like(points)
    sigma = np.empty(points.shape[0])
    nearest = np.full(points.shape[0], -1, dtype=int)
    if mode == "ggp":
        if not isinstance(model, GraphModel):
            raise TypeError("mode 'ggp' requires a GraphModel")
        if model.dim != 2:
            raise ValueError("vector fields are a planar harness; model must be 2-D")
        for i, p in enumerate(points):
            q = ggp_query(model, p, t_b)
            disp[i] = q.goal_pos - p
            sigma[i] = q.sigma
            nearest[i] = q.nearest_index
    elif mode == "gp":
        if not isinstance(model, GpBaselineModel):
            raise TypeError("mode 'gp' requires a GpBaselineModel")
        if model.train_x.shape[1] != 2:
            raise ValueError("vector fields are a planar harness; model must be 2-D")
        for i, p in enumerate(points):
            mean, s = gp_query_baseline(model, p)
            disp[i] = mean - p
            sigma[i] = s
    else:
        raise ValueError(f"unknown field mode {mode!r}")
    return FieldGrid(points=points, displacement=disp, sigma=sigma, nearest=nearest)
