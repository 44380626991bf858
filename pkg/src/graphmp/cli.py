"""Batch command-line entry points.

Subcommands cover the desk-scale reproductions: fit a model from a
trajectory file, execute it dynamically (optionally under a scripted
perturbation), run rollout ensembles with or without the time belief,
export policy vector fields, run coupled two-arm executions, and serve
the live teaching session endpoint.  Every command is deterministic for
fixed flags and seed; outputs are data files only.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import engine, trajio
from .config import Defaults, load_defaults
from .coupling import DualArmState
from .gp import fit_gp_baseline
from .impedance import ArmState
from .model import fit_from_demonstration


def _parse_vector(text: str, dim: int | None = None) -> np.ndarray:
    parts = [float(p) for p in text.split(",")]
    if dim is not None and len(parts) != dim:
        raise ValueError(f"expected {dim} comma-separated values, got {len(parts)}")
    return np.asarray(parts)


def load_perturbations(path, dim: int):
    """Scripted external forces: CSV rows t_start,t_end,f1..fD[,arm].

    The optional trailing arm field is 'left' or 'right' (default left).
    Returns a callable force(t, arm_name) summing all active rows.
    """
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = [p.strip() for p in text.split(",")]
            arm = "left"
            if len(parts) == dim + 3:
                arm = parts[-1]
                parts = parts[:-1]
            if len(parts) != dim + 2:
                raise ValueError(
                    f"{path} line {lineno}: expected t_start,t_end,{dim} force "
                    f"components and an optional arm")
            if arm not in ("left", "right"):
                raise ValueError(f"{path} line {lineno}: unknown arm {arm!r}")
            start, end = float(parts[0]), float(parts[1])
            force = np.asarray([float(p) for p in parts[2:]])
            rows.append((start, end, force, arm))

    def force_at(t: float, arm_name: str = "left") -> np.ndarray:
        total = np.zeros(dim)
        for start, end, force, arm in rows:
            if arm == arm_name and start <= t < end:
                total += force
        return total

    return force_at


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with default overrides")


def _defaults(args) -> Defaults:
    return load_defaults(getattr(args, "config", None))


def cmd_fit(args) -> int:
    cfg = _defaults(args)
    demo = trajio.read_trajectory(args.trajectory, dt=args.dt, max_gap=cfg.max_gap)
    params = cfg.kernel_params()
    if args.lambda_pos is not None or args.lambda_time is not None or args.mode is not None:
        params = type(params)(
            args.lambda_pos if args.lambda_pos is not None else params.lambda_pos,
            args.lambda_time if args.lambda_time is not None else params.lambda_time,
            args.mode if args.mode is not None else params.mode,
        )
    model = fit_from_demonstration(demo, params)
    trajio.save_model(model, args.out)
    print(f"fitted {model.n_nodes} nodes (dim {model.dim}) -> {args.out}")
    return 0


def cmd_exec(args) -> int:
    cfg = _defaults(args)
    model = trajio.load_model(args.model)
    start = _parse_vector(args.start, model.dim) if args.start \
        else model.states[0, :-1].copy()
    arm = ArmState(x=start, v=np.zeros(model.dim), t_b=0.0)
    force = None
    if args.perturb:
        script = load_perturbations(args.perturb, model.dim)
        force = lambda t, a: script(t, "left")
    _, trace = engine.run_execution(
        model, arm, cfg.gains(model.dim), cfg.limits(model.dim), cfg.sim(),
        max_ticks=args.ticks, force_source=force)
    trajio.write_trace(trace, args.out, meta={"model": args.model, "ticks": len(trace)})
    print(f"executed {len(trace)} ticks -> {args.out}")
    return 0


def cmd_rollout(args) -> int:
    cfg = _defaults(args)
    model = trajio.load_model(args.model)
    start = _parse_vector(args.start, model.dim) if args.start \
        else model.states[0, :-1].copy()
    use_tb = args.time_belief == "on"
    stats = engine.rollout_ensemble(model, start, args.n, args.steps, args.noise,
                                    args.seed, use_time_belief=use_tb)
    trajio.write_stats(stats, args.out, meta={
        "n": args.n, "steps": args.steps, "noise": args.noise,
        "seed": args.seed, "time_belief": args.time_belief,
    })
    print(f"{args.n} rollouts of {args.steps} steps -> {args.out}")
    return 0


def cmd_field(args) -> int:
    cfg = _defaults(args)
    model = trajio.load_model(args.model)
    if args.bounds:
        b = _parse_vector(args.bounds, 4)
        bounds = ((b[0], b[1]), (b[2], b[3]))
    else:
        lo = model.node_positions.min(axis=0) - args.margin
        hi = model.node_positions.max(axis=0) + args.margin
        bounds = ((lo[0], hi[0]), (lo[1], hi[1]))
    t_b = args.tb * model.goal_time  # --tb is the fraction of total time
    if args.mode == "gp":
        baseline = fit_gp_baseline(model.states[:, :-1], model.labels[:, :-1],
                                   length_scale=args.gp_length_scale)
        field = engine.vector_field(baseline, bounds, args.resolution, mode="gp")
    else:
        field = engine.vector_field(model, bounds, args.resolution, t_b=t_b, mode="ggp")
    trajio.write_field(field, args.out, meta={
        "mode": args.mode, "tb": args.tb, "resolution": args.resolution,
    })
    print(f"{args.resolution}x{args.resolution} {args.mode} field -> {args.out}")
    return 0


def cmd_bimanual(args) -> int:
    cfg = _defaults(args)
    model_l = trajio.load_model(args.model_left)
    model_r = trajio.load_model(args.model_right)
    if model_l.dim != model_r.dim:
        raise ValueError("the two models must share a dimension")
    dim = model_l.dim
    rel_offset = _parse_vector(args.rel_offset, dim) if args.rel_offset \
        else model_r.states[0, :-1] - model_l.states[0, :-1]
    coupling = None
    if args.coupling_stiffness > 0:
        from .coupling import critical_coupling, saturate_coupling
        coupling = critical_coupling(args.coupling_stiffness * np.eye(dim),
                                     rel_offset, args.cap)
        coupling = saturate_coupling(coupling, cfg.limits(dim))
    script = load_perturbations(args.perturb, dim) if args.perturb else None
    dual = DualArmState(
        left=ArmState(x=model_l.states[0, :-1].copy(), v=np.zeros(dim)),
        right=ArmState(x=model_r.states[0, :-1].copy(), v=np.zeros(dim)),
    )
    gains, limits, sim = cfg.gains(dim), cfg.limits(dim), cfg.sim()
    trace = []
    t = 0.0
    for _ in range(args.ticks):
        f_l = script(t, "left") if script else None
        f_r = script(t, "right") if script else None
        dual, _, record = engine.execute_dual_tick(
            model_l, model_r, dual, gains, limits, sim, coupling, f_l, f_r, now=t)
        trace.append(record)
        t += sim.dt
    trajio.write_trace(trace, args.out, meta={
        "coupling_stiffness": args.coupling_stiffness, "ticks": args.ticks,
    })
    print(f"bimanual execution of {args.ticks} ticks -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    cfg = _defaults(args)
    app = create_app(ServiceConfig(sim_rate=args.rate, broadcast_rate=args.broadcast_rate,
                                   defaults=cfg))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphmp",
        description="Graph-encoded movement primitives: fit, execute, analyze, serve.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a chain model from a trajectory file")
    p.add_argument("trajectory")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--lambda-pos", type=float, default=None)
    p.add_argument("--lambda-time", type=float, default=None)
    p.add_argument("--mode", choices=["pose-only", "time-only", "pose-time"], default=None)
    p.add_argument("--dt", type=float, default=None,
                   help="synthesize timestamps at this step for time-less files")
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("exec", help="dynamic execution against a fitted model")
    p.add_argument("model")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--start", default=None, help="comma-separated start position")
    p.add_argument("--ticks", type=int, default=20000)
    p.add_argument("--perturb", default=None, help="perturbation script file")
    _add_common(p)
    p.set_defaults(func=cmd_exec)

    p = sub.add_parser("rollout", help="kinematic rollout ensemble")
    p.add_argument("model")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-belief", choices=["on", "off"], default="on")
    p.add_argument("--start", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_rollout)

    p = sub.add_parser("field", help="evaluate the policy vector field on a grid")
    p.add_argument("model")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--tb", type=float, default=0.0,
                   help="time belief as a fraction of the total trajectory time")
    p.add_argument("--mode", choices=["ggp", "gp"], default="ggp")
    p.add_argument("--bounds", default=None, help="x0,x1,y0,y1 (default: data bounds)")
    p.add_argument("--margin", type=float, default=0.1)
    p.add_argument("--resolution", type=int, default=50)
    p.add_argument("--gp-length-scale", type=float, default=0.05)
    _add_common(p)
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("bimanual", help="coupled two-arm execution")
    p.add_argument("model_left")
    p.add_argument("model_right")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--ticks", type=int, default=2000)
    p.add_argument("--coupling-stiffness", type=float, default=800.0)
    p.add_argument("--rel-offset", default=None,
                   help="desired right-minus-left offset (default: from model starts)")
    p.add_argument("--cap", type=float, default=0.05, help="relative error cap [m]")
    p.add_argument("--perturb", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_bimanual)

    p = sub.add_parser("serve", help="run the live teaching session server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8732)
    p.add_argument("--rate", type=float, default=200.0, help="simulation rate [Hz]")
    p.add_argument("--broadcast-rate", type=float, default=30.0)
    _add_common(p)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
