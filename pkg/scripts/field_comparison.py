#!/usr/bin/env python3
"""Vector-field comparison: dense GP baseline vs the chain policy.

Exports a position-only field for both regressors, plus a sweep of
pose-time fields conditioned on a series of time beliefs; arrows near the
curve's crossing flip branch as the time belief passes it.
"""

import argparse
import pathlib

import numpy as np

from graphmp import (
    KernelMode,
    KernelParams,
    fit_from_demonstration,
    fit_gp_baseline,
    generate_letter_b,
    vector_field,
)
from graphmp.trajio import write_field, write_trajectory


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results")
    parser.add_argument("--resolution", type=int, default=50)
    parser.add_argument("--margin", type=float, default=0.15)
    args = parser.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    demo = generate_letter_b(200)
    write_trajectory(demo, out / "curve.csv", name="test-curve")
    lo = demo.points.min(axis=0) - args.margin
    hi = demo.points.max(axis=0) + args.margin
    bounds = ((lo[0], hi[0]), (lo[1], hi[1]))

    pose_model = fit_from_demonstration(demo, KernelParams(mode=KernelMode.POSE_ONLY))
    field = vector_field(pose_model, bounds, args.resolution, mode="ggp")
    write_field(field, out / "field_chain_pose_only.csv", meta={"mode": "ggp"})
    print(f"chain pose-only field -> {out / 'field_chain_pose_only.csv'}")

    baseline = fit_gp_baseline(demo.points[:-1], demo.points[1:], length_scale=0.05)
    field = vector_field(baseline, bounds, args.resolution, mode="gp")
    write_field(field, out / "field_gp_baseline.csv", meta={"mode": "gp"})
    print(f"dense GP field        -> {out / 'field_gp_baseline.csv'}")

    model = fit_from_demonstration(demo)
    for fraction in (0.0, 0.25, 0.5, 0.75, 1.0):
        t_b = fraction * model.goal_time
        field = vector_field(model, bounds, args.resolution, t_b=t_b, mode="ggp")
        path = out / f"field_chain_tb_{fraction:.2f}.csv"
        write_field(field, path, meta={"mode": "ggp", "tb_fraction": fraction})
        print(f"pose-time field tb={fraction:.2f} -> {path}")


if __name__ == "__main__":
    main()
