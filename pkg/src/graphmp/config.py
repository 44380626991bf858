"""Default parameter set and layered configuration loading.

Defaults mirror the reference setup: 0.05 m and 0.05 s kernel length
scales, 600 N/m Cartesian stiffness with the attractor displacement
saturated at 0.05 m, a 30 N force ceiling, the uncertainty threshold at
the one-length-scale value 1 - e^-1, and 800 N/m coupling stiffness with
the relative error capped at 0.05 m.  The velocity limit is derived from
the displacement cap so the triangle closes exactly.

Precedence: CLI flag > GRAPHMP_* environment variable > config file (JSON
with the same keys) > built-in default.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields

import numpy as np

from .impedance import Gains, SafetyLimits, SimConfig, make_gains
from .kernels import KernelParams

ENV_PREFIX = "GRAPHMP_"


@dataclass
class Defaults:
    lambda_pos: float = 0.05
    lambda_time: float = 0.05
    mode: str = "pose-time"
    max_gap: float = 0.1
    stiffness: float = 600.0
    displacement_cap: float = 0.05
    f_max: float = 30.0
    # v_max derived from the cap: bound = 2 v / sqrt(K) = displacement_cap
    v_max: float = 0.05 * np.sqrt(600.0) / 2.0
    sigma_tr: float = 1.0 - float(np.exp(-1.0))
    coupling_stiffness: float = 800.0
    rel_error_cap: float = 0.05
    mass: float = 1.0
    dt: float = 0.005
    drag_stiffness: float = 1000.0

    def kernel_params(self) -> KernelParams:
        return KernelParams(self.lambda_pos, self.lambda_time, self.mode)

    def gains(self, dim: int) -> Gains:
        return make_gains(self.stiffness * np.eye(dim))

    def limits(self, dim: int) -> SafetyLimits:
        return SafetyLimits(v_max=np.full(dim, self.v_max),
                            f_max=np.full(dim, self.f_max),
                            sigma_tr=self.sigma_tr)

    def sim(self) -> SimConfig:
        return SimConfig(mass=self.mass, dt=self.dt)


def load_defaults(config_path=None, env=None) -> Defaults:
    """Build defaults from the built-ins, a JSON config file, then env vars."""
    values = {}
    if config_path is not None:
        with open(config_path) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError(f"config file {config_path} must hold a JSON object")
        values.update(loaded)
    env = os.environ if env is None else env
    for f in fields(Defaults):
        raw = env.get(ENV_PREFIX + f.name.upper())
        if raw is not None:
            values[f.name] = raw
    known = {f.name: f.type for f in fields(Defaults)}
    unknown = set(values) - set(known)
    if unknown:
        raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
    coerced = {}
    for key, raw in values.items():
        coerced[key] = str(raw) if key == "mode" else float(raw)
    return Defaults(**coerced)
