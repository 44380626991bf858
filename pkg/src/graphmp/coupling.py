"""Mechanical coupling between two simulated arms.

A spring-damper acts on the relative pose error of the pair; the forces on
the two arms are an exact action-reaction pair, so coupling never injects
net momentum.  The relative error is clamped before multiplication, which
is the displacement-saturation analogue for the coupling channel, and the
coupling stiffness can be ceiling-clamped with the same rule as the
per-arm channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .impedance import (
    ArmState,
    SafetyLimits,
    SimConfig,
    make_gains,
    step_dynamics,
    stiffness_upper_bound,
)


@dataclass(frozen=True, eq=False)
class CouplingConfig:
    """Relative-pose spring-damper between the two end-effectors.

    rel_offset is the desired right-minus-left position difference; the
    relative error is clamped component-wise to rel_error_cap before the
    stiffness acts on it.
    """

    stiffness: np.ndarray        # (D, D) [N/m]
    damping: np.ndarray          # (D, D) [N s/m]
    rel_offset: np.ndarray       # (D,) [m]
    rel_error_cap: float = 0.05

    def __post_init__(self):
        k = np.atleast_2d(np.asarray(self.stiffness, dtype=float))
        d = np.atleast_2d(np.asarray(self.damping, dtype=float))
        offset = np.asarray(self.rel_offset, dtype=float).ravel()
        for name, mat in (("stiffness", k), ("damping", d)):
            if np.max(np.abs(mat - mat.T)) > 1e-9:
                raise ValueError(f"coupling {name} must be symmetric")
            if np.any(np.linalg.eigvalsh(mat) < -1e-9):
                raise ValueError(f"coupling {name} must be positive semi-definite")
        if not (np.isfinite(self.rel_error_cap) and self.rel_error_cap > 0):
            raise ValueError(f"rel_error_cap must be positive, got {self.rel_error_cap}")
        object.__setattr__(self, "stiffness", k)
        object.__setattr__(self, "damping", d)
        object.__setattr__(self, "rel_offset", offset)


def critical_coupling(stiffness, rel_offset, rel_error_cap: float = 0.05) -> CouplingConfig:
    """Coupling config with damping set by the critical rule 2 sqrt(K) per axis."""
    k = np.atleast_2d(np.asarray(stiffness, dtype=float))
    w, r = np.linalg.eigh(k)
    damping = r @ np.diag(2.0 * np.sqrt(np.maximum(w, 0.0))) @ r.T
    return CouplingConfig(k, damping, rel_offset, rel_error_cap)


def saturate_coupling(cfg: CouplingConfig, limits: SafetyLimits) -> CouplingConfig:
    """Clamp the coupling principal stiffness with the per-arm force rule."""
    w, r = np.linalg.eigh(cfg.stiffness)
    bound = stiffness_upper_bound(limits, r)
    w = np.minimum(w, bound)
    return CouplingConfig(
        stiffness=r @ np.diag(w) @ r.T,
        damping=cfg.damping,
        rel_offset=cfg.rel_offset,
        rel_error_cap=cfg.rel_error_cap,
    )


@dataclass(frozen=True, eq=False)
class DualArmState:
    left: ArmState
    right: ArmState

    def __post_init__(self):
        if self.left.dim != self.right.dim:
            raise ValueError("both arms must live in the same dimension")


def coupling_forces(dual: DualArmState, cfg: CouplingConfig):
    """Action-reaction coupling force pair (on left, on right).

    The clamped relative error feeds both sides with opposite signs, so
    the sum of the two forces is exactly zero whether or not the clamp is
    active.
    """
    if cfg.rel_offset.shape != dual.left.x.shape:
        raise ValueError("coupling offset dimension does not match the arms")
    err = dual.right.x - dual.left.x - cfg.rel_offset
    err = np.clip(err, -cfg.rel_error_cap, cfg.rel_error_cap)
    f_left = cfg.stiffness @ err + cfg.damping @ (dual.right.v - dual.left.v)
    return f_left, -f_left


def dual_step(dual: DualArmState, commands, cfg: CouplingConfig, sim: SimConfig,
              limits: SafetyLimits | None = None, external=None) -> DualArmState:
    """Step both arms, each driven by its command plus its coupling force.

    commands is the (left, right) pair of already saturated and regulated
    per-arm commands; critical damping for each arm is derived from its
    commanded stiffness.  When limits are given the coupling stiffness is
    ceiling-clamped by the same rule as the per-arm channel; the relative
    error clamp always applies.  external, if given, is an extra (left,
    right) force pair such as a human perturbation.
    """
    if limits is not None:
        cfg = saturate_coupling(cfg, limits)
    f_left, f_right = coupling_forces(dual, cfg)
    if external is not None:
        f_left = f_left + np.asarray(external[0], dtype=float)
        f_right = f_right + np.asarray(external[1], dtype=float)
    new_arms = []
    for arm, cmd, force in ((dual.left, commands[0], f_left),
                            (dual.right, commands[1], f_right)):
        gains = make_gains(cmd.stiffness)
        new_arms.append(step_dynamics(arm, arm.x + cmd.delta_x, cmd.stiffness,
                                      gains, force, sim))
    return DualArmState(left=new_arms[0], right=new_arms[1])
