"""Cartesian impedance simulation with critical damping and safety saturation.

The controlled plant is a point mass tethered to an attractor by a
spring-damper.  Damping is derived from the principal stiffness so the
free response never overshoots.  Safety comes from three clamps, all
expressed in the principal frame of the stiffness matrix:

  * attractor displacement is bounded so the free-movement peak velocity
    stays below a velocity limit,
  * principal stiffness is bounded so the static force at the displacement
    bound stays below a force limit,
  * stiffness is scaled down continuously once model uncertainty crosses a
    threshold, handing control back to the human where the policy is
    uncertain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_SYM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Gains:
    """Stiffness with its principal decomposition and matching critical damping.

    stiffness = axes @ diag(principal) @ axes.T and
    damping = axes @ diag(2 * sqrt(principal)) @ axes.T, which is the
    critical damping design for a unit mass.
    """

    stiffness: np.ndarray            # (D, D), symmetric positive definite
    axes: np.ndarray                 # (D, D), orthogonal principal axes
    principal: np.ndarray            # (D,), positive principal stiffness
    damping: np.ndarray              # (D, D)

    def scaled(self, factor: float) -> "Gains":
        """Gains for stiffness scaled by factor, damping kept critical.

        Scaling stiffness by s scales critical damping by sqrt(s) in the
        unchanged principal frame, so no re-decomposition is needed.
        """
        if not np.isfinite(factor) or factor <= 0:
            raise ValueError(f"scale factor must be positive, got {factor}")
        return Gains(
            stiffness=factor * self.stiffness,
            axes=self.axes,
            principal=factor * self.principal,
            damping=np.sqrt(factor) * self.damping,
        )


def make_gains(stiffness) -> Gains:
    """Decompose a symmetric positive-definite stiffness and derive damping."""
    k = np.atleast_2d(np.asarray(stiffness, dtype=float))
    if k.shape[0] != k.shape[1]:
        raise ValueError(f"stiffness must be square, got shape {k.shape}")
    if np.max(np.abs(k - k.T)) > _SYM_TOL:
        raise ValueError("stiffness matrix is not symmetric")
    principal, axes = np.linalg.eigh(k)
    if np.any(principal <= 0):
        raise ValueError(f"stiffness must be positive definite, eigenvalues {principal}")
    damping = axes @ np.diag(2.0 * np.sqrt(principal)) @ axes.T
    return Gains(stiffness=k, axes=axes, principal=principal, damping=damping)


@dataclass(frozen=True, eq=False)
class SafetyLimits:
    """Per-axis velocity/force ceilings and the uncertainty threshold."""

    v_max: np.ndarray                # (D,) [m/s]
    f_max: np.ndarray                # (D,) [N]
    sigma_tr: float = 1.0 - float(np.exp(-1.0))

    def __post_init__(self):
        object.__setattr__(self, "v_max", np.asarray(self.v_max, dtype=float).ravel())
        object.__setattr__(self, "f_max", np.asarray(self.f_max, dtype=float).ravel())
        if np.any(self.v_max <= 0) or np.any(self.f_max <= 0):
            raise ValueError("velocity and force limits must be strictly positive")
        if not 0.0 < self.sigma_tr < 1.0:
            raise ValueError(f"sigma_tr must lie in (0, 1), got {self.sigma_tr}")


@dataclass(frozen=True, eq=False)
class ArmState:
    """Simulated end-effector: position, velocity and time belief."""

    x: np.ndarray
    v: np.ndarray
    t_b: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).ravel())
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float).ravel())
        if self.x.shape != self.v.shape:
            raise ValueError("position and velocity must have the same dimension")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.v))
                and np.isfinite(self.t_b)):
            raise ValueError("arm state must be finite")

    @property
    def dim(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True, eq=False)
class ControlCommand:
    """Saturated attractor displacement plus the regulated stiffness."""

    delta_x: np.ndarray
    stiffness: np.ndarray


@dataclass(frozen=True)
class SimConfig:
    """Point-mass plant parameters: constant inertia and integrator step."""

    mass: float = 1.0
    dt: float = 0.005

    def __post_init__(self):
        if not (np.isfinite(self.mass) and self.mass > 0):
            raise ValueError(f"mass must be positive, got {self.mass}")
        # explicit integration of a 600 N/m spring needs dt well under 0.02 s
        if not (0 < self.dt <= 0.02):
            raise ValueError(f"dt must lie in (0, 0.02] s, got {self.dt}")


def displacement_bound(gains: Gains, limits: SafetyLimits) -> np.ndarray:
    """Per-principal-axis displacement bound, 2 |R^T v_max| / sqrt(principal).

    Derived from the free-movement force balance: at this displacement the
    peak velocity of the critically damped response equals the limit.
    Components are taken in absolute value, limits being magnitudes.
    """
    rotated = np.abs(gains.axes.T @ limits.v_max)
    return 2.0 * rotated / np.sqrt(gains.principal)


def saturate_displacement(delta_x, gains: Gains, limits: SafetyLimits) -> np.ndarray:
    """Clamp an attractor displacement to the velocity-safe bound.

    The clamp is component-wise in the principal frame of the stiffness,
    the frame in which the bound is derived; for diagonal stiffness this
    is plain per-axis clamping.
    """
    delta_x = np.asarray(delta_x, dtype=float)
    if not np.all(np.isfinite(delta_x)):
        raise ValueError("displacement must be finite")
    bound = displacement_bound(gains, limits)
    rotated = gains.axes.T @ delta_x
    return gains.axes @ np.clip(rotated, -bound, bound)


def stiffness_upper_bound(limits: SafetyLimits, axes: np.ndarray) -> np.ndarray:
    """Per-principal-axis stiffness ceiling ((R^T F_max)_i / (2 (R^T v_max)_i))^2.

    At this stiffness the static force at the displacement bound equals the
    force limit, closing the velocity/force/stiffness triangle.
    """
    f_rot = np.abs(axes.T @ limits.f_max)
    v_rot = np.abs(axes.T @ limits.v_max)
    # a vanishing projection would send the bound to infinity
    if np.any(v_rot <= 1e-12 * max(1.0, float(np.max(np.abs(limits.v_max))))):
        raise ValueError("velocity limit projects to zero on a principal axis")
    return (f_rot / (2.0 * v_rot)) ** 2


def saturate_stiffness(gains: Gains, limits: SafetyLimits) -> Gains:
    """Clamp principal stiffness to the force-safe ceiling and rebuild."""
    bound = stiffness_upper_bound(limits, gains.axes)
    principal = np.minimum(gains.principal, bound)
    if np.array_equal(principal, gains.principal):
        return gains
    axes = gains.axes
    return Gains(
        stiffness=axes @ np.diag(principal) @ axes.T,
        axes=axes,
        principal=principal,
        damping=axes @ np.diag(2.0 * np.sqrt(principal)) @ axes.T,
    )


def regulation_scale(sigma: float, sigma_tr: float) -> float:
    """Stiffness scale (1 - sigma) / (1 - sigma_tr) above the threshold.

    Identity at or below the threshold, continuous across it, and tending
    to zero as sigma approaches 1.  sigma is clamped into [0, 1) first.
    """
    if not 0.0 < sigma_tr < 1.0:
        raise ValueError(f"sigma_tr must lie in (0, 1), got {sigma_tr}")
    sigma = min(max(float(sigma), 0.0), 1.0 - 1e-9)
    if sigma <= sigma_tr:
        return 1.0
    return (1.0 - sigma) / (1.0 - sigma_tr)


def regulate_stiffness(stiffness_sat, sigma: float, sigma_tr: float) -> np.ndarray:
    """Scale an (already saturated) stiffness matrix by the regulation factor."""
    return regulation_scale(sigma, sigma_tr) * np.asarray(stiffness_sat, dtype=float)


def step_dynamics(state: ArmState, attractor, k_hat, gains: Gains, f_ext,
                  cfg: SimConfig) -> ArmState:
    """One semi-implicit Euler step of the mass-spring-damper plant.

    acceleration = (k_hat (attractor - x) - damping v + f_ext) / mass, then
    v += a dt and x += v dt.  The command is expected to be saturated and
    regulated already, with gains.damping tracking k_hat so the response
    stays critically damped.
    """
    f_ext = np.asarray(f_ext, dtype=float)
    if not np.all(np.isfinite(f_ext)):
        raise ValueError("external force must be finite")
    accel = (np.asarray(k_hat) @ (np.asarray(attractor, dtype=float) - state.x)
             - gains.damping @ state.v + f_ext) / cfg.mass
    v = state.v + accel * cfg.dt
    x = state.x + v * cfg.dt
    return ArmState(x=x, v=v, t_b=state.t_b)
