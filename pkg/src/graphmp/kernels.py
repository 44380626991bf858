"""Correlation kernels for chain-structured trajectory regression.

Queries are matched against recorded nodes through a negative exponential
kernel, k = exp(-d / lambda), evaluated on position distance, timestamp
distance, or the product of both.  Saturating the resulting correlation
vector to one-hot at its argmax is what removes the usual covariance
inversion: the regression collapses onto the single most correlated node.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class KernelMode(str, Enum):
    """Which distance factors participate in the correlation."""

    POSE_ONLY = "pose-only"
    TIME_ONLY = "time-only"
    POSE_TIME = "pose-time"


@dataclass(frozen=True)
class KernelParams:
    """Length scales of the negative exponential kernel.

    lambda_pos is in meters, lambda_time in seconds.  mode is fixed at fit
    time and decides which factors enter the correlation.
    """

    lambda_pos: float = 0.05
    lambda_time: float = 0.05
    mode: KernelMode = KernelMode.POSE_TIME

    def __post_init__(self):
        if not (np.isfinite(self.lambda_pos) and self.lambda_pos > 0):
            raise ValueError(f"lambda_pos must be finite and positive, got {self.lambda_pos}")
        if not (np.isfinite(self.lambda_time) and self.lambda_time > 0):
            raise ValueError(f"lambda_time must be finite and positive, got {self.lambda_time}")
        object.__setattr__(self, "mode", KernelMode(self.mode))


def exp_kernel(distance, lam):
    """Correlation exp(-distance/lam), in (0, 1]; equals 1 iff distance is 0.

    Accepts a scalar or an array of nonnegative distances; strictly
    decreasing in distance.
    """
    distance = np.asarray(distance, dtype=float)
    if not np.all(np.isfinite(distance)) or np.any(distance < 0):
        raise ValueError("distance must be finite and nonnegative")
    if not np.isfinite(lam) or lam <= 0:
        raise ValueError(f"length scale must be finite and positive, got {lam}")
    out = np.exp(-distance / lam)
    return float(out) if out.ndim == 0 else out


def chain_correlation(node_positions, node_times, x, t_b, params: KernelParams):
    """Correlation of the query (x, t_b) with every node of a chain.

    Position distance is the Euclidean norm of the position block, time
    distance the absolute difference; in pose-time mode the two kernel
    factors multiply elementwise, computed as one fused exponential.
    Node arrays are trusted (validated at fit time); this sits on the
    per-tick hot path.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (node_positions.shape[1],):
        raise ValueError(
            f"query has dimension {x.shape[0] if x.ndim == 1 else x.shape}, "
            f"chain has dimension {node_positions.shape[1]}"
        )
    if not (np.all(np.isfinite(x)) and np.isfinite(t_b)):
        raise ValueError("query must be finite")
    if params.mode is KernelMode.TIME_ONLY:
        return np.exp(-np.abs(node_times - t_b) / params.lambda_time)
    diff = node_positions - x
    scaled = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    scaled /= params.lambda_pos
    if params.mode is KernelMode.POSE_ONLY:
        return np.exp(-scaled)
    scaled += np.abs(node_times - t_b) / params.lambda_time
    return np.exp(-scaled)


def nearest_node(correlations) -> int:
    """Index of the maximum correlation; ties break to the lowest index.

    This realizes the one-hot saturated kernel row.
    """
    c = np.asarray(correlations, dtype=float)
    if c.size == 0:
        raise ValueError("empty correlation vector")
    if not np.all(np.isfinite(c)):
        raise ValueError("correlations must be finite")
    return int(np.argmax(c))
