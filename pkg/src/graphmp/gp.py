"""Dense Gaussian-process regression baseline (RBF kernel, zero prior mean).

Kept for contrast with the chain model: this is the classical posterior
with the cubic-cost covariance factorization that the chain encoding
avoids, and with the vanishing far-field mean that motivates it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve


@dataclass(frozen=True, eq=False)
class GpBaselineModel:
    """Fitted GP with a cached Cholesky factor of K + noise * I."""

    train_x: np.ndarray      # (m, d)
    train_y: np.ndarray      # (m, q)
    length_scale: float
    noise: float
    chol: tuple              # scipy cho_factor of the regularized covariance
    alpha: np.ndarray        # (K + noise I)^-1 Y, cached


def _rbf(a: np.ndarray, b: np.ndarray, length_scale: float) -> np.ndarray:
    d2 = np.sum(a**2, axis=1)[:, None] + np.sum(b**2, axis=1)[None, :] - 2.0 * a @ b.T
    return np.exp(-0.5 * np.maximum(d2, 0.0) / length_scale**2)


def fit_gp_baseline(train_x, train_y, length_scale: float = 0.05,
                    noise: float = 1e-6) -> GpBaselineModel:
    """Fit the baseline by factorizing the regularized covariance.

    noise is the jitter added to the diagonal (relative to the unit signal
    variance of the RBF kernel); raise it and refit if the factorization
    fails on near-duplicate inputs.
    """
    train_x = np.atleast_2d(np.asarray(train_x, dtype=float))
    train_y = np.atleast_2d(np.asarray(train_y, dtype=float))
    if train_y.shape[0] != train_x.shape[0]:
        raise ValueError("training inputs and labels must have the same row count")
    if length_scale <= 0 or noise < 0:
        raise ValueError("length_scale must be positive and noise nonnegative")
    cov = _rbf(train_x, train_x, length_scale)
    cov[np.diag_indices_from(cov)] += noise
    try:
        chol = cho_factor(cov, lower=True)
    except LinAlgError as exc:
        raise LinAlgError(
            f"covariance factorization failed at noise={noise}; increase the jitter"
        ) from exc
    alpha = cho_solve(chol, train_y)
    return GpBaselineModel(train_x, train_y, float(length_scale), float(noise), chol, alpha)


def fit_gp_from_demonstration(demo, length_scale: float = 0.05,
                              noise: float = 1e-6) -> GpBaselineModel:
    """Position-only baseline: each point regresses onto its successor."""
    return fit_gp_baseline(demo.points[:-1], demo.points[1:], length_scale, noise)


def gp_query_baseline(model: GpBaselineModel, x):
    """Posterior mean and scalar variance at x.

    mean = k*^T (K + noise I)^-1 Y and sigma = k(x,x) - k*^T (K + noise I)^-1 k*,
    both through the cached Cholesky factor.  Far from all data the mean
    decays to the zero prior while sigma approaches k(x,x) = 1.
    """
    x = np.asarray(x, dtype=float).reshape(1, -1)
    if x.shape[1] != model.train_x.shape[1]:
        raise ValueError(
            f"query dimension {x.shape[1]} does not match training dimension "
            f"{model.train_x.shape[1]}"
        )
    k_star = _rbf(model.train_x, x, model.length_scale)[:, 0]
    mean = k_star @ model.alpha
    sigma = 1.0 - float(k_star @ cho_solve(model.chol, k_star))
    return mean, max(sigma, 0.0)
