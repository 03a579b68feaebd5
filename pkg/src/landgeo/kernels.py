"""Scalar reproducing kernels and the landmark Gram matrix.

The kernel fixes the whole geometry: its Gram matrix on a configuration is
the inverse metric tensor, so everything downstream (geodesics, curvature,
matching) reduces to evaluations of K, grad K, d^2 K and solves against the
Gram factorization.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .errors import NearSingular, ValidationError
from .types import Landmarks

# Cholesky pivots (squared diagonal of the factor) below PIVOT_FLOOR * N mean
# the configuration is too close to coincident for the kernel width.
PIVOT_FLOOR = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    """Gaussian kernel K(x) = exp(-|x|^2 / sigma).

    ``sigma`` is a squared length: sqrt(sigma) is the interaction range.
    The family tag exists so Matern-type kernels can slot in later.
    """

    sigma: float
    family: str = "gaussian"

    def __post_init__(self):
        if self.family != "gaussian":
            raise ValidationError(f"unsupported kernel family {self.family!r}")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValidationError("kernel sigma must be positive and finite")


def kernel_eval(spec: KernelSpec, x) -> float:
    """K(x) = exp(-|x|^2 / sigma), in (0, 1]."""
    x = np.asarray(x, dtype=float)
    return float(np.exp(-np.dot(x, x) / spec.sigma))


def kernel_grad(spec: KernelSpec, x) -> np.ndarray:
    """grad K(x) = -(2/sigma) x K(x)."""
    x = np.asarray(x, dtype=float)
    return -(2.0 / spec.sigma) * x * kernel_eval(spec, x)


def kernel_hess(spec: KernelSpec, x, u, v) -> float:
    """Second derivative d^2K(x)(u, v), symmetric bilinear in (u, v)."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    s = spec.sigma
    return kernel_eval(spec, x) * (
        (4.0 / s**2) * np.dot(x, u) * np.dot(x, v) - (2.0 / s) * np.dot(u, v)
    )


def pair_differences(points: np.ndarray) -> np.ndarray:
    """All pairwise differences points[i] - points[j], shape (N, N, n)."""
    return points[:, None, :] - points[None, :, :]


def gram_entries(spec: KernelSpec, points: np.ndarray) -> np.ndarray:
    """The raw Gram matrix K_ij = K(q_i - q_j) for an (N, n) point array."""
    diff = pair_differences(points)
    return np.exp(-(diff * diff).sum(-1) / spec.sigma)


def grad_entries(spec: KernelSpec, points: np.ndarray) -> np.ndarray:
    """Pairwise kernel gradients G[i, j] = grad K(q_i - q_j), shape (N, N, n)."""
    diff = pair_differences(points)
    km = np.exp(-(diff * diff).sum(-1) / spec.sigma)
    return -(2.0 / spec.sigma) * diff * km[:, :, None]


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric positive definite Gram matrix with its Cholesky factor."""

    spec: KernelSpec
    entries: np.ndarray
    chol_lower: np.ndarray
    condition_estimate: float

    @property
    def n_landmarks(self) -> int:
        return self.entries.shape[0]


def gram(spec: KernelSpec, q: Landmarks) -> GramMatrix:
    """Factorized Gram matrix of a landmark configuration.

    Raises ``NearSingular`` when the Cholesky pivots fall below the floor;
    Gaussian kernels are strictly positive definite on distinct points, so a
    failure always means near-coincidence relative to sqrt(sigma).
    """
    entries = gram_entries(spec, q.points)
    return _factorize(spec, entries)


def _factorize(spec: KernelSpec, entries: np.ndarray) -> GramMatrix:
    n = entries.shape[0]
    try:
        low = np.linalg.cholesky(entries)
    except np.linalg.LinAlgError as exc:
        raise NearSingular("Gram matrix is not positive definite") from exc
    pivots = np.diag(low) ** 2
    if pivots.min() < PIVOT_FLOOR * n:
        raise NearSingular(
            f"Gram pivot {pivots.min():.3e} under floor {PIVOT_FLOOR * n:.3e}; "
            "landmarks nearly coincident for this kernel width"
        )
    # cheap two-sided bound from the factor diagonal; exact enough to flag
    # trouble without an SVD
    cond = float(pivots.max() / pivots.min())
    entries = entries.copy()
    entries.setflags(write=False)
    low.setflags(write=False)
    return GramMatrix(spec, entries, low, cond)


def gram_solve(g: GramMatrix, rhs: np.ndarray) -> np.ndarray:
    """Solve K(q) X = rhs against the stored factorization.

    ``rhs`` may be (N,) or (N, n); the solve acts column-wise.
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != g.n_landmarks:
        raise ValidationError(
            f"rhs has {rhs.shape[0]} rows, Gram matrix has {g.n_landmarks}"
        )
    return cho_solve((g.chol_lower, True), rhs)
