"""Core array-carrying types for landmark configurations.

``Covector`` (momenta) and ``Tangent`` (velocities) share the same storage
layout but are kept as distinct types on purpose: raising and lowering
indices is where sign and index bugs hide, and the type split makes a
mixed-up argument an immediate error rather than a silently wrong number.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

# Landmarks must stay pairwise distinct; configurations closer than this are
# rejected as outside the valid chart.
MIN_SEPARATION = 1e-12


def _as_readonly_2d(arr, name: str) -> np.ndarray:
    a = np.array(arr, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValidationError(f"{name} must be a 2-D array (N, n), got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValidationError(f"{name} contains non-finite entries")
    a.setflags(write=False)
    return a


def min_pairwise_distance(points: np.ndarray) -> float:
    """Smallest Euclidean distance between any two rows of ``points``."""
    n = points.shape[0]
    if n < 2:
        return np.inf
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diff * diff).sum(-1))
    dist[np.diag_indices(n)] = np.inf
    return float(dist.min())


@dataclass(frozen=True)
class Landmarks:
    """An ordered tuple of pairwise-distinct points in R^n, stored (N, n)."""

    points: np.ndarray

    def __post_init__(self):
        pts = _as_readonly_2d(self.points, "landmarks")
        object.__setattr__(self, "points", pts)
        if min_pairwise_distance(pts) <= MIN_SEPARATION:
            raise ValidationError(
                "landmarks must be pairwise distinct "
                f"(min distance <= {MIN_SEPARATION:g})"
            )

    @property
    def n_landmarks(self) -> int:
        return self.points.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    def translated(self, shift) -> "Landmarks":
        return Landmarks(self.points + np.asarray(shift, dtype=float))


@dataclass(frozen=True)
class Covector:
    """Momenta attached to a landmark configuration, stored (N, n)."""

    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "components", _as_readonly_2d(self.components, "covector")
        )


@dataclass(frozen=True)
class Tangent:
    """Velocities attached to a landmark configuration, stored (N, n)."""

    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "components", _as_readonly_2d(self.components, "tangent")
        )


def check_shapes_match(q: Landmarks, *others) -> None:
    """Raise unless every Covector/Tangent matches the (N, n) shape of ``q``."""
    for other in others:
        arr = other.components
        if arr.shape != q.points.shape:
            raise ValidationError(
                f"shape mismatch: landmarks are {q.points.shape}, "
                f"got {type(other).__name__} of shape {arr.shape}"
            )
