"""The kernel-induced Riemannian metric on landmark configurations.

Covectors are the natural variables here: the inverse metric is a plain
double sum against the Gram matrix, while the metric itself needs a solve.
All solves go through the Cholesky factor; the Gram inverse is never formed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import GramMatrix, KernelSpec, gram, gram_entries, gram_solve
from .types import Covector, Landmarks, Tangent, check_shapes_match


def cometric(spec: KernelSpec, q: Landmarks, alpha: Covector, beta: Covector) -> float:
    """Inverse-metric pairing sum_ij K(q_i - q_j) <alpha_i, beta_j>."""
    check_shapes_match(q, alpha, beta)
    km = gram_entries(spec, q.points)
    return float(np.sum(km * (alpha.components @ beta.components.T)))


def metric(spec: KernelSpec, q: Landmarks, p: Tangent, r: Tangent) -> float:
    """Metric pairing sum_kl Kinv(q)_kl <P_k, R_l>, via a factorized solve."""
    check_shapes_match(q, p, r)
    x = gram_solve(gram(spec, q), p.components)
    return float(np.sum(x * r.components))


def sharp(spec: KernelSpec, q: Landmarks, alpha: Covector) -> Tangent:
    """Raise indices: velocity P_k = sum_i K(q_k - q_i) alpha_i."""
    if not isinstance(alpha, Covector):
        raise TypeError(f"sharp raises a Covector, got {type(alpha).__name__}")
    check_shapes_match(q, alpha)
    km = gram_entries(spec, q.points)
    return Tangent(km @ alpha.components)


def flat(spec: KernelSpec, q: Landmarks, p: Tangent) -> Covector:
    """Lower indices: the momentum alpha with sharp(alpha) = P."""
    if not isinstance(p, Tangent):
        raise TypeError(f"flat lowers a Tangent, got {type(p).__name__}")
    check_shapes_match(q, p)
    return Covector(gram_solve(gram(spec, q), p.components))


def energy(spec: KernelSpec, q: Landmarks, alpha: Covector) -> float:
    """Kinetic energy E(q, alpha) = cometric(q, alpha, alpha) / 2 >= 0."""
    return 0.5 * cometric(spec, q, alpha, alpha)


@dataclass(frozen=True)
class VelocityField:
    """Interpolating vector field x -> sum_i K(x - q_i) w_i on R^n.

    This is the minimal-norm field inducing a given landmark velocity; by
    construction it reproduces that velocity exactly at the anchor points.
    """

    spec: KernelSpec
    anchors: np.ndarray   # (N, n)
    weights: np.ndarray   # (N, n)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = x[None, :] if single else x
        diff = pts[:, None, :] - self.anchors[None, :, :]   # (m, N, n)
        km = np.exp(-(diff * diff).sum(-1) / self.spec.sigma)
        vals = km @ self.weights
        return vals[0] if single else vals


def horizontal_lift(spec: KernelSpec, q: Landmarks, p: Tangent) -> VelocityField:
    """The ambient vector field realizing ``p`` with minimal kernel norm."""
    check_shapes_match(q, p)
    weights = gram_solve(gram(spec, q), p.components)
    return VelocityField(spec, q.points.copy(), weights)
