"""Shared samplers and finite-difference oracles for the test suite.

The oracles here intentionally know nothing about the library internals:
they difference plain callables, so they stay valid evidence when the
implementation changes.
"""
import numpy as np

from landgeo import Covector, KernelSpec, Landmarks, cometric


def sample_points(rng, n_land, dim, min_dist=0.5, scale=1.5, max_tries=1000):
    """Random configuration with a guaranteed separation floor."""
    for _ in range(max_tries):
        pts = rng.normal(size=(n_land, dim)) * scale
        if n_land == 1:
            return pts
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff * diff).sum(-1))
        dist[np.diag_indices(n_land)] = np.inf
        if dist.min() > min_dist:
            return pts
    raise RuntimeError("separation rejection sampling failed")


def sample_landmarks(rng, n_land, dim, min_dist=0.5, scale=1.5):
    return Landmarks(sample_points(rng, n_land, dim, min_dist, scale))


def fd_gradient(fn, x0, h=1e-5):
    """Central-difference gradient of a scalar function of a flat vector."""
    x0 = np.asarray(x0, dtype=float)
    grad = np.empty_like(x0)
    for i in range(x0.size):
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += h
        xm[i] -= h
        grad[i] = (fn(xp) - fn(xm)) / (2.0 * h)
    return grad


def fd_lie_bracket(field_x, field_y, pts, h=1e-5):
    """[X, Y] at ``pts`` for vector fields on configuration arrays.

    Central differences of each field along the other's value.
    """
    x0 = field_x(pts)
    y0 = field_y(pts)
    dy_along_x = (field_y(pts + h * x0) - field_y(pts - h * x0)) / (2.0 * h)
    dx_along_y = (field_x(pts + h * y0) - field_x(pts - h * y0)) / (2.0 * h)
    return dy_along_x - dx_along_y


def fd_cometric_gradient(spec: KernelSpec, pts, a, b, h=1e-5):
    """Gradient of q -> cometric(q, a, b) over all landmark coordinates."""
    alpha, beta = Covector(a), Covector(b)

    def fn(flat_pts):
        return cometric(spec, Landmarks(flat_pts.reshape(pts.shape)), alpha, beta)

    return fd_gradient(fn, pts.reshape(-1), h).reshape(pts.shape)
