"""Flat-chart solver for the H^1-dot geometry of line diffeomorphisms.

A compactly supported increasing map phi = Id + f (with f' > -1) is encoded
by the chart function

    gamma = 2 (sqrt(1 + f') - 1),        gamma > -2,

under which the geometry becomes the flat L^2 geometry of gamma: geodesics
are straight chart lines, distance is the chordal L^2 norm (the chart image
{gamma > -2 pointwise} is convex, so chords never leave it), and the
velocity field of a chart line solves the Hunter-Saxton equation

    u_t = -u u_x + 1/2 int_{-inf}^x (u_x)^2 dz .

Everything lives on a fixed uniform grid with trapezoid quadrature and
central differences, all second-order accurate.  Values equal to -2 encode
points of the monotone-map completion where the map stops being invertible.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import PchipInterpolator

from .errors import (
    BoundaryHit,
    DegenerateDirection,
    InvalidDiffeo,
    ValidationError,
)

BOUNDARY = -2.0
_SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of ``num_nodes`` points on [x_min, x_max]."""

    x_min: float
    x_max: float
    num_nodes: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise ValidationError("grid bounds must be finite")
        if self.x_max <= self.x_min:
            raise ValidationError("grid needs x_max > x_min")
        if self.num_nodes < 3:
            raise ValidationError("grid needs at least 3 nodes")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.num_nodes - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.num_nodes)

    def coarsened(self, stride: int) -> "Grid1D":
        """Grid on every ``stride``-th node; requires divisibility."""
        if (self.num_nodes - 1) % stride:
            raise ValidationError(
                f"{self.num_nodes - 1} intervals not divisible by stride {stride}"
            )
        return Grid1D(self.x_min, self.x_max, (self.num_nodes - 1) // stride + 1)


def _check_samples(grid: Grid1D, values, name: str) -> np.ndarray:
    v = np.array(values, dtype=float, copy=True)
    if v.ndim != 1 or v.size != grid.num_nodes:
        raise ValidationError(
            f"{name} must have {grid.num_nodes} samples, got shape {v.shape}"
        )
    if not np.isfinite(v).all():
        raise ValidationError(f"{name} contains non-finite entries")
    if abs(v[0]) > _SUPPORT_TOL or abs(v[-1]) > _SUPPORT_TOL:
        raise ValidationError(
            f"{name} must vanish at both grid boundaries (compact support)"
        )
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class ChartFunction:
    """Grid samples of a chart value gamma, compactly supported, >= -2."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = _check_samples(self.grid, self.values, "chart values")
        if v.min() < BOUNDARY:
            raise ValidationError("chart values fall below -2")
        object.__setattr__(self, "values", v)

    @property
    def in_group(self) -> bool:
        """True when this chart point encodes an actual diffeomorphism."""
        return bool(self.values.min() > BOUNDARY)


@dataclass(frozen=True)
class LineDiffeo:
    """Increasing map phi = Id + f sampled via f' on a grid; f' > -1."""

    grid: Grid1D
    f_prime: np.ndarray

    def __post_init__(self):
        fp = _check_samples(self.grid, self.f_prime, "f_prime")
        if fp.min() <= -1.0:
            raise InvalidDiffeo("f' must stay above -1 everywhere")
        object.__setattr__(self, "f_prime", fp)

    def f(self) -> np.ndarray:
        """Cumulative displacement with f(x_min) = 0 (trapezoid)."""
        return cumulative_trapezoid(self.f_prime, self.grid.nodes, initial=0.0)

    def phi(self) -> np.ndarray:
        return self.grid.nodes + self.f()


def _same_grid(a, b) -> Grid1D:
    if a.grid != b.grid:
        raise ValidationError("operands live on different grids")
    return a.grid


def r_map(phi: LineDiffeo) -> ChartFunction:
    """Chart encoding gamma = 2 (sqrt(1 + f') - 1)."""
    fp = phi.f_prime
    if fp.min() <= -1.0:
        raise InvalidDiffeo("f' must stay above -1 everywhere")
    return ChartFunction(phi.grid, 2.0 * (np.sqrt(1.0 + fp) - 1.0))


def r_inverse(gamma: ChartFunction) -> LineDiffeo:
    """Decode a chart point back to the map: f' = (gamma^2 + 4 gamma) / 4."""
    g = gamma.values
    if g.min() <= BOUNDARY:
        raise BoundaryHit(
            "chart value reaches -2: point of the monotone completion, "
            "not of the group"
        )
    return LineDiffeo(gamma.grid, 0.25 * (g * g + 4.0 * g))


def hs_geodesic(phi0: LineDiffeo, phi1: LineDiffeo, t: float) -> LineDiffeo:
    """Point at parameter ``t`` on the chart-line geodesic through phi0, phi1.

    Valid for all t in [0, 1]; extensions beyond may leave the group, in
    which case ``BoundaryHit`` is raised.
    """
    grid = _same_grid(phi0, phi1)
    g0 = r_map(phi0).values
    g1 = r_map(phi1).values
    gt = (1.0 - t) * g0 + t * g1
    if gt.min() <= BOUNDARY:
        raise BoundaryHit(f"extended geodesic leaves the group at t={t:g}")
    return r_inverse(ChartFunction(grid, gt))


def hs_distance(phi0: LineDiffeo, phi1: LineDiffeo) -> float:
    """Geodesic distance: chordal L^2 norm of the chart difference."""
    grid = _same_grid(phi0, phi1)
    diff = r_map(phi1).values - r_map(phi0).values
    return float(np.sqrt(np.trapezoid(diff * diff, dx=grid.spacing)))


def _compose_with_inverse(x: np.ndarray, phi_nodes: np.ndarray, vals: np.ndarray):
    """Evaluate (vals o phi^{-1}) at the grid nodes.

    phi is strictly increasing, so this is plain monotone interpolation of
    the pairs (phi(x_k), vals(x_k)).  A C^1 cubic (pchip) is used rather
    than a piecewise-linear rule: time differences of the composed field
    divide the interpolation error by dt, and the linear rule's O(h^2)
    kinks would then cap the residual convergence at first order.
    """
    inner = PchipInterpolator(phi_nodes, vals, extrapolate=False)(x)
    # beyond the image of the grid the map is a pure shift and vals is
    # constant there; extend by the end values
    out = np.where(x < phi_nodes[0], vals[0], np.where(x > phi_nodes[-1], vals[-1], inner))
    return out


def _velocity_from_chart(grid: Grid1D, g0: np.ndarray, g1: np.ndarray, t: float):
    """Velocity field u(t, .) of the chart line, sampled on the grid.

    The time derivative of the map is exact in the chart; only the
    composition with the inverse map is interpolated.
    """
    x = grid.nodes
    dg = g1 - g0
    gt = (1.0 - t) * g0 + t * g1
    if gt.min() <= BOUNDARY:
        raise BoundaryHit(f"velocity requested outside the group at t={t:g}")
    f_t = 0.25 * cumulative_trapezoid(gt * gt + 4.0 * gt, x, initial=0.0)
    dtf = 0.25 * cumulative_trapezoid((2.0 * gt + 4.0) * dg, x, initial=0.0)
    return _compose_with_inverse(x, x + f_t, dtf)


def hs_velocity(phi0: LineDiffeo, phi1: LineDiffeo, t: float) -> np.ndarray:
    """Grid samples of the flow velocity u = (d_t phi_t) o phi_t^{-1}."""
    grid = _same_grid(phi0, phi1)
    return _velocity_from_chart(grid, r_map(phi0).values, r_map(phi1).values, t)


def _residual_of_velocity(grid: Grid1D, us: np.ndarray, dt: float) -> float:
    """Max interior defect of u_t + u u_x - 1/2 int_{-inf}^x u_x^2."""
    x = grid.nodes
    h = grid.spacing
    u_t = (us[2:] - us[:-2]) / (2.0 * dt)
    u_x = np.gradient(us, h, axis=1)
    half_int = 0.5 * cumulative_trapezoid(u_x * u_x, x, axis=1, initial=0.0)
    defect = u_t + (us * u_x - half_int)[1:-1]
    return float(np.abs(defect[:, 1:-1]).max())


def hs_residual(phi0: LineDiffeo, phi1: LineDiffeo, time_samples: int = 65) -> float:
    """Hunter-Saxton residual of the chart-line geodesic on [0, 1].

    Time derivative by central differences over ``time_samples`` uniform
    samples, space derivative and quadrature on the native grid; converges
    like O(h^2 + dt^2) for the geodesic.
    """
    grid = _same_grid(phi0, phi1)
    if time_samples < 3:
        raise ValidationError("need at least 3 time samples")
    g0 = r_map(phi0).values
    g1 = r_map(phi1).values
    ts = np.linspace(0.0, 1.0, time_samples)
    us = np.stack([_velocity_from_chart(grid, g0, g1, t) for t in ts])
    return _residual_of_velocity(grid, us, ts[1] - ts[0])


def path_residual(path, grid: Grid1D, time_samples: int = 65) -> float:
    """Hunter-Saxton residual of an arbitrary path t -> LineDiffeo.

    ``path`` is a callable on [0, 1].  The velocity is reconstructed by
    central differences of the maps in time, so this works for non-geodesic
    control paths too (where the residual should not vanish).  Velocities
    exist only at interior time samples, so the residual stencil loses one
    more sample at each end than ``hs_residual``.
    """
    if time_samples < 5:
        raise ValidationError("need at least 5 time samples")
    ts = np.linspace(0.0, 1.0, time_samples)
    dt = ts[1] - ts[0]
    x = grid.nodes
    phis = [path(t).phi() for t in ts]
    us = []
    for j in range(1, time_samples - 1):
        dphi = (phis[j + 1] - phis[j - 1]) / (2.0 * dt)
        us.append(_compose_with_inverse(x, phis[j], dphi))
    return _residual_of_velocity(grid, np.stack(us), dt)


def _quad_coefficients(phi0: LineDiffeo, phi1: LineDiffeo):
    """Trapezoid coefficients of c(t) = int (gamma_t^2 + 4 gamma_t) dx."""
    grid = _same_grid(phi0, phi1)
    g0 = r_map(phi0).values
    g1 = r_map(phi1).values
    d = g1 - g0
    dx = grid.spacing
    a = float(np.trapezoid(d * d, dx=dx))
    b = float(np.trapezoid(2.0 * g0 * d + 4.0 * d, dx=dx))
    c0 = float(np.trapezoid(g0 * g0 + 4.0 * g0, dx=dx))
    return a, b, c0, d


def diff_a_hit_times(phi0: LineDiffeo, phi1: LineDiffeo) -> list[float]:
    """Times where the extended geodesic crosses the zero-total-shift subgroup.

    The total displacement f_t(+inf) is a quadratic in t with nonnegative
    leading coefficient, so there are never more than two crossings.
    """
    a, b, c0, d = _quad_coefficients(phi0, phi1)
    if np.abs(d).max() < 1e-14:
        raise DegenerateDirection("chart endpoints coincide")
    disc = b * b - 4.0 * a * c0
    if disc < 0.0:
        return []
    if disc == 0.0:
        return [-b / (2.0 * a)]
    root = np.sqrt(disc)
    return sorted([(-b - root) / (2.0 * a), (-b + root) / (2.0 * a)])


def mon_exit_time(phi0: LineDiffeo, phi1: LineDiffeo) -> float | None:
    """First t > 1 where the forward-extended chart line reaches -2.

    Node values are linear in t, so each node's crossing time is closed
    form; None when no node ever descends to the boundary.
    """
    grid = _same_grid(phi0, phi1)
    g0 = r_map(phi0).values
    g1 = r_map(phi1).values
    d = g1 - g0
    if np.abs(d).max() < 1e-14:
        raise DegenerateDirection("chart endpoints coincide")
    sinking = d < 0
    if not sinking.any():
        return None
    times = (BOUNDARY - g0[sinking]) / d[sinking]
    return float(times.min())


# ---------------------------------------------------------------------------
# Instance builders shared by tests, scripts and CLI examples.
# ---------------------------------------------------------------------------


def smooth_bump(center: float, width: float):
    """C^inf bump supported on [center - width, center + width], peak 1.

    Returns (value, derivative) callables.
    """

    def value(x):
        x = np.asarray(x, dtype=float)
        s = (x - center) / width
        out = np.zeros_like(s)
        inside = np.abs(s) < 1.0
        si = s[inside]
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - si * si))
        return out

    def derivative(x):
        x = np.asarray(x, dtype=float)
        s = (x - center) / width
        out = np.zeros_like(s)
        inside = np.abs(s) < 1.0
        si = s[inside]
        core = np.exp(1.0 - 1.0 / (1.0 - si * si))
        out[inside] = core * (-2.0 * si / (1.0 - si * si) ** 2) / width
        return out

    return value, derivative


def chart_from_callable(grid: Grid1D, fn) -> ChartFunction:
    """Sample a compactly supported callable as a chart function."""
    return ChartFunction(grid, fn(grid.nodes))


def two_hit_instance(grid: Grid1D) -> tuple[LineDiffeo, LineDiffeo]:
    """A geodesic whose subgroup crossings land exactly at t = 1/4 and 3/4.

    The midpoint chart value is an even dip and the direction is an odd pair
    of bumps, which kills the linear term of the crossing quadratic; the
    direction amplitude is then solved from the grid's own quadrature so the
    roots are symmetric around 1/2 at distance 1/4 up to rounding.
    """
    if abs(grid.x_min + grid.x_max) > 1e-12:
        raise ValidationError("two_hit_instance needs a grid symmetric about 0")
    if grid.x_max < 7.5:
        raise ValidationError("two_hit_instance needs the window to reach +-7.5")
    x = grid.nodes
    dx = grid.spacing
    mid_val, _ = smooth_bump(0.0, 1.0)
    side_val, _ = smooth_bump(0.0, 3.0)

    eta = -0.25 * mid_val(x)                        # even midpoint dip
    dshape = side_val(x - 4.5) - side_val(x + 4.5)  # odd direction shape
    c_mid = float(np.trapezoid(eta * eta + 4.0 * eta, dx=dx))
    i2 = float(np.trapezoid(dshape * dshape, dx=dx))
    if c_mid >= 0:
        raise ValidationError("midpoint dip failed to make the shift negative")
    amp = np.sqrt(-16.0 * c_mid / i2)
    d = amp * dshape

    g0 = ChartFunction(grid, eta - 0.5 * d)
    g1 = ChartFunction(grid, eta + 0.5 * d)
    return r_inverse(g0), r_inverse(g1)
