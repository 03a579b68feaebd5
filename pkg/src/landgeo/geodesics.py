"""Geodesic flow of the kernel metric, integrated two independent ways.

The primary route integrates the first-order Hamiltonian system in
(positions, momenta).  The second-order vector form reproduces the same
trajectories from (positions, velocities) and exists purely to cross-check
the first route; the two share no right-hand-side code.

Momentum equation, written for slot k with all sums over the other slots:

    dq_k/dt     =  sum_i K(q_k - q_i) alpha_i
    dalpha_k/dt = -sum_i grad K(q_k - q_i) <alpha_i, alpha_k>

i.e. dalpha = -dE/dq for the kinetic energy E; this is what conserves E
along the flow (checked after every integration).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import Collision, EnergyDrift, NearSingular, ValidationError
from .kernels import KernelSpec, grad_entries, gram, gram_entries, gram_solve
from .metric import flat
from .types import Covector, Landmarks, Tangent, check_shapes_match

DEFAULT_STEPS = 1000
DEFAULT_DRIFT_TOL = 1e-6
# integration aborts when landmarks get closer than this times sqrt(sigma)
COLLISION_FACTOR = 1e-6


@dataclass(frozen=True)
class State:
    """A point (q, alpha) of the flow at time t."""

    q: Landmarks
    alpha: Covector
    t: float = 0.0

    def __post_init__(self):
        check_shapes_match(self.q, self.alpha)


@dataclass(frozen=True)
class GeodesicPath:
    """Uniformly sampled trajectory of the geodesic flow on [0, T]."""

    spec: KernelSpec
    times: np.ndarray        # (S+1,)
    positions: np.ndarray    # (S+1, N, n)
    momenta: np.ndarray      # (S+1, N, n)
    step: float
    integrator: str = "rk4"

    def state(self, k: int) -> State:
        return State(
            Landmarks(self.positions[k]), Covector(self.momenta[k]), float(self.times[k])
        )

    @property
    def states(self) -> list[State]:
        return [self.state(k) for k in range(len(self.times))]

    @property
    def endpoint(self) -> Landmarks:
        return Landmarks(self.positions[-1])

    def energies(self) -> np.ndarray:
        """Kinetic energy at every sample, vectorized over time."""
        return _energies(self.spec.sigma, self.positions, self.momenta)

    def energy_drift(self) -> float:
        e = self.energies()
        return float(np.abs(e - e[0]).max() / max(abs(e[0]), 1e-300))


def _energies(sigma: float, qs: np.ndarray, als: np.ndarray) -> np.ndarray:
    diff = qs[:, :, None, :] - qs[:, None, :, :]
    km = np.exp(-(diff * diff).sum(-1) / sigma)
    inner = als @ als.transpose(0, 2, 1)
    return 0.5 * (km * inner).sum((1, 2))


def _rhs(sigma: float, q: np.ndarray, a: np.ndarray):
    """Hamiltonian right-hand side on raw (N, n) arrays."""
    diff = q[:, None, :] - q[None, :, :]
    km = np.exp(-(diff * diff).sum(-1) / sigma)
    dq = km @ a
    w = km * (a @ a.T)
    # -sum_i grad K(q_k - q_i) <a_i, a_k>  ==  +(2/sigma) sum_i diff_ki K_ki w_ki
    da = (2.0 / sigma) * (diff * w[:, :, None]).sum(1)
    return dq, da


def _rhs_batch(sigma: float, q: np.ndarray, a: np.ndarray):
    """Same right-hand side over a batch axis, shapes (B, N, n)."""
    diff = q[:, :, None, :] - q[:, None, :, :]
    km = np.exp(-(diff * diff).sum(-1) / sigma)
    dq = km @ a
    w = km * (a @ a.transpose(0, 2, 1))
    da = (2.0 / sigma) * (diff * w[:, :, :, None]).sum(2)
    return dq, da


def hamiltonian_rhs(spec: KernelSpec, s: State) -> tuple[Tangent, Covector]:
    """Time derivatives (dq, dalpha) of the flow at a state."""
    dq, da = _rhs(spec.sigma, s.q.points, s.alpha.components)
    return Tangent(dq), Covector(da)


def _min_separation(q: np.ndarray) -> float:
    n = q.shape[0]
    if n < 2:
        return np.inf
    diff = q[:, None, :] - q[None, :, :]
    d2 = (diff * diff).sum(-1)
    d2[np.diag_indices(n)] = np.inf
    return float(np.sqrt(d2.min()))


def _check_shoot_args(t_final: float, steps: int) -> None:
    if not (np.isfinite(t_final) and t_final > 0):
        raise ValidationError("t_final must be positive")
    if steps < 1:
        raise ValidationError("steps must be >= 1")


def shoot(
    spec: KernelSpec,
    q0: Landmarks,
    alpha0: Covector,
    t_final: float = 1.0,
    steps: int = DEFAULT_STEPS,
    drift_tol: float = DEFAULT_DRIFT_TOL,
) -> GeodesicPath:
    """Integrate the Hamiltonian system with classical fixed-step RK4.

    Returns the full sampled path.  Raises ``Collision`` if landmarks
    approach within the separation floor, and ``EnergyDrift`` if relative
    energy drift along the samples exceeds ``drift_tol`` (step too large,
    or dynamics too close to a collision for the step).
    """
    check_shapes_match(q0, alpha0)
    _check_shoot_args(t_final, steps)
    sigma = spec.sigma
    floor = COLLISION_FACTOR * np.sqrt(sigma)
    h = t_final / steps

    shape = q0.points.shape
    qs = np.empty((steps + 1, *shape))
    als = np.empty((steps + 1, *shape))
    qs[0] = q0.points
    als[0] = alpha0.components

    q, a = qs[0].copy(), als[0].copy()
    for k in range(steps):
        kq1, ka1 = _rhs(sigma, q, a)
        kq2, ka2 = _rhs(sigma, q + 0.5 * h * kq1, a + 0.5 * h * ka1)
        kq3, ka3 = _rhs(sigma, q + 0.5 * h * kq2, a + 0.5 * h * ka2)
        kq4, ka4 = _rhs(sigma, q + h * kq3, a + h * ka3)
        q = q + (h / 6.0) * (kq1 + 2 * kq2 + 2 * kq3 + kq4)
        a = a + (h / 6.0) * (ka1 + 2 * ka2 + 2 * ka3 + ka4)
        if _min_separation(q) < floor:
            raise Collision(f"landmark separation under {floor:.3e} at t={h * (k + 1):.6g}")
        qs[k + 1] = q
        als[k + 1] = a

    path = GeodesicPath(spec, np.linspace(0.0, t_final, steps + 1), qs, als, h)
    drift = path.energy_drift()
    if drift > drift_tol:
        raise EnergyDrift(f"relative energy drift {drift:.3e} exceeds {drift_tol:.1e}")
    return path


def exp_map(
    spec: KernelSpec, q0: Landmarks, alpha0: Covector, steps: int = DEFAULT_STEPS
) -> Landmarks:
    """Endpoint of the unit-time geodesic with initial momentum ``alpha0``."""
    return shoot(spec, q0, alpha0, 1.0, steps).endpoint


def integrate_endpoints(
    spec: KernelSpec,
    q0s: np.ndarray,
    alpha0s: np.ndarray,
    t_final: float = 1.0,
    steps: int = DEFAULT_STEPS,
) -> tuple[np.ndarray, np.ndarray]:
    """Endpoints only, for a batch of initial conditions, shapes (B, N, n).

    One fused RK4 sweep over the whole batch; this is what makes
    finite-difference gradients of the matching objective affordable.
    """
    _check_shoot_args(t_final, steps)
    sigma = spec.sigma
    floor = COLLISION_FACTOR * np.sqrt(sigma)
    h = t_final / steps
    q = np.array(q0s, dtype=float)
    a = np.array(alpha0s, dtype=float)
    nb, nl = q.shape[0], q.shape[1]
    eye = np.arange(nl)
    for _ in range(steps):
        kq1, ka1 = _rhs_batch(sigma, q, a)
        kq2, ka2 = _rhs_batch(sigma, q + 0.5 * h * kq1, a + 0.5 * h * ka1)
        kq3, ka3 = _rhs_batch(sigma, q + 0.5 * h * kq2, a + 0.5 * h * ka2)
        kq4, ka4 = _rhs_batch(sigma, q + h * kq3, a + h * ka3)
        q += (h / 6.0) * (kq1 + 2 * kq2 + 2 * kq3 + kq4)
        a += (h / 6.0) * (ka1 + 2 * ka2 + 2 * ka3 + ka4)
        if nl > 1:
            diff = q[:, :, None, :] - q[:, None, :, :]
            d2 = (diff * diff).sum(-1)
            d2[:, eye, eye] = np.inf
            if d2.min() < floor * floor:
                raise Collision("landmark separation under floor in batch integration")
    return q, a


def _accel_arrays(sigma: float, pts: np.ndarray, vel: np.ndarray) -> np.ndarray:
    from scipy.linalg import cho_solve

    diff = pts[:, None, :] - pts[None, :, :]
    km = np.exp(-(diff * diff).sum(-1) / sigma)
    gm = -(2.0 / sigma) * diff * km[:, :, None]
    try:
        low = np.linalg.cholesky(km)
    except np.linalg.LinAlgError as exc:
        raise NearSingular("Gram matrix singular along second-order flow") from exc

    w = vel @ vel.T
    # S_ij = sum_kl C_ki W_kl C_lj with C = inv(K); C, W symmetric
    s = cho_solve((low, True), cho_solve((low, True), w).T)
    t1 = -0.5 * np.einsum("ij,ijd,in->nd", s, gm, km)
    t1 += 0.5 * np.einsum("ij,ijd,jn->nd", s, gm, km)

    # B_in = <grad K(q_i - q_n), qdot_i - qdot_n>
    rel = vel[:, None, :] - vel[None, :, :]
    b = np.einsum("ind,ind->in", gm, rel)
    cb = cho_solve((low, True), b)
    t2 = cb.T @ vel
    return t1 + t2


def accel_vector_form(spec: KernelSpec, q: Landmarks, qdot: Tangent) -> Tangent:
    """Geodesic acceleration from (position, velocity), quadratic in velocity.

    With C = Kinv(q), G_ij = grad K(q_i - q_j) and K the Gram matrix:

        qddot_n = -1/2 sum_{kijl} C_ki G_ij (K_in - K_jn) C_jl <qdot_k, qdot_l>
                  +     sum_{ki}  C_ki <G_in, qdot_i - qdot_n> qdot_k
    """
    check_shapes_match(q, qdot)
    return Tangent(_accel_arrays(spec.sigma, q.points, qdot.components))


def shoot_second_order(
    spec: KernelSpec,
    q0: Landmarks,
    qdot0: Tangent,
    t_final: float = 1.0,
    steps: int = DEFAULT_STEPS,
    drift_tol: float = DEFAULT_DRIFT_TOL,
) -> GeodesicPath:
    """RK4 on the second-order (q, qdot) system; cross-validation route.

    Sampled momenta are recovered by lowering the sampled velocities, so the
    result is directly comparable with ``shoot``.
    """
    check_shapes_match(q0, qdot0)
    _check_shoot_args(t_final, steps)
    sigma = spec.sigma
    floor = COLLISION_FACTOR * np.sqrt(sigma)
    h = t_final / steps

    def rhs(qarr, varr):
        return varr, _accel_arrays(sigma, qarr, varr)

    shape = q0.points.shape
    qs = np.empty((steps + 1, *shape))
    vs = np.empty((steps + 1, *shape))
    qs[0] = q0.points
    vs[0] = qdot0.components
    q, v = qs[0].copy(), vs[0].copy()
    for k in range(steps):
        kq1, kv1 = rhs(q, v)
        kq2, kv2 = rhs(q + 0.5 * h * kq1, v + 0.5 * h * kv1)
        kq3, kv3 = rhs(q + 0.5 * h * kq2, v + 0.5 * h * kv2)
        kq4, kv4 = rhs(q + h * kq3, v + h * kv3)
        q = q + (h / 6.0) * (kq1 + 2 * kq2 + 2 * kq3 + kq4)
        v = v + (h / 6.0) * (kv1 + 2 * kv2 + 2 * kv3 + kv4)
        if _min_separation(q) < floor:
            raise Collision(f"landmark separation under {floor:.3e} at t={h * (k + 1):.6g}")
        qs[k + 1] = q
        vs[k + 1] = v

    als = np.empty_like(vs)
    for k in range(steps + 1):
        als[k] = flat(spec, Landmarks(qs[k]), Tangent(vs[k])).components

    path = GeodesicPath(spec, np.linspace(0.0, t_final, steps + 1), qs, als, h)
    drift = path.energy_drift()
    if drift > drift_tol:
        raise EnergyDrift(f"relative energy drift {drift:.3e} exceeds {drift_tol:.1e}")
    return path
