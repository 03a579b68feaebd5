"""Boundary-value landmark matching by shooting on the initial momentum.

The objective is endpoint misfit plus a kinetic-energy penalty; energy is
constant along geodesics, so the initial-momentum energy already equals the
path energy.  The gradient is taken by central finite differences over the
momentum coordinates, with all perturbed trajectories integrated as one
batch; at desk scale this is cheaper and simpler than deriving an adjoint
system.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import Collision, EnergyDrift, LineSearchFailed, NearSingular, ValidationError
from .geodesics import GeodesicPath, integrate_endpoints, shoot
from .kernels import KernelSpec, gram_entries
from .types import Covector, Landmarks

DEFAULT_SHOOT_STEPS = 200


@dataclass(frozen=True)
class OptConfig:
    """Gradient-descent and line-search knobs for ``match``."""

    max_iters: int = 500
    grad_tol: float = 1e-6
    fd_step: float = 1e-5
    armijo_c: float = 1e-4
    armijo_max_halvings: int = 30
    init_step: float = 1.0


@dataclass(frozen=True)
class MatchProblem:
    q0: Landmarks
    q_target: Landmarks
    spec: KernelSpec
    lam: float = 0.0
    shoot_steps: int = DEFAULT_SHOOT_STEPS
    opt: OptConfig = field(default_factory=OptConfig)

    def __post_init__(self):
        if self.q0.points.shape != self.q_target.points.shape:
            raise ValidationError(
                f"template {self.q0.points.shape} and target "
                f"{self.q_target.points.shape} shapes differ"
            )
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValidationError("energy weight lambda must be >= 0")
        if self.shoot_steps < 1:
            raise ValidationError("shoot_steps must be >= 1")


@dataclass(frozen=True)
class MatchResult:
    alpha0: Covector
    path: GeodesicPath
    objective_history: list[float]
    misfit: float
    energy: float
    converged: bool
    n_iters: int


def _energy_of(problem: MatchProblem, a: np.ndarray) -> float:
    km = gram_entries(problem.spec, problem.q0.points)
    return 0.5 * float(np.sum(km * (a @ a.T)))


def _objective_batch(problem: MatchProblem, alphas: np.ndarray) -> np.ndarray:
    """Objective values for a (B, N, n) stack of initial momenta."""
    q0s = np.broadcast_to(problem.q0.points, alphas.shape)
    ends, _ = integrate_endpoints(
        problem.spec, q0s, alphas, 1.0, problem.shoot_steps
    )
    res = ends - problem.q_target.points
    misfits = 0.5 * (res * res).sum((1, 2))
    if problem.lam == 0.0:
        return misfits
    km = gram_entries(problem.spec, problem.q0.points)
    energies = 0.5 * np.einsum("ij,bia,bja->b", km, alphas, alphas)
    return misfits + problem.lam * energies


def objective(problem: MatchProblem, alpha0: Covector) -> float:
    """Endpoint misfit |exp(q0, a) - target|^2 / 2 plus lam * energy."""
    a = alpha0.components
    if a.shape != problem.q0.points.shape:
        raise ValidationError("alpha0 shape does not match the template")
    return float(_objective_batch(problem, a[None])[0])


def gradient_fd(problem: MatchProblem, alpha0: Covector) -> Covector:
    """Central-difference gradient over all momentum coordinates.

    The step scales with the momentum magnitude; all 2*N*n perturbed shoots
    run as a single batch.
    """
    a = alpha0.components
    if a.shape != problem.q0.points.shape:
        raise ValidationError("alpha0 shape does not match the template")
    n_land, dim = a.shape
    h = problem.opt.fd_step * (float(np.linalg.norm(a)) + 1.0)

    n_coords = n_land * dim
    batch = np.broadcast_to(a, (2 * n_coords, n_land, dim)).copy()
    flat = batch.reshape(2 * n_coords, -1)
    idx = np.arange(n_coords)
    flat[2 * idx, idx] += h
    flat[2 * idx + 1, idx] -= h
    vals = _objective_batch(problem, batch)
    grad = (vals[0::2] - vals[1::2]) / (2.0 * h)
    return Covector(grad.reshape(n_land, dim))


def match(problem: MatchProblem) -> MatchResult:
    """Gradient descent with Armijo backtracking from zero initial momentum.

    ``converged`` reports a gradient-norm stop (as opposed to running out of
    iterations).  Trial steps whose shoot collides are treated as failed
    trials and backtracked over.
    """
    opt = problem.opt
    a = np.zeros_like(problem.q0.points)
    f = float(_objective_batch(problem, a[None])[0])
    history = [f]
    converged = False
    iters = 0

    for _ in range(opt.max_iters):
        g = gradient_fd(problem, Covector(a)).components
        gnorm = float(np.linalg.norm(g))
        if gnorm <= opt.grad_tol:
            converged = True
            break
        iters += 1

        step = opt.init_step
        accepted = False
        for _ in range(opt.armijo_max_halvings + 1):
            trial = a - step * g
            try:
                ft = float(_objective_batch(problem, trial[None])[0])
            except (Collision, NearSingular, EnergyDrift):
                ft = np.inf
            if ft <= f - opt.armijo_c * step * gnorm**2:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            raise LineSearchFailed(
                f"no decrease after {opt.armijo_max_halvings} halvings "
                f"(gradient norm {gnorm:.3e})"
            )
        a, f = trial, ft
        history.append(f)
    else:
        # max_iters exhausted; converged stays False unless the final
        # gradient happens to be small
        g = gradient_fd(problem, Covector(a)).components
        converged = float(np.linalg.norm(g)) <= opt.grad_tol

    alpha0 = Covector(a)
    path = shoot(problem.spec, problem.q0, alpha0, 1.0, problem.shoot_steps)
    res = path.positions[-1] - problem.q_target.points
    return MatchResult(
        alpha0=alpha0,
        path=path,
        objective_history=history,
        misfit=0.5 * float((res * res).sum()),
        energy=_energy_of(problem, a),
        converged=converged,
        n_iters=iters,
    )
