"""Problem-file schema: JSON in, validated configs out.

Hand-rolled validation so every failure carries the path of the offending
field (``kernel.sigma``, ``landmarks[2][1]``, ...): the CLI forwards these
verbatim on stderr, and tests assert on them.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDiffeo, ValidationError
from .hunter_saxton import ChartFunction, Grid1D, LineDiffeo, r_inverse
from .kernels import KernelSpec
from .matching import MatchProblem, OptConfig
from .types import Landmarks, MIN_SEPARATION

SCHEMA_VERSION = "1"


def load_document(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"input file not found: {path}", field="input")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}", field="input")
    if not isinstance(doc, dict):
        raise ValidationError("top level must be an object", field="input")
    return doc


def _require(doc: dict, key: str, where: str = ""):
    path = f"{where}.{key}" if where else key
    if key not in doc:
        raise ValidationError("missing required field", field=path)
    return doc[key], path


def _number(value, path, minimum=None, strict=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError("expected a number", field=path)
    v = float(value)
    if not np.isfinite(v):
        raise ValidationError("must be finite", field=path)
    if minimum is not None:
        if strict and v <= minimum:
            raise ValidationError(f"must be > {minimum}", field=path)
        if not strict and v < minimum:
            raise ValidationError(f"must be >= {minimum}", field=path)
    return v


def _integer(value, path, minimum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError("expected an integer", field=path)
    if minimum is not None and value < minimum:
        raise ValidationError(f"must be >= {minimum}", field=path)
    return value


def _array2d(value, path) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ValidationError("expected a non-empty array of point rows", field=path)
    width = None
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or not row:
            raise ValidationError("expected a non-empty array of numbers", field=f"{path}[{i}]")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ValidationError(
                f"row has {len(row)} entries, expected {width}", field=f"{path}[{i}]"
            )
        vals = []
        for j, entry in enumerate(row):
            vals.append(_number(entry, f"{path}[{i}][{j}]"))
        rows.append(vals)
    return np.array(rows, dtype=float)


def _array1d(value, path) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ValidationError("expected a non-empty array of numbers", field=path)
    return np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(value)], dtype=float)


def _landmarks(value, path) -> Landmarks:
    pts = _array2d(value, path)
    n = pts.shape[0]
    if n >= 2:
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff * diff).sum(-1))
        dist[np.diag_indices(n)] = np.inf
        i, j = np.unravel_index(int(dist.argmin()), dist.shape)
        if dist[i, j] <= MIN_SEPARATION:
            raise ValidationError(
                f"points {i} and {j} coincide (distance {dist[i, j]:.3e})",
                field=f"{path}[{j}]",
            )
    return Landmarks(pts)


def _check_version(doc: dict) -> None:
    version, path = _require(doc, "schema_version")
    if version != SCHEMA_VERSION:
        raise ValidationError(
            f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION!r}",
            field=path,
        )


def _kernel(doc: dict) -> KernelSpec:
    raw, path = _require(doc, "kernel")
    if not isinstance(raw, dict):
        raise ValidationError("expected an object", field=path)
    family = raw.get("family", "gaussian")
    if family != "gaussian":
        raise ValidationError(f"unsupported family {family!r}", field=f"{path}.family")
    sigma_raw, sigma_path = _require(raw, "sigma", path)
    sigma = _number(sigma_raw, sigma_path, minimum=0.0, strict=True)
    return KernelSpec(sigma=sigma, family=family)


def _options(doc: dict) -> dict:
    raw = doc.get("options", {})
    if not isinstance(raw, dict):
        raise ValidationError("expected an object", field="options")
    return raw


def _matching_momenta(q: Landmarks, value, path) -> np.ndarray:
    arr = _array2d(value, path)
    if arr.shape != q.points.shape:
        raise ValidationError(
            f"shape {arr.shape} does not match landmarks {q.points.shape}",
            field=path,
        )
    return arr


@dataclass(frozen=True)
class ShootConfig:
    spec: KernelSpec
    q0: Landmarks
    alpha0: np.ndarray
    t_final: float = 1.0
    steps: int = 1000


@dataclass(frozen=True)
class CurvatureConfig:
    spec: KernelSpec
    q0: Landmarks
    alpha: np.ndarray
    beta: np.ndarray
    sweep_distances: tuple[float, ...] = ()


@dataclass(frozen=True)
class HsConfig:
    grid: Grid1D
    phi0: LineDiffeo
    phi1: LineDiffeo
    time_samples: int = 65
    path_samples: int = 5


def parse_shoot(doc: dict) -> ShootConfig:
    _check_version(doc)
    spec = _kernel(doc)
    q0 = _landmarks(_require(doc, "landmarks")[0], "landmarks")
    alpha0 = _matching_momenta(q0, _require(doc, "momenta")[0], "momenta")
    opts = _options(doc)
    t_final = _number(opts.get("t_final", 1.0), "options.t_final", minimum=0.0, strict=True)
    steps = _integer(opts.get("steps", 1000), "options.steps", minimum=1)
    return ShootConfig(spec, q0, alpha0, t_final, steps)


def parse_match(doc: dict) -> MatchProblem:
    _check_version(doc)
    spec = _kernel(doc)
    q0 = _landmarks(_require(doc, "landmarks")[0], "landmarks")
    target = _landmarks(_require(doc, "targets")[0], "targets")
    if target.points.shape != q0.points.shape:
        raise ValidationError(
            f"shape {target.points.shape} does not match landmarks "
            f"{q0.points.shape}",
            field="targets",
        )
    opts = _options(doc)
    lam = _number(opts.get("lambda", 0.0), "options.lambda", minimum=0.0)
    steps = _integer(opts.get("shoot_steps", 200), "options.shoot_steps", minimum=1)
    opt = OptConfig(
        max_iters=_integer(opts.get("max_iters", 500), "options.max_iters", minimum=1),
        grad_tol=_number(opts.get("grad_tol", 1e-6), "options.grad_tol", minimum=0.0, strict=True),
        fd_step=_number(opts.get("fd_step", 1e-5), "options.fd_step", minimum=0.0, strict=True),
    )
    return MatchProblem(q0, target, spec, lam=lam, shoot_steps=steps, opt=opt)


def parse_curvature(doc: dict) -> CurvatureConfig:
    _check_version(doc)
    spec = _kernel(doc)
    q0 = _landmarks(_require(doc, "landmarks")[0], "landmarks")
    alpha = _matching_momenta(q0, _require(doc, "alpha")[0], "alpha")
    beta = _matching_momenta(q0, _require(doc, "beta")[0], "beta")
    opts = _options(doc)
    sweep = opts.get("sweep_distances", [])
    if sweep:
        if q0.n_landmarks != 2:
            raise ValidationError(
                "distance sweep needs exactly 2 landmarks", field="options.sweep_distances"
            )
        sweep = tuple(
            _number(v, f"options.sweep_distances[{i}]", minimum=0.0, strict=True)
            for i, v in enumerate(sweep)
        )
    return CurvatureConfig(spec, q0, alpha, beta, tuple(sweep))


def parse_hs(doc: dict) -> HsConfig:
    _check_version(doc)
    raw, path = _require(doc, "hs")
    if not isinstance(raw, dict):
        raise ValidationError("expected an object", field=path)
    graw, gpath = _require(raw, "grid", path)
    if not isinstance(graw, dict):
        raise ValidationError("expected an object", field=gpath)
    x_min = _number(_require(graw, "x_min", gpath)[0], f"{gpath}.x_min")
    x_max = _number(_require(graw, "x_max", gpath)[0], f"{gpath}.x_max")
    num_nodes = _integer(_require(graw, "num_nodes", gpath)[0], f"{gpath}.num_nodes", minimum=3)
    if x_max <= x_min:
        raise ValidationError("x_max must exceed x_min", field=f"{gpath}.x_max")
    grid = Grid1D(x_min, x_max, num_nodes)

    def diffeo_from(key_gamma, key_fp):
        if key_gamma in raw:
            vals = _array1d(raw[key_gamma], f"{path}.{key_gamma}")
            if vals.size != num_nodes:
                raise ValidationError(
                    f"expected {num_nodes} samples, got {vals.size}",
                    field=f"{path}.{key_gamma}",
                )
            if vals.min() <= -2.0:
                raise ValidationError(
                    "chart values must stay above -2", field=f"{path}.{key_gamma}"
                )
            try:
                return r_inverse(ChartFunction(grid, vals))
            except (ValidationError, InvalidDiffeo) as exc:
                raise ValidationError(str(exc), field=f"{path}.{key_gamma}")
        if key_fp in raw:
            vals = _array1d(raw[key_fp], f"{path}.{key_fp}")
            if vals.size != num_nodes:
                raise ValidationError(
                    f"expected {num_nodes} samples, got {vals.size}",
                    field=f"{path}.{key_fp}",
                )
            try:
                return LineDiffeo(grid, vals)
            except (ValidationError, InvalidDiffeo) as exc:
                raise ValidationError(str(exc), field=f"{path}.{key_fp}")
        raise ValidationError(
            f"need either {key_gamma} or {key_fp}", field=path
        )

    phi0 = diffeo_from("gamma0", "f_prime0")
    phi1 = diffeo_from("gamma1", "f_prime1")
    opts = _options(doc)
    time_samples = _integer(opts.get("time_samples", 65), "options.time_samples", minimum=3)
    path_samples = _integer(opts.get("path_samples", 5), "options.path_samples", minimum=2)
    return HsConfig(grid, phi0, phi1, time_samples, path_samples)
