"""Command-line driver: JSON problem files in, CSV/JSON results out.

Exit codes: 0 success, 2 input/schema validation failure, 3 numerical
failure.  Errors are emitted as a single JSON object on stderr so callers
can parse them.  All floats are written with 15 significant digits so that
repeated runs produce byte-identical files.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import problemfile
from .curvature import curvature_fd_oracle, sectional_numerator
from .errors import (
    BoundaryHit,
    Collision,
    DegenerateDirection,
    DegeneratePlane,
    EnergyDrift,
    InvalidDiffeo,
    LandgeoError,
    LineSearchFailed,
    NearSingular,
    ValidationError,
)
from .geodesics import shoot
from .hunter_saxton import (
    LineDiffeo,
    diff_a_hit_times,
    hs_distance,
    hs_residual,
    hs_velocity,
    mon_exit_time,
    r_map,
)
from .matching import match
from .metric import sharp
from .types import Covector, Landmarks

FORMAT_VERSION = "1"
_NUMERICAL_ERRORS = (
    NearSingular,
    Collision,
    EnergyDrift,
    DegeneratePlane,
    LineSearchFailed,
    InvalidDiffeo,
    BoundaryHit,
    DegenerateDirection,
)


def _fmt(x: float) -> str:
    return format(float(x), ".15g")


def _jsonable(obj):
    if isinstance(obj, float):
        return float(_fmt(obj))
    if isinstance(obj, (np.floating, np.integer)):
        return _jsonable(obj.item())
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    return obj


def _write_json(path: Path, payload: dict) -> None:
    payload = {"format_version": FORMAT_VERSION, **payload}
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _traj_header(n_land: int, dim: int) -> list[str]:
    cols = ["t"]
    cols += [f"q[{i}][{a}]" for i in range(n_land) for a in range(dim)]
    cols += [f"alpha[{i}][{a}]" for i in range(n_land) for a in range(dim)]
    return cols


def _traj_rows(path_obj):
    qs = path_obj.positions.reshape(len(path_obj.times), -1)
    als = path_obj.momenta.reshape(len(path_obj.times), -1)
    for k, t in enumerate(path_obj.times):
        yield [t, *qs[k], *als[k]]


def _cmd_shoot(args) -> int:
    cfg = problemfile.parse_shoot(problemfile.load_document(args.input))
    out = _outdir(args)
    path = shoot(cfg.spec, cfg.q0, Covector(cfg.alpha0), cfg.t_final, cfg.steps)
    n_land, dim = cfg.q0.points.shape
    _write_csv(out / "trajectory.csv", _traj_header(n_land, dim), _traj_rows(path))
    energies = path.energies()
    _write_json(
        out / "summary.json",
        {
            "command": "shoot",
            "seed": args.seed,
            "steps": cfg.steps,
            "t_final": cfg.t_final,
            "initial_energy": energies[0],
            "final_energy": energies[-1],
            "energy_drift": path.energy_drift(),
            "endpoint": path.positions[-1],
        },
    )
    print(f"shoot: wrote {out / 'trajectory.csv'} ({cfg.steps + 1} samples)")
    return 0


def _cmd_match(args) -> int:
    problem = problemfile.parse_match(problemfile.load_document(args.input))
    out = _outdir(args)
    result = match(problem)
    n_land, dim = problem.q0.points.shape
    _write_csv(out / "trajectory.csv", _traj_header(n_land, dim), _traj_rows(result.path))
    _write_json(
        out / "result.json",
        {
            "command": "match",
            "seed": args.seed,
            "alpha0": result.alpha0.components,
            "converged": result.converged,
            "iterations": result.n_iters,
            "misfit": result.misfit,
            "energy": result.energy,
            "objective_history": result.objective_history,
            "endpoint": result.path.positions[-1],
        },
    )
    print(f"match: misfit {result.misfit:.3e}, converged={result.converged}")
    return 0


def _curvature_payload(spec, q, alpha, beta, with_oracle: bool) -> dict:
    report = sectional_numerator(spec, q, alpha, beta)
    payload = {
        "numerator": report.numerator,
        "area_squared": report.area_squared,
        "sectional": report.sectional,
        "terms": report.terms,
    }
    if report.sectional is None:
        raise DegeneratePlane(
            f"squared plane area {report.area_squared:.3e} too small for a sectional value"
        )
    if with_oracle:
        oracle = curvature_fd_oracle(spec, q, sharp(spec, q, alpha), sharp(spec, q, beta))
        payload["oracle_numerator"] = oracle
        payload["oracle_rel_discrepancy"] = abs(report.numerator - oracle) / max(
            abs(oracle), 1e-300
        )
    return payload


def _cmd_curvature(args) -> int:
    cfg = problemfile.parse_curvature(problemfile.load_document(args.input))
    out = _outdir(args)
    alpha, beta = Covector(cfg.alpha), Covector(cfg.beta)
    payload = _curvature_payload(cfg.spec, cfg.q0, alpha, beta, args.oracle)
    payload.update({"command": "curvature", "seed": args.seed})

    if cfg.sweep_distances:
        direction = cfg.q0.points[1] - cfg.q0.points[0]
        direction = direction / np.linalg.norm(direction)
        header = ["distance", "numerator", "area_squared", "sectional"]
        if args.oracle:
            header += ["oracle_numerator", "rel_discrepancy"]
        rows = []
        for d in cfg.sweep_distances:
            pts = np.vstack([cfg.q0.points[0], cfg.q0.points[0] + d * direction])
            qd = Landmarks(pts)
            p = _curvature_payload(cfg.spec, qd, alpha, beta, args.oracle)
            row = [d, p["numerator"], p["area_squared"], p["sectional"]]
            if args.oracle:
                row += [p["oracle_numerator"], p["oracle_rel_discrepancy"]]
            rows.append(row)
        _write_csv(out / "sweep.csv", header, rows)
        payload["sweep_distances"] = list(cfg.sweep_distances)

    _write_json(out / "report.json", payload)
    print(f"curvature: sectional {payload['sectional']:.6g}")
    return 0


def _cmd_hs(args) -> int:
    cfg = problemfile.parse_hs(problemfile.load_document(args.input))
    out = _outdir(args)
    phi0, phi1 = cfg.phi0, cfg.phi1

    distance = hs_distance(phi0, phi1)
    try:
        hit_times = diff_a_hit_times(phi0, phi1)
    except DegenerateDirection:
        hit_times = None
    try:
        exit_time = mon_exit_time(phi0, phi1)
    except DegenerateDirection:
        exit_time = None
    residual = hs_residual(phi0, phi1, cfg.time_samples)

    ts = np.linspace(0.0, 1.0, cfg.path_samples)
    header = ["x"]
    columns = [cfg.grid.nodes]
    g0, g1 = r_map(phi0).values, r_map(phi1).values
    for t in ts:
        lab = _fmt(t)
        header.append(f"gamma[t={lab}]")
        columns.append((1.0 - t) * g0 + t * g1)
        header.append(f"u[t={lab}]")
        columns.append(hs_velocity(phi0, phi1, t))
    rows = np.column_stack(columns)
    _write_csv(out / "geodesic.csv", header, rows)

    payload = {
        "command": "hs",
        "seed": args.seed,
        "distance": distance,
        "hit_times": hit_times,
        "exit_time": exit_time,
        "max_residual": residual,
    }

    if args.refine:
        levels = []
        strides = [2 ** (args.refine - 1 - j) for j in range(args.refine)]
        for stride in strides:
            coarse = cfg.grid.coarsened(stride)
            sub = slice(None, None, stride)
            p0 = LineDiffeo(coarse, phi0.f_prime[sub])
            p1 = LineDiffeo(coarse, phi1.f_prime[sub])
            nt = max(5, (cfg.time_samples - 1) // stride + 1)
            levels.append(
                {
                    "num_nodes": coarse.num_nodes,
                    "time_samples": nt,
                    "residual": hs_residual(p0, p1, nt),
                }
            )
        orders = []
        for a, b in zip(levels, levels[1:]):
            orders.append(float(np.log2(a["residual"] / b["residual"])))
        payload["refinement"] = {"levels": levels, "observed_orders": orders}

    _write_json(out / "summary.json", payload)
    print(f"hs: distance {distance:.6g}, max residual {residual:.3e}")
    return 0


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="landgeo",
        description="kernel shape-space geodesics, curvature, matching, "
        "and the flat-chart line flow",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("shoot", _cmd_shoot),
        ("match", _cmd_match),
        ("curvature", _cmd_curvature),
        ("hs", _cmd_hs),
    ):
        p = sub.add_parser(name)
        p.add_argument("--input", required=True, help="problem JSON file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=0, help="seed recorded in outputs")
        if name == "curvature":
            p.add_argument(
                "--oracle",
                action="store_true",
                help="add the finite-difference curvature oracle column",
            )
        if name == "hs":
            p.add_argument(
                "--refine",
                type=int,
                default=0,
                metavar="K",
                help="run K nested coarsenings and report observed orders",
            )
        p.set_defaults(handler=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ValidationError as exc:
        json.dump(
            {"error": "validation", "field": exc.field, "message": str(exc)},
            sys.stderr,
        )
        sys.stderr.write("\n")
        return 2
    except _NUMERICAL_ERRORS as exc:
        json.dump(
            {"error": type(exc).__name__, "message": str(exc)}, sys.stderr
        )
        sys.stderr.write("\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
