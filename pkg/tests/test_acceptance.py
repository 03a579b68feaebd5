"""Acceptance suite: one test per release criterion, tolerances pinned.

Each test prints a single PASS line with the measured margin so a plain
``pytest tests/test_acceptance.py -v -s`` doubles as the release report.
Random cases use fixed seeds; every bound asserted here is the contract,
not a tuned-to-green value.
"""
import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from landgeo import (
    ChartFunction,
    Covector,
    Grid1D,
    KernelSpec,
    Landmarks,
    LineDiffeo,
    MatchProblem,
    bracket,
    curvature_fd_oracle,
    diff_a_hit_times,
    exp_map,
    force,
    match,
    r_inverse,
    r_map,
    sectional_numerator,
    sharp,
    shoot,
    shoot_second_order,
    smooth_bump,
    stress,
    two_hit_instance,
)
from util import fd_cometric_gradient, fd_lie_bracket, sample_landmarks
from landgeo.kernels import gram_entries

SPEC = KernelSpec(sigma=1.0)
DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


def report(num: int, detail: str) -> None:
    print(f"\nACCEPTANCE {num}: PASS — {detail}")


def test_criterion_1_energy_conservation():
    """50 random instances, relative drift < 1e-8 at 1000 RK4 steps, < 10 s."""
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        n_land = int(rng.integers(2, 6))
        dim = int(rng.integers(1, 4))
        q0 = sample_landmarks(rng, n_land, dim, min_dist=0.5)
        a0 = Covector(rng.normal(size=(n_land, dim)) * 0.5)
        drift = shoot(SPEC, q0, a0, 1.0, 1000).energy_drift()
        worst = max(worst, drift)
        assert drift < 1e-8
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    report(1, f"max energy drift {worst:.2e} (bound 1e-8), 50 shoots in {elapsed:.1f}s")


def test_criterion_2_dual_geodesic_forms():
    """Hamiltonian vs second-order trajectories, sup distance < 1e-6, < 10 s."""
    rng = np.random.default_rng(102)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        n_land = int(rng.integers(2, 4))
        dim = int(rng.integers(1, 3))
        q0 = sample_landmarks(rng, n_land, dim, min_dist=0.5)
        a0 = Covector(rng.normal(size=(n_land, dim)) * 0.4)
        p_ham = shoot(SPEC, q0, a0, 1.0, 1000)
        p_vec = shoot_second_order(SPEC, q0, sharp(SPEC, q0, a0), 1.0, 1000)
        gap = float(np.abs(p_ham.positions - p_vec.positions).max())
        worst = max(worst, gap)
        assert gap < 1e-6
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    report(2, f"max trajectory gap {worst:.2e} (bound 1e-6), 20 pairs in {elapsed:.1f}s")


def test_criterion_3_curvature_oracle_equivalence():
    """Formula vs coordinate FD oracle on 100 random cases, plus exact zeros."""
    rng = np.random.default_rng(103)
    start = time.perf_counter()
    worst_rel = 0.0
    for _ in range(100):
        n_land = int(rng.integers(2, 4))
        dim = int(rng.integers(1, 3))
        q = sample_landmarks(rng, n_land, dim, min_dist=0.45)
        alpha = Covector(rng.normal(size=(n_land, dim)))
        beta = Covector(rng.normal(size=(n_land, dim)))
        num = sectional_numerator(SPEC, q, alpha, beta).numerator
        orc = curvature_fd_oracle(SPEC, q, sharp(SPEC, q, alpha), sharp(SPEC, q, beta))
        assert abs(num - orc) <= max(1e-4 * abs(orc), 1e-7)
        if abs(orc) > 1e-7:
            worst_rel = max(worst_rel, abs(num - orc) / abs(orc))

    # exact zeros: equal arguments, and a single landmark
    q = sample_landmarks(rng, 3, 2)
    alpha = Covector(rng.normal(size=(3, 2)))
    assert abs(sectional_numerator(SPEC, q, alpha, alpha).numerator) < 1e-12
    q1 = Landmarks([[0.2, -0.1]])
    rep = sectional_numerator(SPEC, q1, Covector([[1.0, 0.0]]), Covector([[0.0, 1.0]]))
    assert abs(rep.numerator) < 1e-12

    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    report(3, f"worst rel discrepancy {worst_rel:.2e} (bound 1e-4), 100 cases in {elapsed:.1f}s")


def test_criterion_4_stress_force_identities():
    """Bracket vs FD Lie bracket and force vs half FD cometric gradient."""
    rng = np.random.default_rng(104)
    worst_br = 0.0
    worst_fo = 0.0
    for _ in range(50):
        n_land = int(rng.integers(2, 4))
        dim = int(rng.integers(1, 3))
        q = sample_landmarks(rng, n_land, dim, min_dist=0.5)
        a = rng.normal(size=(n_land, dim))
        b = rng.normal(size=(n_land, dim))

        def field(c):
            return lambda pts: gram_entries(SPEC, pts) @ c

        br = bracket(SPEC, q, Covector(a), Covector(b)).components
        br_fd = fd_lie_bracket(field(a), field(b), q.points)
        gap_br = float(np.abs(br - br_fd).max())
        worst_br = max(worst_br, gap_br)
        assert gap_br < 1e-6

        fo = force(SPEC, q, Covector(a), Covector(b)).components
        fo_fd = 0.5 * fd_cometric_gradient(SPEC, q.points, a, b)
        gap_fo = float(np.abs(fo - fo_fd).max())
        worst_fo = max(worst_fo, gap_fo)
        assert gap_fo < 1e-6

        # the antisymmetrization identity also pins the stress slot convention
        ds = stress(SPEC, q, Covector(a), Covector(b)).components - stress(
            SPEC, q, Covector(b), Covector(a)
        ).components
        assert np.abs(ds - br).max() == 0.0
    report(4, f"max bracket gap {worst_br:.2e}, max force gap {worst_fo:.2e} (bounds 1e-6)")


def test_criterion_5_matching_inverse_crime():
    """10 self-generated targets: misfit < 1e-6, endpoint < 1e-4, monotone."""
    rng = np.random.default_rng(105)
    start = time.perf_counter()
    worst_misfit = 0.0
    worst_end = 0.0
    for _ in range(10):
        q0 = sample_landmarks(rng, 3, 2, min_dist=0.8)
        alpha_true = Covector(rng.normal(size=(3, 2)) * 0.4)
        target = exp_map(SPEC, q0, alpha_true)
        result = match(MatchProblem(q0, target, SPEC, lam=1e-6))
        end_gap = float(np.abs(result.path.positions[-1] - target.points).max())
        worst_misfit = max(worst_misfit, result.misfit)
        worst_end = max(worst_end, end_gap)
        assert result.misfit < 1e-6
        assert end_gap < 1e-4
        hist = np.array(result.objective_history)
        assert np.all(np.diff(hist) <= 0.0)
    elapsed = time.perf_counter() - start
    assert elapsed < 120.0
    report(
        5,
        f"max misfit {worst_misfit:.2e} (bound 1e-6), max endpoint gap "
        f"{worst_end:.2e} (bound 1e-4), 10 matches in {elapsed:.1f}s",
    )


def test_criterion_6_flat_chart():
    """Round trip at machine precision, pullback isometry, residual orders."""
    grid = Grid1D(-8.0, 8.0, 4097)
    x = grid.nodes
    bump_a, _ = smooth_bump(-1.0, 1.5)
    bump_b, _ = smooth_bump(1.5, 2.0)

    # round trip on a 4096-cell grid
    gam = ChartFunction(grid, 0.8 * bump_a(x) - 0.9 * bump_b(x))
    rt = float(np.abs(r_map(r_inverse(gam)).values - gam.values).max())
    assert rt < 1e-14

    # pullback isometry by parameter differencing
    base = LineDiffeo(grid, 0.7 * bump_a(x) - 0.5 * bump_b(x))
    phiv = base.phi()
    h = grid.spacing
    eps = 1e-5
    rng = np.random.default_rng(106)
    worst_iso = 0.0
    for _ in range(5):
        xv, xd = smooth_bump(rng.uniform(-2, 2), rng.uniform(1.0, 2.5))
        yv, yd = smooth_bump(rng.uniform(-2, 2), rng.uniform(1.0, 2.5))

        def chart_shift(sign, deriv):
            fp = (1.0 + base.f_prime) * (1.0 + sign * eps * deriv(phiv)) - 1.0
            return r_map(LineDiffeo(grid, fp)).values

        dgx = (chart_shift(1, xd) - chart_shift(-1, xd)) / (2 * eps)
        dgy = (chart_shift(1, yd) - chart_shift(-1, yd)) / (2 * eps)
        gap = abs(
            np.trapezoid(xd(x) * yd(x), dx=h) - np.trapezoid(dgx * dgy, dx=h)
        )
        worst_iso = max(worst_iso, gap)
        assert gap < 1e-6 + 5.0 * h * h

    # residual refinement, geodesic vs non-geodesic control
    from landgeo import hs_residual, path_residual

    residuals = []
    controls = []
    for n_nodes, n_t in ((513, 33), (1025, 65), (2049, 129), (4097, 257)):
        g = Grid1D(-8.0, 8.0, n_nodes)
        xg = g.nodes
        p0 = r_inverse(ChartFunction(g, 0.5 * bump_a(xg)))
        p1 = r_inverse(ChartFunction(g, -0.8 * bump_b(xg)))
        residuals.append(hs_residual(p0, p1, n_t))

        def control(t, p0=p0, p1=p1, g=g):
            return LineDiffeo(g, (1 - t) * p0.f_prime + t * p1.f_prime)

        controls.append(path_residual(control, g, n_t))
    orders = np.log2(np.array(residuals[:-1]) / np.array(residuals[1:]))
    assert np.all(orders >= 1.7)
    assert all(c > 1e-2 for c in controls)
    report(
        6,
        f"round trip {rt:.1e}, worst isometry gap {worst_iso:.2e} "
        f"(bound {1e-6 + 5 * h * h:.1e}), residual orders "
        f"{np.round(orders, 2).tolist()} (floor 1.7), controls >= "
        f"{min(controls):.2f}",
    )


def test_criterion_7_subgroup_hits():
    """Constructed roots at 1/4, 3/4 within 1e-8; never more than two roots."""
    grid = Grid1D(-8.0, 8.0, 4097)
    p0, p1 = two_hit_instance(grid)
    roots = diff_a_hit_times(p0, p1)
    assert len(roots) == 2
    gap = max(abs(roots[0] - 0.25), abs(roots[1] - 0.75))
    assert gap < 1e-8

    x = grid.nodes
    bump_a, _ = smooth_bump(-1.0, 1.5)
    bump_b, _ = smooth_bump(1.5, 2.0)
    rng = np.random.default_rng(107)
    for _ in range(100):
        coeffs = rng.uniform(-1.2, 1.2, size=4)
        q0 = r_inverse(ChartFunction(grid, coeffs[0] * bump_a(x) + coeffs[1] * bump_b(x)))
        q1 = r_inverse(ChartFunction(grid, coeffs[2] * bump_a(x) + coeffs[3] * bump_b(x)))
        assert len(diff_a_hit_times(q0, q1)) <= 2
    report(7, f"constructed roots off by {gap:.1e} (bound 1e-8); 100 random instances <= 2 roots")


def test_criterion_8_cli_determinism(tmp_path):
    """Byte-identical reruns matching the committed golden; exit 2 on schema."""
    runs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        proc = subprocess.run(
            [
                sys.executable, "-m", "landgeo", "shoot",
                "--input", str(DATA / "shoot_two_body.json"),
                "--out", str(out), "--seed", "3",
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        runs.append((out / "trajectory.csv").read_bytes())
    assert runs[0] == runs[1]
    assert runs[0] == (GOLDEN / "shoot_trajectory.csv").read_bytes()

    bad = json.loads((DATA / "shoot_two_body.json").read_text())
    bad["momenta"] = [[0.1, 0.2]]
    bad_path = tmp_path / "bad.json"
    bad_path.write_text(json.dumps(bad))
    proc = subprocess.run(
        [
            sys.executable, "-m", "landgeo", "shoot",
            "--input", str(bad_path), "--out", str(tmp_path / "c"),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2
    err = json.loads(proc.stderr)
    assert err["error"] == "validation" and err["field"] == "momenta"
    report(8, "golden CSV byte-identical across runs; schema violation exits 2 with field path")
