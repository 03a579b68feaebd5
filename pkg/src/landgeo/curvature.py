"""Stress, force, and sectional curvature of the kernel metric.

Everything here is driven by two bilinear building blocks on momenta:

  stress D(a, b): slot i carries sum_j <grad K(q_i - q_j), a#_i - a#_j> b_j,
      the derivative of the raised field b# along a#; its antisymmetric part
      is the Lie bracket [a#, b#].
  force F(a, b):  slot i carries
      1/2 sum_k grad K(q_i - q_k) (<a_i, b_k> + <b_i, a_k>),
      which is half the position-gradient of the cometric pairing.

The sectional numerator assembles these with a pairwise d^2K correction and
an O'Neill-type bracket term.  Sign convention: ``numerator`` is the value
of the curvature 4-tensor on (X, Y, X, Y) with X = a#, Y = b#; the
coordinate finite-difference oracle is calibrated to the same convention
(it negates the textbook R(X,Y,Y,X) numerator) and frozen that way, so the
two routes must agree without any sign fixups at call sites.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePlane, NearSingular
from .kernels import KernelSpec, grad_entries, gram, gram_entries, gram_solve
from .types import Covector, Landmarks, Tangent, check_shapes_match

# planes with squared Gram area below this are refused
AREA_FLOOR = 1e-10


@dataclass(frozen=True)
class CurvatureReport:
    """Sectional-curvature numerator with its term-by-term breakdown.

    ``sectional`` is ``numerator / area_squared`` and is None when the
    spanning plane is degenerate.  The terms sum to the numerator exactly.
    """

    numerator: float
    area_squared: float
    sectional: float | None
    terms: dict[str, float]


def _stress_arrays(km, gm, a, b):
    ash = km @ a
    rel = ash[:, None, :] - ash[None, :, :]          # a#_i - a#_j
    m = np.einsum("ijd,ijd->ij", gm, rel)
    return m @ b


def _force_arrays(gm, a, b):
    p = a @ b.T
    return 0.5 * np.einsum("ikd,ik->id", gm, p + p.T)


def stress(spec: KernelSpec, q: Landmarks, alpha: Covector, beta: Covector) -> Tangent:
    """Directional derivative of the raised beta-field along the alpha-field."""
    check_shapes_match(q, alpha, beta)
    km = gram_entries(spec, q.points)
    gm = grad_entries(spec, q.points)
    return Tangent(_stress_arrays(km, gm, alpha.components, beta.components))


def force(spec: KernelSpec, q: Landmarks, alpha: Covector, beta: Covector) -> Covector:
    """Half the position-gradient of q -> cometric(q, alpha, beta)."""
    check_shapes_match(q, alpha, beta)
    gm = grad_entries(spec, q.points)
    return Covector(_force_arrays(gm, alpha.components, beta.components))


def bracket(spec: KernelSpec, q: Landmarks, alpha: Covector, beta: Covector) -> Tangent:
    """Lie bracket of the raised fields: stress(a, b) - stress(b, a)."""
    check_shapes_match(q, alpha, beta)
    km = gram_entries(spec, q.points)
    gm = grad_entries(spec, q.points)
    a, b = alpha.components, beta.components
    return Tangent(_stress_arrays(km, gm, a, b) - _stress_arrays(km, gm, b, a))


def _d2k_pair_sums(spec, pts, km, ash, bsh, a, b):
    """The three pairwise d^2K sums entering the numerator."""
    diff = pts[:, None, :] - pts[None, :, :]
    da = ash[:, None, :] - ash[None, :, :]
    db = bsh[:, None, :] - bsh[None, :, :]
    s = spec.sigma

    def d2k(u, v):
        xu = np.einsum("ijd,ijd->ij", diff, u)
        xv = np.einsum("ijd,ijd->ij", diff, v)
        uv = np.einsum("ijd,ijd->ij", u, v)
        return km * ((4.0 / s**2) * xu * xv - (2.0 / s) * uv)

    sum_bb = float(np.sum(d2k(db, db) * (a @ a.T)))
    sum_ba = float(np.sum(d2k(db, da) * (b @ a.T)))
    sum_aa = float(np.sum(d2k(da, da) * (b @ b.T)))
    return sum_bb, sum_ba, sum_aa


def sectional_numerator(
    spec: KernelSpec, q: Landmarks, alpha: Covector, beta: Covector
) -> CurvatureReport:
    """Curvature numerator for the plane spanned by the raised momenta.

    Valid for constant momenta (the configuration-independent coordinate
    covectors); both arguments are treated that way.
    """
    check_shapes_match(q, alpha, beta)
    pts = q.points
    a, b = alpha.components, beta.components
    km = gram_entries(spec, pts)
    gm = grad_entries(spec, pts)
    fac = gram(spec, q)

    ash = km @ a
    bsh = km @ b
    dab = _stress_arrays(km, gm, a, b)
    dba = _stress_arrays(km, gm, b, a)
    daa = _stress_arrays(km, gm, a, a)
    dbb = _stress_arrays(km, gm, b, b)
    fab = _force_arrays(gm, a, b)
    faa = _force_arrays(gm, a, a)
    fbb = _force_arrays(gm, b, b)

    stress_force = (
        float(np.sum((dab + dba) * fab))
        - float(np.sum(daa * fbb))
        - float(np.sum(dbb * faa))
    )

    sum_bb, sum_ba, sum_aa = _d2k_pair_sums(spec, pts, km, ash, bsh, a, b)
    d2k_triple = -0.5 * (sum_bb - 2.0 * sum_ba + sum_aa)

    def comet(u, v):
        return float(np.sum(km * (u @ v.T)))

    force_norms = -comet(fab, fab) + comet(faa, fbb)

    br = dab - dba
    oneill = 0.75 * float(np.sum(gram_solve(fac, br) * br))

    numerator = stress_force + d2k_triple + force_norms + oneill
    area_squared = comet(a, a) * comet(b, b) - comet(a, b) ** 2
    sectional = numerator / area_squared if area_squared > AREA_FLOOR else None
    return CurvatureReport(
        numerator=numerator,
        area_squared=float(area_squared),
        sectional=sectional,
        terms={
            "stress_force": stress_force,
            "d2k_triple": d2k_triple,
            "force_norms": force_norms,
            "oneill_bracket": oneill,
        },
    )


def sectional_curvature(
    spec: KernelSpec, q: Landmarks, alpha: Covector, beta: Covector
) -> float:
    """Numerator normalized by the squared Gram area of the plane."""
    report = sectional_numerator(spec, q, alpha, beta)
    if report.sectional is None:
        raise DegeneratePlane(
            f"squared plane area {report.area_squared:.3e} under {AREA_FLOOR:.0e}; "
            "raised momenta are (numerically) parallel"
        )
    return report.sectional


# ---------------------------------------------------------------------------
# Independent coordinate oracle.
#
# Treats configurations as points of R^(N*n) with the dense metric tensor
# G = Kinv kron I, differentiates G twice by central differences, and
# evaluates the classical coordinate curvature.  Deliberately naive: explicit
# inverses, plain loops over Christoffel indices, no shared code with the
# formula above.
# ---------------------------------------------------------------------------


def _metric_tensor(spec: KernelSpec, flat_q: np.ndarray, n_land: int, dim: int):
    pts = flat_q.reshape(n_land, dim)
    km = gram_entries(spec, pts)
    try:
        kinv = np.linalg.inv(km)
    except np.linalg.LinAlgError as exc:
        raise NearSingular("Gram matrix singular in curvature oracle") from exc
    return np.kron(kinv, np.eye(dim))


def _christoffel(spec, flat_q, n_land, dim, h):
    d = n_land * dim
    ginv = np.linalg.inv(_metric_tensor(spec, flat_q, n_land, dim))
    dg = np.empty((d, d, d))
    for m in range(d):
        e = np.zeros(d)
        e[m] = h
        dg[m] = (
            _metric_tensor(spec, flat_q + e, n_land, dim)
            - _metric_tensor(spec, flat_q - e, n_land, dim)
        ) / (2.0 * h)
    # Gamma^l_jk = 1/2 g^lm (d_j g_mk + d_k g_mj - d_m g_jk); dg axes are
    # (derivative, row, col), so sym[m, j, k] collects the three terms
    sym = dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg
    return 0.5 * np.einsum("lm,mjk->ljk", ginv, sym)


def curvature_fd_oracle(
    spec: KernelSpec,
    q: Landmarks,
    p: Tangent,
    r: Tangent,
    h_metric: float | None = None,
    h_outer: float | None = None,
) -> float:
    """Finite-difference curvature of the plane spanned by two velocities.

    Two differencing levels: the metric tensor is differenced at ``h_metric``
    to get Christoffel symbols, which are differenced again at ``h_outer``.
    Returns the curvature 4-tensor on (P, R, P, R) in the same sign
    convention as ``sectional_numerator`` (frozen against it once on the
    two-landmark line case).
    """
    check_shapes_match(q, p, r)
    n_land, dim = q.points.shape
    d = n_land * dim
    root = np.sqrt(spec.sigma)
    h1 = 1e-4 * root if h_metric is None else h_metric
    h2 = 1e-3 * root if h_outer is None else h_outer

    flat_q = q.points.reshape(-1)
    g0 = _metric_tensor(spec, flat_q, n_land, dim)
    gam0 = _christoffel(spec, flat_q, n_land, dim, h1)

    dgam = np.empty((d, d, d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h2
        dgam[i] = (
            _christoffel(spec, flat_q + e, n_land, dim, h1)
            - _christoffel(spec, flat_q - e, n_land, dim, h1)
        ) / (2.0 * h2)

    # R^l_ijk = d_i Gam^l_jk - d_j Gam^l_ik + Gam^l_im Gam^m_jk - Gam^l_jm Gam^m_ik
    riem = (
        dgam.transpose(1, 0, 2, 3)
        - dgam.transpose(1, 2, 0, 3)
        + np.einsum("lim,mjk->lijk", gam0, gam0)
        - np.einsum("ljm,mik->lijk", gam0, gam0)
    )
    pf = p.components.reshape(-1)
    rf = r.components.reshape(-1)
    value = float(np.einsum("lm,lijk,i,j,k,m->", g0, riem, pf, rf, rf, pf))
    # frozen calibration: flip the textbook numerator onto the convention of
    # sectional_numerator
    return -value
