"""Kernel geometry of landmark shape space and the flat-chart line flow.

Landmark side: Gaussian-kernel Gram matrices induce a Riemannian metric on
configurations of distinct points; this package provides the metric and
cometric, geodesic shooting in Hamiltonian and second-order vector form,
sectional curvature through stress/force with an independent
finite-difference oracle, and boundary-value matching by shooting.

Line side: increasing maps of the real line with the homogeneous H^1 metric
flattened by an explicit chart, with straight-line geodesics, distances,
Hunter-Saxton residual verification, and boundary/subgroup hit detection.
"""

from .curvature import (
    CurvatureReport,
    bracket,
    curvature_fd_oracle,
    force,
    sectional_curvature,
    sectional_numerator,
    stress,
)
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
from .geodesics import (
    GeodesicPath,
    State,
    accel_vector_form,
    exp_map,
    hamiltonian_rhs,
    shoot,
    shoot_second_order,
)
from .hunter_saxton import (
    ChartFunction,
    Grid1D,
    LineDiffeo,
    chart_from_callable,
    diff_a_hit_times,
    hs_distance,
    hs_geodesic,
    hs_residual,
    hs_velocity,
    mon_exit_time,
    path_residual,
    r_inverse,
    r_map,
    smooth_bump,
    two_hit_instance,
)
from .kernels import (
    GramMatrix,
    KernelSpec,
    gram,
    gram_solve,
    kernel_eval,
    kernel_grad,
    kernel_hess,
)
from .matching import MatchProblem, MatchResult, OptConfig, gradient_fd, match, objective
from .metric import (
    VelocityField,
    cometric,
    energy,
    flat,
    horizontal_lift,
    metric,
    sharp,
)
from .types import Covector, Landmarks, Tangent

__version__ = "0.1.0"
