"""Reparametrization-invariant metrics on discrete closed planar curves.

The package builds inertia operators ``L`` on tangent fields along a sampled
curve, realizes metrics ``G(h, k) = integral <L h, k> ds`` for which a chosen
splitting of the tangent space (tangential/normal or tangential/Arc0) is
orthogonal, and straightens paths of curves along horizontal directions.
"""

from .curve import (
    Diffeo,
    DiscreteCurve,
    apply_diffeo,
    apply_diffeo_field,
    arc_derivative,
    constant_speed_diffeo,
    l2_inner,
    make_curve,
    reparametrize_constant_speed,
)
from .errors import *  # noqa: F401,F403
from .linops import (
    LinOp,
    adjoint_l2,
    almost_local_operator,
    is_symmetric_positive,
    sobolev_operator,
)
from .metrics import (
    Metric,
    decomposition_residual,
    evaluate,
    horizontality_residual,
    l2_metric,
    metric_from_operator,
    oracle_closed_form_arc0,
    orthogonality_defect,
    literal_closed_form_arc0,
    prescribed_splitting_metric,
    reparam_invariance_defect,
    verify_metric,
)
from .paths import CurvePath, GeodesicResult, horizontal_geodesic, path_energy
from .recipes import Recipe, parse_recipe
from .splittings import (
    Splitting,
    arc0_splitting,
    make_splitting,
    project_arc0,
    solve_b,
    tan_nor_splitting,
    verify_splitting,
)

__version__ = "0.1.0"
