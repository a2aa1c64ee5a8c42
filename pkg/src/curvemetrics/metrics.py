"""Metrics ``G_c(h, k) = integral <L_c h, k> ds`` and their verification.

``prescribed_splitting_metric`` builds, from any symmetric positive operator
``Lt`` and a splitting with projections ``P1, P2``, the inertia operator

    L = P1* Lt P1 + P2* Lt P2

for which the two subspaces are G-orthogonal. Conversely, a metric for which
a splitting is orthogonal is reproduced by the same formula with ``Lt = L``;
``orthogonality_defect`` and ``decomposition_residual`` measure both facts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curve import (
    DiscreteCurve,
    Diffeo,
    apply_diffeo,
    apply_diffeo_field,
    check_tangent,
    dot,
    l2_inner,
    scalar_times,
)
from .errors import GridMismatch, NotSymmetricPositive
from .linops import LinOp, adjoint_l2, apply, identity, is_symmetric_positive
from .recipes import as_builder
from .splittings import Splitting, solve_b

METRIC_TOL = 1e-8
DEFAULT_TOLERANCES = {
    "orthogonality": 1e-10,
    "decomposition": 1e-8,
    "symmetry": 1e-8,
}


@dataclass(frozen=True, eq=False)
class Metric:
    operator: LinOp
    curve: DiscreteCurve
    provenance: str = "direct"

    def __call__(self, h, k) -> float:
        return evaluate(self, h, k)


def metric_from_operator(c: DiscreteCurve, op: LinOp, tol: float = METRIC_TOL,
                         provenance: str = "direct") -> Metric:
    if op.n != c.n:
        raise GridMismatch(f"operator on n={op.n} for a curve with n={c.n}")
    report = is_symmetric_positive(op, tol)
    if not report.passed:
        raise NotSymmetricPositive(
            f"inertia operator fails symmetry/positivity: asymmetry={report.asymmetry:.3g}, "
            f"min Rayleigh quotient={report.min_rayleigh:.3g}"
        )
    return Metric(op, c, provenance)


def l2_metric(c: DiscreteCurve) -> Metric:
    return Metric(identity(c), c, "direct")


def evaluate(g: Metric, h, k) -> float:
    """``G(h, k) = l2_inner(L h, k)``."""
    return l2_inner(g.curve, apply(g.operator, h), check_tangent(g.curve, k))


def prescribed_operator(s: Splitting, lt: LinOp) -> LinOp:
    p1, p2 = s.p_first, s.p_second
    return adjoint_l2(p1) @ lt @ p1 + adjoint_l2(p2) @ lt @ p2


def prescribed_splitting_metric(c: DiscreteCurve, s: Splitting, lt: LinOp,
                                tol: float = METRIC_TOL) -> Metric:
    """Metric whose inertia operator makes the two parts of ``s`` orthogonal."""
    if s.curve.n != c.n or lt.n != c.n:
        raise GridMismatch("splitting, operator and curve must share the grid")
    report = is_symmetric_positive(lt, tol)
    if not report.passed:
        raise NotSymmetricPositive(
            f"Lt must be symmetric positive: asymmetry={report.asymmetry:.3g}, "
            f"min Rayleigh quotient={report.min_rayleigh:.3g}"
        )
    return metric_from_operator(c, prescribed_operator(s, lt), tol,
                                provenance=f"prescribed({s.name})")


def _gram(g: Metric, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of ``G(a e_i, b e_j)`` for operator matrices a, b."""
    w = g.operator.weights
    return (g.operator.matrix @ a).T @ (w[:, None] * b)


def orthogonality_defect(g: Metric, s: Splitting) -> float:
    """Largest |cos| of the G-angle between ``P1 e_i`` and ``P2 e_j``.

    The sweep runs over all 2n coordinate fields ``e_i``; basis fields whose
    projection is numerically zero are skipped.
    """
    if s.curve.n != g.curve.n:
        raise GridMismatch("splitting and metric live on different grids")
    p1, p2 = s.p_first.matrix, s.p_second.matrix
    cross = _gram(g, p1, p2)
    d1 = np.einsum("ii->i", _gram(g, p1, p1))
    d2 = np.einsum("ii->i", _gram(g, p2, p2))
    keep1 = d1 > 1e-12 * d1.max()
    keep2 = d2 > 1e-12 * d2.max()
    if not keep1.any() or not keep2.any():
        return 0.0
    sub = cross[np.ix_(keep1, keep2)]
    norm = np.sqrt(np.outer(d1[keep1], d2[keep2]))
    return float(np.max(np.abs(sub) / norm))


def decomposition_residual(g: Metric, s: Splitting) -> float:
    """``max|L - P1* L P1 - P2* L P2| / max|L|``."""
    if s.curve.n != g.curve.n:
        raise GridMismatch("splitting and metric live on different grids")
    op = g.operator
    rebuilt = prescribed_operator(s, op)
    return float(np.max(np.abs(op.matrix - rebuilt.matrix)) / op.max_abs())


def horizontality_residual(g: Metric, h) -> float:
    """Relative size of the tangential part of ``L h``; zero iff h is horizontal."""
    c = g.curve
    lh = apply(g.operator, h)
    total = l2_inner(c, lh, lh)
    if total == 0.0:
        return 0.0
    tangential = scalar_times(dot(lh, c.tangent), c.tangent)
    return float(np.sqrt(l2_inner(c, tangential, tangential) / total))


def _arc0_coefficients(c: DiscreteCurve, h):
    h = check_tangent(c, h)
    a = dot(h, c.normal)
    return a, dot(h, c.tangent), solve_b(c, a)


def literal_closed_form_arc0(c: DiscreteCurve, h, k) -> float:
    """Integral of ``2 a1 a2 + bt1 bt2 - b1 bt2 - bt1 b2 + b1 b2``, taken literally.

    Kept for comparison only: it does not equal the metric it is meant to
    expand (see ``oracle_closed_form_arc0``); the difference is
    ``integral(a1 a2 - b1 b2) ds``.
    """
    a1, bt1, b1 = _arc0_coefficients(c, h)
    a2, bt2, b2 = _arc0_coefficients(c, k)
    dens = 2 * a1 * a2 + bt1 * bt2 - b1 * bt2 - bt1 * b2 + b1 * b2
    return float(np.sum(dens * c.ds_weights))


def oracle_closed_form_arc0(c: DiscreteCurve, h, k) -> float:
    """Expansion of the Tan/Arc0 metric with ``Lt = Id``.

    With ``P^Tan h = (bt - b) v`` and ``P^Arc0 h = a n + b v`` the integrand
    is ``a1 a2 + b1 b2 + (bt1 - b1)(bt2 - b2)``.
    """
    a1, bt1, b1 = _arc0_coefficients(c, h)
    a2, bt2, b2 = _arc0_coefficients(c, k)
    dens = a1 * a2 + b1 * b2 + (bt1 - b1) * (bt2 - b2)
    return float(np.sum(dens * c.ds_weights))


def reparam_invariance_defect(recipe, c: DiscreteCurve, phi: Diffeo, h, k) -> float:
    """``|G_{c o phi}(h o phi, k o phi) - G_c(h, k)| / |G_c(h, k)|``."""
    build = as_builder(recipe)
    g0 = l2_inner(c, apply(build(c), h), k)
    c1 = apply_diffeo(c, phi)
    h1 = apply_diffeo_field(h, phi, c)
    k1 = apply_diffeo_field(k, phi, c)
    g1 = l2_inner(c1, apply(build(c1), h1), k1)
    return abs(g1 - g0) / abs(g0)


@dataclass
class MetricReport:
    orthogonality_defect: float
    decomposition_residual: float
    symmetry_defect: float
    min_rayleigh: float
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    @property
    def passed(self) -> bool:
        t = self.tolerances
        return (self.orthogonality_defect < t["orthogonality"]
                and self.decomposition_residual < t["decomposition"]
                and self.symmetry_defect < t["symmetry"]
                and self.min_rayleigh > 0)

    def as_dict(self) -> dict:
        return {
            "orthogonality_defect": self.orthogonality_defect,
            "decomposition_residual": self.decomposition_residual,
            "symmetry_defect": self.symmetry_defect,
            "min_rayleigh": self.min_rayleigh,
            "pass": self.passed,
        }


def verify_metric(g: Metric, s: Splitting, tolerances: dict | None = None,
                  seed: int = 0) -> MetricReport:
    tols = dict(DEFAULT_TOLERANCES)
    tols.update(tolerances or {})
    sym = is_symmetric_positive(g.operator, tols["symmetry"], seed=seed)
    return MetricReport(
        orthogonality_defect=orthogonality_defect(g, s),
        decomposition_residual=decomposition_residual(g, s),
        symmetry_defect=sym.asymmetry,
        min_rayleigh=sym.min_rayleigh,
        tolerances=tols,
    )
