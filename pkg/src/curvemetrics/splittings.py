"""Splittings of the tangent space at a curve into two complementary subspaces.

Two concrete splittings are provided:

* ``tan_nor_splitting``: tangential fields ``f v`` and normal fields ``a n``,
  with pointwise orthogonal projections.
* ``arc0_splitting``: tangential fields and the fields ``a n + b v`` that
  infinitesimally preserve a constant speed parametrization, where ``b`` solves
  ``D_s^2 b = D_s(a kappa)`` with ``b(0) = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve import (
    TWO_PI,
    DiscreteCurve,
    arc_derivative,
    check_tangent,
    dot,
    scalar_times,
)
from .errors import GridMismatch
from .linops import LinOp, apply, identity, pointwise_matrix


@dataclass(frozen=True, eq=False)
class Splitting:
    """Complementary projections ``p_first + p_second = Id``.

    By convention ``p_first`` projects onto the vertical (tangential) part and
    ``p_second`` onto the prescribed horizontal complement.
    """

    p_first: LinOp
    p_second: LinOp
    labels: tuple[str, str]
    curve: DiscreteCurve

    @property
    def name(self) -> str:
        return "_".join(label.lower() for label in self.labels)

    def project(self, h) -> tuple[np.ndarray, np.ndarray]:
        return apply(self.p_first, h), apply(self.p_second, h)


def tan_nor_splitting(c: DiscreteCurve) -> Splitting:
    v, nrm = c.tangent, c.normal
    p_tan = np.einsum("ji,jk->jik", v, v)
    p_nor = np.einsum("ji,jk->jik", nrm, nrm)
    return Splitting(pointwise_matrix(c, p_tan), pointwise_matrix(c, p_nor), ("Tan", "Nor"), c)


def solve_b(c: DiscreteCurve, a) -> np.ndarray:
    """Periodic solution of ``D_s^2 b = D_s(a kappa)`` normalized by ``b(0) = 0``.

    Integrating once gives ``D_s b = a kappa + C``; periodicity of b forces
    ``C = -(1/length) * integral(a kappa ds)``. b is then the cumulative
    trapezoidal ds-integral of ``a kappa + C`` starting at grid index 0.

    ``a`` may be a single scalar field of shape ``(n,)`` or a batch of
    fields stacked as columns, shape ``(n, m)``.
    """
    c.require_constant_speed()
    a = np.asarray(a, dtype=float)
    if a.ndim == 0 or a.shape[0] != c.n:
        raise GridMismatch(f"field of shape {a.shape} on a curve with n={c.n}")
    shape = (c.n,) + (1,) * (a.ndim - 1)
    w = c.ds_weights.reshape(shape)
    f = a * c.curvature.reshape(shape)
    const = -np.sum(f * w, axis=0) / c.total_length
    # integrand in theta: (a kappa + C) |c'|
    g = (f + const) * c.speed.reshape(shape)
    steps = 0.5 * (g[:-1] + g[1:]) * (TWO_PI / c.n)
    b = np.zeros_like(g)
    b[1:] = np.cumsum(steps, axis=0)
    return b


def project_arc0(c: DiscreteCurve, k) -> tuple[np.ndarray, np.ndarray]:
    """Apply ``(P^Tan, P^Arc0)`` to a single field without assembling operators."""
    k = check_tangent(c, k)
    a = dot(k, c.normal)
    b = solve_b(c, a)
    arc = scalar_times(a, c.normal) + scalar_times(b, c.tangent)
    tan = scalar_times(dot(k, c.tangent) - b, c.tangent)
    return tan, arc


def arc0_splitting(c: DiscreteCurve) -> Splitting:
    """Tan / Arc0 splitting; the curve must have constant speed."""
    c.require_constant_speed()
    n = c.n
    v, nrm = c.tangent, c.normal
    # a = <k, n> as an (n, 2n) matrix acting on flattened fields
    to_a = np.hstack([np.diag(nrm[:, 0]), np.diag(nrm[:, 1])])
    to_bt = np.hstack([np.diag(v[:, 0]), np.diag(v[:, 1])])
    b_of_a = solve_b(c, np.eye(n))
    b_of_k = b_of_a @ to_a
    along_n = np.concatenate([nrm[:, 0], nrm[:, 1]])[:, None]
    along_v = np.concatenate([v[:, 0], v[:, 1]])[:, None]
    v_rows = np.vstack([np.eye(n), np.eye(n)])
    p_arc = along_n * (v_rows @ to_a) + along_v * (v_rows @ b_of_k)
    p_tan = along_v * (v_rows @ (to_bt - b_of_k))
    return Splitting(LinOp(p_tan, c), LinOp(p_arc, c), ("Tan", "Arc0"), c)


def make_splitting(c: DiscreteCurve, tag: str) -> Splitting:
    if tag == "tan_nor":
        return tan_nor_splitting(c)
    if tag == "arc0":
        return arc0_splitting(c)
    raise ValueError(f"unknown splitting {tag!r}; expected 'tan_nor' or 'arc0'")


def speed_preservation_residual(c: DiscreteCurve, h) -> np.ndarray:
    """``<D_s^2 h, v> + kappa <D_s h, n>``; vanishes iff h preserves constant speed."""
    c.require_constant_speed()
    h = check_tangent(c, h)
    dh = arc_derivative(c, h)
    ddh = arc_derivative(c, dh)
    return dot(ddh, c.tangent) + c.curvature * dot(dh, c.normal)


@dataclass
class SplittingReport:
    idempotence_first: float
    idempotence_second: float
    complementarity: float
    annihilation: float
    tol: float

    @property
    def passed(self) -> bool:
        return max(self.idempotence_first, self.idempotence_second,
                   self.complementarity, self.annihilation) < self.tol

    def as_dict(self) -> dict:
        return {
            "idempotence_first": self.idempotence_first,
            "idempotence_second": self.idempotence_second,
            "complementarity": self.complementarity,
            "annihilation": self.annihilation,
            "pass": self.passed,
        }


def verify_splitting(s: Splitting, tol: float = 1e-8) -> SplittingReport:
    """Max-abs entry defects of the projection identities."""
    p, q = s.p_first.matrix, s.p_second.matrix
    eye = identity(s.curve).matrix

    def defect(m):
        return float(np.max(np.abs(m)))

    return SplittingReport(
        idempotence_first=defect(p @ p - p),
        idempotence_second=defect(q @ q - q),
        complementarity=defect(p + q - eye),
        annihilation=max(defect(p @ q), defect(q @ p)),
        tol=tol,
    )
