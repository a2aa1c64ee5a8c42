"""Dense linear operators on tangent fields along a discrete curve.

A tangent field ``h`` of shape ``(n, 2)`` is flattened to the 2n-vector
``[h_x, h_y]`` (all x components, then all y components). Adjoints are taken
with respect to the L^2(ds) pairing of the attached curve, i.e.
``A* = W^-1 A^T W`` with ``W = diag(ds, ds)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .curve import (
    DiscreteCurve,
    check_scalar,
    check_tangent,
    diff_matrix,
    random_smooth_fields,
)
from .errors import GridMismatch, InvalidCoefficients, NonPositiveCoefficient


def flatten(h: np.ndarray) -> np.ndarray:
    return np.concatenate([h[:, 0], h[:, 1]])


def unflatten(x: np.ndarray) -> np.ndarray:
    n = x.shape[0] // 2
    return np.column_stack([x[:n], x[n:]])


@dataclass(frozen=True, eq=False)
class LinOp:
    matrix: np.ndarray
    curve: DiscreteCurve

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        dim = 2 * self.curve.n
        if m.shape != (dim, dim):
            raise GridMismatch(f"operator of shape {m.shape} on a curve with n={self.curve.n}")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator has non-finite entries")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.curve.n

    @property
    def weights(self) -> np.ndarray:
        """Diagonal of W, the quadrature weights per degree of freedom."""
        w = self.curve.ds_weights
        return np.concatenate([w, w])

    def __call__(self, h):
        return apply(self, h)

    def __matmul__(self, other: "LinOp") -> "LinOp":
        return compose(self, other)

    def __add__(self, other: "LinOp") -> "LinOp":
        return add(self, other)

    def __sub__(self, other: "LinOp") -> "LinOp":
        return add(self, scale(other, -1.0))

    def __rmul__(self, lam: float) -> "LinOp":
        return scale(self, lam)

    def adjoint(self) -> "LinOp":
        return adjoint_l2(self)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.matrix)))

    def to_text(self) -> str:
        """Row-major debug dump: a header line with n, then 2n rows."""
        lines = [str(self.n)]
        lines.extend(" ".join(repr(float(x)) for x in row) for row in self.matrix)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, curve: DiscreteCurve) -> "LinOp":
        rows = [ln.split() for ln in text.strip().splitlines()]
        n = int(rows[0][0])
        if n != curve.n:
            raise GridMismatch(f"operator dump for n={n} loaded on a curve with n={curve.n}")
        body = rows[1:]
        if len(body) != 2 * n or any(len(r) != 2 * n for r in body):
            raise ValueError(f"operator dump for n={n} must have {2 * n} rows of {2 * n} values")
        return cls(np.array(body, dtype=float), curve)


def _same_grid(a: LinOp, b: LinOp) -> None:
    if a.n != b.n:
        raise GridMismatch(f"operators on grids n={a.n} and n={b.n}")


def identity(c: DiscreteCurve) -> LinOp:
    return LinOp(np.eye(2 * c.n), c)


def zero(c: DiscreteCurve) -> LinOp:
    return LinOp(np.zeros((2 * c.n, 2 * c.n)), c)


def multiplication(c: DiscreteCurve, f) -> LinOp:
    """Pointwise multiplication ``h -> f h`` by a scalar field."""
    f = check_scalar(c, f)
    return LinOp(np.diag(np.concatenate([f, f])), c)


def pointwise_matrix(c: DiscreteCurve, field: np.ndarray) -> LinOp:
    """Operator ``h_j -> M_j h_j`` for a field of 2x2 matrices of shape (n, 2, 2)."""
    n = c.n
    m = np.zeros((2 * n, 2 * n))
    idx = np.arange(n)
    for r in range(2):
        for s in range(2):
            m[r * n + idx, s * n + idx] = field[:, r, s]
    return LinOp(m, c)


def arc_derivative_op(c: DiscreteCurve) -> LinOp:
    """D_s acting componentwise; exactly skew-adjoint for the L^2(ds) pairing."""
    d = diff_matrix(c.n, c.scheme) / c.speed[:, None]
    z = np.zeros_like(d)
    return LinOp(np.block([[d, z], [z, d]]), c)


def apply(a: LinOp, h) -> np.ndarray:
    h = check_tangent(a.curve, h)
    return unflatten(a.matrix @ flatten(h))


def adjoint_l2(a: LinOp) -> LinOp:
    w = a.weights
    return LinOp(a.matrix.T * w[None, :] / w[:, None], a.curve)


def compose(a: LinOp, b: LinOp) -> LinOp:
    _same_grid(a, b)
    return LinOp(a.matrix @ b.matrix, a.curve)


def add(a: LinOp, b: LinOp) -> LinOp:
    _same_grid(a, b)
    return LinOp(a.matrix + b.matrix, a.curve)


def scale(a: LinOp, lam: float) -> LinOp:
    return LinOp(float(lam) * a.matrix, a.curve)


def symmetrize(a: LinOp) -> LinOp:
    """(A + A*)/2, the L^2(ds)-symmetric part of A."""
    return LinOp(0.5 * (a.matrix + adjoint_l2(a).matrix), a.curve)


def sobolev_operator(c: DiscreteCurve, l: int, coeffs: Iterable[float]) -> LinOp:
    """Inertia operator ``sum_m coeffs[m] (-1)^m D_s^(2m)``, symmetrized.

    Since D_s is skew-adjoint, each term equals ``(D_s*)^m D_s^m`` and is
    positive semidefinite; ``coeffs[0] > 0`` makes the sum positive definite.
    """
    coeffs = [float(x) for x in coeffs]
    if l < 0 or int(l) != l:
        raise InvalidCoefficients(f"order l must be a non-negative integer, got {l}")
    if len(coeffs) != l + 1:
        raise InvalidCoefficients(f"expected {l + 1} coefficients, got {len(coeffs)}")
    if not coeffs[0] > 0 or any(x < 0 or not np.isfinite(x) for x in coeffs):
        raise InvalidCoefficients(f"coefficients must be >= 0 with coeffs[0] > 0: {coeffs}")
    if l == 0:
        return scale(identity(c), coeffs[0])
    d2 = arc_derivative_op(c).matrix
    d2 = d2 @ d2
    total = coeffs[0] * np.eye(2 * c.n)
    power = np.eye(2 * c.n)
    for m, cm in enumerate(coeffs[1:], start=1):
        power = power @ d2
        if cm:
            total = total + cm * (-1) ** m * power
    return symmetrize(LinOp(total, c))


def almost_local_operator(c: DiscreteCurve, phi) -> LinOp:
    """Multiplication by a strictly positive scalar field ``phi``."""
    phi = check_scalar(c, phi)
    if not np.all(phi > 0):
        raise NonPositiveCoefficient(f"almost local coefficient has minimum {phi.min():.3g}")
    return multiplication(c, phi)


@dataclass
class SymmetryReport:
    asymmetry: float
    min_rayleigh: float
    min_eigenvalue: float | None
    tol: float

    @property
    def passed(self) -> bool:
        positive = self.min_rayleigh > 0 and (self.min_eigenvalue is None or self.min_eigenvalue > 0)
        return self.asymmetry < self.tol and positive

    def as_dict(self) -> dict:
        return {
            "asymmetry": self.asymmetry,
            "min_rayleigh": self.min_rayleigh,
            "min_eigenvalue": self.min_eigenvalue,
            "pass": self.passed,
        }


def is_symmetric_positive(a: LinOp, tol: float = 1e-10, samples: int = 200,
                          seed: int = 0, exact: bool = False) -> SymmetryReport:
    """Sampled check of symmetry and positivity for the L^2(ds) pairing.

    Asymmetry is the max of ``|<Ah,k> - <h,Ak>|`` over pairs of random smooth
    fields of unit L^2 norm; positivity is the smallest sampled Rayleigh
    quotient. With ``exact=True`` the smallest eigenvalue of the symmetric
    part is computed as well.
    """
    rng = np.random.default_rng(seed)
    w = a.weights
    fields = random_smooth_fields(a.n, rng, 2 * samples)
    x = np.concatenate([fields[:, :, 0], fields[:, :, 1]], axis=1).T
    x = x / np.sqrt(np.sum(w[:, None] * x * x, axis=0))
    h, k = x[:, :samples], x[:, samples:]
    ah, ak = a.matrix @ h, a.matrix @ k
    asym = np.max(np.abs(np.sum(w[:, None] * (ah * k - h * ak), axis=0)))
    min_q = np.min(np.sum(w[:, None] * ah * h, axis=0))
    min_eig = None
    if exact:
        sw = np.sqrt(a.weights)
        # W^(1/2) A W^(-1/2) is similar to A; its symmetric part carries the form.
        s = sw[:, None] * a.matrix / sw[None, :]
        min_eig = float(np.linalg.eigvalsh(0.5 * (s + s.T))[0])
    return SymmetryReport(float(asym), float(min_q), min_eig, tol)
