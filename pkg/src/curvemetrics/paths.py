"""Discrete paths of curves, their energy, and a horizontal path straightener.

The optimizer freezes the inertia operators along the path at the start of
each outer iteration. The energy gradient is taken with L frozen (the ds
weights are differentiated exactly) and preconditioned by the block
tridiagonal Hessian of the frozen quadratic form. Every node update is then
projected onto the horizontal subspace of the chosen splitting; acceptance is
decided on the true energy with operators rebuilt at the trial path.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .curve import (
    TWO_PI,
    DiscreteCurve,
    derivative_theta,
    dot,
    make_curve,
    reparametrize_constant_speed,
)
from .errors import GridMismatch, NotConstantSpeed, NotImmersed
from .linops import LinOp, adjoint_l2, apply, flatten, unflatten
from .metrics import Metric, horizontality_residual
from .recipes import as_builder
from .splittings import make_splitting

log = logging.getLogger(__name__)

RULES = ("symmetric", "left")


@dataclass(frozen=True, eq=False)
class CurvePath:
    curves: tuple[DiscreteCurve, ...]

    def __post_init__(self):
        curves = tuple(self.curves)
        if len(curves) < 2:
            raise ValueError("a path needs at least two curves")
        n = curves[0].n
        if any(c.n != n for c in curves):
            raise GridMismatch("all curves of a path must share the grid size")
        object.__setattr__(self, "curves", curves)

    @property
    def m(self) -> int:
        return len(self.curves)

    @property
    def n(self) -> int:
        return self.curves[0].n

    @property
    def dt(self) -> float:
        return 1.0 / (self.m - 1)

    def points(self) -> np.ndarray:
        return np.stack([c.points for c in self.curves])

    def velocities(self) -> np.ndarray:
        pts = self.points()
        return (pts[1:] - pts[:-1]) / self.dt

    def reversed(self) -> "CurvePath":
        return CurvePath(self.curves[::-1])

    @classmethod
    def from_points(cls, frames, scheme: str = "central") -> "CurvePath":
        return cls(tuple(make_curve(f, scheme) for f in np.asarray(frames, dtype=float)))

    @classmethod
    def linear(cls, c0: DiscreteCurve, c1: DiscreteCurve, m: int) -> "CurvePath":
        """Straight-line homotopy; the endpoint objects are reused unchanged."""
        if c0.n != c1.n:
            raise GridMismatch(f"endpoint curves have n={c0.n} and n={c1.n}")
        ts = np.linspace(0.0, 1.0, m)
        inner = [make_curve((1 - t) * c0.points + t * c1.points, c0.scheme) for t in ts[1:-1]]
        return cls((c0, *inner, c1))


def _weighted(op: LinOp) -> np.ndarray:
    """Symmetric matrix A with ``G(h, h) = flat(h)^T A flat(h)``."""
    a = op.weights[:, None] * op.matrix
    return 0.5 * (a + a.T)


def _segment_forms(ops: list[LinOp], rule: str) -> list[np.ndarray]:
    a = [_weighted(op) for op in ops]
    if rule == "left":
        return a[:-1]
    if rule == "symmetric":
        return [0.5 * (a[k] + a[k + 1]) for k in range(len(a) - 1)]
    raise ValueError(f"unknown energy rule {rule!r}; expected one of {RULES}")


def path_energy(p: CurvePath, recipe, rule: str = "symmetric") -> float:
    """Discrete energy ``sum_k G(v_k, v_k) dt`` with ``v_k = (c_{k+1} - c_k)/dt``.

    ``rule="left"`` evaluates the metric at ``c_k``; the default
    ``"symmetric"`` averages the metrics at both ends of each segment, which
    makes the energy invariant under reversing the path.
    """
    build = as_builder(recipe)
    ops = [build(c) for c in p.curves]
    return _energy_from_ops(p, ops, rule)


def _energy_from_ops(p: CurvePath, ops: list[LinOp], rule: str) -> float:
    forms = _segment_forms(ops, rule)
    total = 0.0
    for form, v in zip(forms, p.velocities()):
        x = flatten(v)
        total += float(x @ form @ x)
    return total * p.dt


def path_horizontality_report(p: CurvePath, recipe) -> list[float]:
    """Horizontality residual of each discrete velocity at its base curve."""
    build = as_builder(recipe)
    out = []
    for c, v in zip(p.curves[:-1], p.velocities()):
        out.append(horizontality_residual(Metric(build(c), c), v))
    return out


@dataclass
class GeodesicResult:
    path: CurvePath
    energies: list[float]
    diagnostics: list[dict] = field(default_factory=list)
    converged: bool = True
    iterations: int = 0
    reason: str = ""

    @property
    def energy(self) -> float:
        return self.energies[-1]


def _block_tridiagonal_solve(diag: list[np.ndarray], off: list[np.ndarray],
                             rhs: list[np.ndarray]) -> list[np.ndarray]:
    """Solve a symmetric block tridiagonal system; ``off[i]`` couples i and i+1."""
    k = len(diag)
    d = [diag[0]]
    r = [rhs[0]]
    for i in range(1, k):
        coupling = np.linalg.solve(d[i - 1], off[i - 1]).T
        d.append(diag[i] - coupling @ off[i - 1])
        r.append(rhs[i] - coupling @ r[i - 1])
    x = [None] * k
    x[-1] = np.linalg.solve(d[-1], r[-1])
    for i in range(k - 2, -1, -1):
        x[i] = np.linalg.solve(d[i], r[i] - off[i] @ x[i + 1])
    return x


def _weight_gradient(c: DiscreteCurve, rho: np.ndarray) -> np.ndarray:
    """Gradient in the points of ``sum_i rho_i ds_i`` for fixed ``rho``.

    ``ds_i = dtheta |D c|_i`` gives ``dtheta D^T(rho v) = -dtheta D(rho v)``
    since D is skew.
    """
    return -(TWO_PI / c.n) * derivative_theta(rho[:, None] * c.tangent, c.scheme)


def _energy_gradient(path: CurvePath, ops: list[LinOp], forms: list[np.ndarray],
                     rule: str) -> list[np.ndarray]:
    """Gradient of the path energy in the interior nodes with L frozen.

    The quadrature weights ds of every curve are differentiated exactly, the
    inertia operators are held fixed.
    """
    dt = path.dt
    flat = [flatten(x) for x in path.points()]
    d = [flat[k + 1] - flat[k] for k in range(path.m - 1)]
    grad = []
    for j in range(1, path.m - 1):
        g = (2.0 / dt) * (forms[j - 1] @ d[j - 1] - forms[j] @ d[j])
        # (segment, factor) pairs in which curve j's weights enter
        touching = [(j - 1, 0.5), (j, 0.5)] if rule == "symmetric" else [(j, 1.0)]
        c, op = path.curves[j], ops[j]
        rho = np.zeros(c.n)
        for k, factor in touching:
            q = unflatten(d[k])
            rho += factor * dot(q, apply(op, q))
        g = g + flatten(_weight_gradient(c, rho)) / dt
        grad.append(g)
    return grad


def _trial_path(c0, c1, interior: np.ndarray, scheme: str, constant_speed: bool) -> CurvePath:
    inner = [make_curve(x, scheme) for x in interior]
    if constant_speed:
        for c in inner:
            c.require_constant_speed()
    return CurvePath((c0, *inner, c1))


def horizontal_geodesic(c0: DiscreteCurve, c1: DiscreteCurve, m: int, recipe,
                        splitting: str = "tan_nor", tol: float = 1e-8,
                        max_iters: int = 500, rule: str = "symmetric",
                        max_halvings: int = 40) -> GeodesicResult:
    """Approximate a horizontal geodesic between two curves by path straightening.

    Returns a :class:`GeodesicResult`; ``converged`` is False when
    ``max_iters`` was reached, in which case the best path found is returned.
    The endpoint curves are the very objects passed in.
    """
    if c0.n != c1.n:
        raise GridMismatch(f"endpoint curves have n={c0.n} and n={c1.n}")
    if m < 3:
        raise ValueError(f"need at least 3 curves on the path, got m={m}")
    build = as_builder(recipe)
    arc0 = splitting == "arc0"
    if splitting not in ("tan_nor", "arc0"):
        raise ValueError(f"unknown splitting {splitting!r}; expected 'tan_nor' or 'arc0'")

    if np.array_equal(c0.points, c1.points):
        path = CurvePath((c0,) * (m - 1) + (c1,))
        return GeodesicResult(path, [0.0], [_diag_row(0, 0.0, 0.0, 0.0)], True, 0, "constant path")
    path = CurvePath.linear(c0, c1, m)
    if arc0:
        path = CurvePath((c0, *(reparametrize_constant_speed(c) for c in path.curves[1:-1]), c1))

    ops = [build(c) for c in path.curves]
    energy = _energy_from_ops(path, ops, rule)
    energies = [energy]
    diagnostics = [_diag_row(0, energy, _max_residual(path, ops), 0.0)]
    dt = path.dt
    converged, reason, it = False, "max_iters reached", 0

    for it in range(1, max_iters + 1):
        forms = _segment_forms(ops, rule)
        pts = path.points()
        grad = _energy_gradient(path, ops, forms, rule)
        diag = [(2.0 / dt) * (forms[i - 1] + forms[i]) for i in range(1, m - 1)]
        off = [-(2.0 / dt) * forms[i] for i in range(1, m - 2)]
        newton = _block_tridiagonal_solve(diag, off, [-g for g in grad])

        splits = [make_splitting(c, splitting) for c in path.curves[1:-1]]
        direction = [s.p_second.matrix @ d for s, d in zip(splits, newton)]
        slope = sum(float(g @ d) for g, d in zip(grad, direction))
        if not slope < 0:
            # -P P* W^-1 g is a descent direction (or zero) for any projection P
            direction = []
            for s, g, op in zip(splits, grad, ops[1:-1]):
                p = s.p_second
                direction.append(-p.matrix @ (adjoint_l2(p).matrix @ (g / op.weights)))
            slope = sum(float(g @ d) for g, d in zip(grad, direction))
        if not slope < 0:
            converged, reason = True, "no horizontal descent direction"
            break

        step = 1.0
        accepted = None
        for _ in range(max_halvings):
            interior = pts[1:-1] + step * np.stack([unflatten(d) for d in direction])
            try:
                trial = _trial_path(c0, c1, interior, c0.scheme, arc0)
                trial_ops = [build(c) for c in trial.curves]
            except (NotImmersed, NotConstantSpeed) as exc:
                log.debug("step %.3g rejected: %s", step, exc)
                step *= 0.5
                continue
            trial_energy = _energy_from_ops(trial, trial_ops, rule)
            # the strict check keeps rounding from accepting a null step
            if trial_energy < energy and trial_energy <= energy + 1e-4 * step * slope:
                accepted = (trial, trial_ops, trial_energy)
                break
            step *= 0.5
        if accepted is None:
            converged, reason = True, "line search cannot decrease the energy further"
            break

        path, ops, new_energy = accepted
        decrease = (energy - new_energy) / energy if energy > 0 else 0.0
        energy = new_energy
        energies.append(energy)
        diagnostics.append(_diag_row(it, energy, _max_residual(path, ops), step))
        if decrease < tol:
            converged, reason = True, "relative energy decrease below tolerance"
            break

    if not converged:
        log.warning("horizontal_geodesic: no convergence after %d iterations", max_iters)
    return GeodesicResult(path, energies, diagnostics, converged, len(energies) - 1, reason)


def _max_residual(path: CurvePath, ops: list[LinOp]) -> float:
    res = [horizontality_residual(Metric(op, c), v)
           for op, c, v in zip(ops[:-1], path.curves[:-1], path.velocities())]
    return max(res) if res else 0.0


def _diag_row(it: int, energy: float, residual: float, step: float) -> dict:
    return {
        "iteration": it,
        "energy": energy,
        "max_horizontality_residual": residual,
        "step_size": step,
    }

