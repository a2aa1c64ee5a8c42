"""Discrete closed planar curves and their differential geometry.

A curve is stored as ``n`` samples ``c(theta_j)`` on the uniform grid
``theta_j = 2*pi*j/n``. Scalar fields are arrays of shape ``(n,)``, tangent
fields (vector fields along the curve) are arrays of shape ``(n, 2)``.

Orientation convention: ``i`` is rotation by +pi/2, the unit normal is
``n = i v``. For a counterclockwise circle this gives curvature ``+1/r`` and an
inward pointing normal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import GridMismatch, GridTooSmall, NotADiffeo, NotConstantSpeed, NotImmersed

TWO_PI = 2.0 * np.pi
SCHEMES = ("central", "spectral")
IMMERSION_THRESHOLD = 1e-8
CONSTANT_SPEED_TOL = 1e-3


def grid(n: int) -> np.ndarray:
    return TWO_PI * np.arange(n) / n


def rotate(x: np.ndarray) -> np.ndarray:
    """Rotate planar vectors (last axis of length 2) by +pi/2."""
    out = np.empty_like(x)
    out[..., 0] = -x[..., 1]
    out[..., 1] = x[..., 0]
    return out


def dot(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pointwise Euclidean inner product of two tangent fields."""
    return x[..., 0] * y[..., 0] + x[..., 1] * y[..., 1]


def _check_scheme(scheme: str) -> None:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown derivative scheme {scheme!r}; expected one of {SCHEMES}")


def _spectral_multiplier(n: int, order: int) -> np.ndarray:
    k = np.fft.fftfreq(n, 1.0 / n)
    mult = (1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        # Nyquist mode has no real odd derivative; dropping it keeps D skew.
        mult[n // 2] = 0.0
    return mult


def derivative_theta(f: np.ndarray, scheme: str = "central") -> np.ndarray:
    """Periodic derivative with respect to theta along axis 0.

    The default scheme is the second order central difference
    ``(f[j+1] - f[j-1]) / (2 dtheta)`` with indices taken mod n.
    """
    _check_scheme(scheme)
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    if scheme == "central":
        return (np.roll(f, -1, axis=0) - np.roll(f, 1, axis=0)) * (n / (2.0 * TWO_PI))
    mult = _spectral_multiplier(n, 1).reshape((n,) + (1,) * (f.ndim - 1))
    return np.real(np.fft.ifft(mult * np.fft.fft(f, axis=0), axis=0))


def second_derivative_theta(f: np.ndarray, scheme: str = "central") -> np.ndarray:
    """Compact three point second difference (or its spectral counterpart)."""
    _check_scheme(scheme)
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    if scheme == "central":
        h = TWO_PI / n
        return (np.roll(f, -1, axis=0) - 2.0 * f + np.roll(f, 1, axis=0)) / (h * h)
    mult = _spectral_multiplier(n, 2).reshape((n,) + (1,) * (f.ndim - 1))
    return np.real(np.fft.ifft(mult * np.fft.fft(f, axis=0), axis=0))


def diff_matrix(n: int, scheme: str = "central") -> np.ndarray:
    """Dense ``(n, n)`` matrix of :func:`derivative_theta`; skew-symmetric."""
    return derivative_theta(np.eye(n), scheme)


@dataclass(frozen=True, eq=False)
class DiscreteCurve:
    """Immutable sampled closed curve with cached geometric quantities.

    Use :func:`make_curve` to build one; the constructor validates the
    immersion condition.
    """

    points: np.ndarray
    scheme: str = "central"

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must have shape (n, 2), got {pts.shape}")
        n = pts.shape[0]
        if n < 8 or n % 2:
            raise GridTooSmall(f"grid size must be even and >= 8, got {n}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points contain non-finite values")
        _check_scheme(self.scheme)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

        chords = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        mean_chord = chords.mean()
        if mean_chord == 0.0 or chords.min() < IMMERSION_THRESHOLD * mean_chord:
            raise NotImmersed(f"degenerate chord at index {int(np.argmin(chords))}")
        speed = self.speed
        if speed.min() < IMMERSION_THRESHOLD * speed.mean():
            raise NotImmersed(f"vanishing speed at index {int(np.argmin(speed))}")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @cached_property
    def theta(self) -> np.ndarray:
        return grid(self.n)

    @cached_property
    def velocity(self) -> np.ndarray:
        return derivative_theta(self.points, self.scheme)

    @cached_property
    def speed(self) -> np.ndarray:
        return np.linalg.norm(self.velocity, axis=1)

    @cached_property
    def ds_weights(self) -> np.ndarray:
        return self.speed * (TWO_PI / self.n)

    @cached_property
    def tangent(self) -> np.ndarray:
        return self.velocity / self.speed[:, None]

    @cached_property
    def normal(self) -> np.ndarray:
        return rotate(self.tangent)

    @cached_property
    def curvature(self) -> np.ndarray:
        # <c'', n> / |c'|^2 with the compact second difference: an O(n^-2)
        # approximation of <D_s v, n> that does not degenerate on circles.
        acc = second_derivative_theta(self.points, self.scheme)
        return dot(acc, self.normal) / self.speed**2

    @cached_property
    def total_length(self) -> float:
        return float(self.ds_weights.sum())

    def speed_deviation(self) -> float:
        """Relative standard deviation of the speed field."""
        return float(np.std(self.speed) / np.mean(self.speed))

    def is_constant_speed(self, tol: float = CONSTANT_SPEED_TOL) -> bool:
        return self.speed_deviation() < tol

    def require_constant_speed(self, tol: float = CONSTANT_SPEED_TOL) -> None:
        dev = self.speed_deviation()
        if not dev < tol:
            raise NotConstantSpeed(f"relative speed deviation {dev:.3g} exceeds {tol:g}")

    def translated(self, offset) -> "DiscreteCurve":
        return DiscreteCurve(self.points + np.asarray(offset, dtype=float), self.scheme)


def make_curve(points, scheme: str = "central") -> DiscreteCurve:
    return DiscreteCurve(np.asarray(points, dtype=float), scheme)


def check_scalar(c: DiscreteCurve, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (c.n,):
        raise GridMismatch(f"scalar field of shape {f.shape} on a curve with n={c.n}")
    return f


def check_tangent(c: DiscreteCurve, h) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.shape != (c.n, 2):
        raise GridMismatch(f"tangent field of shape {h.shape} on a curve with n={c.n}")
    return h


def _check_field(c: DiscreteCurve, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape not in ((c.n,), (c.n, 2)):
        raise GridMismatch(f"field of shape {f.shape} on a curve with n={c.n}")
    return f


def arc_derivative(c: DiscreteCurve, f) -> np.ndarray:
    """D_s f = (d/dtheta f) / |c'|, for scalar or tangent fields."""
    f = _check_field(c, f)
    df = derivative_theta(f, c.scheme)
    if f.ndim == 1:
        return df / c.speed
    return df / c.speed[:, None]


def l2_inner(c: DiscreteCurve, h, k) -> float:
    """Reparametrization invariant L^2 pairing ``sum_j <h_j, k_j> ds_j``."""
    h = check_tangent(c, h)
    k = check_tangent(c, k)
    return float(np.sum(dot(h, k) * c.ds_weights))


def l2_norm(c: DiscreteCurve, h) -> float:
    return float(np.sqrt(max(l2_inner(c, h, h), 0.0)))


def volume_form_variation(c: DiscreteCurve, h) -> np.ndarray:
    """Density ``<v, D_s h>`` of the first variation of ``ds`` in direction h."""
    h = check_tangent(c, h)
    return dot(c.tangent, arc_derivative(c, h))


def scalar_times(f: np.ndarray, field: np.ndarray) -> np.ndarray:
    return np.asarray(f)[:, None] * field


def random_smooth_fields(n: int, rng: np.random.Generator, count: int, max_mode: int = 6,
                         components: int = 2) -> np.ndarray:
    """``count`` random trigonometric polynomials, shape ``(count, n, components)``.

    Mode ``m`` coefficients are standard normal scaled by ``1/(1+m)``.
    """
    theta = grid(n)
    modes = np.arange(max_mode + 1)
    basis = np.concatenate([np.cos(np.outer(modes, theta)), np.sin(np.outer(modes, theta))])
    decay = np.tile(1.0 / (1.0 + modes), 2)
    coef = rng.standard_normal((count, basis.shape[0], components)) * decay[None, :, None]
    return np.einsum("bj,cbk->cjk", basis, coef)


def random_smooth_field(n: int, rng: np.random.Generator, max_mode: int = 6,
                        components: int = 2) -> np.ndarray:
    out = random_smooth_fields(n, rng, 1, max_mode, components)[0]
    return out[:, 0] if components == 1 else out


# ---------------------------------------------------------------------------
# Reparametrizations


@dataclass(frozen=True, eq=False)
class Diffeo:
    """Orientation preserving circle diffeomorphism sampled on the grid.

    ``values[j]`` is a lift of ``phi(theta_j)``: strictly increasing, with
    total increase below 2*pi so that ``phi(theta + 2pi) = phi(theta) + 2pi``.
    """

    values: np.ndarray = field()

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2 or not np.all(np.isfinite(vals)):
            raise NotADiffeo("diffeo values must be a finite 1-d array")
        steps = np.diff(np.append(vals, vals[0] + TWO_PI))
        if np.any(steps <= 0.0):
            raise NotADiffeo("diffeo values are not strictly increasing with winding one")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size

    @classmethod
    def identity(cls, n: int) -> "Diffeo":
        return cls(grid(n))

    @classmethod
    def grid_shift(cls, n: int, shift: int = 1) -> "Diffeo":
        return cls(grid(n) + TWO_PI * shift / n)

    @classmethod
    def from_function(cls, fn, n: int) -> "Diffeo":
        return cls(fn(grid(n)))

    def index_shift(self, tol: float = 1e-12) -> int | None:
        """Integer ``k`` if this is exactly ``theta -> theta + 2 pi k / n``."""
        offset = (self.values - grid(self.n)) * self.n / TWO_PI
        k = np.rint(offset[0])
        if np.all(np.abs(offset - k) < tol):
            return int(k)
        return None

    def inverse(self) -> "Diffeo":
        """Discrete inverse by monotone interpolation of the sampled graph."""
        from scipy.interpolate import PchipInterpolator

        n = self.n
        theta = grid(n)
        # Extend the lifted graph by one period on each side.
        x = np.concatenate([self.values - TWO_PI, self.values, self.values + TWO_PI])
        y = np.concatenate([theta - TWO_PI, theta, theta + TWO_PI])
        inv = PchipInterpolator(x, y)(theta)
        return Diffeo(inv)


def _periodic_spline(values: np.ndarray) -> CubicSpline:
    n = values.shape[0]
    x = TWO_PI * np.arange(n + 1) / n
    y = np.concatenate([values, values[:1]], axis=0)
    return CubicSpline(x, y, axis=0, bc_type="periodic")


def _compose(values: np.ndarray, phi: Diffeo) -> np.ndarray:
    if phi.n != values.shape[0]:
        raise GridMismatch(f"diffeo on n={phi.n} applied to field with n={values.shape[0]}")
    k = phi.index_shift()
    if k is not None:
        return np.roll(values, -k, axis=0)
    return _periodic_spline(values)(np.mod(phi.values, TWO_PI))


def apply_diffeo(c: DiscreteCurve, phi: Diffeo) -> DiscreteCurve:
    """Samples of ``c o phi`` via periodic cubic interpolation of c."""
    return DiscreteCurve(_compose(c.points, phi), c.scheme)


def apply_diffeo_field(h, phi: Diffeo, c: DiscreteCurve) -> np.ndarray:
    """Samples of ``h o phi`` for a (scalar or tangent) field along c."""
    h = _check_field(c, h)
    return _compose(h, phi)


_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(5)


def _segment_lengths(spline: CubicSpline, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    t = mid[:, None] + half[:, None] * _GAUSS_X[None, :]
    speed = np.linalg.norm(spline(t, 1), axis=-1)
    return half * (speed @ _GAUSS_W)


def constant_speed_diffeo(c: DiscreteCurve, oversample: int = 8, newton_steps: int = 2,
                          equalize_steps: int = 2) -> Diffeo:
    """Diffeo ``phi`` with ``phi(0) = 0`` such that ``c o phi`` has constant speed.

    Arclength of the periodic cubic interpolant is tabulated on an
    ``oversample``-times finer grid, inverted by monotone linear lookup and
    polished with Newton steps on the interpolant. Equal arclength steps still
    leave an O(h^2 kappa^2) variation in the finite difference speed, so the
    arclength spacing is then rescaled locally (``equalize_steps`` times) by
    the discrete speed relative to its mean.
    """
    spline = _periodic_spline(c.points)
    m = oversample * c.n
    t = TWO_PI * np.arange(m + 1) / m
    cum = np.concatenate([[0.0], np.cumsum(_segment_lengths(spline, t[:-1], t[1:]))])
    length = cum[-1]

    def invert(targets):
        phi = np.interp(targets, cum, t)
        for _ in range(newton_steps):
            idx = np.clip(np.searchsorted(t, phi, side="right") - 1, 0, m - 1)
            s = cum[idx] + _segment_lengths(spline, t[idx], phi)
            phi = phi - (s - targets) / np.linalg.norm(spline(phi, 1), axis=-1)
        phi[0] = 0.0
        return phi

    targets = length * np.arange(c.n) / c.n
    phi = invert(targets)
    for _ in range(equalize_steps):
        speed = DiscreteCurve(spline(phi), c.scheme).speed
        steps = np.diff(np.append(targets, length))
        # shrink intervals whose end nodes are fast, stretch the slow ones
        ratio = speed / speed.mean()
        steps = steps / (0.5 * (ratio + np.roll(ratio, -1)))
        targets = np.concatenate([[0.0], np.cumsum(steps)[:-1]]) * (length / steps.sum())
        phi = invert(targets)
    return Diffeo(phi)


def reparametrize_constant_speed(c: DiscreteCurve, oversample: int = 8) -> DiscreteCurve:
    """Resample c so that it is traversed with constant speed; c(0) is kept."""
    return apply_diffeo(c, constant_speed_diffeo(c, oversample))
