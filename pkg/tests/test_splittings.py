import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvemetrics.curve import (
    arc_derivative,
    make_curve,
    random_smooth_fields,
    reparametrize_constant_speed,
    scalar_times,
)
from curvemetrics.errors import GridMismatch, NotConstantSpeed
from curvemetrics.linops import LinOp, adjoint_l2, apply
from curvemetrics.shapes import circle, ellipse, perturbed_circle
from curvemetrics.splittings import (
    Splitting,
    arc0_splitting,
    make_splitting,
    project_arc0,
    solve_b,
    speed_preservation_residual,
    tan_nor_splitting,
    verify_splitting,
)


def sup(x):
    return float(np.max(np.abs(x)))


@pytest.fixture(scope="module")
def resampled_ellipse():
    return reparametrize_constant_speed(ellipse(256))


# -- tangential / normal ----------------------------------------------------


def test_tan_nor_on_tangent_field():
    c = ellipse(64)
    s = tan_nor_splitting(c)
    tan, nor = s.project(c.tangent)
    assert sup(tan - c.tangent) < 1e-15
    assert sup(nor) < 1e-15
    assert s.labels == ("Tan", "Nor")


def test_tan_nor_constant_field_on_circle():
    c = circle(128)
    ex = np.tile([1.0, 0.0], (128, 1))
    _, nor = tan_nor_splitting(c).project(ex)
    expected = c.normal[:, :1] * c.normal
    assert sup(nor - expected) < 1e-12


def test_tan_nor_projections_are_self_adjoint():
    c = perturbed_circle(64)
    s = tan_nor_splitting(c)
    for p in (s.p_first, s.p_second):
        assert sup(adjoint_l2(p).matrix - p.matrix) < 1e-12


# -- the b equation ---------------------------------------------------------


def test_solve_b_examples():
    c = circle(256)
    assert sup(solve_b(c, np.ones(256))) < 1e-10
    assert sup(solve_b(c, np.cos(c.theta)) - np.sin(c.theta)) < 1e-3
    assert np.all(solve_b(c, np.zeros(256)) == 0)


def test_solve_b_requires_constant_speed():
    with pytest.raises(NotConstantSpeed):
        solve_b(ellipse(64), np.ones(64))
    with pytest.raises(NotConstantSpeed):
        arc0_splitting(ellipse(64))


def test_solve_b_grid_mismatch():
    with pytest.raises(GridMismatch):
        solve_b(circle(16), np.ones(8))


def test_solve_b_normalization_and_periodicity(resampled_ellipse, rng):
    c = resampled_ellipse
    a = random_smooth_fields(c.n, rng, 1, components=1)[0, :, 0]
    b = solve_b(c, a)
    assert b[0] == 0.0
    # closing the loop with the last trapezoid step returns to b(0)
    g = (a * c.curvature - np.sum(a * c.curvature * c.ds_weights) / c.total_length) * c.speed
    closing = b[-1] + 0.5 * (g[-1] + g[0]) * 2 * np.pi / c.n
    assert abs(closing) < 1e-12


def test_solve_b_satisfies_the_equation(resampled_ellipse, rng):
    c = resampled_ellipse
    a = random_smooth_fields(c.n, rng, 1, components=1)[0, :, 0]
    b = solve_b(c, a)
    lhs = arc_derivative(c, arc_derivative(c, b))
    rhs = arc_derivative(c, a * c.curvature)
    assert sup(lhs - rhs) < 5e-2 * sup(a * c.curvature)


def test_solve_b_batch_matches_columns(rng):
    c = circle(64)
    a = random_smooth_fields(64, rng, 3, components=1)[:, :, 0].T
    batch = solve_b(c, a)
    for j in range(3):
        assert np.array_equal(batch[:, j], solve_b(c, a[:, j]))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), lam=st.floats(-10, 10))
def test_solve_b_is_linear(seed, lam):
    c = perturbed_circle(64, 0.0)  # an exact circle through the polar constructor
    a1, a2 = random_smooth_fields(64, np.random.default_rng(seed), 2, components=1)[:, :, 0]
    lhs = solve_b(c, a1 + lam * a2)
    rhs = solve_b(c, a1) + lam * solve_b(c, a2)
    assert sup(lhs - rhs) < 1e-12 * max(1.0, abs(lam))


# -- Tan / Arc0 -------------------------------------------------------------


def test_arc0_examples():
    c = circle(256)
    s = arc0_splitting(c)
    tan, arc = s.project(c.normal)
    assert sup(arc - c.normal) < 1e-10
    assert sup(tan) < 1e-10
    k = scalar_times(np.cos(c.theta), c.normal)
    _, arc = s.project(k)
    expected = scalar_times(np.cos(c.theta), c.normal) + scalar_times(np.sin(c.theta), c.tangent)
    assert sup(arc - expected) < 1e-3
    tan, arc = s.project(c.tangent)
    assert sup(arc) < 1e-15
    assert sup(tan - c.tangent) < 1e-15
    assert s.labels == ("Tan", "Arc0")


def test_assembled_arc0_matches_direct_projection(resampled_ellipse, rng):
    c = resampled_ellipse
    s = arc0_splitting(c)
    for k in random_smooth_fields(c.n, rng, 3):
        tan, arc = project_arc0(c, k)
        assert sup(apply(s.p_first, k) - tan) < 1e-12
        assert sup(apply(s.p_second, k) - arc) < 1e-12


def test_arc0_complementarity_is_exact(resampled_ellipse):
    s = arc0_splitting(resampled_ellipse)
    eye = np.eye(2 * resampled_ellipse.n)
    assert sup(s.p_first.matrix + s.p_second.matrix - eye) < 1e-12


def test_make_splitting_tags():
    c = circle(16)
    assert make_splitting(c, "tan_nor").name == "tan_nor"
    assert make_splitting(c, "arc0").name == "tan_arc0"
    with pytest.raises(ValueError):
        make_splitting(c, "hor_ver")


# -- speed preservation -----------------------------------------------------


def test_speed_preservation_examples():
    c = circle(256)
    assert sup(speed_preservation_residual(c, c.normal)) < 2e-2


def test_speed_preservation_tangential_field():
    # h = sin(t) v on the unit circle: D_s h = cos v + sin n and
    # D_s^2 h = -2 sin v + 2 cos n, so the residual is -2 sin + sin = -sin
    c = circle(256)
    res = speed_preservation_residual(c, scalar_times(np.sin(c.theta), c.tangent))
    assert sup(res + np.sin(c.theta)) < 2e-2
    assert abs(sup(res) - 1) < 2e-2


def test_arc0_part_preserves_speed(rng):
    c = circle(256)
    for k in random_smooth_fields(256, rng, 5):
        _, h = project_arc0(c, k)
        assert sup(speed_preservation_residual(c, h)) < 5e-2 * sup(k)


@pytest.mark.parametrize("make", [circle, lambda n: reparametrize_constant_speed(ellipse(n))])
def test_arc0_speed_residual_converges_at_second_order(make):
    errs = []
    for n in (128, 256, 512):
        c = make(n)
        k = random_smooth_fields(n, np.random.default_rng(0), 1, max_mode=3)[0]
        _, h = project_arc0(c, k)
        errs.append(sup(speed_preservation_residual(c, h)))
    for a, b in zip(errs, errs[1:]):
        assert 3 <= a / b <= 5


def test_first_order_speed_preservation_at_fine_grid(rng):
    c = circle(1024)
    k = random_smooth_fields(1024, rng, 1, max_mode=3)[0]
    _, h = project_arc0(c, k)
    sig = [make_curve(c.points + eps * h).speed_deviation() for eps in (1e-3, 5e-4)]
    assert 3.5 <= sig[0] / sig[1] <= 4.5


def test_generic_field_changes_speed_at_first_order(rng):
    # contrast: a non-Arc0 field gives sigma(eps) ~ eps, ratio near 2
    c = circle(1024)
    h = scalar_times(np.sin(2 * c.theta), c.tangent)
    sig = [make_curve(c.points + eps * h).speed_deviation() for eps in (1e-3, 5e-4)]
    assert 1.9 <= sig[0] / sig[1] <= 2.1


# -- verification report ----------------------------------------------------


def test_verify_splitting_examples(resampled_ellipse):
    assert verify_splitting(tan_nor_splitting(ellipse(128)), tol=1e-10).passed
    assert verify_splitting(arc0_splitting(circle(256)), tol=1e-8).passed
    assert verify_splitting(arc0_splitting(resampled_ellipse), tol=1e-8).passed


def test_verify_splitting_detects_corruption():
    c = ellipse(64)
    s = tan_nor_splitting(c)
    bad = Splitting(LinOp(1.01 * s.p_first.matrix, c), s.p_second, s.labels, c)
    rep = verify_splitting(bad)
    assert not rep.passed
    assert abs(rep.idempotence_first - 0.0101) < 1e-3


def test_verify_splitting_json_keys():
    rep = verify_splitting(tan_nor_splitting(circle(16)))
    data = json.loads(json.dumps(rep.as_dict()))
    assert set(data) == {"idempotence_first", "idempotence_second", "complementarity",
                         "annihilation", "pass"}
    assert data["pass"] is True
