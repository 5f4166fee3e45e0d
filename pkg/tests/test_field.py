import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellstrip.boundary import BoundaryPair
from bellstrip.field import (
    FieldKind,
    Side,
    StationaryClass,
    classify_s,
    jacobian,
    normal_form,
    normal_form_eigen,
    spine_entry_slope,
    stationary_info,
    stationary_residual,
    velocity,
)
from bellstrip.spine import boundary_roots
from oracles import fd_jacobian, left_velocity, poly, right_velocity

coef = st.floats(-3, 3, allow_nan=False)

CASES = [
    (FieldKind.LEFT, Side.UPPER),
    (FieldKind.LEFT, Side.LOWER),
    (FieldKind.RIGHT, Side.LOWER),
    (FieldKind.RIGHT, Side.UPPER),
]


def test_velocity_matches_reference():
    p = BoundaryPair.from_coeffs([1, 0.3, 1, 0], [-0.4, 0.1, 0.2, 1])
    fp, fm = poly(1, 0.3, 1, 0), poly(-0.4, 0.1, 0.2, 1)
    x1, x2 = np.array([-0.7, 0.1, 1.3]), np.array([0.2, -0.35, 0.0])
    np.testing.assert_allclose(velocity(p, FieldKind.LEFT, x1, x2, 0.4), left_velocity(fp, fm, 0.4, x1, x2), rtol=1e-13, atol=1e-14)
    np.testing.assert_allclose(velocity(p, FieldKind.RIGHT, x1, x2, 0.4), right_velocity(fp, fm, 0.4, x1, x2), rtol=1e-13, atol=1e-14)


@given(st.tuples(coef, coef, coef, coef), st.tuples(coef, coef, coef, coef),
       st.floats(-2, 2), st.floats(-0.95, 0.95), st.floats(0.1, 2.0))
@settings(max_examples=100, deadline=None)
def test_jacobian_matches_fd(a, b, x1, r, eps):
    p = BoundaryPair.from_coeffs(a, b)
    x2 = r * eps
    for kind in FieldKind:
        J = jacobian(p, kind, x1, x2, eps)
        N = fd_jacobian(lambda u, v: velocity(p, kind, u, v, eps), x1, x2, h=1e-5)
        assert np.max(np.abs(J - N)) <= 1e-6 * max(1.0, np.max(np.abs(J)))


@pytest.mark.parametrize("kind, side", CASES)
def test_stationary_points_and_normal_form(kind, side):
    p = BoundaryPair.from_coeffs([1, 0, 1, 0], [-0.5, 0, 0, 0])
    eps = 0.45
    roots = boundary_roots(p, kind, side, eps)
    assert len(roots) == 2
    for u in roots:
        assert abs(stationary_residual(p, kind, side, u, eps)) < 1e-12
        v = velocity(p, kind, u, side.sign * eps, eps)
        assert np.hypot(*v) < 1e-12
        info = stationary_info(p, kind, side, u, eps)
        M = info.jacobian / info.prefactor
        N = normal_form(info.s)
        if (kind is FieldKind.LEFT) != (side is Side.UPPER):
            N = N * np.array([[1, -1], [-1, 1]])
        np.testing.assert_allclose(M, N, atol=1e-10 * max(1, abs(info.s)))


@pytest.mark.parametrize(
    "s, cls",
    [(2.0, StationaryClass.SADDLE), (-1.0, StationaryClass.SPIRAL), (-8.0, StationaryClass.IMPROPER_NODE),
     (-9.0, StationaryClass.NODE), (0.0, StationaryClass.DEGENERATE), (math.inf, StationaryClass.DEGENERATE)],
)
def test_classify_s(s, cls):
    assert classify_s(s) is cls


@given(st.floats(0.01, 50))
def test_entry_slope_is_an_eigendirection(s):
    lams, vecs = normal_form_eigen(s)
    M = normal_form(s)
    for lam, v in zip(lams, vecs):
        np.testing.assert_allclose(M @ v, lam * v, atol=1e-9 * max(1, s))
    v = vecs[0]
    assert v[0] / v[1] == pytest.approx(1.0 / spine_entry_slope(s), rel=1e-9, abs=1e-12)


def test_vertical_entry_at_one_third():
    assert spine_entry_slope(1.0 / 3.0) == math.inf


def test_eigenvalues_complex_in_spiral_band():
    lams, _ = normal_form_eigen(-3.0)
    assert abs(lams[0].imag) > 0
