import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellstrip.boundary import (
    BoundaryPair,
    Cubic,
    DiscriminantClass,
    MidlineDegenerate,
    canonicalize,
    quadratic_roots,
)

coef = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
cubic = st.tuples(coef, coef, coef, coef)


def test_cubic_derivatives():
    c = Cubic(2.0, -1.0, 3.0, 0.5)
    t = np.array([-1.5, 0.0, 2.0])
    np.testing.assert_allclose(c(t), 2 * t**3 - t**2 + 3 * t + 0.5)
    np.testing.assert_allclose(c(t, 1), 6 * t**2 - 2 * t + 3)
    np.testing.assert_allclose(c(t, 2), 12 * t - 2)
    np.testing.assert_allclose(c(t, 3), np.full(3, 12.0))
    assert c.reflected()(1.7) == pytest.approx(c(-1.7))


def test_json_roundtrip():
    p = BoundaryPair.from_coeffs([1, 0, 1, 0], [-1, 0, 0, 0])
    q = BoundaryPair.from_json(p.to_json())
    assert q == p
    with pytest.raises(ValueError):
        BoundaryPair.from_json(json.dumps({"f_plus": [1, 0, 0, 0]}))


@pytest.mark.parametrize(
    "fp, fm, cls",
    [
        ([1, 0, 1, 0], [0, 0, 0, 0], DiscriminantClass.NEGATIVE),
        ([1, 0, 1, 0], [-1, 0, 0, 0], DiscriminantClass.NEGATIVE),
        ([1, 0, 0, 0], [-1, 0, 0, 0], DiscriminantClass.ZERO),
        ([1, 0, -1, 0], [0, 0, 0, 0], DiscriminantClass.POSITIVE),
    ],
)
def test_discriminant_class(fp, fm, cls):
    assert BoundaryPair.from_coeffs(fp, fm).discriminant_class() is cls


def test_vertex_form():
    p = BoundaryPair.from_coeffs([2, 1, 3, 0], [-1, 0.5, 0, 4])
    t0, m = p.vertex()
    t = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(p.diff_prime(t), 3 * p.delta.a3 * (t - t0) ** 2 + m, rtol=1e-13, atol=1e-12)


def test_d_plus_minus_midline():
    p = BoundaryPair.from_coeffs([1, 0, 1, 0], [0, 0, 0, 0])
    with pytest.raises(MidlineDegenerate):
        p.d_plus(0.3, 0.0)
    # sign-only forms are defined everywhere
    assert np.isfinite(p.d_plus_sign(0.3, 0.0))


@given(cubic, cubic)
@settings(max_examples=200, deadline=None)
def test_canonicalize_invariants(a, b):
    raw = BoundaryPair.from_coeffs(a, b)
    pair, sym = canonicalize(raw)
    assert abs(pair.plus.a3) >= abs(pair.minus.a3)
    assert pair.plus.a3 >= 0
    # the canonical boundary data is the original data seen through the symmetry
    for x1 in (-1.3, 0.2, 2.1):
        for x2 in (1.0, -1.0):
            y1, y2 = sym.point_from_canonical(x1, x2)
            want = (raw.plus if y2 > 0 else raw.minus)(y1)
            got = (pair.plus if x2 > 0 else pair.minus)(x1)
            assert got == pytest.approx(want, rel=1e-12, abs=1e-12)
    again, sym2 = canonicalize(pair)
    assert again == pair and not sym2.swapped and not sym2.reflected


@given(coef, coef, coef)
@settings(max_examples=300, deadline=None)
def test_quadratic_roots(a, b, c):
    roots = quadratic_roots(a, b, c)
    assert list(roots) == sorted(roots)
    for r in roots:
        scale = max(1.0, abs(a) * r * r, abs(b * r), abs(c))
        assert abs(a * r * r + b * r + c) <= 1e-9 * scale
    if a != 0 and b * b - 4 * a * c > 1e-9 and abs(b / a) < 1e300:
        assert len(roots) == 2


def test_quadratic_roots_drops_unrepresentable_root():
    assert quadratic_roots(2.225073858507203e-309, 1.0, 0.0) == (0.0,)


def test_quadratic_roots_cancellation():
    # tiny root next to a large one keeps full relative accuracy
    r = quadratic_roots(1.0, -1e8, 1.0)
    assert r[0] == pytest.approx(1e-8, rel=1e-14)
    assert r[1] == pytest.approx(1e8, rel=1e-14)
