import math

import numpy as np
import pytest

from bellstrip.boundary import BoundaryPair
from bellstrip.patches import NotEvaluable
from bellstrip.regimes import Regime, build_foliation, critical_epsilons, find_epsilon2

POCKET = BoundaryPair.from_coeffs([1, 0, 1, 0], [0, 0, 0, 0])
TWO = BoundaryPair.from_coeffs([1, 0, 1, 0], [-1, 0, 0, 0])
ZERO = BoundaryPair.from_coeffs([1, 0, 0, 0], [-1, 0, 0, 0])

# hand values: eps0+ = sqrt(1/12); eps1+ = 9 eps0+ sqrt(da3 / (80 a3+ - 81 a3-))
EPS0 = math.sqrt(1 / 12)


def test_criticals_pocket_example():
    ce = critical_epsilons(POCKET)
    assert ce.eps0_plus == pytest.approx(EPS0, abs=1e-14)
    assert ce.eps1_plus == pytest.approx(9 * EPS0 / math.sqrt(80), abs=1e-14)
    assert ce.eps0_minus is None


def test_criticals_two_pocket_example():
    ce = critical_epsilons(TWO)
    assert ce.eps0_minus == pytest.approx(ce.eps0_plus, abs=1e-14)
    assert ce.eps1_plus == pytest.approx(9 * EPS0 * math.sqrt(2 / 161), abs=1e-14)
    assert ce.eps1_minus == pytest.approx(ce.eps1_plus, abs=1e-14)


@pytest.mark.parametrize(
    "pair, eps, regime, n_leaves",
    [
        (POCKET, 0.2, Regime.SIMPLE_RIGHT, 1),
        (POCKET, 0.29, Regime.ONE_POCKET, 3),
        (POCKET, 1.0, Regime.ONE_POCKET, 3),
        (TWO, 0.3, Regime.TWO_POCKETS, 5),
        (TWO, 0.4, Regime.RECT, 5),
        (ZERO, 0.5, Regime.ZERO_DISC_RECT, 5),
    ],
)
def test_regimes_of_examples(pair, eps, regime, n_leaves):
    fol = build_foliation(pair, eps)
    assert fol.regime is regime
    assert len(fol.leaves) == n_leaves


def test_eps2_between_pocket_and_rect():
    e2 = find_epsilon2(TWO)
    assert 0.3 < e2 < 0.35
    assert build_foliation(TWO, e2 * 0.99).regime is Regime.TWO_POCKETS
    assert build_foliation(TWO, e2 * 1.01).regime is Regime.RECT


def test_eps2_absent_without_lower_cubic_term():
    assert find_epsilon2(POCKET) is None
    assert find_epsilon2(ZERO) == 0.0


@pytest.mark.parametrize(
    "fp, fm",
    [([1, 0, 1, 0], [1, 0, 0, 0]), ([1, 0, -1, 0], [0, 0, 0, 0]), ([1, 0, 0, 0], [0, 0, 0, 0])],
)
def test_out_of_scope_pairs_refuse_evaluation(fp, fm):
    fol = build_foliation(BoundaryPair.from_coeffs(fp, fm), 0.3)
    assert fol.regime is Regime.UNCLASSIFIED
    assert fol.notes
    with pytest.raises(NotEvaluable):
        fol.value(0.0, 0.0)


def test_equal_cubics_are_unclassified():
    fol = build_foliation(BoundaryPair.from_coeffs([1, 0, 1, 0], [1, 0, 1, 0]), 0.5)
    assert fol.regime is Regime.UNCLASSIFIED


def test_equal_leading_small_eps_is_simple():
    fol = build_foliation(BoundaryPair.from_coeffs([1, 0, 1, 0], [1, 0, 0, 0]), 0.2)
    assert fol.regime is Regime.SIMPLE_RIGHT


def test_positive_discriminant_fissure():
    fol = build_foliation(BoundaryPair.from_coeffs([1, 0, -1, 0], [-1, 0, 0, 0]), 0.3)
    assert fol.regime is Regime.FISSURE_OPAQUE
    assert [leaf.name for leaf in fol.leaves] == ["simple_right", "fissure", "simple_right"]
    with pytest.raises(NotEvaluable):
        fol.value(0.0, 0.0)


def test_symmetry_frames_agree():
    # swapping f+ and f- mirrors the strip in x2; reflecting t mirrors it in x1
    a = build_foliation(POCKET, 0.35)
    b = build_foliation(BoundaryPair.from_coeffs([0, 0, 0, 0], [1, 0, 1, 0]), 0.35)
    c = build_foliation(BoundaryPair.from_coeffs([-1, 0, -1, 0], [0, 0, 0, 0]), 0.35)
    x1 = np.linspace(-1, 1.5, 15)
    x2 = np.linspace(-0.3, 0.3, 15)
    np.testing.assert_allclose(b.value(x1, -x2), a.value(x1, x2), rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(c.value(-x1, x2), a.value(x1, x2), rtol=1e-12, atol=1e-12)
    g1, g2 = a.gradient(x1, x2)
    h1, h2 = c.gradient(-x1, x2)
    np.testing.assert_allclose(h1, -g1, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(h2, g2, rtol=1e-10, atol=1e-12)


def test_outside_strip_raises():
    fol = build_foliation(POCKET, 0.35)
    with pytest.raises(ValueError):
        fol.value(0.0, 0.5)


def test_foliation_dict_is_json_ready():
    import json

    d = build_foliation(TWO, 0.4).to_dict()
    json.dumps(d)
    assert d["regime"] == "rect_with_herringbones"
    assert [leaf["type"] for leaf in d["leaves"]] == [
        "simple_right", "herringbone_right", "rect", "herringbone_left", "simple_right"]


@pytest.mark.parametrize("eps", [0.1, 0.5, 2.0])
def test_zero_discriminant_midline_values(eps):
    # T ~ c (x1)^2 near the origin with c * eps invariant; the rectangle vertex value is 3 eps^2 / c
    fol = build_foliation(ZERO, eps)
    c = fol.curves["ell_plus"].midline_end[1]
    assert c * eps == pytest.approx(0.608658, rel=1e-5)
    assert fol.value(eps, 0.0) == pytest.approx(3 * eps * eps / c, rel=1e-9)
    assert fol.value(eps, 0.0) == pytest.approx(4.928876 * eps**3, rel=1e-5)


def test_kappa_blows_up_at_birth():
    from bellstrip.field import FieldKind, Side, kappa
    from bellstrip.regimes import kappa_closed
    from bellstrip.spine import boundary_roots

    eps = EPS0 + 1e-6
    kl, kr = kappa_closed(POCKET, eps)
    assert kl < -1e3 and kr > 1e3
    ul, ur = boundary_roots(POCKET, FieldKind.LEFT, Side.UPPER, eps)
    assert kappa(POCKET, FieldKind.LEFT, Side.UPPER, ul, eps) == pytest.approx(kl, rel=1e-6)
    assert kappa(POCKET, FieldKind.LEFT, Side.UPPER, ur, eps) == pytest.approx(kr, rel=1e-6)
