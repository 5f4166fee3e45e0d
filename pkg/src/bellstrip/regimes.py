"""Critical strip widths, regime selection and assembly of the foliation."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import BoundaryPair, DiscriminantClass, SymmetryRecord, canonicalize
from .field import FieldKind, Side, stationary_info
from .patches import (
    FissureLeaf,
    HerringboneLeaf,
    Leaf,
    NotEvaluable,
    RectLeaf,
    SimpleLeaf,
    chord_frame,
    evaluate_leaves,
    rect_patch,
    spine_value_right,
)
from .spine import (
    SpineCurve,
    TraceControls,
    attach_midline_tail,
    boundary_roots,
    intersections,
    lower_pocket_curve,
    reflect_x2,
    upper_pocket_curve,
)


class Regime(enum.Enum):
    SIMPLE_RIGHT = "simple_right"
    SIMPLE_LEFT = "simple_left"
    ONE_POCKET = "one_pocket"
    TWO_POCKETS = "two_pockets"
    RECT = "rect_with_herringbones"
    ZERO_DISC_RECT = "zero_discriminant_rect"
    FISSURE_OPAQUE = "fissure_opaque"
    UNCLASSIFIED = "unclassified"

    @property
    def evaluable(self) -> bool:
        return self not in (Regime.FISSURE_OPAQUE, Regime.UNCLASSIFIED)


class MultipleIntersections(RuntimeError):
    pass


@dataclass
class CriticalEps:
    eps0_plus: float | None = None
    eps1_plus: float | None = None
    eps0_minus: float | None = None
    eps1_minus: float | None = None
    eps2: float | None = None
    u0_plus: float | None = None
    u0_minus: float | None = None
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("eps0_plus", "eps1_plus", "eps0_minus", "eps1_minus", "eps2",
                                              "u0_plus", "u0_minus", "flags")}


def critical_epsilons(pair: BoundaryPair) -> CriticalEps:
    """Closed-form critical widths of a canonical cubic pair; eps2 is left to `find_epsilon2`."""
    out = CriticalEps()
    p3, m3 = pair.plus.a3, pair.minus.a3
    if pair.equal_leading:
        out.flags.append("equal leading coefficients")
        return out
    cls = pair.discriminant_class()
    d = pair.delta
    t0, m = pair.vertex()
    if cls is DiscriminantClass.POSITIVE:
        out.flags.append("positive discriminant")
        return out
    if cls is DiscriminantClass.ZERO:
        out.flags.append("zero discriminant")
        out.eps0_plus = 0.0
        out.u0_plus = t0
        if m3 < 0:
            out.eps0_minus = 0.0
            out.u0_minus = t0
            out.eps2 = 0.0
            out.flags.append("always-intersecting")
        return out
    e0 = math.sqrt(m / (12.0 * p3))
    out.eps0_plus = e0
    out.u0_plus = e0 + t0
    if 80.0 * p3 - 81.0 * m3 > 0:
        out.eps1_plus = 9.0 * e0 * math.sqrt(d.a3 / (80.0 * p3 - 81.0 * m3))
    else:
        out.flags.append("left upper point is a node for all eps")
    if m3 < 0:
        e0m = math.sqrt(p3 / -m3) * e0
        out.eps0_minus = e0m
        out.u0_minus = -e0m + t0
        out.eps1_minus = 9.0 * e0m * math.sqrt(d.a3 / (81.0 * p3 - 80.0 * m3))
    return out


def upper_roots_closed(pair: BoundaryPair, eps: float):
    """u+^{l,r} from the vertex form; None below eps0+."""
    ce = critical_epsilons(pair)
    e0 = ce.eps0_plus
    if e0 is None or eps <= e0:
        return None
    d3 = pair.delta.a3
    r = 2.0 * math.sqrt(pair.plus.a3 / d3 * (eps * eps - e0 * e0))
    c = ce.u0_plus + (eps - e0)
    return c - r, c + r


def lower_roots_closed(pair: BoundaryPair, eps: float):
    ce = critical_epsilons(pair)
    e0 = ce.eps0_minus
    if e0 is None or eps <= e0:
        return None
    d3 = pair.delta.a3
    r = 2.0 * math.sqrt(-pair.minus.a3 / d3 * (eps * eps - e0 * e0))
    c = ce.u0_minus - eps + e0
    return c - r, c + r


def kappa_closed(pair: BoundaryPair, eps: float):
    """(kappa+^l, kappa+^r) at the upper roots."""
    ce = critical_epsilons(pair)
    k = math.sqrt(pair.plus.a3 / (pair.delta.a3 * (eps * eps - ce.eps0_plus ** 2)))
    return -k, k


# -- foliation ---------------------------------------------------------------------


@dataclass
class Interface:
    left: int
    right: int
    p: tuple[float, float]
    q: tuple[float, float]


@dataclass
class Foliation:
    pair: BoundaryPair  # canonical frame
    eps: float
    regime: Regime
    leaves: list[Leaf]
    interfaces: list[Interface] = field(default_factory=list)
    curves: dict[str, SpineCurve] = field(default_factory=dict)
    symmetry: SymmetryRecord = SymmetryRecord()
    original: BoundaryPair | None = None
    C: tuple[float, float] | None = None
    notes: list[str] = field(default_factory=list)
    marks: dict[str, float] = field(default_factory=dict)

    @property
    def center(self) -> float:
        pts = [v for k, v in self.marks.items() if math.isfinite(v)]
        return float(np.mean(pts)) if pts else 0.0

    def _canon(self, x1, x2):
        x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
        return self.symmetry.point_to_canonical(x1, x2)

    def locate(self, x1, x2, canonical: bool = False, tol: float = 1e-12):
        if not canonical:
            x1, x2 = self._canon(x1, x2)
        idx = np.full(np.shape(x1), -1, dtype=int)
        for k, leaf in enumerate(self.leaves):
            free = idx < 0
            if not free.any():
                break
            hit = np.zeros(np.shape(x1), dtype=bool)
            hit[free] = leaf.contains(x1[free], x2[free], tol)
            idx[hit] = k
        return idx

    def value(self, x1, x2):
        if not self.regime.evaluable:
            raise NotEvaluable(f"regime {self.regime.value}: not evaluable, outside the handled cases")
        y1, y2 = self._canon(x1, x2)
        self._check_strip(y2)
        return evaluate_leaves(self.leaves, self.locate(y1, y2, True), y1, y2)[0]

    def gradient(self, x1, x2):
        if not self.regime.evaluable:
            raise NotEvaluable(f"regime {self.regime.value}: not evaluable, outside the handled cases")
        y1, y2 = self._canon(x1, x2)
        self._check_strip(y2)
        _, g1, g2 = evaluate_leaves(self.leaves, self.locate(y1, y2, True), y1, y2, gradient=True)
        return self.symmetry.gradient_from_canonical(g1, g2)

    def _check_strip(self, x2):
        if np.any(np.abs(x2) > self.eps * (1 + 1e-12)):
            raise ValueError("point outside the strip |x2| <= eps")

    def to_dict(self) -> dict:
        return {
            "epsilon": self.eps,
            "regime": self.regime.value,
            "frame": {"swapped": self.symmetry.swapped, "reflected": self.symmetry.reflected},
            "C": None if self.C is None else list(self.C),
            "marks": self.marks,
            "notes": self.notes,
            "leaves": [leaf.to_dict() for leaf in self.leaves],
        }


def _simple_conditions_hold(pair: BoundaryPair, eps: float, orientation: str) -> bool:
    """(2.2)-type conditions for all u, for a pair with equal leading coefficients."""
    d = pair.delta
    a3 = pair.plus.a3
    if d.a2 != 0.0:
        return False
    if orientation == "right":
        return d.a1 - 12 * a3 * eps * eps >= 0 and d.a1 + 12 * a3 * eps * eps >= 0
    return d.a1 - 12 * a3 * eps * eps <= 0 and d.a1 + 12 * a3 * eps * eps <= 0


def _chord_interface(i, j, m, eps, label="m"):
    if label == "m":
        return Interface(i, j, (m - eps, -eps), (m + eps, eps))
    return Interface(i, j, (m + eps, -eps), (m - eps, eps))


def _pocket_curves(pair, eps, controls):
    up = upper_pocket_curve(pair, eps, controls)
    lo = lower_pocket_curve(pair, eps, controls) if pair.minus.a3 < 0 else None
    return up, lo


def find_C(up: SpineCurve | None, lo: SpineCurve | None):
    if up is None or lo is None:
        return None
    pts = intersections(up, reflect_x2(lo))
    if len(pts) > 1:
        raise MultipleIntersections(f"generating curves cross {len(pts)} times: {pts}")
    return pts[0] if pts else None


def regime_at(pair: BoundaryPair, eps: float, controls: TraceControls = TraceControls()) -> Regime:
    return build_foliation(pair, eps, controls).regime


def build_foliation(raw: BoundaryPair, eps: float, controls: TraceControls = TraceControls()) -> Foliation:
    if not eps > 0:
        raise ValueError("eps must be positive")
    pair, sym = canonicalize(raw)
    fol = Foliation(pair=pair, eps=eps, regime=Regime.UNCLASSIFIED, leaves=[], symmetry=sym, original=raw)
    inf = math.inf

    def simple_all(orientation):
        fol.leaves = [SimpleLeaf(pair, eps, -inf, inf, orientation)]
        fol.regime = Regime.SIMPLE_RIGHT if orientation == "right" else Regime.SIMPLE_LEFT
        return fol

    if pair.equal_leading:
        fol.notes.append("equal leading coefficients: only simple foliations are offered")
        for orientation in ("right", "left"):
            if _simple_conditions_hold(pair, eps, orientation):
                return simple_all(orientation)
        fol.notes.append("simple-foliation conditions fail; outside the handled cases")
        return fol

    cls = pair.discriminant_class()
    if cls is DiscriminantClass.ZERO:
        if pair.minus.a3 >= 0:
            fol.notes.append("zero discriminant with a3- >= 0: outside the handled cases")
            return fol
        return _zero_disc(fol, controls)
    if cls is DiscriminantClass.POSITIVE and pair.minus.a3 >= 0:
        fol.notes.append("positive discriminant with a3- >= 0: unclassified, outside the handled cases")
        return fol

    ce = critical_epsilons(pair)
    if cls is DiscriminantClass.NEGATIVE and eps <= ce.eps0_plus:
        return simple_all("right")

    up, lo = _pocket_curves(pair, eps, controls)
    if up is not None:
        fol.curves["ell_plus"] = up
    if lo is not None:
        fol.curves["ell_minus"] = lo
    try:
        C = find_C(up, lo)
    except MultipleIntersections as exc:
        if cls is not DiscriminantClass.POSITIVE:
            fol.notes.append(f"{exc}; no assembly is offered")
            return fol
        fol.notes.append(f"{exc}; treated as a fissure configuration")
        C = None
    if C is not None:
        return _rect(fol, up, lo, C)

    if cls is DiscriminantClass.POSITIVE:
        ur = boundary_roots(pair, FieldKind.LEFT, Side.UPPER, eps)[-1]
        ul = boundary_roots(pair, FieldKind.RIGHT, Side.LOWER, eps)[0]
        fol.leaves = [
            SimpleLeaf(pair, eps, -inf, ul),
            FissureLeaf(ul, ur),
            SimpleLeaf(pair, eps, ur, inf),
        ]
        fol.marks = {"u_minus_l": ul, "u_plus_r": ur}
        fol.regime = Regime.FISSURE_OPAQUE
        fol.notes.append("fissure foliation before eps2: not evaluable between the outer simple leaves")
        return fol

    vp, ur = up.end[0], up.start[0]
    W = HerringboneLeaf.left(pair, up)
    if lo is not None and lo.end[0] <= vp:
        ul, vm = lo.start[0], lo.end[0]
        E = HerringboneLeaf.right(pair, lo)
        fol.leaves = [
            SimpleLeaf(pair, eps, -inf, ul),
            E,
            SimpleLeaf(pair, eps, vm, vp),
            W,
            SimpleLeaf(pair, eps, ur, inf),
        ]
        fol.interfaces = [
            _chord_interface(0, 1, ul, eps),
            _chord_interface(1, 2, vm, eps),
            _chord_interface(2, 3, vp, eps),
            _chord_interface(3, 4, ur, eps),
        ]
        fol.marks = {"u_minus_l": ul, "v_minus": vm, "v_plus": vp, "u_plus_r": ur}
        fol.regime = Regime.TWO_POCKETS
        return fol
    fol.leaves = [SimpleLeaf(pair, eps, -inf, vp), W, SimpleLeaf(pair, eps, ur, inf)]
    fol.interfaces = [_chord_interface(0, 1, vp, eps), _chord_interface(1, 2, ur, eps)]
    fol.marks = {"v_plus": vp, "u_plus_r": ur}
    if lo is not None:
        fol.notes.append("lower generating curve lies above the upper one: single upper pocket persists")
    fol.regime = Regime.ONE_POCKET
    return fol


def _assemble_rect(fol: Foliation, up: SpineCurve, lo: SpineCurve, C, A_l=None, A_r=None):
    pair, eps, inf = fol.pair, fol.eps, math.inf
    C1, C2 = C
    ul, ur = lo.start[0], up.start[0]
    patch = rect_patch(pair, (C1, C2), eps, A_l=A_l, A_r=A_r)
    fol.leaves = [
        SimpleLeaf(pair, eps, -inf, ul),
        HerringboneLeaf.right(pair, lo, ul, C1),
        RectLeaf(patch),
        HerringboneLeaf.left(pair, up, C1, ur),
        SimpleLeaf(pair, eps, ur, inf),
    ]
    fol.interfaces = [
        _chord_interface(0, 1, ul, eps),
        Interface(1, 2, (C1 - eps, -C2), (C1 + C2, eps)),
        Interface(1, 2, (C1 - C2, -eps), (C1 - eps, -C2)),
        Interface(2, 3, (C1 + C2, eps), (C1 + eps, C2)),
        Interface(2, 3, (C1 - C2, -eps), (C1 + eps, C2)),
        _chord_interface(3, 4, ur, eps),
    ]
    fol.C = (float(C1), float(C2))
    fol.marks = {"u_minus_l": ul, "C1": C1, "u_plus_r": ur}
    return fol


def _rect(fol, up, lo, C):
    fol.regime = Regime.RECT
    return _assemble_rect(fol, up, lo, C)


def _zero_disc(fol: Foliation, controls: TraceControls, xi_stop: float = 1e-5, fit_hi: float = 2e-2):
    pair, eps = fol.pair, fol.eps
    u0, _ = pair.vertex()
    sc = eps
    up = upper_pocket_curve(pair, eps, controls, stop_x1=u0 + xi_stop * sc)
    lo = lower_pocket_curve(pair, eps, controls, stop_x1=u0 - xi_stop * sc)
    up = attach_midline_tail(up, u0, xi_stop * sc, fit_hi * sc)
    lo = attach_midline_tail(lo, u0, xi_stop * sc, fit_hi * sc)
    fol.curves = {"ell_plus": up, "ell_minus": lo}
    A_l = float(chord_frame(pair, u0, 0.0, eps, up.midline_end).A)
    A_r = float(spine_value_right(pair, u0, 0.0, eps, lo.midline_end))
    fol.regime = Regime.ZERO_DISC_RECT
    fol.notes.append(
        f"generating curves meet the midline at u0={u0!r} with curvatures "
        f"{up.midline_end[1]!r} and {lo.midline_end[1]!r}"
    )
    return _assemble_rect(fol, up, lo, (u0, 0.0), A_l, A_r)


# -- eps2 --------------------------------------------------------------------------


def has_intersection(pair: BoundaryPair, eps: float, controls: TraceControls = TraceControls(n_samples=401)) -> bool:
    up, lo = _pocket_curves(pair, eps, controls)
    return find_C(up, lo) is not None


def find_epsilon2(
    pair: BoundaryPair,
    lo: float | None = None,
    hi: float | None = None,
    tol: float = 1e-7,
    controls: TraceControls = TraceControls(n_samples=401),
    max_hi: float = 1e3,
):
    """Smallest eps at which the two generating curves share a point; None if never (eps2 = inf)."""
    pair, _ = canonicalize(pair)
    if pair.equal_leading or pair.minus.a3 >= 0:
        return None
    cls = pair.discriminant_class()
    ce = critical_epsilons(pair)
    if cls is DiscriminantClass.ZERO:
        return 0.0
    if lo is None:
        lo = ce.eps0_minus * (1 + 1e-9) if cls is DiscriminantClass.NEGATIVE else 1e-6
    if hi is None:
        hi = 2.0 * lo
        while not has_intersection(pair, hi, controls):
            hi *= 2.0
            if hi > max_hi:
                return None
    elif not has_intersection(pair, hi, controls):
        return None
    if has_intersection(pair, lo, controls):
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if has_intersection(pair, mid, controls):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
