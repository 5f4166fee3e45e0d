"""Local candidate formulas: simple leaves, herringbones around a spine, rectangles."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryPair
from .spine import SpineCurve


class NotEvaluable(ValueError):
    """The point lies in a region for which no formula is available."""


class OutsideLeaf(ValueError):
    pass


def _arr(x1, x2):
    x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
    return x1, x2


# -- simple leaves ---------------------------------------------------------------


def simple_right_value(pair: BoundaryPair, x1, x2, eps: float):
    """Linear along x1 - x2 = u between (u - eps, -eps) and (u + eps, eps)."""
    u = x1 - x2
    return ((eps + x2) * pair.plus(u + eps) + (eps - x2) * pair.minus(u - eps)) / (2.0 * eps)


def simple_right_gradient(pair: BoundaryPair, x1, x2, eps: float):
    u = x1 - x2
    Fp, Gm = pair.plus(u + eps), pair.minus(u - eps)
    g1 = ((eps + x2) * pair.plus(u + eps, 1) + (eps - x2) * pair.minus(u - eps, 1)) / (2.0 * eps)
    g2 = (Fp - Gm) / (2.0 * eps) - g1
    return g1, g2


def simple_left_value(pair: BoundaryPair, x1, x2, eps: float):
    return simple_right_value(pair.reflected(), -x1, x2, eps)


def simple_left_gradient(pair: BoundaryPair, x1, x2, eps: float):
    g1, g2 = simple_right_gradient(pair.reflected(), -x1, x2, eps)
    return -g1, g2


def simple_conditions(pair: BoundaryPair, u, eps: float, orientation: str = "right"):
    """(D+, D-) at (u, eps) for the right family, at (u, -eps) for the left one.

    The simple foliation is admissible where both are nonnegative.
    """
    if orientation == "right":
        return pair.d_plus_boundary(u, eps), pair.d_minus_boundary(u, eps)
    return pair.d_plus(u, -eps, eps), pair.d_minus(u, -eps, eps)


# -- herringbone frame -------------------------------------------------------------


@dataclass
class ChordFrame:
    """Data attached to a spine point: value A, chord rates R+/R-, and N."""

    A: np.ndarray
    Rp: np.ndarray
    Rm: np.ndarray
    N: np.ndarray


def chord_frame(pair: BoundaryPair, u, T, eps: float, midline_end=None) -> ChordFrame:
    """Frame of the left herringbone at the point (u, T) of its generating curve.

    The spine point is (u + eps, T); the upper chord runs to (u + T, eps),
    the lower one to (u - T, -eps).
    """
    u = np.asarray(u, dtype=float)
    T = np.asarray(T, dtype=float)
    F, G = pair.plus, pair.minus
    Fv, Gv = F(u + T), G(u - T)
    sp = F(u + T, 1) + G(u - T, 1)
    dp = pair.cross_diff_prime(u, T)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = dp / T
    if midline_end is not None:
        u0, c = midline_end
        lim = (F(u0, 3) - G(u0, 3)) / (2.0 * c) + F(u0, 2) + G(u0, 2)
        near = (np.abs(u - u0) <= 1e-12 * max(1.0, eps)) | (T == 0.0)
        q = np.where(near, lim, q)
    Q = eps * q + sp  # br / T
    A = (eps * eps - T * T) / (2.0 * eps) * Q + ((eps + T) * Fv + (eps - T) * Gv) / (2.0 * eps)
    Rp = (eps + T) / (2.0 * eps) * Q + (Gv - Fv) / (2.0 * eps)
    Rm = (eps - T) / (2.0 * eps) * Q + (Fv - Gv) / (2.0 * eps)
    return ChordFrame(A=A, Rp=Rp, Rm=Rm, N=0.5 * q)


def spine_value(pair: BoundaryPair, u, T, eps: float, midline_end=None):
    """Value at the spine point (u + eps, T) of a left herringbone."""
    return chord_frame(pair, u, T, eps, midline_end).A


def spine_value_right(pair: BoundaryPair, u, T, eps: float, midline_end=None):
    """Value at the spine point (u - eps, T) of a right herringbone generated by (u, T)."""
    me = None if midline_end is None else (-midline_end[0], midline_end[1])
    return chord_frame(pair.reflected(), -np.asarray(u, dtype=float), T, eps, me).A


# -- leaves ------------------------------------------------------------------------


class Leaf:
    name = "leaf"

    def contains(self, x1, x2, tol: float = 1e-12):
        raise NotImplementedError

    def value(self, x1, x2):
        raise NotImplementedError

    def gradient(self, x1, x2):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


class SimpleLeaf(Leaf):
    """Chords x1 - x2 = m (right) or x1 + x2 = w (left), label in [lo, hi]."""

    def __init__(self, pair: BoundaryPair, eps: float, lo: float, hi: float, orientation: str = "right"):
        self.pair, self.eps, self.lo, self.hi, self.orientation = pair, eps, lo, hi, orientation
        self.name = f"simple_{orientation}"

    def label(self, x1, x2):
        return x1 - x2 if self.orientation == "right" else x1 + x2

    def contains(self, x1, x2, tol=1e-12):
        x1, x2 = _arr(x1, x2)
        lab = self.label(x1, x2)
        return (lab >= self.lo - tol) & (lab <= self.hi + tol)

    def value(self, x1, x2):
        x1, x2 = _arr(x1, x2)
        if self.orientation == "right":
            return simple_right_value(self.pair, x1, x2, self.eps)
        return simple_left_value(self.pair, x1, x2, self.eps)

    def gradient(self, x1, x2):
        x1, x2 = _arr(x1, x2)
        if self.orientation == "right":
            return simple_right_gradient(self.pair, x1, x2, self.eps)
        return simple_left_gradient(self.pair, x1, x2, self.eps)

    def to_dict(self):
        return {"type": self.name, "params": {"lo": self.lo, "hi": self.hi}}


class HerringboneLeaf(Leaf):
    """Herringbone whose spine is a generating curve shifted by eps.

    Internally always a left herringbone; a right one is stored for the
    reflected pair on the mirrored curve and evaluated at (-x1, x2).
    """

    def __init__(self, pair: BoundaryPair, curve: SpineCurve, u_lo: float, u_hi: float, mirrored: bool = False):
        self.pair, self.curve, self.mirrored = pair, curve, mirrored
        self.eps = eps = curve.eps
        self.u_lo, self.u_hi = u_lo, u_hi
        self.name = "herringbone_right" if mirrored else "herringbone_left"
        sp = curve.spline
        inside = (curve.x1 > u_lo) & (curve.x1 < u_hi)
        xs = np.concatenate([[u_lo], curve.x1[inside], [u_hi]])
        self._x = xs
        self._T = sp(xs)
        self._S = sp(xs, 1)
        self._x[0], self._x[-1] = u_lo, u_hi
        self._gup = xs + self._T + eps
        self._glo = xs - self._T + eps
        # enforce monotone node labels against rounding
        self._gup = np.maximum.accumulate(self._gup)
        self._glo = np.maximum.accumulate(self._glo)

    @classmethod
    def left(cls, pair: BoundaryPair, curve: SpineCurve, u_lo=None, u_hi=None):
        lo, hi = curve.domain
        return cls(pair, curve, lo if u_lo is None else u_lo, hi if u_hi is None else u_hi)

    @classmethod
    def right(cls, pair: BoundaryPair, curve: SpineCurve, u_lo=None, u_hi=None):
        """From a right-field curve in the original frame; u_lo/u_hi in that frame."""
        lo, hi = curve.domain
        lo = lo if u_lo is None else u_lo
        hi = hi if u_hi is None else u_hi
        return cls(pair.reflected(), curve.mirrored(), -hi, -lo, mirrored=True)

    # local Hermite pieces
    def _piece(self, i, u):
        x0, x1 = self._x[i], self._x[i + 1]
        h = x1 - x0
        t = (u - x0) / h
        y0, y1 = self._T[i], self._T[i + 1]
        m0, m1 = self._S[i] * h, self._S[i + 1] * h
        t2, t3 = t * t, t * t * t
        T = (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1
        return T

    def _solve(self, lab, upper: bool):
        """Generating-curve abscissa u with u +/- T(u) + eps = lab (clamped)."""
        g = self._gup if upper else self._glo
        sg = 1.0 if upper else -1.0
        lab = np.clip(lab, g[0], g[-1])
        i = np.clip(np.searchsorted(g, lab, side="right") - 1, 0, len(g) - 2)
        a, b = self._x[i].copy(), self._x[i + 1].copy()
        for _ in range(60):
            mid = 0.5 * (a + b)
            val = mid + sg * self._piece(i, mid) + self.eps - lab
            below = val < 0
            a = np.where(below, mid, a)
            b = np.where(below, b, mid)
        u = 0.5 * (a + b)
        return u, self._piece(i, u)

    def _frame_at(self, x1, x2):
        x1, x2 = _arr(x1, x2)
        if self.mirrored:
            x1 = -x1
        uu, Tu = self._solve(x1 + x2, True)
        ul, Tl = self._solve(x1 - x2, False)
        up_ok = x2 >= Tu
        lo_ok = x2 <= Tl
        upper = np.where(up_ok == lo_ok, (x2 - Tu) > (Tl - x2), up_ok)
        u = np.where(upper, uu, ul)
        T = np.where(upper, Tu, Tl)
        return x1, x2, u, T, upper, up_ok, lo_ok, Tu, Tl

    def contains(self, x1, x2, tol=1e-12):
        x1, x2 = _arr(x1, x2)
        y1 = -x1 if self.mirrored else x1
        w, m = y1 + x2, y1 - x2
        in_up = (w >= self._gup[0] - tol) & (w <= self._gup[-1] + tol)
        in_lo = (m >= self._glo[0] - tol) & (m <= self._glo[-1] + tol)
        _, _, _, _, _, _, _, Tu, Tl = self._frame_at(x1, x2)
        return (in_up & (x2 >= Tu - tol)) | (in_lo & (x2 <= Tl + tol))

    def _eval(self, x1, x2):
        y1, x2, u, T, upper, *_ = self._frame_at(x1, x2)
        fr = chord_frame(self.pair, u, T, self.eps, self.curve.midline_end)
        eps = self.eps
        F, G = self.pair.plus, self.pair.minus
        val = np.where(upper, fr.A - (x2 - T) * fr.Rp, fr.A - (T - x2) * fr.Rm)
        g1u = (eps - x2) * fr.N + F(u + T, 1)
        g1l = (eps + x2) * fr.N + G(u - T, 1)
        g1 = np.where(upper, g1u, g1l)
        g2 = np.where(upper, g1u - fr.Rp, fr.Rm - g1l)
        if self.mirrored:
            g1 = -g1
        return val, g1, g2

    def value(self, x1, x2):
        return self._eval(x1, x2)[0]

    def gradient(self, x1, x2):
        _, g1, g2 = self._eval(x1, x2)
        return g1, g2

    def spine_points(self):
        """Spine in the evaluation frame as arrays (x1, x2)."""
        xs = self._x + self.eps
        if self.mirrored:
            return -xs[::-1], self._T[::-1]
        return xs, self._T

    def label_ranges(self):
        """((w_lo, w_hi), (m_lo, m_hi)) of upper and lower chords in the evaluation frame."""
        (a, b), (c, d) = (self._gup[0], self._gup[-1]), (self._glo[0], self._glo[-1])
        if self.mirrored:
            return (-d, -c), (-b, -a)
        return (a, b), (c, d)

    def to_dict(self):
        (wl, wh), (ml, mh) = self.label_ranges()
        return {
            "type": self.name,
            "params": {
                "u_lo": self.u_lo if not self.mirrored else -self.u_hi,
                "u_hi": self.u_hi if not self.mirrored else -self.u_lo,
                "upper_labels": [wl, wh] if not self.mirrored else None,
                "chord_labels": {"w": [wl, wh], "m": [ml, mh]},
                "spine_start": list(self.curve.start) if not self.mirrored else [-self.curve.start[0], self.curve.start[1]],
                "spine_end": list(self.curve.end) if not self.mirrored else [-self.curve.end[0], self.curve.end[1]],
            },
        }


@dataclass
class RectPatch:
    C: tuple[float, float]
    eps: float
    a: float
    b: float
    c: float
    d: float
    full: tuple[float, float, float, float] | None = None

    def value(self, x1, x2):
        return self.a * (x1 * x1 - x2 * x2) + self.b * x1 + self.c * x2 + self.d

    def gradient(self, x1, x2):
        return 2 * self.a * x1 + self.b, -2 * self.a * x2 + self.c

    def vertices(self):
        C1, C2, e = self.C[0], self.C[1], self.eps
        return [(C1 + C2, e), (C1 + e, C2), (C1 - C2, -e), (C1 - e, -C2)]


def rect_full_coefficients(pair: BoundaryPair, C, eps: float, A_l: float, A_r: float):
    """Bilinear coefficients from the four vertex values."""
    C1, C2 = C
    fp, fm = pair.plus(C1 + C2), pair.minus(C1 - C2)
    den = eps * eps - C2 * C2
    a = (A_r + A_l - fp - fm) / (4 * den)
    b = ((C1 - C2) * fp + (C1 + C2) * fm - (C1 - eps) * A_l - (C1 + eps) * A_r) / (2 * den)
    c = (eps * (fp - fm) + C2 * (A_r - A_l)) / (2 * den)
    d = (
        (eps * eps - (C1 - C2) ** 2) * fp
        + (eps * eps - (C1 + C2) ** 2) * fm
        + ((C1 - eps) ** 2 - C2 * C2) * A_l
        + ((C1 + eps) ** 2 - C2 * C2) * A_r
    ) / (4 * den)
    return a, b, c, d


def rect_simple_coefficients(pair: BoundaryPair, C, eps: float):
    C1, C2 = C
    F, G = pair.plus, pair.minus
    fp, fm = F(C1 + C2), G(C1 - C2)
    fp1, fm1 = F(C1 + C2, 1), G(C1 - C2, 1)
    a = pair.cross_diff_prime(C1, C2) / (4 * C2)
    b = ((C1 + C2) * fm1 - (C1 - C2) * fp1) / (2 * C2)
    c = (fp - fm - C2 * (fp1 + fm1)) / (2 * eps)
    k = C1 * C1 + eps * eps - C2 * C2
    d = (fp + fm) / 2 + ((k - 2 * C1 * C2) * fp1 - (k + 2 * C1 * C2) * fm1) / (4 * C2)
    return a, b, c, d


def rect_patch(pair: BoundaryPair, C, eps: float, A_l=None, A_r=None, midline_tol: float = 1e-6) -> RectPatch:
    """Rectangle with vertices (C1+C2, eps), C+eps, (C1-C2, -eps), C-bar-eps.

    Away from the midline the closed-form coefficients are used and the
    vertex system is kept as a cross-check; near it the vertex system with
    the supplied spine values is the definition.
    """
    C1, C2 = float(C[0]), float(C[1])
    if not abs(C2) < eps:
        raise ValueError("rectangle centre must lie strictly inside the strip")
    if A_l is None:
        A_l = float(spine_value(pair, C1, C2, eps))
    if A_r is None:
        A_r = float(spine_value_right(pair, C1, -C2, eps))
    full = rect_full_coefficients(pair, (C1, C2), eps, A_l, A_r)
    if abs(C2) >= midline_tol * eps:
        coef = rect_simple_coefficients(pair, (C1, C2), eps)
    else:
        coef = full
    return RectPatch((C1, C2), eps, *coef, full=full)


class RectLeaf(Leaf):
    name = "rect"

    def __init__(self, patch: RectPatch):
        self.patch = patch

    def contains(self, x1, x2, tol=1e-12):
        x1, x2 = _arr(x1, x2)
        (C1, C2), e = self.patch.C, self.patch.eps
        w, m = x1 + x2, x1 - x2
        return (
            (m >= C1 + C2 - e - tol) & (m <= C1 - C2 + e + tol) & (w >= C1 - C2 - e - tol) & (w <= C1 + C2 + e + tol)
        )

    def value(self, x1, x2):
        x1, x2 = _arr(x1, x2)
        return self.patch.value(x1, x2)

    def gradient(self, x1, x2):
        x1, x2 = _arr(x1, x2)
        return self.patch.gradient(x1, x2)

    def to_dict(self):
        p = self.patch
        return {"type": "rect", "params": {"C": list(p.C), "a": p.a, "b": p.b, "c": p.c, "d": p.d}}


class FissureLeaf(Leaf):
    """Placeholder for the region between a fissure's spines; no formula is offered."""

    name = "fissure"

    def __init__(self, lo: float, hi: float, label: str = "m"):
        self.lo, self.hi, self.label = lo, hi, label

    def contains(self, x1, x2, tol=1e-12):
        x1, x2 = _arr(x1, x2)
        lab = x1 - x2 if self.label == "m" else x1 + x2
        return (lab > self.lo + tol) & (lab < self.hi - tol)

    def value(self, x1, x2):
        raise NotEvaluable("point lies in a fissure leaf: no candidate formula is available there")

    gradient = value

    def to_dict(self):
        return {"type": "fissure", "params": {"lo": self.lo, "hi": self.hi, "label": self.label}}


def evaluate_leaves(leaves, idx, x1, x2, gradient: bool = False):
    """Dispatch points to leaves by index; index -1 yields NaN."""
    val = np.full(np.shape(x1), np.nan)
    g1 = np.full(np.shape(x1), np.nan)
    g2 = np.full(np.shape(x1), np.nan)
    for k, leaf in enumerate(leaves):
        sel = idx == k
        if not sel.any():
            continue
        val[sel] = leaf.value(x1[sel], x2[sel])
        if gradient:
            a, b = leaf.gradient(x1[sel], x2[sel])
            g1[sel], g2[sel] = a, b
    return val, g1, g2


def bellman_eval(foliation, x1, x2):
    return foliation.value(x1, x2)


def bellman_gradient(foliation, x1, x2):
    return foliation.gradient(x1, x2)
