"""Integral curves of the spine fields: roots on the boundary, tracing, intersections."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .boundary import BoundaryPair
from .field import (
    FieldKind,
    Side,
    StationaryClass,
    StationaryPointInfo,
    slope_function,
    stationary_info,
    stationary_residual,
)


class ExitKind(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"
    NODE = "node"
    STOP = "stop"
    STEEP = "steep"
    SPAN = "span"


@dataclass(frozen=True)
class TraceControls:
    seed_offset: float = 1e-7  # relative to eps
    rtol: float = 1e-12
    atol: float = 1e-15
    n_samples: int = 4001
    span: float = 50.0  # in units of max(1, eps)
    node_snap: float = 1e-6
    slope_cap: float = 1e6


class NonTerminatingTrace(RuntimeError):
    pass


def _shift_and_sign(kind: FieldKind, side: Side):
    # residual(u) = sign * (df'(u + shift) - c) with c depending on eps
    if kind is FieldKind.LEFT and side is Side.UPPER:
        return -1.0, 1.0, "plus"
    if kind is FieldKind.LEFT and side is Side.LOWER:
        return -1.0, -1.0, "minus"
    if kind is FieldKind.RIGHT and side is Side.LOWER:
        return 1.0, 1.0, "minus"
    return 1.0, -1.0, "plus"


def boundary_roots(pair: BoundaryPair, kind: FieldKind, side: Side, eps: float) -> tuple[float, ...]:
    """Stationary abscissae of the field on the given boundary, increasing."""
    shift, _, which = _shift_and_sign(kind, side)
    a3 = pair.plus.a3 if which == "plus" else pair.minus.a3
    # df'(t) = target with t = u + shift*eps
    target = 12.0 * a3 * eps * eps if which == "plus" else -12.0 * a3 * eps * eps
    d = pair.delta
    if d.a3 == 0.0:
        if d.a2 == 0.0:
            return ()
        ts = ((target - d.a1) / (2.0 * d.a2),)
    else:
        t0, m = pair.vertex()
        r = (target - m) / (3.0 * d.a3)
        if r < 0.0:
            return ()
        q = math.sqrt(r)
        ts = (t0 - q, t0 + q) if q > 0 else (t0,)
    return tuple(sorted(t - shift * eps for t in ts))


def boundary_roots_numeric(pair, kind, side, eps, lo=-50.0, hi=50.0, n=20001):
    us = np.linspace(lo, hi, n)
    r = stationary_residual(pair, kind, side, us, eps)
    out = []
    for i in np.nonzero(np.sign(r[:-1]) * np.sign(r[1:]) <= 0)[0]:
        if r[i] == 0.0:
            out.append(float(us[i]))
            continue
        if r[i + 1] == 0.0:
            continue
        out.append(brentq(lambda t: stationary_residual(pair, kind, side, t, eps), us[i], us[i + 1], xtol=1e-15, rtol=1e-15))
    return tuple(out)


@dataclass
class SpineCurve:
    """A traced integral curve stored as a graph x2 = T(x1), x1 increasing."""

    kind: FieldKind
    eps: float
    x1: np.ndarray
    x2: np.ndarray
    slope: np.ndarray
    start: tuple[float, float]
    end: tuple[float, float]
    exit: ExitKind
    start_info: StationaryPointInfo | None = None
    end_info: StationaryPointInfo | None = None
    midline_end: tuple[float, float] | None = None  # (u0, c) with T ~ c (u - u0)^2
    _spline: CubicHermiteSpline | None = field(default=None, repr=False)

    @property
    def spline(self) -> CubicHermiteSpline:
        if self._spline is None:
            self._spline = CubicHermiteSpline(self.x1, self.x2, self.slope)
        return self._spline

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.x1[0]), float(self.x1[-1])

    def height(self, u):
        return self.spline(u)

    def slope_at(self, u):
        return self.spline(u, 1)

    def mirrored(self) -> "SpineCurve":
        """The curve under x1 -> -x1 (kind swapped, as for the reflected boundary pair)."""
        kind = FieldKind.LEFT if self.kind is FieldKind.RIGHT else FieldKind.RIGHT
        me = None if self.midline_end is None else (-self.midline_end[0], self.midline_end[1])
        return SpineCurve(
            kind=kind,
            eps=self.eps,
            x1=-self.x1[::-1].copy(),
            x2=self.x2[::-1].copy(),
            slope=-self.slope[::-1].copy(),
            start=(-self.start[0], self.start[1]),
            end=(-self.end[0], self.end[1]),
            exit=self.exit,
            start_info=self.start_info,
            end_info=self.end_info,
            midline_end=me,
        )

    def shifted(self, dx2: float) -> "SpineCurve":
        return replace(self, x2=self.x2 + dx2, _spline=None)

    def to_csv(self) -> str:
        lines = [f"# kind={self.kind.value} eps={self.eps!r} exit={self.exit.value}", "x1,x2,slope"]
        lines += [f"{a!r},{b!r},{c!r}" for a, b, c in zip(self.x1, self.x2, self.slope)]
        return "\n".join(lines) + "\n"


def _entry_direction(info: StationaryPointInfo) -> np.ndarray:
    positive = (info.kind is FieldKind.LEFT) == (info.side is Side.UPPER)
    v = info.direction_with_slope_sign(positive)
    if v is None:
        raise ValueError(f"no real eigendirection at the {info.cls.value} point u={info.u}")
    if v[1] * info.side.sign > 0:  # point into the strip
        v = -v
    return v


def trace_spine(
    pair: BoundaryPair,
    start: StationaryPointInfo,
    controls: TraceControls = TraceControls(),
    stop_x1: float | None = None,
) -> SpineCurve:
    eps = start.eps
    kind = start.kind
    v = _entry_direction(start)
    scale = max(1.0, eps)
    delta = controls.seed_offset * eps
    x0 = start.u + delta * v[0]
    y0 = start.side.sign * eps + delta * v[1]
    direction = 1.0 if v[0] > 0 else -1.0
    t_end = x0 + direction * controls.span * scale if stop_x1 is None else stop_x1
    slope = slope_function(pair, kind, eps)

    def rhs(t, y):
        return [slope(t, y[0])]

    def hit_upper(t, y):
        return y[0] - eps

    def hit_lower(t, y):
        return y[0] + eps

    def steep(t, y):
        return controls.slope_cap - abs(slope(t, y[0]))

    for ev in (hit_upper, hit_lower, steep):
        ev.terminal = True
    sol = solve_ivp(
        rhs,
        (x0, t_end),
        [y0],
        method="DOP853",
        rtol=controls.rtol,
        atol=controls.atol * scale,
        events=(hit_upper, hit_lower, steep),
        dense_output=True,
    )
    if sol.status < 0:
        raise NonTerminatingTrace(sol.message)
    exit_kind = ExitKind.STOP if stop_x1 is not None else ExitKind.SPAN
    x_end = sol.t[-1]
    y_end = sol.y[0, -1]
    if sol.status == 1:
        if sol.t_events[0].size:
            exit_kind, x_end, y_end = ExitKind.UPPER, sol.t_events[0][0], eps
        elif sol.t_events[1].size:
            exit_kind, x_end, y_end = ExitKind.LOWER, sol.t_events[1][0], -eps
        else:
            exit_kind = ExitKind.STEEP
            x_end, y_end = sol.t_events[2][0], sol.y_events[2][0][0]
    if exit_kind is ExitKind.SPAN:
        raise NonTerminatingTrace(f"curve from u={start.u} did not terminate within {controls.span * scale}")

    end_info = None
    if exit_kind in (ExitKind.UPPER, ExitKind.LOWER):
        side = Side.UPPER if exit_kind is ExitKind.UPPER else Side.LOWER
        for r in boundary_roots(pair, kind, side, eps):
            if abs(r - x_end) <= controls.node_snap * scale:
                info = stationary_info(pair, kind, side, r, eps)
                if info.cls in (StationaryClass.NODE, StationaryClass.IMPROPER_NODE):
                    exit_kind, x_end, end_info = ExitKind.NODE, r, info

    grid = np.linspace(x0, x_end, controls.n_samples)
    inner = np.concatenate([grid[1:-1], sol.t[(sol.t - x0) * direction < (x_end - x0) * direction]])
    xs = np.unique(inner)
    ys = sol.sol(xs)[0]
    sl = np.array([slope(a, b) for a, b in zip(xs, ys)])
    start_slope = v[1] / v[0]
    y_end_f = float(y_end)
    if exit_kind is ExitKind.NODE:
        last = sl[np.argmin(np.abs(xs - x_end))]
        cands = [d[1] / d[0] for d in end_info.real_directions() if d[0] != 0.0]
        end_slope = min(cands, key=lambda c: abs(c - last)) if cands else last
    else:
        end_slope = slope(x_end, y_end_f)
    xs = np.concatenate([[start.u], xs, [x_end]])
    ys = np.concatenate([[start.side.sign * eps], ys, [y_end_f]])
    sl = np.concatenate([[start_slope], sl, [end_slope]])
    order = np.argsort(xs)
    xs, ys, sl = xs[order], ys[order], sl[order]
    keep = np.concatenate([[True], np.diff(xs) > 0])
    return SpineCurve(
        kind=kind,
        eps=eps,
        x1=xs[keep],
        x2=ys[keep],
        slope=sl[keep],
        start=start.point,
        end=(float(x_end), y_end_f),
        exit=exit_kind,
        start_info=start,
        end_info=end_info,
    )


def attach_midline_tail(curve: SpineCurve, u0: float, xi_stop: float, fit_hi: float, degree: int = 4) -> SpineCurve:
    """Close a curve that runs into the midline stationary point (u0, 0).

    Near that point T ~ c (u - u0)^2; T / xi^2 is fitted by a polynomial on
    xi_stop <= |xi| <= fit_hi and used below xi_stop.
    """
    xi = curve.x1 - u0
    sel = (np.abs(xi) >= xi_stop) & (np.abs(xi) <= fit_hi)
    coef = np.polynomial.polynomial.polyfit(xi[sel], curve.x2[sel] / xi[sel] ** 2, degree)
    p = np.polynomial.Polynomial(coef)
    q = np.polynomial.Polynomial([0.0, 0.0, 1.0]) * p
    sgn = 1.0 if np.median(xi) > 0 else -1.0
    tail = sgn * np.linspace(0.0, xi_stop, 40)[:-1]
    keep = np.abs(xi) > xi_stop * (1 - 1e-12)
    xs = np.concatenate([u0 + tail, curve.x1[keep]])
    ys = np.concatenate([q(tail), curve.x2[keep]])
    sl = np.concatenate([q.deriv()(tail), curve.slope[keep]])
    order = np.argsort(xs)
    return replace(
        curve,
        x1=xs[order],
        x2=ys[order],
        slope=sl[order],
        end=(u0, 0.0),
        midline_end=(u0, float(coef[0])),
        _spline=None,
    )


def intersections(a: SpineCurve, b: SpineCurve, n: int = 4001) -> list[tuple[float, float]]:
    """Transversal crossings of two graphs over their common x1-range."""
    lo = max(a.domain[0], b.domain[0])
    hi = min(a.domain[1], b.domain[1])
    if not lo < hi:
        return []
    xs = np.linspace(lo, hi, n)
    h = b.height(xs) - a.height(xs)
    out = []
    for i in np.nonzero(np.sign(h[:-1]) * np.sign(h[1:]) < 0)[0]:
        x = brentq(lambda t: float(b.height(t) - a.height(t)), xs[i], xs[i + 1], xtol=1e-15, rtol=1e-15)
        out.append((x, float(a.height(x))))
    return out


# -- pocket curves ---------------------------------------------------------------


def upper_pocket_curve(pair: BoundaryPair, eps: float, controls: TraceControls = TraceControls(), stop_x1=None):
    """The left-field curve leaving (u+^r, eps) with positive slope, or None."""
    roots = boundary_roots(pair, FieldKind.LEFT, Side.UPPER, eps)
    if len(roots) < 2 or roots[0] == roots[1]:
        return None
    info = stationary_info(pair, FieldKind.LEFT, Side.UPPER, roots[1], eps)
    return trace_spine(pair, info, controls, stop_x1=stop_x1)


def lower_pocket_curve(pair: BoundaryPair, eps: float, controls: TraceControls = TraceControls(), stop_x1=None):
    """The right-field curve leaving (u-^l, -eps) with positive slope, or None."""
    roots = boundary_roots(pair, FieldKind.RIGHT, Side.LOWER, eps)
    if len(roots) < 2 or roots[0] == roots[1]:
        return None
    info = stationary_info(pair, FieldKind.RIGHT, Side.LOWER, roots[0], eps)
    return trace_spine(pair, info, controls, stop_x1=stop_x1)


def reflect_x2(curve: SpineCurve) -> SpineCurve:
    """Image under x2 -> -x2; a right-field curve becomes a graph in the left-field frame."""
    return replace(curve, x2=-curve.x2, slope=-curve.slope, start=(curve.start[0], -curve.start[1]),
                   end=(curve.end[0], -curve.end[1]), _spline=None)
