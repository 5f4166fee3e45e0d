"""Numerical property suites for a constructed foliation."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from .boundary import BoundaryPair
from .field import FieldKind, curve_values, normal_form, spine_entry_slope, velocity
from .patches import HerringboneLeaf, RectLeaf, SimpleLeaf, chord_frame, spine_value_right
from .regimes import Foliation, Interface
from .spine import SpineCurve, reflect_x2


@dataclass(frozen=True)
class Tolerances:
    value: float = 1e-9
    gradient: float = 1e-6
    concavity: float = 1e-8
    ordering: float = 1e-9
    fd: float = 1e-5
    fd_step: float = 1e-5
    identity: float = 1e-10


@dataclass(frozen=True)
class VerifyConfig:
    tol: Tolerances = Tolerances()
    seed: int = 0
    window: float = 10.0  # half-width in units of max(1, eps)
    n_concavity: int = 4000
    n_fd: int = 500
    n_interface: int = 200
    n_simple: int = 1000
    n_boundary: int = 1000


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    location: list | None = None
    tolerance: float | None = None
    detail: str = ""


@dataclass
class VerificationReport:
    eps: float
    regime: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def get(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"eps": self.eps, "regime": self.regime, "passed": self.passed,
                "checks": [asdict(c) for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=float)

    def to_text(self) -> str:
        lines = [f"eps={self.eps!r} regime={self.regime} -> {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            loc = "" if c.location is None else f" at {np.round(c.location, 6).tolist()}"
            lines.append(f"  [{'ok' if c.passed else 'FAIL'}] {c.name}: worst={c.worst:.3e} tol={c.tolerance}{loc} {c.detail}".rstrip())
        return "\n".join(lines)


def _worst(name, res, pts, tol, detail=""):
    res = np.asarray(res, dtype=float)
    if res.size == 0:
        return CheckResult(name, True, 0.0, None, tol, detail or "no samples")
    bad = ~np.isfinite(res)
    if bad.any():
        i = int(np.argmax(bad))
        return CheckResult(name, False, math.inf, [float(v) for v in np.asarray(pts)[:, i]], tol, "non-finite residual")
    i = int(np.argmax(res))
    return CheckResult(name, bool(res[i] <= tol), float(res[i]), [float(v) for v in np.asarray(pts)[:, i]], tol, detail)


def _window(fol: Foliation, cfg: VerifyConfig):
    W = cfg.window * max(1.0, fol.eps)
    c = fol.center
    return c - W, c + W


def _focus_window(fol: Foliation):
    """Region around the non-simple leaves, where most of the structure lives."""
    xs = []
    for leaf in fol.leaves:
        if isinstance(leaf, HerringboneLeaf):
            a, b = leaf.spine_points()
            xs += [a.min(), a.max()]
        elif isinstance(leaf, RectLeaf):
            xs += [v[0] for v in leaf.patch.vertices()]
    if not xs:
        return None
    return min(xs) - 2 * fol.eps, max(xs) + 2 * fol.eps


def _sample_points(fol, cfg, n, rng, margin=0.0):
    lo, hi = _window(fol, cfg)
    eps = fol.eps
    k = n // 2 if _focus_window(fol) else n
    x1 = rng.uniform(lo, hi, k)
    x2 = rng.uniform(-eps + margin, eps - margin, k)
    fw = _focus_window(fol)
    if fw:
        x1 = np.concatenate([x1, rng.uniform(fw[0], fw[1], n - k)])
        x2 = np.concatenate([x2, rng.uniform(-eps + margin, eps - margin, n - k)])
    return fol.symmetry.point_from_canonical(x1, x2)


# -- individual checks -------------------------------------------------------------


def check_boundary(fol: Foliation, cfg: VerifyConfig) -> CheckResult:
    lo, hi = _window(fol, cfg)
    u = np.linspace(lo, hi, cfg.n_boundary)
    pair, eps = fol.pair, fol.eps
    # evaluate in the canonical frame, compare with canonical data
    y1, y2 = fol.symmetry.point_from_canonical(np.concatenate([u, u]), np.concatenate([np.full_like(u, eps), np.full_like(u, -eps)]))
    B = fol.value(y1, y2)
    target = np.concatenate([pair.plus(u), pair.minus(u)])
    res = np.abs(B - target)
    return _worst("boundary_restriction", res, np.vstack([y1, y2]), cfg.tol.value)


def check_simple_conditions(fol: Foliation, cfg: VerifyConfig) -> CheckResult:
    lo, hi = _window(fol, cfg)
    pair, eps = fol.pair, fol.eps
    res, loc = [], []
    for leaf in fol.leaves:
        if not isinstance(leaf, SimpleLeaf):
            continue
        a, b = max(leaf.lo, lo - 2 * eps), min(leaf.hi, hi + 2 * eps)
        if not a < b:
            continue
        u = np.linspace(a, b, cfg.n_simple)
        if leaf.orientation == "right":
            dp, dm = pair.d_plus_boundary(u, eps), pair.d_minus_boundary(u, eps)
        else:
            dp, dm = pair.d_plus(u, -eps, eps), pair.d_minus(u, -eps, eps)
        scale = np.maximum(1.0, np.abs(pair.plus(u + eps, 1)) + np.abs(pair.minus(u - eps, 1)))
        res.append(np.maximum(-dp, -dm) / scale)
        loc.append(u)
    if not res:
        return CheckResult("simple_conditions", True, 0.0, None, cfg.tol.ordering, "no simple leaves")
    r = np.concatenate(res)
    u = np.concatenate(loc)
    return _worst("simple_conditions", r, np.vstack([u]), cfg.tol.ordering, "max(-D+, -D-) on simple chords")


def _generating_points(leaf: HerringboneLeaf):
    """Samples (x1, x2) of the generating curve in the left-field frame of the original pair."""
    xs, T = leaf._x, leaf._T
    if leaf.mirrored:
        # mirrored curve of the reflected pair -> reflected lower curve in the original frame
        return -xs[::-1], T[::-1]
    return xs, T


def check_spine_signs(fol: Foliation, cfg: VerifyConfig) -> CheckResult:
    pair, eps = fol.pair, fol.eps
    res, pts = [], []
    for leaf in fol.leaves:
        if not isinstance(leaf, HerringboneLeaf):
            continue
        x1, x2 = _generating_points(leaf)
        if leaf.mirrored:
            x2 = -x2  # the reflected curve lies in the left-field frame
        keep = np.abs(x2) > 1e-6 * eps
        # skip the immediate neighbourhood of stationary endpoints, where D vanishes
        ends = np.array([x1[0], x1[-1]])
        keep &= np.min(np.abs(x1[:, None] - ends[None, :]), axis=1) > 1e-6 * max(1.0, eps)
        x1, x2 = x1[keep], x2[keep]
        dp, dm = pair.d_plus(x1, x2), pair.d_minus(x1, x2)
        scale = np.maximum(1.0, np.abs(pair.plus(x1 + x2, 1)) + np.abs(pair.minus(x1 - x2, 1)))
        res.append(np.maximum(-dp, -dm) / scale)
        pts.append(np.vstack([x1, x2]))
    if not res:
        return CheckResult("spine_d_signs", True, 0.0, None, 0.0, "no spines")
    r = np.concatenate(res)
    P = np.hstack(pts)
    i = int(np.argmax(r))
    return CheckResult("spine_d_signs", bool(r[i] < 0.0), float(r[i]), P[:, i].tolist(), 0.0,
                       "max(-D+, -D-) along generating curves (must be < 0)")


def check_slopes(fol: Foliation, cfg: VerifyConfig) -> CheckResult:
    """|slope| < 1 on the portions of generating curves that carry chords."""
    eps = fol.eps
    res, pts = [], []
    for leaf in fol.leaves:
        if not isinstance(leaf, HerringboneLeaf):
            continue
        c = leaf.curve
        inner = ((eps - np.abs(c.x2)) > 1e-6 * eps) & (c.x1 >= leaf.u_lo) & (c.x1 <= leaf.u_hi)
        sg = -1.0 if leaf.mirrored else 1.0
        res.append(np.abs(c.slope[inner]))
        pts.append(np.vstack([sg * c.x1[inner], c.x2[inner]]))
    if not res:
        return CheckResult("spine_slopes", True, 0.0, None, 1.0, "no spines")
    r = np.concatenate(res)
    if r.size == 0:
        return CheckResult("spine_slopes", True, 0.0, None, 1.0, "no interior samples")
    P = np.hstack(pts)
    i = int(np.argmax(r))
    return CheckResult("spine_slopes", bool(r[i] < 1.0), float(r[i]), P[:, i].tolist(), 1.0, "max |slope| (must be < 1)")


def check_concavity(fol: Foliation, cfg: VerifyConfig, rng) -> CheckResult:
    eps = fol.eps
    h = 1e-3 * eps
    x1, x2 = _sample_points(fol, cfg, cfg.n_concavity, rng, margin=2 * h)
    res, P = [], []
    for d1, d2 in ((1.0, 1.0), (1.0, -1.0)):
        e1, e2 = fol.symmetry.point_from_canonical(d1, d2)
        d2b = fol.value(x1 + h * e1, x2 + h * e2) - 2 * fol.value(x1, x2) + fol.value(x1 - h * e1, x2 - h * e2)
        res.append(d2b)
        P.append(np.vstack([x1, x2]))
    return _worst("diagonal_concavity", np.concatenate(res), np.hstack(P), cfg.tol.concavity, "max second difference")


def _interface_points(it: Interface, n: int):
    s = np.linspace(0.0, 1.0, n)
    p, q = np.asarray(it.p), np.asarray(it.q)
    return p[0] + (q[0] - p[0]) * s, p[1] + (q[1] - p[1]) * s


def check_gluing(fol: Foliation, cfg: VerifyConfig) -> list[CheckResult]:
    vres, gres, P = [], [], []
    for it in fol.interfaces:
        x1, x2 = _interface_points(it, cfg.n_interface)
        a, b = fol.leaves[it.left], fol.leaves[it.right]
        va, vb = a.value(x1, x2), b.value(x1, x2)
        ga, gb = np.array(a.gradient(x1, x2)), np.array(b.gradient(x1, x2))
        scale = np.maximum(1.0, np.hypot(ga[0], ga[1]))
        vres.append(np.abs(va - vb) / np.maximum(1.0, np.abs(va)))
        gres.append(np.hypot(*(ga - gb)) / scale)
        P.append(np.vstack(fol.symmetry.point_from_canonical(x1, x2)))
    if not P:
        ok = CheckResult("value_continuity", True, 0.0, None, cfg.tol.value, "no interfaces")
        return [ok, CheckResult("c1_gluing", True, 0.0, None, cfg.tol.gradient, "no interfaces")]
    P = np.hstack(P)
    return [
        _worst("value_continuity", np.concatenate(vres), P, cfg.tol.value),
        _worst("c1_gluing", np.concatenate(gres), P, cfg.tol.gradient, "gradient jump / max(1, |grad|)"),
    ]


def check_chords(fol: Foliation, cfg: VerifyConfig, rng) -> CheckResult:
    res, P = [], []
    eps = fol.eps
    for leaf in fol.leaves:
        if not isinstance(leaf, HerringboneLeaf):
            continue
        u = rng.uniform(leaf.u_lo, leaf.u_hi, 100)
        T = leaf.curve.height(u)
        s1 = u + eps
        for tx1, tx2 in ((u + T, np.full_like(u, eps)), (u - T, np.full_like(u, -eps))):
            # chord from spine point (s1, T) to the boundary point, in the leaf's internal frame
            mx1, mx2 = 0.5 * (s1 + tx1), 0.5 * (T + tx2)
            q1, q2 = 0.25 * s1 + 0.75 * tx1, 0.25 * T + 0.75 * tx2
            sg = -1.0 if leaf.mirrored else 1.0
            vm = leaf.value(sg * mx1, mx2)
            vq = leaf.value(sg * q1, q2)
            vs = leaf.value(sg * s1, T)
            lin = np.abs(vq - 0.5 * (vm + leaf.value(sg * tx1, tx2)))
            lin2 = np.abs(vm - 0.5 * (vs + leaf.value(sg * tx1, tx2)))
            res.append(np.maximum(lin, lin2) / np.maximum(1.0, np.abs(vm)))
            P.append(np.vstack([sg * mx1, mx2]))
    if not res:
        return CheckResult("chord_linearity", True, 0.0, None, cfg.tol.identity, "no herringbones")
    return _worst("chord_linearity", np.concatenate(res), np.hstack(P), cfg.tol.identity)


def rect_identities(pair: BoundaryPair, C, eps: float, patch=None, midline_end=None):
    """Residuals of the vertex gluing identities and of simple-vs-full coefficients."""
    from .patches import rect_full_coefficients, rect_patch

    C1, C2 = C
    if patch is None:
        patch = rect_patch(pair, C, eps)
    a, b, c, d = patch.a, patch.b, patch.c, patch.d
    fr = chord_frame(pair, C1, C2, eps, midline_end)
    A_l = float(fr.A)
    fp1 = pair.plus(C1 + C2, 1)
    Rp, Rm = float(fr.Rp), float(fr.Rm)
    R = Rp + Rm
    scale = max(1.0, abs(fp1), abs(R), abs(A_l))
    out = {
        "vertex_slope": abs(2 * a * (C1 + C2) + b - fp1) / scale,
        "R_sum": abs(R - (4 * a * (C1 + eps) + 2 * b)) / scale,
        "R_minus": abs(Rm - (2 * a * (C1 + eps - C2) + b + c)) / scale,
        "R_plus": abs(Rp - (2 * a * (C1 + eps + C2) + b - c)) / scale,
        "N_plus_edge": abs(2 * a * (C1 + eps) + b - ((eps - C2) * float(fr.N) + fp1)) / scale,
    }
    if patch.full is not None:
        full = np.array(patch.full)
        simp = np.array([a, b, c, d])
        out["simple_vs_full"] = float(np.max(np.abs(full - simp) / np.maximum(1.0, np.abs(full))))
    return out


def check_rect(fol: Foliation, cfg: VerifyConfig) -> list[CheckResult]:
    out = []
    for leaf in fol.leaves:
        if not isinstance(leaf, RectLeaf):
            continue
        up = fol.curves.get("ell_plus")
        me = None if up is None else up.midline_end
        ids = rect_identities(fol.pair, leaf.patch.C, fol.eps, leaf.patch, me)
        full = ids.pop("simple_vs_full", 0.0)
        k, v = max(ids.items(), key=lambda kv: kv[1])
        out.append(CheckResult("rect_identities", v <= cfg.tol.identity * 1e2, v, list(leaf.patch.C), cfg.tol.identity * 1e2, k))
        out.append(CheckResult("rect_simple_vs_full", full <= 1e-9, full, list(leaf.patch.C), 1e-9))
    return out


def check_gradient_fd(fol: Foliation, cfg: VerifyConfig, rng) -> CheckResult:
    h = cfg.tol.fd_step
    x1, x2 = _sample_points(fol, cfg, 4 * cfg.n_fd, rng, margin=2 * h)
    stencil = [(0, 0), (h, 0), (-h, 0), (0, h), (0, -h)]
    ids = np.array([fol.locate(x1 + a, x2 + b) for a, b in stencil])
    same = np.all(ids == ids[0], axis=0) & (ids[0] >= 0)
    x1, x2 = x1[same][: cfg.n_fd], x2[same][: cfg.n_fd]
    g1, g2 = fol.gradient(x1, x2)
    n1 = (fol.value(x1 + h, x2) - fol.value(x1 - h, x2)) / (2 * h)
    n2 = (fol.value(x1, x2 + h) - fol.value(x1, x2 - h)) / (2 * h)
    res = np.hypot(g1 - n1, g2 - n2) / np.maximum(1.0, np.hypot(g1, g2))
    return _worst("gradient_fd", res, np.vstack([x1, x2]), cfg.tol.fd, f"{x1.size} points")


def check_stationary(fol: Foliation, cfg: VerifyConfig) -> CheckResult:
    res, loc, notes = [], [], []
    for name, c in fol.curves.items():
        info = c.start_info
        if info is None:
            continue
        v = np.hypot(*velocity(fol.pair, info.kind, info.u, info.side.sign * info.eps, info.eps))
        res.append(v / max(1.0, abs(info.prefactor)))
        M = info.jacobian / info.prefactor
        N = normal_form(info.s)
        if not ((info.kind is FieldKind.LEFT) == (info.side.sign > 0)):
            N = N * np.array([[1, -1], [-1, 1]])
        res.append(float(np.max(np.abs(M - N))) / max(1.0, abs(info.s)))
        if info.s > 0:
            first = c.slope_at(info.u)
            res.append(abs(abs(first) - spine_entry_slope(info.s)) / max(1.0, abs(first)))
        loc.append([info.u, info.side.sign * info.eps])
        notes.append(f"{name}:{info.cls.value}")
    if not res:
        return CheckResult("stationary_points", True, 0.0, None, 1e-9, "no traced curves")
    r = max(res)
    return CheckResult("stationary_points", r <= 1e-8, r, loc[0], 1e-8, " ".join(notes))


def verify_foliation(fol: Foliation, config: VerifyConfig = VerifyConfig()) -> VerificationReport:
    rep = VerificationReport(eps=fol.eps, regime=fol.regime.value)
    if not fol.regime.evaluable:
        rep.checks.append(CheckResult("evaluable", False, math.inf, None, None, "; ".join(fol.notes)))
        return rep
    rng = np.random.default_rng(config.seed)
    rep.checks.append(check_boundary(fol, config))
    rep.checks.append(check_simple_conditions(fol, config))
    rep.checks.append(check_spine_signs(fol, config))
    rep.checks.append(check_slopes(fol, config))
    rep.checks.append(check_stationary(fol, config))
    rep.checks.append(check_concavity(fol, config, rng))
    rep.checks.extend(check_gluing(fol, config))
    rep.checks.append(check_chords(fol, config, rng))
    rep.checks.extend(check_rect(fol, config))
    rep.checks.append(check_gradient_fd(fol, config, rng))
    return rep


def corrupt_foliation(fol: Foliation, shift: float = 0.01) -> Foliation:
    """Copy with every herringbone spine moved by `shift` in x2 (for mutation tests)."""
    from dataclasses import replace

    leaves = []
    for leaf in fol.leaves:
        if isinstance(leaf, HerringboneLeaf):
            leaf = HerringboneLeaf(leaf.pair, leaf.curve.shifted(shift), leaf.u_lo, leaf.u_hi, leaf.mirrored)
        leaves.append(leaf)
    return replace(fol, leaves=leaves)


# -- statements about families of curves --------------------------------------------


def zero_level_heights(pair: BoundaryPair, eps: float, x1: np.ndarray):
    """Highest x2 in (0, eps) where X0, X1, Xinf vanish, for each abscissa."""
    out = np.full((3, len(x1)), np.nan)
    grid = np.linspace(eps, 0.0, 2001)[:-1]
    for j, a in enumerate(x1):
        vals = np.array(curve_values(pair, np.full_like(grid, a), grid, eps))
        for k in range(3):
            s = np.sign(vals[k])
            i = np.nonzero(s[:-1] * s[1:] < 0)[0]
            if i.size:
                i = i[0]
                out[k, j] = brentq(lambda y: curve_values(pair, a, y, eps)[k], grid[i + 1], grid[i], xtol=1e-15)
    return out


def verify_level_ordering(pair: BoundaryPair, eps: float, n: int = 200, tol: float = 1e-9) -> CheckResult:
    """Between the upper roots: X_inf = 0 above X1 = 0 above X0 = 0."""
    from .spine import boundary_roots
    from .field import Side

    roots = boundary_roots(pair, FieldKind.LEFT, Side.UPPER, eps)
    if len(roots) < 2:
        return CheckResult("level_ordering", True, 0.0, None, tol, "no pocket")
    ul, ur = roots
    x1 = np.linspace(ul, ur, n + 2)[1:-1]
    h0, h1, hinf = zero_level_heights(pair, eps, x1)
    margin = np.minimum(hinf - h1, h1 - h0)
    bad = ~np.isfinite(margin)
    margin = np.where(bad, -np.inf, margin)
    i = int(np.argmin(margin))
    return CheckResult("level_ordering", bool(margin[i] > -tol), float(-margin[i]), [float(x1[i])], tol,
                       f"min margin {margin[i]:.3e}")


def verify_slope_monotonicity(pair: BoundaryPair, eps: float, eps2: float, x1, x2) -> CheckResult:
    """Slope of the left field grows with eps where x2 D+ D- > 0 and decreases where < 0.

    Both velocity components are affine in eps, so the sign of d(slope)/d(eps)
    does not depend on eps and is checked directly. The finite comparison skips
    points where v1 changes sign between the widths (slope through vertical).
    """
    x1, x2 = np.asarray(x1, float), np.asarray(x2, float)
    keep = np.abs(x2) > 1e-9
    x1, x2 = x1[keep], x2[keep]
    a1, a2 = velocity(pair, FieldKind.LEFT, x1, x2, eps)
    b1, b2 = velocity(pair, FieldKind.LEFT, x1, x2, eps2)
    sgn = np.sign(x2 * pair.d_plus(x1, x2) * pair.d_minus(x1, x2))
    # v(e) = v(eps) + (e - eps) w, so d(slope)/de has the sign of w2 v1 - v2 w1
    w1, w2 = (b1 - a1) / (eps2 - eps), (b2 - a2) / (eps2 - eps)
    deriv = w2 * a1 - a2 * w1
    same = a1 * b1 > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        diff = (b2 / b1 - a2 / a1) * np.sign(eps2 - eps)
    viol = np.concatenate([-deriv * sgn, np.where(same, -diff * sgn, -np.inf)])
    pts = np.concatenate([np.vstack([x1, x2])] * 2, axis=1)
    if viol.size == 0:
        return CheckResult("prop_slope_monotone", True, 0.0, None, 0.0, "no samples")
    i = int(np.argmax(viol))
    worst = float(viol[i])
    return CheckResult("prop_slope_monotone", worst < 0, worst, pts[:, i].tolist(), 0.0,
                       f"{int((~same).sum())} samples cross a vertical slope between the widths")


def verify_curve_order(lower_eps_curve: SpineCurve, higher_eps_curve: SpineCurve, n: int = 100) -> CheckResult:
    """The curve for the smaller eps lies above the one for the larger eps on shared abscissae."""
    lo = max(lower_eps_curve.domain[0], higher_eps_curve.domain[0])
    hi = min(lower_eps_curve.domain[1], higher_eps_curve.domain[1])
    x = np.linspace(lo, hi, n + 2)[1:-1]
    gap = lower_eps_curve.height(x) - higher_eps_curve.height(x)
    i = int(np.argmin(gap))
    return CheckResult("curve_order", bool(gap[i] > 1e-9), float(gap[i]), [float(x[i])], 1e-9, "min vertical gap")
