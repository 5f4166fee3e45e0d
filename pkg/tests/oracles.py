"""Independent reference computations used by the tests.

Nothing here imports the tracer or the patch code: the field is written out
again from its definition and integrated with a different scheme.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import solve_ivp
from scipy.optimize import brentq


def poly(c3, c2, c1, c0):
    return np.array([c0, c1, c2, c3], dtype=float)


def deriv(c, k=1):
    return P.polyder(c, k) if k else c


def ev(c, t, k=0):
    return P.polyval(t, deriv(c, k))


def left_velocity(fp, fm, eps, x1, x2):
    a, b = x1 + x2, x1 - x2
    F1, G1, F2, G2 = ev(fp, a, 1), ev(fm, b, 1), ev(fp, a, 2), ev(fm, b, 2)
    v1 = eps * (F1 - G1) - x2 * (eps - x2) * G2 - x2 * (eps + x2) * F2
    v2 = x2 * (G1 - F1) - x2 * (eps - x2) * G2 + x2 * (eps + x2) * F2
    return v1, v2


def right_velocity(fp, fm, eps, x1, x2):
    a, b = x1 - x2, x1 + x2
    F1, G1, F2, G2 = ev(fp, a, 1), ev(fm, b, 1), ev(fp, a, 2), ev(fm, b, 2)
    v1 = eps * (G1 - F1) - x2 * (eps + x2) * F2 - x2 * (eps - x2) * G2
    v2 = x2 * (G1 - F1) - x2 * (eps + x2) * F2 + x2 * (eps - x2) * G2
    return v1, v2


def _scalar_velocity(fp, fm, eps, kind):
    """Plain-float version of the velocity for use inside the integrator."""
    F1, F2 = [float(v) for v in deriv(fp, 1)], [float(v) for v in deriv(fp, 2)]
    G1, G2 = [float(v) for v in deriv(fm, 1)], [float(v) for v in deriv(fm, 2)]

    def h(c, t):
        acc = 0.0
        for v in reversed(c):
            acc = acc * t + v
        return acc

    def vel(x1, x2):
        a, b = (x1 + x2, x1 - x2) if kind == "left" else (x1 - x2, x1 + x2)
        f1, g1, f2, g2 = h(F1, a), h(G1, b), h(F2, a), h(G2, b)
        if kind == "left":
            return (eps * (f1 - g1) - x2 * (eps - x2) * g2 - x2 * (eps + x2) * f2,
                    x2 * (g1 - f1) - x2 * (eps - x2) * g2 + x2 * (eps + x2) * f2)
        return (eps * (g1 - f1) - x2 * (eps + x2) * f2 - x2 * (eps - x2) * g2,
                x2 * (g1 - f1) - x2 * (eps + x2) * f2 + x2 * (eps - x2) * g2)

    return vel


def fd_jacobian(vel, x1, x2, h=1e-6):
    J = np.empty((2, 2))
    for j, (d1, d2) in enumerate(((h, 0.0), (0.0, h))):
        p = np.array(vel(x1 + d1, x2 + d2))
        m = np.array(vel(x1 - d1, x2 - d2))
        J[:, j] = (p - m) / (2 * h)
    return J


def _real_roots(g):
    """Real roots of a function known to be a polynomial of degree <= 2: fit it, then polish."""
    xs = np.array([-1.0, 0.0, 1.0])
    c = np.polyfit(xs, g(xs), 2)
    r = np.roots(c) if c[0] != 0 else np.roots(c[1:])
    r = np.sort(r[np.abs(r.imag) < 1e-12].real)
    out = []
    for x in r:
        h = 1e-6 * max(1.0, abs(x))
        a, b = x - h, x + h
        out.append(brentq(g, a, b, xtol=1e-15, rtol=1e-15) if g(a) * g(b) < 0 else float(x))
    return out


def upper_saddle_roots(fp, fm, eps):
    """Roots in u of F'(u+eps) - G'(u-eps) - 2 eps F''(u+eps), by brentq on a fine grid."""
    g = lambda u: ev(fp, u + eps, 1) - ev(fm, u - eps, 1) - 2 * eps * ev(fp, u + eps, 2)
    return _real_roots(g)


def trace_upper_pocket(fp, fm, eps, rtol=1e-11, atol=1e-13, x_span=20.0, max_step=1e-2):
    """Left-field curve leaving the right upper root into the strip, traced leftwards with RK45.

    Returns (x1, x2) samples and the exit abscissa on x2 = eps (None if it does not return).
    """
    roots = upper_saddle_roots(fp, fm, eps)
    ur = roots[-1]
    vel = _scalar_velocity(fp, fm, eps, "left")
    J = fd_jacobian(vel, ur, eps)
    lam, V = np.linalg.eig(J)
    # the entry direction has positive slope for the left field on the upper side
    k = [i for i in range(2) if abs(lam[i].imag) < 1e-12 and V[1, i].real * V[0, i].real > 0][0]
    d = np.real(V[:, k])
    d = d / np.linalg.norm(d)
    if d[1] > 0:
        d = -d
    x0 = np.array([ur, eps]) + 1e-7 * d

    def rhs(s, y):  # s = -x1
        v1, v2 = vel(-s, y[0])
        return [-v2 / v1]

    def top(s, y):
        return y[0] - eps
    top.terminal, top.direction = True, 1

    def bottom(s, y):
        return y[0] + eps
    bottom.terminal = True

    sol = solve_ivp(rhs, (-x0[0], -x0[0] + x_span), [x0[1]], method="RK45", rtol=rtol, atol=atol,
                    events=[top, bottom], dense_output=True, max_step=max_step)
    x1 = -sol.t
    x2 = sol.y[0]
    v = None
    if sol.t_events[0].size:
        v = float(-sol.t_events[0][0])
    return x1, x2, v


def lower_saddle_roots(fp, fm, eps):
    """Roots in u of F'(u+eps) - G'(u-eps) - 2 eps G''(u-eps) (right field, lower boundary)."""
    g = lambda u: ev(fp, u + eps, 1) - ev(fm, u - eps, 1) - 2 * eps * ev(fm, u - eps, 2)
    return _real_roots(g)


def trace_lower_pocket(fp, fm, eps, rtol=1e-10, atol=1e-12, x_span=20.0, max_step=1e-2):
    """Right-field curve leaving the left lower root into the strip, traced rightwards with RK45."""
    roots = lower_saddle_roots(fp, fm, eps)
    ul = roots[0]
    vel = _scalar_velocity(fp, fm, eps, "right")
    J = fd_jacobian(vel, ul, -eps)
    lam, V = np.linalg.eig(J)
    k = [i for i in range(2) if abs(lam[i].imag) < 1e-12 and V[1, i].real * V[0, i].real > 0][0]
    d = np.real(V[:, k])
    d = d / np.linalg.norm(d)
    if d[1] < 0:
        d = -d
    x0 = np.array([ul, -eps]) + 1e-7 * d

    def rhs(t, y):
        v1, v2 = vel(t, y[0])
        return [v2 / v1]

    def bottom(t, y):
        return y[0] + eps
    bottom.terminal, bottom.direction = True, -1

    def top(t, y):
        return y[0] - eps
    top.terminal = True

    sol = solve_ivp(rhs, (x0[0], x0[0] + x_span), [x0[1]], method="RK45", rtol=rtol, atol=atol,
                    events=[bottom, top], max_step=max_step)
    v = float(sol.t_events[0][0]) if sol.t_events[0].size else None
    return sol.t, sol.y[0], v


def merge_gap(fp, fm, eps, rtol=1e-9):
    """v+ - v-: positive while the upper and lower pockets are disjoint."""
    vp = trace_upper_pocket(fp, fm, eps, rtol=rtol, atol=1e-3 * rtol, max_step=np.inf)[2]
    vm = trace_lower_pocket(fp, fm, eps, rtol=rtol, atol=1e-3 * rtol, max_step=np.inf)[2]
    return vp - vm
