"""The two planar vector fields whose integral curves carry the spines."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryPair

IMPROPER_TOL = 1e-9


class FieldKind(enum.Enum):
    LEFT = "left"  # f+ at x1 + x2, f- at x1 - x2
    RIGHT = "right"  # f+ at x1 - x2, f- at x1 + x2


class Side(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"

    @property
    def sign(self) -> float:
        return 1.0 if self is Side.UPPER else -1.0


class StationaryClass(enum.Enum):
    SADDLE = "saddle"
    SPIRAL = "spiral"
    NODE = "node"
    IMPROPER_NODE = "improper_node"
    DEGENERATE = "degenerate"


def _args(kind: FieldKind, x1, x2):
    if kind is FieldKind.LEFT:
        return x1 + x2, x1 - x2
    return x1 - x2, x1 + x2


def velocity(pair: BoundaryPair, kind: FieldKind, x1, x2, eps: float):
    F, G = pair.plus, pair.minus
    a, b = _args(kind, x1, x2)
    F1, G1, F2, G2 = F(a, 1), G(b, 1), F(a, 2), G(b, 2)
    if kind is FieldKind.LEFT:
        v1 = eps * (F1 - G1) - x2 * (eps - x2) * G2 - x2 * (eps + x2) * F2
        v2 = x2 * (G1 - F1) - x2 * (eps - x2) * G2 + x2 * (eps + x2) * F2
    else:
        v1 = eps * (G1 - F1) - x2 * (eps + x2) * F2 - x2 * (eps - x2) * G2
        v2 = x2 * (G1 - F1) - x2 * (eps + x2) * F2 + x2 * (eps - x2) * G2
    return v1, v2


def slope_function(pair: BoundaryPair, kind: FieldKind, eps: float):
    """Scalar dx2/dx1 of the field, written out for speed inside the integrator."""
    p3, p2, p1 = pair.plus.a3, pair.plus.a2, pair.plus.a1
    m3, m2, m1 = pair.minus.a3, pair.minus.a2, pair.minus.a1
    left = kind is FieldKind.LEFT

    def slope(x1: float, x2: float) -> float:
        if left:
            a, b = x1 + x2, x1 - x2
        else:
            a, b = x1 - x2, x1 + x2
        F1 = (3.0 * p3 * a + 2.0 * p2) * a + p1
        G1 = (3.0 * m3 * b + 2.0 * m2) * b + m1
        F2 = 6.0 * p3 * a + 2.0 * p2
        G2 = 6.0 * m3 * b + 2.0 * m2
        if left:
            v1 = eps * (F1 - G1) - x2 * (eps - x2) * G2 - x2 * (eps + x2) * F2
            v2 = x2 * (G1 - F1) - x2 * (eps - x2) * G2 + x2 * (eps + x2) * F2
        else:
            v1 = eps * (G1 - F1) - x2 * (eps + x2) * F2 - x2 * (eps - x2) * G2
            v2 = x2 * (G1 - F1) - x2 * (eps + x2) * F2 + x2 * (eps - x2) * G2
        return v2 / v1

    return slope


def jacobian(pair: BoundaryPair, kind: FieldKind, x1: float, x2: float, eps: float) -> np.ndarray:
    F, G = pair.plus, pair.minus
    a, b = _args(kind, x1, x2)
    F1, F2, F3 = F(a, 1), F(a, 2), F(a, 3)
    G1, G2, G3 = G(b, 1), G(b, 2), G(b, 3)
    if kind is FieldKind.LEFT:
        j11 = eps * (F2 - G2) - x2 * (eps - x2) * G3 - x2 * (eps + x2) * F3
        j12 = 2 * x2 * (G2 - F2) + x2 * (eps - x2) * G3 - x2 * (eps + x2) * F3
        j21 = x2 * (G2 - F2) - x2 * (eps - x2) * G3 + x2 * (eps + x2) * F3
        j22 = (G1 - F1) - (eps - x2) * (G2 - x2 * G3) + (eps + x2) * (F2 + x2 * F3)
    else:
        j11 = eps * (G2 - F2) - x2 * (eps + x2) * F3 - x2 * (eps - x2) * G3
        j12 = 2 * x2 * (G2 - F2) + x2 * (eps + x2) * F3 - x2 * (eps - x2) * G3
        j21 = x2 * (G2 - F2) - x2 * (eps + x2) * F3 + x2 * (eps - x2) * G3
        j22 = (G1 - F1) - (eps + x2) * (F2 - x2 * F3) + (eps - x2) * (G2 + x2 * G3)
    return np.array([[j11, j12], [j21, j22]], dtype=float)


def curve_values(pair: BoundaryPair, x1, x2, eps: float):
    """(X0, X1, Xinf) for the left field: dx2 = x2*X0, X1 = 2 x2 D+, Xinf = dx1."""
    F, G = pair.plus, pair.minus
    a, b = x1 + x2, x1 - x2
    F1, G1, F2, G2 = F(a, 1), G(b, 1), F(a, 2), G(b, 2)
    X0 = G1 - F1 - (eps - x2) * G2 + (eps + x2) * F2
    X1 = F1 - G1 - 2.0 * x2 * F2
    Xinf = eps * (F1 - G1) - x2 * (eps - x2) * G2 - x2 * (eps + x2) * F2
    return X0, X1, Xinf


# -- stationary points on the boundary -------------------------------------------


def stationary_residual(pair: BoundaryPair, kind: FieldKind, side: Side, u, eps: float):
    """Vanishes exactly when the field has a stationary point at (u, side*eps)."""
    F, G = pair.plus, pair.minus
    if kind is FieldKind.LEFT and side is Side.UPPER:
        return F(u + eps, 1) - G(u - eps, 1) - 2 * eps * F(u + eps, 2)
    if kind is FieldKind.LEFT and side is Side.LOWER:
        return G(u + eps, 1) - F(u - eps, 1) - 2 * eps * G(u + eps, 2)
    if kind is FieldKind.RIGHT and side is Side.LOWER:
        return F(u + eps, 1) - G(u - eps, 1) - 2 * eps * G(u - eps, 2)
    return G(u + eps, 1) - F(u - eps, 1) - 2 * eps * F(u - eps, 2)


def kappa(pair: BoundaryPair, kind: FieldKind, side: Side, u: float, eps: float) -> float:
    F, G = pair.plus, pair.minus
    if kind is FieldKind.LEFT and side is Side.UPPER:
        num, den = 2 * F(u + eps, 3), F(u + eps, 2) - G(u - eps, 2) - 2 * eps * F(u + eps, 3)
    elif kind is FieldKind.LEFT and side is Side.LOWER:
        num, den = 2 * G(u + eps, 3), G(u + eps, 2) - F(u - eps, 2) - 2 * eps * G(u + eps, 3)
    elif kind is FieldKind.RIGHT and side is Side.LOWER:
        num, den = 2 * G(u - eps, 3), F(u + eps, 2) - G(u - eps, 2) - 2 * eps * G(u - eps, 3)
    else:
        num, den = 2 * F(u - eps, 3), G(u + eps, 2) - F(u - eps, 2) - 2 * eps * F(u - eps, 3)
    if den == 0.0:
        return math.copysign(math.inf, num) if num != 0.0 else math.nan
    return num / den


def classify_s(s: float, tol: float = IMPROPER_TOL) -> StationaryClass:
    if not math.isfinite(s) or s == 0.0:
        return StationaryClass.DEGENERATE
    if abs(s + 8.0) <= tol:
        return StationaryClass.IMPROPER_NODE
    if s > 0.0:
        return StationaryClass.SADDLE
    if s > -8.0:
        return StationaryClass.SPIRAL
    return StationaryClass.NODE


def normal_form(s: float) -> np.ndarray:
    return np.array([[1.0, 1.0 - 3.0 * s], [-1.0, s - 1.0]])


def normal_form_eigen(s: float):
    """Eigenvalues (s -/+ sqrt(s^2+8s))/2 and eigenvectors (s-1-lam, 1) of the normal form."""
    r = complex(s * s + 8.0 * s) ** 0.5
    lams = [(s - r) / 2.0, (s + r) / 2.0]
    vecs = [np.array([s - 1.0 - lam, 1.0]) for lam in lams]
    if abs(r.imag) == 0.0:
        lams = [lam.real for lam in lams]
        vecs = [v.real for v in vecs]
    return lams, vecs


def spine_entry_slope(s: float) -> float:
    """Slope of the eigendirection belonging to (s - sqrt(s^2+8s))/2 (saddle case)."""
    den = s - 2.0 + math.sqrt(s * s + 8.0 * s)
    return 2.0 / den if den != 0.0 else math.inf  # vertical at s = 1/3


@dataclass
class StationaryPointInfo:
    kind: FieldKind
    side: Side
    u: float
    eps: float
    kappa: float
    s: float
    cls: StationaryClass
    prefactor: float
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns

    @property
    def point(self) -> tuple[float, float]:
        return self.u, self.side.sign * self.eps

    def real_directions(self) -> list[np.ndarray]:
        out = []
        for k in range(2):
            if abs(self.eigenvalues[k].imag) <= 1e-12 * max(1.0, abs(self.eigenvalues[k])):
                v = np.real(self.eigenvectors[:, k])
                out.append(v / np.linalg.norm(v))
        return out

    def direction_with_slope_sign(self, positive: bool) -> np.ndarray | None:
        best = None
        for v in self.real_directions():
            sl = v[1] / v[0] if v[0] != 0.0 else math.copysign(math.inf, v[1])
            if (sl > 0) == positive and sl != 0.0:
                best = v
        return best


def stationary_info(pair: BoundaryPair, kind: FieldKind, side: Side, u: float, eps: float) -> StationaryPointInfo:
    k = kappa(pair, kind, side, u, eps)
    s = 1.0 + eps * k
    J = jacobian(pair, kind, u, side.sign * eps, eps)
    lam, vec = np.linalg.eig(J)
    return StationaryPointInfo(
        kind=kind,
        side=side,
        u=u,
        eps=eps,
        kappa=k,
        s=s,
        cls=classify_s(s),
        prefactor=float(J[0, 0]),
        jacobian=J,
        eigenvalues=lam.astype(complex),
        eigenvectors=vec.astype(complex),
    )
