"""Cubic boundary data on the strip |x2| <= eps and the quantities derived from it."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class MidlineDegenerate(ValueError):
    """Raised when D+/D- is requested on the midline through the divided form."""


class DiscriminantClass(enum.Enum):
    NEGATIVE = "negative"
    ZERO = "zero"
    POSITIVE = "positive"


@dataclass(frozen=True)
class Cubic:
    a3: float
    a2: float
    a1: float
    a0: float

    @classmethod
    def from_seq(cls, coeffs: Sequence[float]) -> "Cubic":
        c = [float(v) for v in coeffs]
        if len(c) != 4 or not all(math.isfinite(v) for v in c):
            raise ValueError(f"expected four finite coefficients [a3, a2, a1, a0], got {coeffs!r}")
        return cls(*c)

    def coeffs(self) -> list[float]:
        return [self.a3, self.a2, self.a1, self.a0]

    def __call__(self, t, order: int = 0):
        a3, a2, a1, a0 = self.a3, self.a2, self.a1, self.a0
        if order == 0:
            return ((a3 * t + a2) * t + a1) * t + a0
        if order == 1:
            return (3.0 * a3 * t + 2.0 * a2) * t + a1
        if order == 2:
            return 6.0 * a3 * t + 2.0 * a2
        if order == 3:
            return 6.0 * a3 + 0.0 * t
        if order >= 4:
            return 0.0 * t
        raise ValueError("negative derivative order")

    def reflected(self) -> "Cubic":
        # t -> -t
        return Cubic(-self.a3, self.a2, -self.a1, self.a0)

    def __sub__(self, other: "Cubic") -> "Cubic":
        return Cubic(self.a3 - other.a3, self.a2 - other.a2, self.a1 - other.a1, self.a0 - other.a0)


@dataclass(frozen=True)
class SymmetryRecord:
    """Transformations applied to reach the canonical frame.

    swapped: f+ and f- were interchanged (x2 -> -x2).
    reflected: t -> -t was applied (x1 -> -x1).
    """

    swapped: bool = False
    reflected: bool = False

    def point_to_canonical(self, x1, x2):
        return (-x1 if self.reflected else x1), (-x2 if self.swapped else x2)

    point_from_canonical = point_to_canonical  # both maps are involutions

    def gradient_from_canonical(self, g1, g2):
        return (-g1 if self.reflected else g1), (-g2 if self.swapped else g2)


@dataclass(frozen=True)
class BoundaryPair:
    """f+ lives on x2 = +eps, f- on x2 = -eps."""

    plus: Cubic
    minus: Cubic

    @classmethod
    def from_coeffs(cls, f_plus: Sequence[float], f_minus: Sequence[float]) -> "BoundaryPair":
        return cls(Cubic.from_seq(f_plus), Cubic.from_seq(f_minus))

    @classmethod
    def from_json(cls, text: str) -> "BoundaryPair":
        data = json.loads(text)
        try:
            return cls.from_coeffs(data["f_plus"], data["f_minus"])
        except KeyError as exc:
            raise ValueError(f"boundary JSON is missing key {exc}") from None

    def to_json(self) -> str:
        return json.dumps({"f_plus": self.plus.coeffs(), "f_minus": self.minus.coeffs()})

    # -- elementary derived data -------------------------------------------------

    @property
    def delta(self) -> Cubic:
        return self.plus - self.minus

    @property
    def equal_leading(self) -> bool:
        return self.plus.a3 == self.minus.a3

    def reflected(self) -> "BoundaryPair":
        return BoundaryPair(self.plus.reflected(), self.minus.reflected())

    def swapped(self) -> "BoundaryPair":
        return BoundaryPair(self.minus, self.plus)

    def discriminant(self) -> float:
        """3*da3*da1 - da2**2; positive means the negative discriminant class."""
        d = self.delta
        return 3.0 * d.a3 * d.a1 - d.a2 * d.a2

    def discriminant_class(self, rtol: float = 1e-14) -> DiscriminantClass:
        d = self.delta
        lhs, rhs = 3.0 * d.a3 * d.a1, d.a2 * d.a2
        scale = max(abs(lhs), abs(rhs))
        if abs(lhs - rhs) <= rtol * scale:
            return DiscriminantClass.ZERO
        return DiscriminantClass.NEGATIVE if lhs > rhs else DiscriminantClass.POSITIVE

    def vertex(self) -> tuple[float, float]:
        """(t0, m) with df'(t) = 3*da3*(t - t0)**2 + m.  Requires da3 != 0."""
        d = self.delta
        if d.a3 == 0.0:
            raise ValueError("equal leading coefficients: df' has no vertex form")
        t0 = -d.a2 / (3.0 * d.a3)
        if self.discriminant_class() is DiscriminantClass.ZERO:
            m = 0.0
        else:
            m = d.a1 - d.a2 * d.a2 / (3.0 * d.a3)
        return t0, m

    def diff_prime(self, t):
        """f+'(t) - f-'(t), evaluated without cancellation near the vertex."""
        d = self.delta
        if d.a3 == 0.0:
            return 2.0 * d.a2 * t + d.a1
        t0, m = self.vertex()
        return 3.0 * d.a3 * (t - t0) ** 2 + m

    def cross_diff_prime(self, u, T):
        """f+'(u + T) - f-'(u - T) for cubics, expanded around u."""
        p, q = self.plus, self.minus
        return (
            self.diff_prime(u)
            + (p(u, 2) + q(u, 2)) * T
            + 0.5 * (p(u, 3) - q(u, 3)) * T * T
        )

    # -- D+ and D- ---------------------------------------------------------------

    def d_plus_numerator(self, x1, x2):
        """2*x2*D+(x); for cubics equals df'(x1 - x2) - 12 a3+ x2^2."""
        return self.diff_prime(x1 - x2) - 12.0 * self.plus.a3 * x2 * x2

    def d_minus_numerator(self, x1, x2):
        """2*x2*D-(x); for cubics equals df'(x1 + x2) + 12 a3- x2^2."""
        return self.diff_prime(x1 + x2) + 12.0 * self.minus.a3 * x2 * x2

    def d_plus(self, x1, x2, eps: float | None = None):
        self._check_midline(x2, eps)
        return self.d_plus_numerator(x1, x2) / (2.0 * x2)

    def d_minus(self, x1, x2, eps: float | None = None):
        self._check_midline(x2, eps)
        return self.d_minus_numerator(x1, x2) / (2.0 * x2)

    def d_plus_sign(self, x1, x2):
        """Sign of D+ usable on the midline as well (numerator sign times sign(x2))."""
        return np.sign(self.d_plus_numerator(x1, x2)) * np.where(np.asarray(x2) < 0, -1.0, 1.0)

    def d_minus_sign(self, x1, x2):
        return np.sign(self.d_minus_numerator(x1, x2)) * np.where(np.asarray(x2) < 0, -1.0, 1.0)

    def d_plus_boundary(self, u, eps: float):
        """D+(u, eps) in its boundary form."""
        p, q = self.plus, self.minus
        return (p(u + eps, 1) - q(u - eps, 1) - 2.0 * eps * p(u + eps, 2)) / (2.0 * eps)

    def d_minus_boundary(self, u, eps: float):
        p, q = self.plus, self.minus
        return (p(u + eps, 1) - q(u - eps, 1) - 2.0 * eps * q(u - eps, 2)) / (2.0 * eps)

    @staticmethod
    def _check_midline(x2, eps):
        scale = 1.0 if eps is None else abs(eps)
        if np.any(np.abs(np.asarray(x2)) < 1e-9 * scale):
            raise MidlineDegenerate("D+/D- requested on the midline; use the sign helpers")


def canonicalize(pair: BoundaryPair) -> tuple[BoundaryPair, SymmetryRecord]:
    """Bring the pair to |a3+| >= |a3-| and a3+ >= 0."""
    swapped = abs(pair.plus.a3) < abs(pair.minus.a3)
    if swapped:
        pair = pair.swapped()
    reflected = pair.plus.a3 < 0.0
    if reflected:
        pair = pair.reflected()
    return pair, SymmetryRecord(swapped=swapped, reflected=reflected)


def quadratic_roots(a: float, b: float, c: float) -> tuple[float, ...]:
    """Real roots of a t^2 + b t + c in increasing order (stable form)."""
    s = max(abs(a), abs(b), abs(c))
    if s == 0.0:
        return ()
    a, b, c = a / s, b / s, c / s  # guards b*b and a*c against under/overflow
    if a == 0.0:
        if b == 0.0:
            return ()
        return (-c / b,)
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return ()
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b))
    if q == 0.0:
        return (0.0, 0.0)
    # a root beyond float range overflows to inf; it is not representable
    return tuple(sorted(r for r in (q / a, c / q) if math.isfinite(r)))
