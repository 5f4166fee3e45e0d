"""Minimal diagonally concave functions on a strip with cubic boundary data."""
from .boundary import BoundaryPair, Cubic, DiscriminantClass, MidlineDegenerate, canonicalize
from .field import FieldKind, Side, StationaryClass, stationary_info, velocity
from .patches import NotEvaluable
from .regimes import (
    CriticalEps,
    Foliation,
    Regime,
    build_foliation,
    critical_epsilons,
    find_epsilon2,
    regime_at,
)
from .spine import SpineCurve, TraceControls, trace_spine
from .verify import Tolerances, VerificationReport, VerifyConfig, verify_foliation

__all__ = [
    "BoundaryPair", "Cubic", "DiscriminantClass", "MidlineDegenerate", "canonicalize",
    "FieldKind", "Side", "StationaryClass", "stationary_info", "velocity",
    "NotEvaluable",
    "CriticalEps", "Foliation", "Regime", "build_foliation", "critical_epsilons", "find_epsilon2", "regime_at",
    "SpineCurve", "TraceControls", "trace_spine",
    "Tolerances", "VerificationReport", "VerifyConfig", "verify_foliation",
]
