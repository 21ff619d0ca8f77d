"""Barnes double zeta function toolkit."""
from __future__ import annotations

from .barnes_eval import (
    AFEConventions,
    AFEGeometry,
    DependenceInfo,
    ParamTriple,
    TermBreakdown,
    afe_geometry,
    afe_prefactor,
    barnes_afe,
    barnes_direct,
    barnes_reference,
    barnes_truncated,
    detect_dependence,
    residue_sum,
    shifted_alpha,
)
from .classical_zetas import hurwitz_afe, hurwitz_zeta, hurwitz_zeta_star, lerch_zeta, riemann_chi
from .errors import (
    BarnesError,
    DomainError,
    ParseError,
    PrecisionError,
    ScanFailure,
)
from .numerics_core import ErrorBudget, HPComplex, HPReal, bernoulli, complex_gamma

__all__ = [
    "AFEConventions", "AFEGeometry", "DependenceInfo", "ParamTriple", "TermBreakdown",
    "afe_geometry", "afe_prefactor", "barnes_afe", "barnes_direct", "barnes_reference",
    "barnes_truncated", "detect_dependence", "residue_sum", "shifted_alpha",
    "hurwitz_afe", "hurwitz_zeta", "hurwitz_zeta_star", "lerch_zeta", "riemann_chi",
    "BarnesError", "DomainError", "ParseError", "PrecisionError", "ScanFailure",
    "ErrorBudget", "HPComplex", "HPReal", "bernoulli", "complex_gamma",
]
