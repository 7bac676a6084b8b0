"""Weierstrass and quartic models, the ×3 map, cross-ratios and the Hesse check."""

from .curves import (
    QuarticModel,
    QuarticModelError,
    QuarticWeierstrassMap,
    SingularCurveError,
    WeierstrassCurve,
    division_polynomial,
    multiply_by_3,
    quartic_to_weierstrass,
    triple_by_addition,
)
from .cyclotomic import ONE, ZETA3, CyclotomicNumber
from .invariants import (
    INFINITY,
    DegenerateQuadrupleError,
    HesseConsistencyError,
    HesseResult,
    all_ordering_js,
    cross_ratio,
    hesse_isotriviality_check,
    j_from_four_points,
    j_from_lambda,
    three_torsion_branch_points,
)

__all__ = [
    "CyclotomicNumber", "DegenerateQuadrupleError", "HesseConsistencyError", "HesseResult",
    "INFINITY", "ONE", "QuarticModel", "QuarticModelError", "QuarticWeierstrassMap",
    "SingularCurveError", "WeierstrassCurve", "ZETA3", "all_ordering_js", "cross_ratio",
    "division_polynomial", "hesse_isotriviality_check", "j_from_four_points", "j_from_lambda",
    "multiply_by_3", "quartic_to_weierstrass", "three_torsion_branch_points", "triple_by_addition",
]
