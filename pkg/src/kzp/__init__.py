"""Exact verification toolkit for the KZ connection in characteristic p.

Construction of the connection data, generation of the p-hypergeometric
solution families, and machine checks of their identities (flatness,
counting, orthogonality, p-curvature structure, steepest-descent
spectrum, formal solution spaces, and the curve-cohomology dictionary)
over finite fields at desk scale.
"""

from .fields import ExtField, FieldElement, PrimeField, build_extension, frobenius, inv
from .kz_core import KZContext, SolutionVector, flatness_check, nabla_apply, omega, shapovalov
from .multipoly import EvalPoint, XSeries, ZPolynomial, jet_compose, partial, pmul, xpow_master

__all__ = [
    "ExtField",
    "FieldElement",
    "PrimeField",
    "build_extension",
    "frobenius",
    "inv",
    "KZContext",
    "SolutionVector",
    "flatness_check",
    "nabla_apply",
    "omega",
    "shapovalov",
    "EvalPoint",
    "XSeries",
    "ZPolynomial",
    "jet_compose",
    "partial",
    "pmul",
    "xpow_master",
]
