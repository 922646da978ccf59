"""
Harmonic functions shipped with the lab, built from short textual specs:

    const:5                 the constant 5
    poisson:a+b'            f_E for the union of cylinders of a and b'
    martin:a                K(., a a a ...)
    diff:a,b                K(., a a a ...) - K(., b b b ...)
    lin:2*martin:a;-1*const:1
"""
from __future__ import annotations

from typing import List, Tuple

import structlog

from fatou_lab.boundary.rays import periodic_ray
from fatou_lab.boundary.shadows import BoundaryRegion
from fatou_lab.config import settings
from fatou_lab.core.exceptions import ConfigurationError
from fatou_lab.groups.base import GroupBackend
from fatou_lab.potential.green import martin_function
from fatou_lab.potential.measure import poisson_integral
from fatou_lab.potential.tabulated import TabulatedFunction
from fatou_lab.walks.distribution import StepDistribution

logger = structlog.get_logger(__name__)


def harmonic_function(text: str, nu: StepDistribution, group: GroupBackend, radius: int) -> TabulatedFunction:
    """A harmonic function tabulated at least on B(o, radius)"""
    kind, _, arg = text.strip().partition(":")
    kind = kind.strip().lower()
    if kind == "const":
        return TabulatedFunction.constant(float(arg), group, radius)
    if kind == "poisson":
        region = BoundaryRegion.cylinders([w for w in arg.split("+") if w.strip()], group)
        return poisson_integral(region, nu, group, radius + settings.martin_margin)
    if kind == "martin":
        return martin_function(periodic_ray(group, arg), nu, group, depth=radius)
    if kind == "diff":
        first, _, second = arg.partition(",")
        if not second:
            raise ConfigurationError(f"diff needs two rays, got '{text}'")
        return TabulatedFunction.combine(
            [(1.0, martin_function(periodic_ray(group, first), nu, group, depth=radius)),
             (-1.0, martin_function(periodic_ray(group, second), nu, group, depth=radius))],
            label=f"K({first}^inf)-K({second}^inf)",
        )
    if kind == "lin":
        terms: List[Tuple[float, TabulatedFunction]] = []
        for item in arg.split(";"):
            coefficient, sep, inner = item.partition("*")
            if not sep:
                raise ConfigurationError(f"linear terms look like 2*martin:a, got '{item}'")
            terms.append((float(coefficient), harmonic_function(inner, nu, group, radius)))
        return TabulatedFunction.combine(terms)
    raise ConfigurationError(f"Unknown harmonic function '{text}'")
