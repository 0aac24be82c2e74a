"""Interpolation inequalities on the ultraspherical measure and their improvements."""
from .core import (
    DEFAULT_ORDER,
    DomainError,
    Functionals,
    GridFunction,
    MeasureParams,
    QuadratureRule,
    apply_L,
    build_quadrature,
    check_identities,
    entropy,
    fisher,
    functionals,
    log_entropy,
)

__all__ = [
    "DEFAULT_ORDER",
    "DomainError",
    "Functionals",
    "GridFunction",
    "MeasureParams",
    "QuadratureRule",
    "apply_L",
    "build_quadrature",
    "check_identities",
    "entropy",
    "fisher",
    "functionals",
    "log_entropy",
]
