"""Numerical verification engine for minimal Lagrangian surfaces in S^2 x S^2."""

__version__ = "0.1.0"

from . import catalog, geometry, sinh_gordon, special, spectral, taylor
from ._backend import COMPILED
from .errors import (
    AmbiguityError,
    ConvergenceError,
    DegeneracyError,
    DomainError,
    MinlagError,
    PreconditionError,
)

__all__ = [
    "catalog", "geometry", "sinh_gordon", "special", "spectral", "taylor", "COMPILED",
    "MinlagError", "DomainError", "PreconditionError", "DegeneracyError", "ConvergenceError",
    "AmbiguityError", "__version__",
]
