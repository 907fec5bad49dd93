"""Surface records shared by the catalog and the analyzers."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import taylor
from .domains import ParamDomain


@dataclass(frozen=True)
class Chart:
    """One parametrized piece of a surface.

    ``fn(t, s)`` returns the six coordinates (x1, x2, x3, y1, y2, y3).  It must
    accept plain arrays and :class:`~minlag.taylor.Jet` inputs alike, which is
    what makes analytic jets of every order available.
    """

    name: str
    domain: ParamDomain
    fn: Callable


@dataclass(frozen=True)
class Expectations:
    lagrangian: bool = True
    minimal: bool = False
    constant_C: float | None = None
    constant_K: float | None = None
    conformal: bool = False
    orientable: bool = True
    genus: int | None = None
    euler: int | None = None
    betti1: int | None = None
    degree: int | None = None
    area: float | None = None
    parallel_H: bool = False
    totally_geodesic: bool = False
    compact: bool = False

    def as_dict(self):
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass(frozen=True)
class SurfaceSpec:
    name: str
    charts: tuple
    expects: Expectations = field(default_factory=Expectations)
    description: str = ""

    @property
    def domain(self) -> ParamDomain:
        return self.charts[0].domain

    def eval(self, t, s, chart: int = 0) -> np.ndarray:
        """Positions in R^3 x R^3, component axis last."""
        return taylor.values(self.charts[chart].fn(np.asarray(t, float), np.asarray(s, float)))

    def with_name(self, name: str) -> "SurfaceSpec":
        return replace(self, name=name)


def transform(surface: SurfaceSpec, A, B) -> SurfaceSpec:
    """Compose with the product isometry (x, y) -> (A x, B y); for A, B in SO(3) it is holomorphic."""
    A, B = np.asarray(A, float), np.asarray(B, float)

    def wrap(fn):
        def moved(t, s):
            c = fn(t, s)
            x = [sum(A[i, k] * c[k] for k in range(3)) for i in range(3)]
            y = [sum(B[i, k] * c[3 + k] for k in range(3)) for i in range(3)]
            return tuple(x + y)

        return moved

    charts = tuple(Chart(c.name, c.domain, wrap(c.fn)) for c in surface.charts)
    return SurfaceSpec(surface.name + "*", charts, surface.expects, surface.description)
