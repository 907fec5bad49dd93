"""Parameter domains: rectangles and disks with their gluing data."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError

GLUINGS = ("plane", "cylinder", "disk", "torus", "klein")


@dataclass(frozen=True)
class ParamDomain:
    """A fundamental region in the (t, s) plane.

    ``plane``: the closed rectangle ``t_range x s_range`` shrunk by ``margin``.
    ``cylinder``: periodic in t, a plane in s (the margin applies to s only).
    ``disk``: the disk of radius ``radius`` centred at the origin (quadrature in
    polar coordinates); the chart stays valid on the enclosing square.
    ``torus``: periodic with periods equal to the side lengths.
    ``klein``: periodic in t; crossing the top edge in s applies the glide
    ``(t, s) -> (glide_center - t, s + T_s/2)`` where ``T_s/2`` is the s side
    length, so ``T_s`` is the s period of the oriented double cover.
    """

    t_range: tuple
    s_range: tuple
    gluing: str = "plane"
    conformal: bool = False
    glide_center: float | None = None
    margin: float = 0.0
    radius: float | None = None

    def __post_init__(self):
        if self.gluing not in GLUINGS:
            raise DomainError(f"unknown gluing {self.gluing!r}")
        if self.gluing == "klein" and self.glide_center is None:
            raise DomainError("klein gluing needs a glide centre")
        if self.gluing == "disk" and not self.radius:
            raise DomainError("disk gluing needs a radius")

    # geometry of the rectangle ---------------------------------------------
    @property
    def t_length(self) -> float:
        return self.t_range[1] - self.t_range[0]

    @property
    def s_length(self) -> float:
        return self.s_range[1] - self.s_range[0]

    @property
    def compact(self) -> bool:
        return self.gluing in ("torus", "klein")

    @property
    def orientable(self) -> bool:
        return self.gluing != "klein"

    @property
    def periods(self):
        """(T_t, T_s) of the torus (for klein: of the oriented double cover)."""
        if self.gluing == "torus":
            return self.t_length, self.s_length
        if self.gluing == "klein":
            return self.t_length, 2.0 * self.s_length
        raise DomainError(f"{self.gluing} domain has no periods")

    def glide(self, t, s):
        if self.gluing != "klein":
            raise DomainError("glide is only defined for klein gluing")
        return self.glide_center - np.asarray(t), np.asarray(s) + self.s_length

    def double_cover(self) -> "ParamDomain":
        """Oriented double cover of a klein domain (a torus); other domains are returned as is."""
        if self.gluing != "klein":
            return self
        return ParamDomain(
            self.t_range,
            (self.s_range[0], self.s_range[0] + 2.0 * self.s_length),
            "torus",
            self.conformal,
        )

    def check(self, t, s, pad: float = 0.0) -> None:
        """Raise DomainError if a point (plus ``pad``) leaves a non-periodic chart."""
        if self.compact:
            if not (np.all(np.isfinite(t)) and np.all(np.isfinite(s))):
                raise DomainError("non-finite parameter")
            return
        t, s = np.asarray(t), np.asarray(s)
        tol = 1e-12
        m = self.margin
        ok = (s - pad >= self.s_range[0] + m - tol) & (s + pad <= self.s_range[1] - m + tol)
        if self.gluing != "cylinder":
            ok &= (t - pad >= self.t_range[0] + m - tol) & (t + pad <= self.t_range[1] - m + tol)
        if not np.all(ok):
            raise DomainError(
                f"parameter point outside the chart {self.t_range} x {self.s_range} (stencil reach {pad})"
            )

    # sampling -------------------------------------------------------------------
    def grid(self, nt: int, ns: int, inset: float = 0.0):
        """Midpoint quadrature nodes and weights, arrays of shape (nt, ns).

        ``inset`` shrinks non-periodic regions further (e.g. by a stencil width).
        For disks, ``nt`` counts radial and ``ns`` angular cells.
        """
        if nt < 1 or ns < 1:
            raise DomainError("grid needs at least one cell per axis")
        if self.gluing == "disk":
            R = self.radius - inset
            dr, dth = R / nt, 2.0 * math.pi / ns
            r = (np.arange(nt) + 0.5) * dr
            th = (np.arange(ns) + 0.5) * dth
            rr, tt = np.meshgrid(r, th, indexing="ij")
            return rr * np.cos(tt), rr * np.sin(tt), rr * dr * dth
        pad = 0.0 if self.compact else self.margin + inset
        tpad = 0.0 if self.gluing == "cylinder" else pad
        t0, t1 = self.t_range[0] + tpad, self.t_range[1] - tpad
        s0, s1 = self.s_range[0] + pad, self.s_range[1] - pad
        if t1 <= t0 or s1 <= s0:
            raise DomainError("margin leaves an empty region")
        dt, ds = (t1 - t0) / nt, (s1 - s0) / ns
        t = t0 + (np.arange(nt) + 0.5) * dt
        s = s0 + (np.arange(ns) + 0.5) * ds
        T, S = np.meshgrid(t, s, indexing="ij")
        return T, S, np.full(T.shape, dt * ds)

    def nodes(self, nt: int, ns: int, offset=(0.0, 0.0)):
        """Node-centred lattice ``t0 + i dt, s0 + j ds`` for periodic domains."""
        if not self.compact:
            raise PreconditionError("node lattices are only defined on torus or klein domains")
        dt, ds = self.t_length / nt, self.s_length / ns
        t = self.t_range[0] + offset[0] + np.arange(nt) * dt
        s = self.s_range[0] + offset[1] + np.arange(ns) * ds
        T, S = np.meshgrid(t, s, indexing="ij")
        return T, S, dt, ds
