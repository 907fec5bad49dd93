"""Complete elliptic integrals and Jacobi elliptic functions.

Everything here uses the *modulus* convention: ``p`` is the modulus k, and the
integrands are written with ``p**2 * sin(theta)**2``.  The Klein bottle uses
``p = 2*sqrt(2)/3``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import _backend
from .errors import DomainError

#: Landen/AGM descent stops once the descending modulus drops below this.
LANDEN_TOL = 1e-14

KLEIN_MODULUS = 2.0 * math.sqrt(2.0) / 3.0


@dataclass(frozen=True)
class EllipticModulus:
    p: float

    def __post_init__(self):
        check_modulus(self.p)

    @property
    def complementary(self) -> float:
        return math.sqrt(1.0 - self.p * self.p)


class JacobiTriple(NamedTuple):
    sn: np.ndarray
    cn: np.ndarray
    dn: np.ndarray


def check_modulus(p) -> float:
    p = float(p.p if isinstance(p, EllipticModulus) else p)
    if not (0.0 <= p < 1.0) or math.isnan(p):
        raise DomainError(f"elliptic modulus must satisfy 0 <= p < 1, got {p!r}")
    return p


@lru_cache(maxsize=64)
def _agm_table(p: float):
    """Arithmetic-geometric mean table (a_n, c_n) starting from (1, p', p)."""
    a, b, c = 1.0, math.sqrt(1.0 - p * p), p
    aa, cc = [a], [c]
    while abs(c) >= LANDEN_TOL * a:
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        aa.append(a)
        cc.append(c)
    return np.array(aa), np.array(cc)


def complete_K(p) -> float:
    """Complete elliptic integral of the first kind, ``pi / (2 AGM(1, p'))``."""
    p = check_modulus(p)
    a, _ = _agm_table(p)
    return math.pi / (2.0 * a[-1])


def complete_E(p) -> float:
    """Complete elliptic integral of the second kind.

    Uses ``E = K (1 - sum_n 2**(n-1) c_n**2)`` over the same AGM table as K.
    """
    p = check_modulus(p)
    a, c = _agm_table(p)
    series = sum(math.ldexp(cn * cn, n - 1) for n, cn in enumerate(c))
    return complete_K(p) * (1.0 - series)


def jacobi(x, p) -> JacobiTriple:
    """sn, cn, dn at ``x`` (scalar or array) by descending Landen transformation."""
    p = check_modulus(p)
    a, c = _agm_table(p)
    x = np.asarray(x, dtype=float)
    sn, cn, dn = _backend.landen_sncndn(x, a, c, complete_K(p))
    if x.ndim == 0:
        return JacobiTriple(float(sn), float(cn), float(dn))
    return JacobiTriple(sn, cn, dn)


def jacobi_derivatives(x, p):
    """Derivatives (sn', cn', dn') = (cn dn, -sn dn, -p^2 sn cn)."""
    sn, cn, dn = jacobi(x, p)
    p = check_modulus(p)
    return cn * dn, -sn * dn, -p * p * sn * cn


def jacobi_series(x0, p, order: int):
    """Taylor coefficients of sn, cn, dn about ``x0`` up to ``order``.

    Returns three arrays of shape ``(order + 1,) + shape(x0)``; coefficient k is
    the k-th derivative divided by k!.  Obtained from the defining system
    sn' = cn dn, cn' = -sn dn, dn' = -p^2 sn cn by power-series recurrence.
    """
    p = check_modulus(p)
    sn0, cn0, dn0 = jacobi(x0, p)
    shape = (order + 1,) + np.shape(x0)
    s, c, d = np.zeros(shape), np.zeros(shape), np.zeros(shape)
    s[0], c[0], d[0] = sn0, cn0, dn0
    p2 = p * p
    for k in range(order):
        cd = sum(c[i] * d[k - i] for i in range(k + 1))
        sd = sum(s[i] * d[k - i] for i in range(k + 1))
        sc = sum(s[i] * c[k - i] for i in range(k + 1))
        s[k + 1] = cd / (k + 1)
        c[k + 1] = -sd / (k + 1)
        d[k + 1] = -p2 * sc / (k + 1)
    return s, c, d
