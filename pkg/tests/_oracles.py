"""Independent reference values for the test suite.

Nothing here calls into the package.  Frozen numbers were produced once with
an arbitrary-precision library (30 significant digits) and are stored as
literals; the quadrature and ODE helpers recompute things from definitions.
"""

import math

import numpy as np
from scipy.integrate import solve_ivp

KLEIN_P = 2.0 * math.sqrt(2.0) / 3.0

# complete integrals, modulus convention: K(p) = int_0^{pi/2} (1 - p^2 sin^2)^{-1/2}
FROZEN_K = {0.3: 1.6080486199305127984, 0.6: 1.7507538029157525118, KLEIN_P: 2.5286255322188940643,
            0.99: 3.3566005233611919425}
FROZEN_E = {0.3: 1.5348334649232490444, 0.6: 1.4180833944487242439, KLEIN_P: 1.1137411017129381858,
            0.99: 1.0284758090288040219}
# (sn, cn, dn) at the Klein modulus
FROZEN_JACOBI = {
    0.7: (0.60881218956144235566, 0.79331438776906244863, 0.81885975890131102858),
    2.0: (0.98320260256160694111, 0.18251751235452115948, 0.37512977584484935043),
    -3.3: (-0.96103989388342867368, -0.27640970019977257334, 0.423112616860153732),
}
FROZEN_KLEIN_AREA = 41.987050357708431491


def adaptive_simpson(f, a, b, tol=1e-12, depth=60):
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return rec(a, m, fa, flm, fm, left, tol / 2, depth - 1) + rec(m, b, fm, frm, fb, right, tol / 2, depth - 1)

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, depth)


def K_quad(p):
    return adaptive_simpson(lambda th: 1.0 / math.sqrt(1.0 - (p * math.sin(th)) ** 2), 0.0, math.pi / 2)


def E_quad(p):
    return adaptive_simpson(lambda th: math.sqrt(1.0 - (p * math.sin(th)) ** 2), 0.0, math.pi / 2)


def jacobi_ode(x, p):
    """Integrate sn' = cn dn, cn' = -sn dn, dn' = -p^2 sn cn from (0, 1, 1)."""
    if x == 0:
        return 0.0, 1.0, 1.0

    def rhs(_, y):
        sn, cn, dn = y
        return [cn * dn, -sn * dn, -p * p * sn * cn]

    sol = solve_ivp(rhs, (0.0, x), [0.0, 1.0, 1.0], method="DOP853", rtol=1e-13, atol=1e-14)
    return tuple(sol.y[:, -1])


def flat_grid_eigenvalue(n, k, l, length=2 * math.pi):
    """Eigenvalue of mode (k, l) for the periodic 5-point Laplacian on an n x n grid of side ``length``."""
    d = length / n
    return (4 * math.sin(math.pi * k / n) ** 2 + 4 * math.sin(math.pi * l / n) ** 2) / d**2


def latitude_product_H(a, b):
    """|H| of a product of arc-length latitude circles from planar curve geometry.

    A circle of Euclidean radius r = sqrt(1 - h^2) has curvature vector of length
    1/r pointing to its centre; removing the sphere's normal component leaves
    the geodesic curvature sqrt(1/r^2 - 1).
    """
    k1 = math.sqrt(1.0 / (1.0 - a * a) - 1.0)
    k2 = math.sqrt(1.0 / (1.0 - b * b) - 1.0)
    return 0.5 * math.hypot(k1, k2)


def numpy_dense_spectrum(K, m):
    """Generalized symmetric eigenvalues of K f = lam diag(m) f by Cholesky reduction."""
    s = 1.0 / np.sqrt(m)
    return np.linalg.eigvalsh(s[:, None] * K * s[None, :])
