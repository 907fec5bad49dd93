"""Time the compiled kernels against the numpy fallback and check that they agree.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``.
"""

import argparse
import timeit

import numpy as np

from minlag import _kernels_py, spectral, special

try:
    from minlag import _kernels
except ImportError:  # extension not built
    _kernels = None


def _cases():
    p = special.KLEIN_MODULUS
    a, c = special._agm_table(p)
    K = special.complete_K(p)
    x = np.linspace(-20.0, 20.0, 200_000)
    yield "landen_sncndn (2e5 points)", (x, a, c, K), "landen_sncndn"

    grid = spectral.flat_torus_grid(256)
    st = spectral.assemble(grid).stencil
    v = np.random.default_rng(0).standard_normal(grid.size)
    yield "stencil_apply (256x256, 1 rhs)", (st.diag, st.nbr, st.coef, v), "stencil_apply"
    V = np.random.default_rng(1).standard_normal((grid.size, 16))
    yield "stencil_apply (256x256, 16 rhs)", (st.diag, st.nbr, st.coef, V), "stencil_apply"


def _max_diff(a, b):
    if isinstance(a, tuple):
        return max(float(np.max(np.abs(x - y))) for x, y in zip(a, b))
    return float(np.max(np.abs(a - b)))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled kernels are not built; only the fallback is timed")
    print(f"{'kernel':<34}{'numpy (ms)':>12}{'compiled (ms)':>15}{'speedup':>10}{'max diff':>12}")
    for label, call_args, fname in _cases():
        py = getattr(_kernels_py, fname)
        t_py = min(timeit.repeat(lambda: py(*call_args), number=1, repeat=args.repeat)) * 1e3
        if _kernels is None:
            print(f"{label:<34}{t_py:>12.2f}{'-':>15}{'-':>10}{'-':>12}")
            continue
        cy = getattr(_kernels, fname)
        t_cy = min(timeit.repeat(lambda: cy(*call_args), number=1, repeat=args.repeat)) * 1e3
        diff = _max_diff(py(*call_args), cy(*call_args))
        print(f"{label:<34}{t_py:>12.2f}{t_cy:>15.2f}{t_py / t_cy:>10.1f}{diff:>12.1e}")


if __name__ == "__main__":
    main()
