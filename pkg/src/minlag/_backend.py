"""Select the compiled kernels when importable, else the numpy fallback.

Set ``MINLAG_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("MINLAG_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as kernels

    COMPILED = False
else:
    try:
        from . import _kernels as kernels

        COMPILED = True
    except ImportError:  # extension not built
        from . import _kernels_py as kernels

        COMPILED = False

landen_sncndn = kernels.landen_sncndn
stencil_apply = kernels.stencil_apply

__all__ = ["COMPILED", "kernels", "landen_sncndn", "stencil_apply"]
