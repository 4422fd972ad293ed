"""Backend selection for the Liouvillian kernels.

The compiled extension is used when importable; setting
``RYDBEC_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

BACKEND = "python"

if os.environ.get("RYDBEC_PURE_PYTHON", "") not in ("", "0"):
    from ._pykernels import liouvillian, rk4_steps
else:
    try:
        from ._ckernels import liouvillian, rk4_steps

        BACKEND = "cython"
    except ImportError:
        from ._pykernels import liouvillian, rk4_steps

__all__ = ["BACKEND", "liouvillian", "rk4_steps"]
