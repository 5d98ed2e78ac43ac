"""Kernel dispatch: compiled Cython kernels when built, numpy otherwise.

Set ``MOLSHAPE_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
if not os.environ.get("MOLSHAPE_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

real_sh_matrix = _impl.real_sh_matrix
legendre_matrix = _impl.legendre_matrix
usr_moments = _impl.usr_moments

__all__ = ["BACKEND", "real_sh_matrix", "legendre_matrix", "usr_moments"]
