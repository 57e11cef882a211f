"""Pick the compiled accumulation kernel when available.

Set BBGKZ_PURE_PYTHON=1 to force the numpy fallback.
"""

import os

from . import _kernels_py

if os.environ.get("BBGKZ_PURE_PYTHON") == "1":
    accumulate_terms = _kernels_py.accumulate_terms
    BACKEND = "python"
else:
    try:
        from ._kernels import accumulate_terms
        BACKEND = "cython"
    except ImportError:
        accumulate_terms = _kernels_py.accumulate_terms
        BACKEND = "python"

__all__ = ["accumulate_terms", "BACKEND"]
