"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the NumPy
fallback is used.  CORRMMSE_BACKEND=python|compiled pins the choice (read
once, at import time).
"""

from __future__ import annotations

import os

_requested = os.environ.get("CORRMMSE_BACKEND", "auto").strip().lower()

if _requested in ("", "auto", "compiled", "c"):
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _requested in ("compiled", "c"):
            raise RuntimeError(
                "CORRMMSE_BACKEND=compiled but the kernel extension is not "
                "built; run `python setup.py build_ext --inplace`"
            ) from None
        from . import _kernels_py as kernels

        BACKEND = "python"
elif _requested in ("python", "py", "numpy"):
    from . import _kernels_py as kernels

    BACKEND = "python"
else:
    raise RuntimeError(
        f"unknown CORRMMSE_BACKEND={_requested!r}; use 'python' or 'compiled'"
    )
