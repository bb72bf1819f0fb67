"""Kernel backend selection.

The compiled extension (`retime.kernels._fast`) is preferred when it
imports; otherwise the pure numpy fallback is used.  Set RETIME_KERNELS to
"pure" or "fast" to force a backend (forcing "fast" raises if the extension
is missing).  Both backends produce bit-identical output.
"""

from __future__ import annotations

import os

from . import _pure

_requested = os.environ.get("RETIME_KERNELS", "auto").lower()

if _requested == "pure":
    _impl = _pure
elif _requested in ("auto", "fast"):
    try:
        from . import _fast as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "fast":
            raise ImportError(
                "RETIME_KERNELS=fast but the compiled extension is not built; "
                "run `pip install -e .` or set RETIME_KERNELS=pure"
            )
        _impl = _pure
else:
    raise ValueError(f"RETIME_KERNELS must be auto, fast, or pure, not {_requested!r}")

BACKEND = "fast" if _impl.__name__.endswith("_fast") else "pure"

eq1_indices = _impl.eq1_indices
linear_resample = _impl.linear_resample
bilinear_resize = _impl.bilinear_resize

__all__ = ["BACKEND", "eq1_indices", "linear_resample", "bilinear_resize"]
