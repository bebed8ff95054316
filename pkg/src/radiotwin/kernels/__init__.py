"""Hot numeric kernels with a compiled core and a pure-numpy fallback.

The compiled extension (Cython) is picked at import time when available.
Override with the environment variable RADIOTWIN_KERNELS=native|python;
requesting "native" without a built extension is an error, so benchmarks
cannot silently compare python against itself.
"""

from __future__ import annotations

import os

_requested = os.environ.get("RADIOTWIN_KERNELS", "").strip().lower()
if _requested not in ("", "native", "python"):
    raise ImportError(
        f"RADIOTWIN_KERNELS must be 'native' or 'python', got {_requested!r}"
    )

if _requested == "python":
    from . import _python as _impl

    BACKEND = "python"
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        if _requested == "native":
            raise
        from . import _python as _impl  # type: ignore[no-redef]

        BACKEND = "python"

pairwise_sq_dists = _impl.pairwise_sq_dists
knn_brute = _impl.knn_brute
min_sq_dist = _impl.min_sq_dist
smo_one_class = _impl.smo_one_class

__all__ = [
    "BACKEND",
    "pairwise_sq_dists",
    "knn_brute",
    "min_sq_dist",
    "smo_one_class",
]
