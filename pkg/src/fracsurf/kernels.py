"""Backend selection for the zonal series kernel.

The compiled extension is preferred when available; setting the
environment variable ``FRACSURF_PURE_PYTHON=1`` forces the numpy
fallback.  Both backends implement the same arithmetic; see
``benchmarks/bench_series.py`` for a speed comparison.
"""

import os

if os.environ.get("FRACSURF_PURE_PYTHON", "") not in ("", "0"):
    from . import _zonal_np as _impl

    BACKEND = "python"
else:
    try:
        from . import _zonal as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import _zonal_np as _impl

        BACKEND = "python"

zonal_sums = _impl.zonal_sums
