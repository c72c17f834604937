"""Backend selection for the grid kernels.

The compiled extension is used when it was built; otherwise the numpy
fallback is loaded. Setting ``NETPRUNE_PURE_PYTHON=1`` forces the fallback.
"""

import os

if os.environ.get("NETPRUNE_PURE_PYTHON", "") not in ("", "0"):
    from ._pykernels import CellTable, ball_intervals, nearest_in_cells, net_scan, offset_pairs, pair_weight_sum
    BACKEND = "python"
else:
    try:
        from ._ckernels import CellTable, ball_intervals, nearest_in_cells, net_scan, offset_pairs, pair_weight_sum
        BACKEND = "cython"
    except ImportError:
        from ._pykernels import CellTable, ball_intervals, nearest_in_cells, net_scan, offset_pairs, pair_weight_sum
        BACKEND = "python"

__all__ = ["BACKEND", "CellTable", "ball_intervals", "nearest_in_cells", "net_scan", "offset_pairs", "pair_weight_sum"]
