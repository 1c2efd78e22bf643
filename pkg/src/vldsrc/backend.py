"""Select the float-lane kernel backend at import time.

The compiled extension is preferred when it built; the numpy fallback is
used otherwise, or when ``VLDSRC_PURE_PYTHON`` is set (useful for
benchmarking and debugging).  The exact-rational lane never goes through
these kernels — arbitrary-precision Fractions stay in pure Python by design.
"""

import os

if os.environ.get("VLDSRC_PURE_PYTHON"):
    from . import _purekernels as _impl
else:
    try:
        from . import _cutoffcore as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _purekernels as _impl

BACKEND = _impl.BACKEND_NAME
batch_expected_cutoff = _impl.batch_expected_cutoff
merge_float_atoms = _impl.merge_float_atoms
split_rank_classes_float = _impl.split_rank_classes_float
