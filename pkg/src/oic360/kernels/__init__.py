"""Belief-propagation kernel backends.

The hot loop of the codec is syndrome decoding during encoder-side rate
trials.  A compiled Cython kernel is used when available; otherwise the
vectorized numpy implementation takes over.  Both implement the identical
normalized min-sum schedule with the same float64 operation order, so rate
decisions and decoded bits are bit-for-bit independent of the backend.

Set OIC_KERNEL=py (or c) to force a backend.
"""

import os

BP_MAX_ITERS = 60
BP_PATIENCE = 8
BP_ALPHA = 0.75

_choice = os.environ.get("OIC_KERNEL", "").strip().lower()

if _choice == "py":
    from ._bp_py import bp_decode
    BACKEND = "py"
elif _choice == "c":
    from ._bp_c import bp_decode  # noqa: F401
    BACKEND = "c"
else:
    try:
        from ._bp_c import bp_decode  # noqa: F401
        BACKEND = "c"
    except ImportError:
        from ._bp_py import bp_decode  # noqa: F401
        BACKEND = "py"
