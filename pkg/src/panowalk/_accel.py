"""Kernel backend selection.

The hot loops (ERP resampling, harmonic fill, run-length codec) ship in two
builds: numba @njit and pure numpy. numba wins when importable;
PANOWALK_PURE_NUMPY=1 forces the numpy build, which is also the fallback
when numba is missing. Both builds are kept bit-identical by construction
(same float expressions, same evaluation order) and the test suite asserts
that equivalence directly.
"""

from __future__ import annotations

import os


def _numba_usable() -> bool:
    if os.environ.get("PANOWALK_PURE_NUMPY", "") not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _numba_usable()
BACKEND = "numba" if NUMBA_ENABLED else "numpy"
