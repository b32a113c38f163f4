"""Backend dispatch for the hot kernels.

Importing this module binds sample_bilinear, sample_nearest, harmonic_fill,
rle_encode and rle_decode to the numba build when available, or the numpy
build when PANOWALK_PURE_NUMPY=1 or numba is missing. See _accel.BACKEND.
"""

from __future__ import annotations

from ._accel import BACKEND, NUMBA_ENABLED

if NUMBA_ENABLED:
    from ._kernels_numba import (  # noqa: F401
        harmonic_fill,
        rle_decode,
        rle_encode,
        sample_bilinear,
        sample_nearest,
    )
else:
    from ._kernels_numpy import (  # noqa: F401
        harmonic_fill,
        rle_decode,
        rle_encode,
        sample_bilinear,
        sample_nearest,
    )

__all__ = [
    "BACKEND",
    "NUMBA_ENABLED",
    "harmonic_fill",
    "rle_decode",
    "rle_encode",
    "sample_bilinear",
    "sample_nearest",
]
