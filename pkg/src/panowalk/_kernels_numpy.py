"""Pure-numpy build of the hot kernels.

Contract shared with the numba build (and asserted bit-identical by tests):

sample_bilinear(img, su, sv)
    img (H,W,C) float64, su/sv (Ho,Wo) float64 continuous pixel coords where
    integer coordinates are pixel centers. Columns wrap mod W, rows clamp to
    [0,H-1]. Weights evaluate as ((a*(1-f)+b*f)*(1-g)) + ((c*(1-f)+d*f)*g).

sample_nearest(img, su, sv)
    Same coordinates; picks img[clamp(floor(sv+0.5)), floor(su+0.5) mod W].
    Works on any dtype and never leaves it.

harmonic_fill(band, mask, max_iters, tol)
    Jacobi relaxation of masked pixels toward the 4-neighbor mean, columns
    wrapping, rows clamped (edge replicate). band is float64 (Hb,W), modified
    in place; returns iterations executed. Stops when the max absolute change
    over masked pixels drops below tol.

rle_encode(flat) / rle_decode(runs, n)
    Alternating run lengths over a flattened 0/1 raster, first run counts
    zeros and may be empty. Validation lives in walkability, not here.
"""

from __future__ import annotations

import numpy as np


def sample_bilinear(img: np.ndarray, su: np.ndarray, sv: np.ndarray) -> np.ndarray:
    h, w = img.shape[0], img.shape[1]
    i0 = np.floor(su)
    j0 = np.floor(sv)
    f = (su - i0)[..., None]
    g = (sv - j0)[..., None]
    i0 = i0.astype(np.int64)
    j0 = j0.astype(np.int64)
    i0w = np.mod(i0, w)
    i1w = np.mod(i0 + 1, w)
    j0c = np.clip(j0, 0, h - 1)
    j1c = np.clip(j0 + 1, 0, h - 1)
    a = img[j0c, i0w]
    b = img[j0c, i1w]
    c = img[j1c, i0w]
    d = img[j1c, i1w]
    top = a * (1.0 - f) + b * f
    bot = c * (1.0 - f) + d * f
    return top * (1.0 - g) + bot * g


def sample_nearest(img: np.ndarray, su: np.ndarray, sv: np.ndarray) -> np.ndarray:
    h, w = img.shape[0], img.shape[1]
    i = np.mod(np.floor(su + 0.5).astype(np.int64), w)
    j = np.clip(np.floor(sv + 0.5).astype(np.int64), 0, h - 1)
    return img[j, i]


def harmonic_fill(band: np.ndarray, mask: np.ndarray, max_iters: int, tol: float) -> int:
    hb = band.shape[0]
    pad = np.empty((hb + 2, band.shape[1]), dtype=np.float64)
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        return 0
    for it in range(max_iters):
        pad[1:-1] = band
        pad[0] = band[0]
        pad[-1] = band[-1]
        up = pad[:-2]
        down = pad[2:]
        left = np.roll(band, 1, axis=1)
        right = np.roll(band, -1, axis=1)
        new = ((up + down) + left + right) * 0.25
        vals = new[rows, cols]
        delta = np.max(np.abs(vals - band[rows, cols]))
        band[rows, cols] = vals
        if delta < tol:
            return it + 1
    return max_iters


def rle_encode(flat: np.ndarray) -> np.ndarray:
    n = flat.size
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.empty(changes.size + 2, dtype=np.int64)
    bounds[0] = 0
    bounds[1:-1] = changes
    bounds[-1] = n
    runs = np.diff(bounds)
    if flat[0] != 0:
        runs = np.concatenate([np.zeros(1, dtype=np.int64), runs])
    return runs


def rle_decode(runs: np.ndarray, n: int) -> np.ndarray:
    values = (np.arange(runs.size, dtype=np.int64) % 2).astype(np.uint8)
    return np.repeat(values, runs)
