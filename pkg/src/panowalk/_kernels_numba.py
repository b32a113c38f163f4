"""numba @njit build of the hot kernels.

Same contract as _kernels_numpy (see its docstring); loops are written with
the exact float expression order of the numpy build so outputs stay
bit-identical between backends. Serial njit, no fastmath: determinism is a
hard requirement (repeat runs must produce identical bytes).
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def sample_bilinear(img: np.ndarray, su: np.ndarray, sv: np.ndarray) -> np.ndarray:
    h, w, nc = img.shape
    ho, wo = su.shape
    out = np.empty((ho, wo, nc), dtype=np.float64)
    for r in range(ho):
        for c in range(wo):
            x = su[r, c]
            y = sv[r, c]
            i0 = int(np.floor(x))
            j0 = int(np.floor(y))
            f = x - np.floor(x)
            g = y - np.floor(y)
            i0w = i0 % w
            i1w = (i0 + 1) % w
            j0c = min(max(j0, 0), h - 1)
            j1c = min(max(j0 + 1, 0), h - 1)
            for k in range(nc):
                a = img[j0c, i0w, k]
                b = img[j0c, i1w, k]
                cc = img[j1c, i0w, k]
                d = img[j1c, i1w, k]
                top = a * (1.0 - f) + b * f
                bot = cc * (1.0 - f) + d * f
                out[r, c, k] = top * (1.0 - g) + bot * g
    return out


@njit(cache=True)
def sample_nearest(img: np.ndarray, su: np.ndarray, sv: np.ndarray) -> np.ndarray:
    h, w = img.shape[0], img.shape[1]
    ho, wo = su.shape
    out = np.empty((ho, wo) + img.shape[2:], dtype=img.dtype)
    for r in range(ho):
        for c in range(wo):
            i = int(np.floor(su[r, c] + 0.5)) % w
            j = min(max(int(np.floor(sv[r, c] + 0.5)), 0), h - 1)
            out[r, c] = img[j, i]
    return out


@njit(cache=True)
def harmonic_fill(band: np.ndarray, mask: np.ndarray, max_iters: int, tol: float) -> int:
    hb, w = band.shape
    nm = 0
    for r in range(hb):
        for c in range(w):
            if mask[r, c]:
                nm += 1
    if nm == 0:
        return 0
    rows = np.empty(nm, dtype=np.int64)
    cols = np.empty(nm, dtype=np.int64)
    idx = 0
    for r in range(hb):
        for c in range(w):
            if mask[r, c]:
                rows[idx] = r
                cols[idx] = c
                idx += 1
    vals = np.empty(nm, dtype=np.float64)
    for it in range(max_iters):
        delta = 0.0
        for i in range(nm):
            r = rows[i]
            c = cols[i]
            up = band[r - 1 if r > 0 else 0, c]
            down = band[r + 1 if r < hb - 1 else hb - 1, c]
            left = band[r, c - 1 if c > 0 else w - 1]
            right = band[r, (c + 1) % w]
            v = ((up + down) + left + right) * 0.25
            vals[i] = v
            ch = abs(v - band[r, c])
            if ch > delta:
                delta = ch
        for i in range(nm):
            band[rows[i], cols[i]] = vals[i]
        if delta < tol:
            return it + 1
    return max_iters


@njit(cache=True)
def rle_encode(flat: np.ndarray) -> np.ndarray:
    n = flat.size
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    nruns = 1
    for i in range(1, n):
        if flat[i] != flat[i - 1]:
            nruns += 1
    lead = 1 if flat[0] != 0 else 0
    runs = np.zeros(nruns + lead, dtype=np.int64)
    idx = lead
    count = 1
    for i in range(1, n):
        if flat[i] != flat[i - 1]:
            runs[idx] = count
            idx += 1
            count = 1
        else:
            count += 1
    runs[idx] = count
    return runs


@njit(cache=True)
def rle_decode(runs: np.ndarray, n: int) -> np.ndarray:
    out = np.empty(n, dtype=np.uint8)
    pos = 0
    for i in range(runs.size):
        v = np.uint8(i % 2)
        for _ in range(runs[i]):
            out[pos] = v
            pos += 1
    return out
