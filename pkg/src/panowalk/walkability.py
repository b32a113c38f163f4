"""Walkable-area maps: binarization, run-length codec, indexed foot queries.

A walkmap stores, per video frame, the walkable/non-walkable raster as
whole-frame flattened run lengths (row-major, alternating values, first run
counts non-walkable pixels and may be 0). Point queries go latitude ->
raster cell -> binary search over a lazily built prefix-sum index, so a
query costs O(log runs) and never decodes the frame.

Lookup depends only on (phi, lam) and the map dimensions, so maps may be
built at a lower resolution than the video without changing query
semantics.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import canonical, kernels
from .errors import ValidationError

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ClassMap:
    """Per-pixel class indices from an upstream segmentation, plus the
    declared label-set size the indices must stay inside."""

    data: np.ndarray
    num_classes: int

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.ndim != 2 or d.size == 0:
            raise ValidationError("class map must be a non-empty HxW raster")
        if self.num_classes <= 0:
            raise ValidationError("label-set size must be positive")
        object.__setattr__(self, "data", d)


def binarize(cm: ClassMap, walkable_classes: set[int]) -> np.ndarray:
    """1 where the pixel's class is whitelisted, else 0 (uint8)."""
    if not walkable_classes:
        raise ValidationError("walkable class whitelist is empty")
    d = cm.data
    if d.min() < 0 or d.max() >= cm.num_classes:
        raise ValidationError(
            f"class index out of range [0, {cm.num_classes}): found {int(d.min())}..{int(d.max())}"
        )
    return np.isin(d, list(walkable_classes)).astype(np.uint8)


def rle_encode(raster: np.ndarray) -> np.ndarray:
    """Flattened alternating run lengths; first run counts 0s, may be 0."""
    r = np.asarray(raster)
    if r.size == 0:
        raise ValidationError("cannot encode an empty raster")
    flat = np.ascontiguousarray(r.reshape(-1) != 0, dtype=np.uint8)
    return kernels.rle_encode(flat)


def _check_runs(runs: np.ndarray, n: int) -> np.ndarray:
    runs = np.asarray(runs, dtype=np.int64)
    if runs.ndim != 1 or runs.size == 0:
        raise ValidationError("runs must be a non-empty 1-d sequence")
    if np.any(runs < 0) or np.any(runs[1:] < 1):
        raise ValidationError("every run must be >= 1 except the first, which may be 0")
    total = int(runs.sum())
    if total != n:
        raise ValidationError(f"run lengths sum to {total}, expected {n}")
    return runs


def rle_decode(runs, w: int, h: int) -> np.ndarray:
    """Exact inverse of rle_encode; validates totals and alternation."""
    if w <= 0 or h <= 0:
        raise ValidationError("raster dimensions must be positive")
    runs = _check_runs(runs, w * h)
    return kernels.rle_decode(runs, w * h).reshape(h, w)


class WalkMap:
    """Immutable per-frame run-length walkability with indexed queries.

    The prefix-sum index per frame is built on first query and published
    with a single dict assignment, so concurrent readers either miss the
    cache (and rebuild identical content) or see a complete index.
    """

    def __init__(self, w: int, h: int, frames: dict[int, np.ndarray]):
        if w <= 0 or h <= 0:
            raise ValidationError("walkmap dimensions must be positive")
        if not frames:
            raise ValidationError("walkmap needs at least one frame")
        self.w = int(w)
        self.h = int(h)
        self.frames: dict[int, np.ndarray] = {}
        for idx, runs in frames.items():
            self.frames[int(idx)] = _check_runs(runs, self.w * self.h)
        self._index: dict[int, np.ndarray] = {}

    def _ends(self, frame: int) -> np.ndarray:
        ends = self._index.get(frame)
        if ends is None:
            ends = np.cumsum(self.frames[frame])
            self._index[frame] = ends
        return ends

    def cell_of(self, phi: float, lam: float) -> tuple[int, int]:
        """(u, v) raster cell of a foot direction."""
        u = int(math.floor(((lam + math.pi) / _TWO_PI) * self.w)) % self.w
        v = min(max(int(math.floor(((0.5 * math.pi - phi) / math.pi) * self.h)), 0), self.h - 1)
        return u, v

    def is_walkable(self, frame: int, phi: float, lam: float) -> bool:
        if frame not in self.frames:
            raise ValidationError(f"frame {frame} not present in walkmap")
        u, v = self.cell_of(phi, lam)
        flat = v * self.w + u
        ends = self._ends(frame)
        run_idx = bisect.bisect_right(ends, flat)  # first run whose end exceeds flat
        return bool(run_idx % 2)

    # -- serialization --------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "w": self.w,
            "h": self.h,
            "frames": {str(k): self.frames[k].tolist() for k in self.frames},
        }

    def to_canonical_bytes(self) -> bytes:
        return canonical.dump_bytes(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "WalkMap":
        try:
            w, h, frames = d["w"], d["h"], d["frames"]
        except (KeyError, TypeError) as e:
            raise ValidationError(f"walkmap JSON missing key: {e}") from e
        parsed = {}
        for k, runs in frames.items():
            if not str(k).lstrip("-").isdigit():
                raise ValidationError(f"walkmap frame key is not an integer: {k!r}")
            parsed[int(k)] = np.asarray(runs, dtype=np.int64)
        return cls(w, h, parsed)

    @classmethod
    def from_bytes(cls, raw: bytes) -> "WalkMap":
        try:
            return cls.from_dict(json.loads(raw))
        except json.JSONDecodeError as e:
            raise ValidationError(f"walkmap is not valid JSON: {e}") from e

    @classmethod
    def load(cls, path) -> "WalkMap":
        with open(path, "rb") as f:
            return cls.from_bytes(f.read())


def build_walkmap(rasters: dict[int, np.ndarray]) -> WalkMap:
    """Encode binary rasters (uniform dims) into a WalkMap."""
    if not rasters:
        raise ValidationError("no rasters to encode")
    dims = {r.shape for r in rasters.values()}
    if len(dims) != 1:
        raise ValidationError(f"rasters disagree on dimensions: {sorted(dims)}")
    (h, w) = next(iter(dims))
    return WalkMap(w, h, {idx: rle_encode(r) for idx, r in rasters.items()})


def downsample_raster(raster: np.ndarray, factor: int) -> np.ndarray:
    """Stride-sample a raster by an integer factor (deterministic)."""
    if factor < 1:
        raise ValidationError("downsample factor must be >= 1")
    return np.ascontiguousarray(raster[::factor, ::factor])


def walkmap_stats(wm: WalkMap) -> dict:
    """Size accounting: encoded RLE JSON vs the dense per-pixel JSON it
    replaces (same envelope, raster spelled out pixel by pixel)."""
    dense_frames = {}
    for idx in wm.frames:
        dense = kernels.rle_decode(wm.frames[idx], wm.w * wm.h)
        dense_frames[str(idx)] = dense.tolist()
    raw = len(
        json.dumps(
            {"w": wm.w, "h": wm.h, "frames": dense_frames},
            separators=(",", ":"),
            sort_keys=True,
        ).encode("ascii")
    )
    encoded = len(wm.to_canonical_bytes())
    return {
        "frames": len(wm.frames),
        "raw_bytes_estimate": raw,
        "encoded_bytes": encoded,
        "ratio": encoded / raw,
    }
