"""Walkmap binarization, run-length codec, queries, and serialization."""

import math

import numpy as np
import pytest

from panowalk.errors import ValidationError
from panowalk.walkability import (
    ClassMap,
    WalkMap,
    binarize,
    build_walkmap,
    downsample_raster,
    rle_decode,
    rle_encode,
    walkmap_stats,
)

from _helpers import brute_force_walkable, render_ground_walkable


def street_raster(w=1920, h=960):
    return render_ground_walkable(0.3, -0.2, w, h)


class TestBinarize:
    def test_whitelist(self):
        data = np.array([[0, 1, 2], [2, 1, 0]])
        out = binarize(ClassMap(data, num_classes=3), {1, 2})
        assert out.tolist() == [[0, 1, 1], [1, 1, 0]]
        assert out.dtype == np.uint8

    def test_rejects_out_of_range_class(self):
        with pytest.raises(ValidationError, match="out of range"):
            binarize(ClassMap(np.array([[0, 5]]), num_classes=3), {0})

    def test_rejects_empty_whitelist(self):
        with pytest.raises(ValidationError, match="empty"):
            binarize(ClassMap(np.array([[0]]), num_classes=1), set())

    def test_rejects_bad_raster(self):
        with pytest.raises(ValidationError):
            ClassMap(np.zeros(5, dtype=int), num_classes=2)


class TestRleCodec:
    def test_round_trip_random(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            h, w = int(rng.integers(1, 20)), int(rng.integers(1, 20))
            raster = (rng.random((h, w)) < 0.4).astype(np.uint8)
            assert np.array_equal(rle_decode(rle_encode(raster), w, h), raster)

    def test_known_encoding(self):
        raster = np.array([[1, 1, 0], [0, 1, 0]], dtype=np.uint8)
        assert rle_encode(raster).tolist() == [0, 2, 2, 1, 1]

    def test_decode_validates_total(self):
        with pytest.raises(ValidationError, match="sum"):
            rle_decode(np.array([2, 2]), 3, 3)

    def test_decode_rejects_zero_interior_run(self):
        with pytest.raises(ValidationError, match=">= 1"):
            rle_decode(np.array([2, 0, 2]), 2, 2)

    def test_decode_rejects_negative(self):
        with pytest.raises(ValidationError):
            rle_decode(np.array([-1, 5]), 2, 2)


class TestQueries:
    def test_cell_formula_examples(self):
        wm = WalkMap(64, 32, {0: np.array([64 * 32])})
        # lam = 0 maps to cell w/2; phi = 0 maps to row h/2
        assert wm.cell_of(0.0, 0.0) == (32, 16)
        # just left of forward stays in cell 31
        assert wm.cell_of(0.0, -1e-9) == (31, 16)
        # nadir clamps to the last row, zenith to row 0
        assert wm.cell_of(-math.pi / 2, 0.0) == (32, 31)
        assert wm.cell_of(math.pi / 2, 0.0) == (32, 0)
        # lam = pi wraps onto column 0
        assert wm.cell_of(0.0, math.pi) == (0, 16)

    def test_matches_dense_raster(self):
        rng = np.random.default_rng(37)
        raster = (rng.random((24, 48)) < 0.5).astype(np.uint8)
        wm = build_walkmap({5: raster})
        for _ in range(500):
            phi = rng.uniform(-math.pi / 2, math.pi / 2)
            lam = rng.uniform(-math.pi, math.pi)
            assert wm.is_walkable(5, phi, lam) == brute_force_walkable(raster, phi, lam)

    def test_street_scene_matches_dense(self):
        raster = street_raster(480, 240)
        wm = build_walkmap({0: raster})
        rng = np.random.default_rng(41)
        for _ in range(500):
            phi = rng.uniform(-math.pi / 2, 0)  # lower hemisphere
            lam = rng.uniform(-math.pi, math.pi)
            assert wm.is_walkable(0, phi, lam) == brute_force_walkable(raster, phi, lam)

    def test_unknown_frame_raises(self):
        wm = WalkMap(4, 2, {0: np.array([8])})
        with pytest.raises(ValidationError, match="frame 3"):
            wm.is_walkable(3, 0.0, 0.0)

    def test_resolution_independent_away_from_borders(self):
        # a query aimed at the middle of a coarse cell agrees across scales
        raster = street_raster(256, 128)
        full = build_walkmap({0: raster})
        half = build_walkmap({0: downsample_raster(raster, 2)})
        hits = 0
        for v in range(0, 128, 8):
            for u in range(0, 256, 8):
                # center of the 2x2 block -> same cell in both maps
                lam = 2 * math.pi * (u + 1.0) / 256 - math.pi
                phi = math.pi / 2 - math.pi * (v + 1.0) / 128
                lam += 1e-9  # nudge off the exact boundary
                phi -= 1e-9
                if full.is_walkable(0, phi, lam) == half.is_walkable(0, phi, lam):
                    hits += 1
        assert hits >= 0.97 * (16 * 32)  # block interiors agree; edges may not


class TestSerialization:
    def test_canonical_round_trip(self):
        rng = np.random.default_rng(43)
        rasters = {i: (rng.random((6, 12)) < 0.5).astype(np.uint8) for i in (0, 3, 11)}
        wm = build_walkmap(rasters)
        raw = wm.to_canonical_bytes()
        wm2 = WalkMap.from_bytes(raw)
        assert wm2.to_canonical_bytes() == raw
        assert wm2.w == 12 and wm2.h == 6
        assert sorted(wm2.frames) == [0, 3, 11]
        for i, r in rasters.items():
            assert np.array_equal(rle_decode(wm2.frames[i], 12, 6), r)

    def test_frame_keys_sorted_numerically(self):
        wm = WalkMap(2, 1, {i: np.array([2]) for i in (10, 2, 33)})
        raw = wm.to_canonical_bytes().decode()
        assert raw.index('"2"') < raw.index('"10"') < raw.index('"33"')

    def test_rejects_malformed(self):
        with pytest.raises(ValidationError, match="JSON"):
            WalkMap.from_bytes(b"{nope")
        with pytest.raises(ValidationError, match="missing key"):
            WalkMap.from_dict({"w": 2, "h": 2})
        with pytest.raises(ValidationError, match="not an integer"):
            WalkMap.from_dict({"w": 2, "h": 1, "frames": {"a": [2]}})

    def test_build_rejects_mixed_dims(self):
        with pytest.raises(ValidationError, match="dimensions"):
            build_walkmap({0: np.zeros((2, 3), np.uint8), 1: np.zeros((3, 2), np.uint8)})


class TestStats:
    def test_street_scene_compresses(self):
        wm = build_walkmap({i: street_raster(480, 240) for i in range(3)})
        stats = walkmap_stats(wm)
        assert stats["frames"] == 3
        assert stats["encoded_bytes"] == len(wm.to_canonical_bytes())
        assert stats["ratio"] == stats["encoded_bytes"] / stats["raw_bytes_estimate"]
        assert stats["ratio"] <= 0.02

    def test_transitions_per_row_bounded(self):
        # the street scene itself stays RLE-friendly: few runs per row
        raster = street_raster(480, 240)
        transitions = np.abs(np.diff(raster.astype(int), axis=1)).sum(axis=1)
        assert int(transitions.max()) <= 10

    def test_downsample_strides(self):
        raster = np.arange(24, dtype=np.uint8).reshape(4, 6) % 2
        down = downsample_raster(raster, 2)
        assert down.shape == (2, 3)
        assert np.array_equal(down, raster[::2, ::2])
        with pytest.raises(ValidationError):
            downsample_raster(raster, 0)
