"""Shared fixtures: synthetic street worlds, walkmaps, on-disk asset trees."""

from __future__ import annotations

import math

import numpy as np
import pytest

from panowalk import frameio, kernels
from panowalk.config import Config
from panowalk.graph import Trajectory, WorldGraph, build_manifest
from panowalk.walkability import WalkMap, build_walkmap

from _helpers import render_ground_walkable

MAP_W, MAP_H = 64, 32


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger JIT compilation up front so timed tests measure steady state."""
    img = np.arange(48, dtype=np.float64).reshape(4, 6, 2)
    pts = np.array([[0.25, 3.75]])
    kernels.sample_bilinear(img, pts, pts)
    kernels.sample_nearest(img, pts, pts)
    band = np.ones((4, 6), dtype=np.float64)
    hole = np.zeros((4, 6), dtype=bool)
    hole[1:3, 2:4] = True
    band[hole] = 0.0
    kernels.harmonic_fill(band, hole, 50, 1e-6)
    flat = np.array([0, 0, 1, 1, 0], dtype=np.uint8)
    kernels.rle_decode(kernels.rle_encode(flat), flat.size)


def make_cross_trajs(step: float = 0.25, phase: float = 0.1) -> list[Trajectory]:
    """Two perpendicular streets, each captured in both directions.

    41 frames per video, spacing `step` meters. The reverse captures run
    offset by `phase` so no two videos share exact sample positions.
    """
    s = np.round(np.arange(-5.0, 5.0 + step / 2, step), 10)
    n = s.size
    fr = np.arange(n, dtype=np.int64)
    zeros = np.zeros(n)

    def heading(dx, dy):
        return np.full(n, math.atan2(dx, dy))

    return [
        Trajectory("xb", fr, s[::-1] + phase, zeros.copy(), heading(-1, 0)),
        Trajectory("xf", fr, s.copy(), zeros.copy(), heading(1, 0)),
        Trajectory("yb", fr, zeros.copy(), s[::-1] + phase, heading(0, -1)),
        Trajectory("yf", fr, zeros.copy(), s.copy(), heading(0, 1)),
    ]


def make_straight_trajs(step: float = 0.25, phase: float = 0.1) -> list[Trajectory]:
    """One street, two capture directions, no crossings."""
    s = np.round(np.arange(-5.0, 5.0 + step / 2, step), 10)
    n = s.size
    fr = np.arange(n, dtype=np.int64)
    zeros = np.zeros(n)
    return [
        Trajectory("fwd", fr, s.copy(), zeros.copy(), np.full(n, math.pi / 2)),
        Trajectory("bwd", fr, s[::-1] + phase, zeros.copy(), np.full(n, -math.pi / 2)),
    ]


@pytest.fixture(scope="session")
def cross_config():
    return Config(epsilon=0.6)


@pytest.fixture(scope="session")
def cross_trajs():
    return make_cross_trajs()


@pytest.fixture(scope="session")
def cross_graph(cross_trajs, cross_config) -> WorldGraph:
    return build_manifest(cross_trajs, cross_config)


def ground_walkmaps_for(trajs, w: int = MAP_W, h: int = MAP_H) -> dict[str, WalkMap]:
    out = {}
    for t in trajs:
        rasters = {
            int(t.frame_index[i]): render_ground_walkable(t.x[i], t.y[i], w, h, yaw=t.yaw[i])
            for i in range(len(t))
        }
        out[t.video_id] = build_walkmap(rasters)
    return out


@pytest.fixture(scope="session")
def ground_walkmaps(cross_trajs) -> dict[str, WalkMap]:
    """Per-video walkmaps rendered from the road layout under each camera."""
    return ground_walkmaps_for(cross_trajs)


def free_walkmaps_for(graph: WorldGraph, w: int = 16, h: int = 8) -> dict[str, WalkMap]:
    ones = np.ones((h, w), dtype=np.uint8)
    out = {}
    for edge in graph.edges.values():
        rasters = out.setdefault(edge.video_id, {})
        for f in range(edge.frame_start, edge.frame_end + 1):
            rasters[f] = ones
    return {vid: build_walkmap(r) for vid, r in out.items()}


@pytest.fixture(scope="session")
def free_walkmaps(cross_graph) -> dict[str, WalkMap]:
    """Everything walkable; for tests that must never collide."""
    return free_walkmaps_for(cross_graph)


@pytest.fixture(scope="session")
def world_dir(tmp_path_factory, cross_graph, cross_trajs, ground_walkmaps):
    """On-disk asset tree for service and CLI tests: manifest, walkmaps,
    frame directories (with real PNGs for video xb), one ranged video file."""
    root = tmp_path_factory.mktemp("world")
    (root / "manifest.json").write_bytes(cross_graph.to_canonical_bytes())
    (root / "walkmaps").mkdir()
    for vid, wm in ground_walkmaps.items():
        (root / "walkmaps" / f"{vid}.json").write_bytes(wm.to_canonical_bytes())
    rng = np.random.default_rng(7)
    for t in cross_trajs:
        frames_dir = root / "videos" / t.video_id / "frames"
        frames_dir.mkdir(parents=True)
        if t.video_id == "xb":
            frames = rng.integers(0, 256, size=(len(t), 4, 8, 3), dtype=np.uint8)
            frameio.save_frames(frames_dir, frames)
    (root / "videos" / "xb.mp4").write_bytes(rng.integers(0, 256, 2048).astype(np.uint8).tobytes())
    return root
