"""Command line entry points tying the pipeline together.

Subcommands: build-graph, build-maps, complete, simulate, serve,
inspect. Exit codes: 0 success, 1 usage, 2 validation/parse failure,
3 unexpected runtime failure. Every command is deterministic for
identical inputs.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import canonical, frameio, navigation
from .completion import CompletionJob, band_mask, complete_video
from .config import Config
from .errors import ParseError, ValidationError
from .graph import WorldGraph, build_manifest, load_trajectory
from .walkability import ClassMap, binarize, build_walkmap, downsample_raster, walkmap_stats


def _read_json(path):
    with open(path, "rb") as f:
        data = f.read()
    try:
        return json.loads(data)
    except json.JSONDecodeError as e:
        raise ParseError(f"bad JSON: {e.msg}", path=str(path), line=e.lineno) from None


def _cmd_build_graph(args) -> int:
    names = sorted(n for n in os.listdir(args.trajectories) if n.endswith(".csv"))
    if not names:
        raise ValidationError(f"no trajectories in {args.trajectories}")
    cfg = Config(epsilon=args.epsilon) if args.epsilon else Config()
    trajs = [
        load_trajectory(os.path.join(args.trajectories, n), fps=cfg.fps, max_step=cfg.max_step)
        for n in names
    ]
    graph = build_manifest(trajs, cfg)
    data = graph.to_canonical_bytes()
    with open(args.out, "wb") as f:
        f.write(data)
    print(f"wrote {args.out}: {len(graph.nodes)} nodes, {len(graph.edges)} edges")
    return 0


def _load_class_config(path) -> tuple[list[str], set[int]]:
    spec = _read_json(path)
    if not isinstance(spec, dict):
        raise ValidationError(f"{path}: expected a JSON object")
    labels = spec.get("labels")
    walkable = spec.get("walkable")
    if not isinstance(labels, list) or not isinstance(walkable, list):
        raise ValidationError(f"{path}: expected JSON with 'labels' and 'walkable' lists")
    indices = set()
    for name in walkable:
        if name not in labels:
            raise ValidationError(f"{path}: unknown walkable class {name!r}")
        indices.add(labels.index(name))
    return labels, indices


def _cmd_build_maps(args) -> int:
    from PIL import Image

    labels, walkable = _load_class_config(args.classes)
    files = sorted(n for n in os.listdir(args.classmaps) if n.endswith(".png"))
    if not files:
        raise ValidationError(f"no class maps in {args.classmaps}")
    rasters = {}
    for name in files:
        stem = os.path.splitext(name)[0]
        if not stem.isdigit():
            raise ValidationError(f"class map name must be a frame number: {name}")
        with Image.open(os.path.join(args.classmaps, name)) as im:
            data = np.asarray(im.convert("L") if im.mode not in ("L", "I") else im)
        raster = binarize(ClassMap(data.astype(np.int64), num_classes=len(labels)), walkable)
        if args.downsample > 1:
            raster = downsample_raster(raster, args.downsample)
        rasters[int(stem)] = raster
    wm = build_walkmap(rasters)
    with open(args.out, "wb") as f:
        f.write(wm.to_canonical_bytes())
    stats = walkmap_stats(wm)
    print(canonical.dumps(stats))
    return 0


def _parse_mask_spec(spec: str, w: int, h: int, n: int) -> np.ndarray:
    if spec.startswith("band:"):
        try:
            deg = float(spec[len("band:") :])
        except ValueError:
            raise ValidationError(f"bad band mask spec {spec!r}") from None
        mask = band_mask(w, h, math.radians(deg))
        return np.broadcast_to(mask, (n, h, w)).copy()
    masks = frameio.load_masks(spec)
    if masks.shape != (n, h, w):
        raise ValidationError(
            f"mask rasters {masks.shape} do not match frames ({n}, {h}, {w})"
        )
    return masks


def _cmd_complete(args) -> int:
    frames = frameio.load_frames(args.frames)
    n, h, w = frames.shape[:3]
    masks = _parse_mask_spec(args.mask, w, h, n)
    job = CompletionJob(
        inpainter=args.inpainter,
        blend_width=args.blend_width,
        recenter=not args.no_recenter,
    )
    out = complete_video(frames, masks, job)
    frameio.save_frames(args.out, out)
    print(f"wrote {n} completed frames to {args.out}")
    return 0


def _load_script(path) -> list[navigation.StepInput]:
    inputs = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                inputs.append(navigation.StepInput.from_dict(json.loads(line)))
            except (ValueError, TypeError, KeyError, IndexError, ValidationError) as e:
                raise ParseError(f"bad step input: {e}", path=str(path), line=lineno) from None
    return inputs


def _load_world_for_sim(manifest_path, assets=None):
    graph = WorldGraph.from_manifest(_read_json(manifest_path))
    root = assets or os.path.dirname(os.path.abspath(manifest_path))
    from .walkability import WalkMap

    walkmaps = {}
    for edge in graph.edges.values():
        if edge.video_id in walkmaps:
            continue
        path = os.path.join(root, edge.walkmap_uri)
        if not os.path.isfile(path):
            raise ValidationError(f"walkmap missing: {edge.walkmap_uri}")
        walkmaps[edge.video_id] = WalkMap.load(path)
    return graph, walkmaps


def _cmd_simulate(args) -> int:
    graph, walkmaps = _load_world_for_sim(args.manifest, args.assets)
    inputs = _load_script(args.script)
    trace = navigation.simulate(
        graph, walkmaps, inputs, edge_id=args.edge, spawn_s=args.spawn_s
    )
    data = navigation.trace_to_jsonl(trace)
    with open(args.trace, "wb") as f:
        f.write(data)
    print(f"wrote trace with {len(trace)} lines to {args.trace}")
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    serve(args.manifest, args.assets, host=args.host, port=args.port)
    return 0


def _cmd_inspect(args) -> int:
    graph = WorldGraph.from_manifest(_read_json(args.manifest))
    if args.edge is not None:
        edge = graph.edges.get(args.edge)
        if edge is None:
            raise ValidationError(f"unknown edge {args.edge!r}")
        print(f"edge {edge.edge_id}: video {edge.video_id} "
              f"frames [{edge.frame_start}..{edge.frame_end}] ({edge.n_frames})")
        print(f"  {edge.from_node} -> {edge.to_node}  length {edge.length:.3f} m  "
              f"reverse {edge.reverse_edge_id or '-'}")
        print(f"  start ({edge.x[0]:.3f}, {edge.y[0]:.3f})  "
              f"end ({edge.x[-1]:.3f}, {edge.y[-1]:.3f})")
        return 0
    cfg = graph.config.to_dict()
    print(f"config: {canonical.dumps(cfg)}")
    print(f"nodes: {len(graph.nodes)}")
    for nid in sorted(graph.nodes):
        node = graph.nodes[nid]
        degree = len(graph.outgoing(nid))
        print(f"  {nid} ({node.x:.3f}, {node.y:.3f}) out-degree {degree}")
    print(f"edges: {len(graph.edges)}")
    for eid in sorted(graph.edges):
        e = graph.edges[eid]
        print(f"  {eid} {e.video_id} [{e.frame_start}..{e.frame_end}] "
              f"{e.from_node}->{e.to_node} len {e.length:.3f} rev {e.reverse_edge_id or '-'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="panowalk", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("build-graph", help="trajectories -> world manifest")
    g.add_argument("--trajectories", required=True, help="directory of frame,x,y[,yaw] CSVs")
    g.add_argument("--epsilon", type=float, default=None, help="intersection radius (m)")
    g.add_argument("--out", required=True, help="output manifest path")
    g.set_defaults(func=_cmd_build_graph)

    m = sub.add_parser("build-maps", help="class-index rasters -> RLE walkmap")
    m.add_argument("--classmaps", required=True, help="directory of <frame>.png class maps")
    m.add_argument("--classes", required=True, help="JSON with labels + walkable lists")
    m.add_argument("--out", required=True, help="output walkmap path")
    m.add_argument("--downsample", type=int, default=1)
    m.set_defaults(func=_cmd_build_maps)

    c = sub.add_parser("complete", help="remove the masked region from frames")
    c.add_argument("--frames", required=True, help="input frame directory")
    c.add_argument("--mask", required=True, help="'band:<deg>' or a mask raster directory")
    c.add_argument("--inpainter", default="diffusion", help="diffusion or external:<command>")
    c.add_argument("--blend-width", type=int, default=3)
    c.add_argument("--no-recenter", action="store_true", help="inpaint without rotating")
    c.add_argument("--out", required=True, help="output frame directory")
    c.set_defaults(func=_cmd_complete)

    s = sub.add_parser("simulate", help="replay a step script into a trace")
    s.add_argument("--manifest", required=True)
    s.add_argument("--script", required=True, help="one StepInput JSON per line")
    s.add_argument("--trace", required=True, help="output canonical JSON-lines trace")
    s.add_argument("--assets", default=None, help="assets root (default: manifest dir)")
    s.add_argument("--edge", default=None, help="starting edge id (default: lowest)")
    s.add_argument("--spawn-s", type=float, default=0.0)
    s.set_defaults(func=_cmd_simulate)

    v = sub.add_parser("serve", help="serve the world over HTTP")
    v.add_argument("--manifest", required=True)
    v.add_argument("--assets", default=None)
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--port", type=int, default=8360)
    v.set_defaults(func=_cmd_serve)

    i = sub.add_parser("inspect", help="summarize and validate a manifest")
    i.add_argument("--manifest", required=True)
    i.add_argument("--edge", default=None)
    i.set_defaults(func=_cmd_inspect)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1
    try:
        return args.func(args)
    except (ParseError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 3
    except Exception as e:  # runtime failures distinct from validation
        print(f"unexpected error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
