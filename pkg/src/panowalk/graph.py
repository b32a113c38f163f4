"""World graph: trajectories in, intersections detected, videos segmented
into directed edges, manifest out.

Ground-plane coordinates are 2D (x, y) meters in a local tangent frame.
Intersections are detected only across different videos: all cross-video
frame pairs closer than epsilon whose local headings actually cross (at
least min_angle_deg away from parallel or antiparallel; a forward and a
reverse capture of the same street overlap everywhere and must not chain
into one giant node) vote with their midpoints, midpoints cluster by
single-linkage within epsilon, and each cluster becomes a node at the
midpoint centroid.

Segmentation cuts every trajectory at the member frame nearest each node
per pass, strictly inside the frame range; runs between cuts become edges
([start..c1], [c1+1..c2], ..., [ck+1..end]) so every frame belongs to
exactly one edge. Endpoints snap to an interior node within epsilon or
synthesize terminal nodes (clustered within epsilon among themselves).
Edges shorter than min_frames merge into their left neighbor (right when
leftmost); a whole video shorter than min_frames stays one edge.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import canonical
from .config import Config
from .errors import ParseError, ValidationError


# -- types -------------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    video_id: str
    frame_index: np.ndarray  # (N,) int64, strictly increasing
    x: np.ndarray            # (N,) float64 meters
    y: np.ndarray            # (N,) float64 meters
    yaw: np.ndarray          # (N,) float64 radians, panorama forward bearing
    fps: float = 30.0

    def __post_init__(self):
        fi = np.asarray(self.frame_index, dtype=np.int64)
        arrays = {}
        for name in ("x", "y", "yaw"):
            a = np.asarray(getattr(self, name), dtype=np.float64)
            if a.shape != fi.shape or fi.ndim != 1 or fi.size == 0:
                raise ValidationError(f"trajectory arrays must be equal-length 1-d, nonempty")
            if not np.all(np.isfinite(a)):
                raise ValidationError(f"trajectory {self.video_id!r}: non-finite {name}")
            arrays[name] = a
        if fi.size > 1 and not np.all(np.diff(fi) > 0):
            raise ValidationError(f"trajectory {self.video_id!r}: frame_index not strictly increasing")
        object.__setattr__(self, "frame_index", fi)
        for name, a in arrays.items():
            object.__setattr__(self, name, a)

    def __len__(self) -> int:
        return int(self.frame_index.size)

    @property
    def positions(self) -> np.ndarray:
        return np.stack([self.x, self.y], axis=1)


@dataclass
class Node:
    node_id: str | None
    x: float
    y: float
    members: list[tuple[str, int]] = field(default_factory=list)  # (video_id, abs frame)

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass
class Edge:
    edge_id: str | None
    from_node: str
    to_node: str
    video_id: str
    frame_start: int  # absolute, inclusive
    frame_end: int    # absolute, inclusive, > frame_start
    x: np.ndarray
    y: np.ndarray
    yaw: np.ndarray
    arclen: np.ndarray
    reverse_edge_id: str | None = None
    frames_uri: str | None = None
    video_uri: str | None = None
    walkmap_uri: str | None = None

    @property
    def n_frames(self) -> int:
        return self.frame_end - self.frame_start + 1

    @property
    def polyline(self) -> np.ndarray:
        return np.stack([self.x, self.y], axis=1)

    @property
    def length(self) -> float:
        return float(self.arclen[-1])


# -- loading -----------------------------------------------------------------


def load_trajectory(path, fps: float = 30.0, max_step: float = 0.5) -> Trajectory:
    """Parse a `frame,x,y,yaw` CSV (yaw optional, defaults 0)."""
    path = str(path)
    rows: list[tuple[int, float, float, float]] = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("no frames (empty file)", path=path) from None
        cols = [c.strip().lower() for c in header]
        if cols[:3] != ["frame", "x", "y"] or (len(cols) > 3 and cols[3] != "yaw"):
            raise ParseError(f"bad header {header!r}, expected frame,x,y[,yaw]", path=path, line=1)
        has_yaw = len(cols) > 3
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(cols):
                raise ParseError(f"expected {len(cols)} fields, got {len(row)}", path=path, line=lineno)
            try:
                frame = int(row[0])
                x = float(row[1])
                y = float(row[2])
                yaw = float(row[3]) if has_yaw else 0.0
            except ValueError as e:
                raise ParseError(f"malformed row: {e}", path=path, line=lineno) from None
            if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(yaw)):
                raise ParseError("non-finite coordinate", path=path, line=lineno)
            if rows and frame <= rows[-1][0]:
                raise ParseError(
                    f"frame index {frame} not greater than previous {rows[-1][0]}",
                    path=path,
                    line=lineno,
                )
            if rows:
                step = math.hypot(x - rows[-1][1], y - rows[-1][2])
                if step > max_step + 1e-9:
                    raise ParseError(
                        f"step {step:.3f} m exceeds max step {max_step} m", path=path, line=lineno
                    )
            rows.append((frame, x, y, yaw))
    if not rows:
        raise ParseError("no frames", path=path)
    video_id = _video_id_from_path(path)
    arr = np.array(rows, dtype=np.float64)
    return Trajectory(
        video_id=video_id,
        frame_index=arr[:, 0].astype(np.int64),
        x=arr[:, 1],
        y=arr[:, 2],
        yaw=arr[:, 3],
        fps=fps,
    )


def _video_id_from_path(path: str) -> str:
    import os

    base = os.path.basename(path)
    return base[: -len(".csv")] if base.endswith(".csv") else base


# -- intersection detection ---------------------------------------------------


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _tangents(traj: Trajectory) -> np.ndarray:
    """Unit local headings via central differences; NaN where degenerate."""
    p = traj.positions
    n = len(traj)
    lo = np.maximum(np.arange(n) - 1, 0)
    hi = np.minimum(np.arange(n) + 1, n - 1)
    d = p[hi] - p[lo]
    norm = np.linalg.norm(d, axis=1)
    out = np.full((n, 2), np.nan)
    ok = norm > 1e-12
    out[ok] = d[ok] / norm[ok, None]
    return out


def detect_intersections(
    trajs: list[Trajectory],
    eps: float = 1.0,
    min_angle_deg: float = 30.0,
) -> list[Node]:
    """Interior nodes where different videos cross.

    All-pairs over cross-video frames (quadratic, fine at capture scale);
    pairs must be closer than eps and their headings must cross at least
    min_angle_deg from parallel in either orientation, so forward/reverse
    captures of one street never merge into a node.
    """
    if eps <= 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    if len(trajs) < 2:
        raise ValidationError("intersection detection needs at least 2 trajectories")
    ids = [t.video_id for t in trajs]
    if len(set(ids)) != len(ids):
        raise ValidationError(f"duplicate video ids: {sorted(ids)}")

    cos_cap = math.cos(math.radians(min_angle_deg))
    tangents = [_tangents(t) for t in trajs]
    midpoints: list[np.ndarray] = []
    for a in range(len(trajs)):
        pa, ta = trajs[a].positions, tangents[a]
        for b in range(a + 1, len(trajs)):
            pb, tb = trajs[b].positions, tangents[b]
            d2 = np.sum((pa[:, None, :] - pb[None, :, :]) ** 2, axis=2)
            ii, jj = np.nonzero(d2 < eps * eps)
            if ii.size == 0:
                continue
            cosang = np.abs(np.sum(ta[ii] * tb[jj], axis=1))
            crossing = ~(cosang > cos_cap)  # NaN headings pass the filter
            ii, jj = ii[crossing], jj[crossing]
            if ii.size:
                midpoints.append((pa[ii] + pb[jj]) * 0.5)
    if not midpoints:
        return []
    mids = np.concatenate(midpoints, axis=0)

    uf = _UnionFind(len(mids))
    d2 = np.sum((mids[:, None, :] - mids[None, :, :]) ** 2, axis=2)
    close = np.nonzero(np.triu(d2 <= eps * eps, k=1))
    for a, b in zip(*close):
        uf.union(int(a), int(b))

    clusters: dict[int, list[int]] = {}
    for i in range(len(mids)):
        clusters.setdefault(uf.find(i), []).append(i)

    nodes: list[Node] = []
    for root in clusters:
        pts = mids[clusters[root]]
        order = np.lexsort((pts[:, 1], pts[:, 0]))  # canonical order: permutation-proof centroid
        pts = pts[order]
        cx, cy = float(np.mean(pts[:, 0])), float(np.mean(pts[:, 1]))
        members: list[tuple[str, int]] = []
        for t in trajs:
            dist = np.hypot(t.x - cx, t.y - cy)
            for row in np.nonzero(dist <= eps)[0]:
                members.append((t.video_id, int(t.frame_index[row])))
        nodes.append(Node(node_id=None, x=cx, y=cy, members=sorted(members)))
    nodes.sort(key=lambda n: (n.x, n.y))
    return nodes


# -- segmentation --------------------------------------------------------------


def arc_length_table(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """arclen[i] = cumulative Euclidean distance up to frame i; arclen[0]=0."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size == 0:
        raise ValidationError("arc length needs at least one frame")
    steps = np.hypot(np.diff(x), np.diff(y))
    out = np.empty(x.size, dtype=np.float64)
    out[0] = 0.0
    np.cumsum(steps, out=out[1:])
    return out


def nearest_frame(edge: Edge, point) -> int:
    """Offset (0-based within the edge) of the frame closest to point;
    ties break toward the lower index."""
    px, py = float(point[0]), float(point[1])
    d2 = (edge.x - px) ** 2 + (edge.y - py) ** 2
    return int(np.argmin(d2))


def point_to_polyline(point, poly: np.ndarray) -> float:
    """Distance from a point to a polyline (N,2), N >= 1."""
    p = np.asarray(point, dtype=np.float64)
    if poly.shape[0] == 1:
        return float(np.linalg.norm(p - poly[0]))
    a = poly[:-1]
    b = poly[1:]
    ab = b - a
    denom = np.sum(ab * ab, axis=1)
    safe = np.where(denom > 0, denom, 1.0)
    t = np.clip(np.sum((p - a) * ab, axis=1) / safe, 0.0, 1.0)
    t = np.where(denom > 0, t, 0.0)
    proj = a + t[:, None] * ab
    return float(np.min(np.linalg.norm(p - proj, axis=1)))


def project_onto_polyline(point, poly: np.ndarray, arclen: np.ndarray) -> float:
    """Arc-length coordinate of the closest point on the polyline."""
    p = np.asarray(point, dtype=np.float64)
    if poly.shape[0] == 1:
        return 0.0
    a = poly[:-1]
    b = poly[1:]
    ab = b - a
    denom = np.sum(ab * ab, axis=1)
    safe = np.where(denom > 0, denom, 1.0)
    t = np.clip(np.sum((p - a) * ab, axis=1) / safe, 0.0, 1.0)
    t = np.where(denom > 0, t, 0.0)
    proj = a + t[:, None] * ab
    d2 = np.sum((p - proj) ** 2, axis=1)
    seg = int(np.argmin(d2))
    seg_len = arclen[seg + 1] - arclen[seg]
    return float(arclen[seg] + t[seg] * seg_len)


def _split_passes(rows: np.ndarray, gap: int) -> list[np.ndarray]:
    if rows.size == 0:
        return []
    breaks = np.nonzero(np.diff(rows) > gap)[0] + 1
    return np.split(rows, breaks)


def segment_videos(
    trajs: list[Trajectory],
    nodes: list[Node],
    eps: float = 1.0,
    min_frames: int = 15,
    pass_gap: int = 10,
) -> tuple[list[Edge], list[Node]]:
    """Cut each trajectory at its node passes; return (edges, all nodes
    including synthesized terminals). Edge ids stay unassigned here."""
    interior = list(nodes)
    node_pos = (
        np.array([[n.x, n.y] for n in interior]) if interior else np.zeros((0, 2))
    )

    # terminal synthesis: collect endpoints not near an interior node
    endpoints: list[tuple[int, int, float, float]] = []  # (traj idx, which end, x, y)
    for ti, t in enumerate(trajs):
        for end, row in ((0, 0), (1, len(t) - 1)):
            ex, ey = float(t.x[row]), float(t.y[row])
            if interior:
                d = np.hypot(node_pos[:, 0] - ex, node_pos[:, 1] - ey)
                if float(np.min(d)) <= eps:
                    continue
            endpoints.append((ti, end, ex, ey))
    uf = _UnionFind(len(endpoints))
    for i in range(len(endpoints)):
        for j in range(i + 1, len(endpoints)):
            if math.hypot(endpoints[i][2] - endpoints[j][2], endpoints[i][3] - endpoints[j][3]) <= eps:
                uf.union(i, j)
    terminal_clusters: dict[int, list[int]] = {}
    for i in range(len(endpoints)):
        terminal_clusters.setdefault(uf.find(i), []).append(i)
    terminals: list[Node] = []
    endpoint_terminal: dict[tuple[int, int], Node] = {}
    for root in terminal_clusters:
        pts = sorted((endpoints[i][2], endpoints[i][3]) for i in terminal_clusters[root])
        cx = sum(p[0] for p in pts) / len(pts)
        cy = sum(p[1] for p in pts) / len(pts)
        node = Node(node_id=None, x=cx, y=cy, members=[])
        terminals.append(node)
        for i in terminal_clusters[root]:
            endpoint_terminal[(endpoints[i][0], endpoints[i][1])] = node
    terminals.sort(key=lambda n: (n.x, n.y))

    def _endpoint_node(ti: int, end: int) -> Node:
        hit = endpoint_terminal.get((ti, end))
        if hit is not None:
            return hit
        t = trajs[ti]
        row = 0 if end == 0 else len(t) - 1
        d = np.hypot(node_pos[:, 0] - t.x[row], node_pos[:, 1] - t.y[row])
        return interior[int(np.argmin(d))]

    # per-trajectory cut rows
    edges: list[Edge] = []
    for ti, t in enumerate(trajs):
        frame_to_row = {int(f): r for r, f in enumerate(t.frame_index)}
        cuts: list[tuple[int, Node]] = []
        for node in interior:
            rows = np.array(
                sorted(frame_to_row[f] for vid, f in node.members if vid == t.video_id),
                dtype=np.int64,
            )
            for prun in _split_passes(rows, pass_gap):
                d = np.hypot(t.x[prun] - node.x, t.y[prun] - node.y)
                cut = int(prun[int(np.argmin(d))])
                if 0 < cut < len(t) - 1:
                    cuts.append((cut, node))
        # duplicate rows: keep the nearest node, deterministically
        by_row: dict[int, Node] = {}
        for cut, node in sorted(cuts, key=lambda cn: (cn[0], (cn[1].x, cn[1].y))):
            prev = by_row.get(cut)
            if prev is None or math.hypot(node.x - t.x[cut], node.y - t.y[cut]) < math.hypot(
                prev.x - t.x[cut], prev.y - t.y[cut]
            ):
                by_row[cut] = node
        ordered = sorted(by_row.items())

        bounds: list[tuple[int, int, Node, Node]] = []  # row ranges + endpoint nodes
        start_node = _endpoint_node(ti, 0)
        end_node = _endpoint_node(ti, 1)
        if not ordered:
            bounds.append((0, len(t) - 1, start_node, end_node))
        else:
            first_cut, first_node = ordered[0]
            bounds.append((0, first_cut, start_node, first_node))
            for (c0, n0), (c1, n1) in zip(ordered, ordered[1:]):
                bounds.append((c0 + 1, c1, n0, n1))
            last_cut, last_node = ordered[-1]
            bounds.append((last_cut + 1, len(t) - 1, last_node, end_node))

        # min_frames merge: absorb short segments into the left neighbor
        min_len = max(int(min_frames), 2)
        merged: list[list] = []
        for b in bounds:
            merged.append([b[0], b[1], b[2], b[3]])
        changed = True
        while changed and len(merged) > 1:
            changed = False
            for i, seg in enumerate(merged):
                if seg[1] - seg[0] + 1 < min_len:
                    if i > 0:
                        merged[i - 1][1] = seg[1]
                        merged[i - 1][3] = seg[3]
                    else:
                        merged[1][0] = seg[0]
                        merged[1][2] = seg[2]
                    merged.pop(i)
                    changed = True
                    break

        for r0, r1, n_from, n_to in merged:
            sl = slice(r0, r1 + 1)
            edges.append(
                Edge(
                    edge_id=None,
                    from_node="",  # node ids materialize in build_manifest
                    to_node="",
                    video_id=t.video_id,
                    frame_start=int(t.frame_index[r0]),
                    frame_end=int(t.frame_index[r1]),
                    x=t.x[sl].copy(),
                    y=t.y[sl].copy(),
                    yaw=t.yaw[sl].copy(),
                    arclen=arc_length_table(t.x[sl], t.y[sl]),
                )
            )
            edges[-1]._from_ref = n_from  # type: ignore[attr-defined]
            edges[-1]._to_ref = n_to  # type: ignore[attr-defined]

    used = set()
    for e in edges:
        used.add(id(e._from_ref))  # type: ignore[attr-defined]
        used.add(id(e._to_ref))  # type: ignore[attr-defined]
    all_nodes = [n for n in interior + terminals if id(n) in used]
    return edges, all_nodes


# -- reverse pairing -----------------------------------------------------------


def _corridor_distance(e1: Edge, e2: Edge) -> float:
    p1, p2 = e1.polyline, e2.polyline
    m1 = float(np.mean([point_to_polyline(p, p2) for p in p1]))
    m2 = float(np.mean([point_to_polyline(p, p1) for p in p2]))
    return max(m1, m2)


def pair_reverse_edges(edges: list[Edge], corridor_tol: float = 2.0) -> list[Edge]:
    """Mutually pair edges joining the same nodes in opposite orientation
    whose footage follows the same corridor; closest corridor wins, each
    edge pairs at most once. Uses node references set by segment_videos
    (or node ids when present)."""

    def _ends(e: Edge):
        fr = getattr(e, "_from_ref", None)
        to = getattr(e, "_to_ref", None)
        if fr is not None and to is not None:
            return id(fr), id(to)
        return e.from_node, e.to_node

    candidates: list[tuple[float, int, int]] = []
    for i in range(len(edges)):
        fi, ti = _ends(edges[i])
        for j in range(i + 1, len(edges)):
            fj, tj = _ends(edges[j])
            if fi == tj and ti == fj:
                score = _corridor_distance(edges[i], edges[j])
                if score <= corridor_tol:
                    candidates.append((score, i, j))
    candidates.sort()
    taken: set[int] = set()
    for score, i, j in candidates:
        if i in taken or j in taken:
            continue
        taken.add(i)
        taken.add(j)
        edges[i]._reverse_ref = edges[j]  # type: ignore[attr-defined]
        edges[j]._reverse_ref = edges[i]  # type: ignore[attr-defined]
        if edges[i].edge_id and edges[j].edge_id:
            edges[i].reverse_edge_id = edges[j].edge_id
            edges[j].reverse_edge_id = edges[i].edge_id
    return edges


# -- world graph ----------------------------------------------------------------


@dataclass
class WorldGraph:
    config: Config
    nodes: dict[str, Node]
    edges: dict[str, Edge]

    def outgoing(self, node_id: str) -> list[str]:
        return sorted(eid for eid, e in self.edges.items() if e.from_node == node_id)

    def to_manifest(self) -> dict:
        nodes = [
            {"id": n.node_id, "x": n.x, "y": n.y}
            for n in sorted(self.nodes.values(), key=lambda n: n.node_id)
        ]
        edges = []
        for e in sorted(self.edges.values(), key=lambda e: e.edge_id):
            edges.append(
                {
                    "id": e.edge_id,
                    "from": e.from_node,
                    "to": e.to_node,
                    "video_id": e.video_id,
                    "frame_start": e.frame_start,
                    "frame_end": e.frame_end,
                    "reverse_edge_id": e.reverse_edge_id,
                    "arclen": [float(v) for v in e.arclen],
                    "x": [float(v) for v in e.x],
                    "y": [float(v) for v in e.y],
                    "yaw": [float(v) for v in e.yaw],
                    "frames_uri": e.frames_uri,
                    "video_uri": e.video_uri,
                    "walkmap_uri": e.walkmap_uri,
                }
            )
        return {"config": self.config.to_dict(), "nodes": nodes, "edges": edges}

    def to_canonical_bytes(self) -> bytes:
        return canonical.dump_bytes(self.to_manifest())

    @classmethod
    def from_manifest(cls, manifest: dict) -> "WorldGraph":
        try:
            cfg = Config.from_dict(manifest["config"])
            node_list = manifest["nodes"]
            edge_list = manifest["edges"]
        except KeyError as e:
            raise ValidationError(f"manifest missing key {e}") from e
        nodes = {}
        for nd in node_list:
            nodes[nd["id"]] = Node(node_id=nd["id"], x=float(nd["x"]), y=float(nd["y"]))
        edges = {}
        for ed in edge_list:
            edges[ed["id"]] = Edge(
                edge_id=ed["id"],
                from_node=ed["from"],
                to_node=ed["to"],
                video_id=ed["video_id"],
                frame_start=int(ed["frame_start"]),
                frame_end=int(ed["frame_end"]),
                x=np.asarray(ed["x"], dtype=np.float64),
                y=np.asarray(ed["y"], dtype=np.float64),
                yaw=np.asarray(ed["yaw"], dtype=np.float64),
                arclen=np.asarray(ed["arclen"], dtype=np.float64),
                reverse_edge_id=ed.get("reverse_edge_id"),
                frames_uri=ed.get("frames_uri"),
                video_uri=ed.get("video_uri"),
                walkmap_uri=ed.get("walkmap_uri"),
            )
        wg = cls(config=cfg, nodes=nodes, edges=edges)
        wg.validate()
        return wg

    def validate(self) -> None:
        """Structural invariants; raises ValidationError naming the defect."""
        for eid, e in self.edges.items():
            if e.from_node not in self.nodes or e.to_node not in self.nodes:
                raise ValidationError(f"edge {eid}: endpoint node missing")
            n = e.n_frames
            if e.frame_start >= e.frame_end:
                raise ValidationError(f"edge {eid}: frame_start must be < frame_end")
            for name in ("x", "y", "yaw", "arclen"):
                if getattr(e, name).size != n:
                    raise ValidationError(f"edge {eid}: {name} length != frame count")
            expected = arc_length_table(e.x, e.y)
            if float(np.max(np.abs(expected - e.arclen))) > 1e-6:
                raise ValidationError(f"edge {eid}: arclen does not match positions")
            if e.arclen[0] != 0.0 or np.any(np.diff(e.arclen) < 0):
                raise ValidationError(f"edge {eid}: arclen must start at 0 and be nondecreasing")
            if e.reverse_edge_id is not None:
                r = self.edges.get(e.reverse_edge_id)
                if r is None:
                    raise ValidationError(f"edge {eid}: reverse edge {e.reverse_edge_id} missing")
                if r.reverse_edge_id != eid:
                    raise ValidationError(f"edge {eid}: reverse pairing not mutual")
                if (r.from_node, r.to_node) != (e.to_node, e.from_node):
                    raise ValidationError(f"edge {eid}: reverse edge joins different nodes")


def build_manifest(trajs: list[Trajectory], config: Config | None = None) -> WorldGraph:
    """Compose detection, segmentation, pairing and id assignment into a
    deterministic world graph (same input, byte-identical manifest)."""
    if not trajs:
        raise ValidationError("no trajectories")
    cfg = config or Config()
    interior = (
        detect_intersections(trajs, eps=cfg.epsilon, min_angle_deg=cfg.intersection_min_angle_deg)
        if len(trajs) >= 2
        else []
    )
    edges, nodes = segment_videos(
        trajs, interior, eps=cfg.epsilon, min_frames=cfg.min_frames, pass_gap=cfg.pass_gap_frames
    )

    interior_used = [n for n in nodes if n.members]
    terminal_used = [n for n in nodes if not n.members]
    interior_used.sort(key=lambda n: (n.x, n.y))
    terminal_used.sort(key=lambda n: (n.x, n.y))
    for i, n in enumerate(interior_used + terminal_used):
        n.node_id = f"n{i:03d}"

    edges.sort(key=lambda e: (e.video_id, e.frame_start))
    for i, e in enumerate(edges):
        e.edge_id = f"e{i:03d}"
        e.from_node = e._from_ref.node_id  # type: ignore[attr-defined]
        e.to_node = e._to_ref.node_id  # type: ignore[attr-defined]
        e.frames_uri = f"videos/{e.video_id}/frames"
        e.video_uri = f"videos/{e.video_id}.mp4"
        e.walkmap_uri = f"walkmaps/{e.video_id}.json"

    pair_reverse_edges(edges, corridor_tol=cfg.corridor_tol)
    for e in edges:
        rev = getattr(e, "_reverse_ref", None)
        if rev is not None:
            e.reverse_edge_id = rev.edge_id
        delattr(e, "_from_ref")
        delattr(e, "_to_ref")
        if hasattr(e, "_reverse_ref"):
            delattr(e, "_reverse_ref")

    wg = WorldGraph(
        config=cfg,
        nodes={n.node_id: n for n in interior_used + terminal_used},
        edges={e.edge_id: e for e in edges},
    )
    wg.validate()
    return wg
