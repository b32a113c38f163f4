"""Avatar navigation over the world graph.

The camera never leaves the capture trajectory: it always sits at the
capture position of the current frame (that is what keeps the projected
panorama artifact-free), looking at the avatar. The avatar roams the
ground plane freely wherever the walkmap allows; its projection onto the
current edge's polyline drives which frame is shown.

A step: move the avatar, project onto the polyline to get the new
arc-length and nearest frame, then test the avatar's foot pixel against
that frame's walkmap; a non-walkable foot rejects the whole move. Near
an edge end the session offers the node's outgoing edges (plus the
reverse of the current edge); choosing one, switching direction, or
teleporting swaps edges inside a fade, so an edge change is always
bracketed by fade_out/fade_in events.

All state transitions are deterministic: identical inputs yield
byte-identical canonical traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import canonical, geometry
from .config import Config
from .errors import ValidationError
from .graph import Edge, WorldGraph, nearest_frame, project_onto_polyline

DEFAULT_DT = 1.0 / 30.0


# -- types ---------------------------------------------------------------------


@dataclass
class SessionState:
    session_id: str
    edge_id: str
    avatar_x: float
    avatar_y: float
    avatar_yaw: float
    current_frame: int  # absolute index into the edge's video
    s: float            # camera arc-length along the edge
    mode: str = "walking"  # walking | at_intersection | fading
    pending_options: list[str] = field(default_factory=list)
    fade_t: float = 0.0

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "edge_id": self.edge_id,
            "avatar": {"x": self.avatar_x, "y": self.avatar_y, "yaw": self.avatar_yaw},
            "current_frame": self.current_frame,
            "s": self.s,
            "mode": self.mode,
            "pending_options": list(self.pending_options),
            "fade_t": self.fade_t,
        }


@dataclass(frozen=True)
class StepInput:
    move: tuple[float, float] = (0.0, 0.0)
    action: tuple | None = None  # ("choose", edge_id) | ("reverse",) | ("teleport", node_id)
    dt: float = DEFAULT_DT

    def __post_init__(self):
        if self.dt <= 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if self.action is not None:
            if not self.action or self.action[0] not in ("choose", "reverse", "teleport"):
                raise ValidationError(f"unknown action {self.action!r}")

    def to_dict(self) -> dict:
        return {
            "move": [self.move[0], self.move[1]],
            "action": list(self.action) if self.action else None,
            "dt": self.dt,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StepInput":
        move = d.get("move", (0.0, 0.0))
        action = d.get("action")
        return cls(
            move=(float(move[0]), float(move[1])),
            action=tuple(action) if action else None,
            dt=float(d.get("dt", DEFAULT_DT)),
        )


@dataclass
class StepResult:
    state: SessionState
    collided: bool
    events: list[dict]
    camera_pose: dict
    preload_hints: list[str]

    def to_dict(self) -> dict:
        return {
            "state": self.state.to_dict(),
            "collided": self.collided,
            "events": self.events,
            "camera_pose": self.camera_pose,
            "preload_hints": list(self.preload_hints),
        }


# -- geometry helpers ------------------------------------------------------------


def foot_direction(camera_pos, camera_height: float, frame_yaw: float, avatar_pos) -> np.ndarray:
    """Direction from the camera to the avatar's foot point, expressed in
    the panorama's own frame (longitude reduced by the frame yaw)."""
    cx, cy = float(camera_pos[0]), float(camera_pos[1])
    ax, ay = float(avatar_pos[0]), float(avatar_pos[1])
    foot = np.array([ax, 0.0, ay])
    cam = np.array([cx, camera_height, cy])
    d = foot - cam
    n = float(np.linalg.norm(d))
    if n < 1e-12:
        raise ValidationError("avatar and camera positions coincide")
    d = d / n
    phi = math.asin(max(-1.0, min(1.0, d[1])))
    lam = math.atan2(d[0], d[2]) - frame_yaw
    lam = (lam + math.pi) % (2.0 * math.pi) - math.pi
    return geometry.dir_from_latlon(phi, lam)


def _edge_pose(edge: Edge, frame_abs: int) -> tuple[float, float, float]:
    i = frame_abs - edge.frame_start
    if i < 0 or i >= edge.n_frames:
        raise ValidationError(
            f"frame {frame_abs} outside edge {edge.edge_id} [{edge.frame_start}..{edge.frame_end}]"
        )
    return float(edge.x[i]), float(edge.y[i]), float(edge.yaw[i])


def _frame_at_arclen(edge: Edge, s: float) -> int:
    """Absolute frame whose arclen is nearest s; ties go to the lower frame."""
    d = np.abs(edge.arclen - s)
    return edge.frame_start + int(np.argmin(d))


def _edge_tangent(edge: Edge, at_start: bool) -> tuple[float, float]:
    pts = edge.polyline
    if at_start:
        seq = range(1, pts.shape[0])
        base = pts[0]
        pick = lambda i: pts[i] - base
    else:
        seq = range(pts.shape[0] - 2, -1, -1)
        base = pts[-1]
        pick = lambda i: base - pts[i]
    for i in seq:
        v = pick(i)
        n = float(np.hypot(v[0], v[1]))
        if n > 1e-12:
            return float(v[0] / n), float(v[1] / n)
    return 1.0, 0.0  # degenerate zero-length edge; any fixed direction works


# -- session construction ----------------------------------------------------------


def create_session(
    graph: WorldGraph,
    session_id: str,
    edge_id: str | None = None,
    spawn_s: float = 0.0,
) -> SessionState:
    if edge_id is None:
        edge_id = min(graph.edges)
    edge = graph.edges.get(edge_id)
    if edge is None:
        raise ValidationError(f"unknown edge {edge_id!r}")
    smax = edge.length
    s = min(max(float(spawn_s), 0.0), smax)
    frame = _frame_at_arclen(edge, s)
    fx, fy, _ = _edge_pose(edge, frame)
    at_start = s <= smax - s
    tx, ty = _edge_tangent(edge, at_start)
    sign = 1.0 if at_start else -1.0
    cfg = graph.config
    ax = fx + sign * tx * cfg.avatar_distance
    ay = fy + sign * ty * cfg.avatar_distance
    state = SessionState(
        session_id=session_id,
        edge_id=edge_id,
        avatar_x=ax,
        avatar_y=ay,
        avatar_yaw=math.atan2(sign * tx, sign * ty),
        current_frame=frame,
        s=s,
        mode="walking",
    )
    _refresh_mode(state, graph, emit=None)
    return state


# -- step machinery ------------------------------------------------------------------


def _near_end(state: SessionState, edge: Edge, delta: float) -> tuple[str, str] | None:
    """(node_id, which_end) when s is within delta of an end, nearer end first."""
    smax = edge.length
    d_from = state.s
    d_to = smax - state.s
    if d_from > delta and d_to > delta:
        return None
    if d_from <= d_to:
        return edge.from_node, "from"
    return edge.to_node, "to"


def _options_at(graph: WorldGraph, node_id: str, edge: Edge) -> list[str]:
    opts = set(graph.outgoing(node_id))
    if edge.reverse_edge_id is not None:
        opts.add(edge.reverse_edge_id)
    return sorted(opts)


def _refresh_mode(state: SessionState, graph: WorldGraph, emit: list[dict] | None) -> None:
    """Recompute walking/at_intersection from s; emit transition events."""
    edge = graph.edges[state.edge_id]
    near = _near_end(state, edge, graph.config.delta_end)
    if near is None:
        state.mode = "walking"
        state.pending_options = []
        return
    node_id, _ = near
    options = _options_at(graph, node_id, edge)
    was = state.mode == "at_intersection" and state.pending_options == options
    state.mode = "at_intersection"
    state.pending_options = options
    if emit is not None and not was:
        emit.append({"type": "arrived_at_intersection", "node_id": node_id})
        emit.append({"type": "options_shown", "options": options})


def _camera_pose(state: SessionState, graph: WorldGraph) -> dict:
    edge = graph.edges[state.edge_id]
    fx, fy, _ = _edge_pose(edge, state.current_frame)
    ch = graph.config.camera_height
    return {
        "position": [fx, ch, fy],
        "look_at": [state.avatar_x, 0.0, state.avatar_y],
    }


def preload_hints(state: SessionState, graph: WorldGraph) -> list[str]:
    """Outgoing edges of every node within delta_preload (closed) of the
    camera position; what a streaming client should fetch next."""
    edge = graph.edges[state.edge_id]
    fx, fy, _ = _edge_pose(edge, state.current_frame)
    hints: set[str] = set()
    for node in graph.nodes.values():
        if math.hypot(node.x - fx, node.y - fy) <= graph.config.delta_preload:
            hints.update(graph.outgoing(node.node_id))
    return sorted(hints)


def _begin_fade(state: SessionState, graph: WorldGraph) -> None:
    state.fade_t = graph.config.fade_seconds
    state.mode = "fading"
    state.pending_options = []


def _enter_edge_at(state: SessionState, graph: WorldGraph, edge: Edge, at_start: bool) -> None:
    smax = edge.length
    state.edge_id = edge.edge_id
    state.s = 0.0 if at_start else smax
    state.current_frame = edge.frame_start if at_start else edge.frame_end
    fx, fy, _ = _edge_pose(edge, state.current_frame)
    tx, ty = _edge_tangent(edge, at_start)
    sign = 1.0 if at_start else -1.0
    cfg = graph.config
    state.avatar_x = fx + sign * tx * cfg.avatar_distance
    state.avatar_y = fy + sign * ty * cfg.avatar_distance
    state.avatar_yaw = math.atan2(sign * tx, sign * ty)


def choose_direction(state: SessionState, edge_id: str, graph: WorldGraph) -> list[dict]:
    if state.mode != "at_intersection":
        raise ValidationError("no direction options offered right now")
    if edge_id not in state.pending_options:
        raise ValidationError(f"edge {edge_id!r} is not among the offered options")
    cur = graph.edges[state.edge_id]
    node_id, _ = _near_end(state, cur, graph.config.delta_end)
    target = graph.edges[edge_id]
    events: list[dict] = [{"type": "fade_out"}]
    _begin_fade(state, graph)
    _enter_edge_at(state, graph, target, at_start=(target.from_node == node_id))
    events.append({"type": "edge_changed", "edge_id": edge_id})
    events.append({"type": "fade_in"})
    return events


def switch_reverse(state: SessionState, graph: WorldGraph) -> list[dict]:
    cur = graph.edges[state.edge_id]
    if cur.reverse_edge_id is None:
        raise ValidationError(f"one-way segment: edge {state.edge_id} has no reverse")
    rev = graph.edges[cur.reverse_edge_id]
    cam_x, cam_y, _ = _edge_pose(cur, state.current_frame)
    offset = nearest_frame(rev, (cam_x, cam_y))
    events: list[dict] = [{"type": "fade_out"}]
    _begin_fade(state, graph)
    state.edge_id = rev.edge_id
    state.current_frame = rev.frame_start + offset
    state.s = float(rev.arclen[offset])
    # avatar stays put in world coordinates
    events.append({"type": "edge_changed", "edge_id": rev.edge_id})
    events.append({"type": "fade_in"})
    return events


def teleport(state: SessionState, node_id: str, graph: WorldGraph) -> list[dict]:
    node = graph.nodes.get(node_id)
    if node is None:
        raise ValidationError(f"unknown node {node_id!r}")
    outgoing = graph.outgoing(node_id)
    if not outgoing:
        raise ValidationError(f"node {node_id} has no outgoing edges; cannot teleport there")
    target = graph.edges[outgoing[0]]
    events: list[dict] = [{"type": "fade_out"}]
    _begin_fade(state, graph)
    _enter_edge_at(state, graph, target, at_start=True)
    events.append({"type": "edge_changed", "edge_id": target.edge_id})
    events.append({"type": "fade_in"})
    return events


def step(
    state: SessionState,
    inp: StepInput,
    graph: WorldGraph,
    walkmaps: dict,
) -> StepResult:
    """Advance one tick. Movement first, then any action; fades freeze
    input until they finish."""
    edge = graph.edges.get(state.edge_id)
    if edge is None:
        raise ValidationError(f"session is on unknown edge {state.edge_id!r}")
    if not (edge.frame_start <= state.current_frame <= edge.frame_end):
        raise ValidationError(f"session frame {state.current_frame} outside edge range")
    cfg = graph.config
    events: list[dict] = []
    collided = False

    if state.fade_t > 0.0:
        state.fade_t = max(0.0, state.fade_t - inp.dt)
        if state.fade_t > 0.0:
            return StepResult(
                state=state,
                collided=False,
                events=events,
                camera_pose=_camera_pose(state, graph),
                preload_hints=preload_hints(state, graph),
            )
        _refresh_mode(state, graph, emit=events)

    dx, dy = float(inp.move[0]), float(inp.move[1])
    norm = math.hypot(dx, dy)
    if norm > cfg.max_step + 1e-12:
        raise ValidationError(f"move length {norm:.3f} exceeds max step {cfg.max_step}")

    if norm > 0.0:
        nx = state.avatar_x + dx
        ny = state.avatar_y + dy
        s_new = project_onto_polyline((nx, ny), edge.polyline, edge.arclen)
        frame_new = _frame_at_arclen(edge, s_new)
        fx, fy, fyaw = _edge_pose(edge, frame_new)
        wm = walkmaps.get(edge.video_id)
        if wm is None:
            raise ValidationError(f"no walkmap for video {edge.video_id!r}")
        d = foot_direction((fx, fy), cfg.camera_height, fyaw, (nx, ny))
        phi, lam = geometry.latlon_from_dir(d)
        if wm.is_walkable(frame_new, float(phi), float(lam)):
            state.avatar_x = nx
            state.avatar_y = ny
            state.avatar_yaw = math.atan2(dx, dy)
            state.s = s_new
            state.current_frame = frame_new
        else:
            collided = True
        _refresh_mode(state, graph, emit=events)

    if inp.action is not None:
        kind = inp.action[0]
        if kind == "choose":
            events.extend(choose_direction(state, str(inp.action[1]), graph))
        elif kind == "reverse":
            events.extend(switch_reverse(state, graph))
        elif kind == "teleport":
            events.extend(teleport(state, str(inp.action[1]), graph))

    return StepResult(
        state=state,
        collided=collided,
        events=events,
        camera_pose=_camera_pose(state, graph),
        preload_hints=preload_hints(state, graph),
    )


# -- scripted runs ----------------------------------------------------------------


def simulate(
    graph: WorldGraph,
    walkmaps: dict,
    inputs: list[StepInput],
    session_id: str = "sim",
    edge_id: str | None = None,
    spawn_s: float = 0.0,
) -> list[dict]:
    """Run a scripted session; returns the trace as a list of dicts
    (initial state, then one record per step). Canonical-serialize each
    line for byte-stable traces."""
    state = create_session(graph, session_id, edge_id=edge_id, spawn_s=spawn_s)
    trace: list[dict] = [{"initial": state.to_dict()}]
    for i, inp in enumerate(inputs):
        result = step(state, inp, graph, walkmaps)
        trace.append({"step": i, "input": inp.to_dict(), "result": result.to_dict()})
    return trace


def trace_to_jsonl(trace: list[dict]) -> bytes:
    return b"".join(canonical.dump_bytes(line) for line in trace)
