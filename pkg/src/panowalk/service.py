"""HTTP service: manifest, per-edge assets, server-authoritative
navigation sessions, and a presence view for multi-user exploration.

The server owns all navigation state. Clients send displacement vectors
and actions; the engine applies them under a per-session lock, so
concurrent requests to one session serialize and the service adds no
behavior beyond the engine (service trace == engine trace for the same
script). World data (graph, walkmaps, frames) is immutable shared state.

Sessions idle longer than the ttl are evicted. The clock is injectable
so lifecycle tests do not sleep.
"""

from __future__ import annotations

import gzip
import json
import math
import os
import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import FileResponse, JSONResponse

from . import navigation
from .errors import ValidationError
from .graph import WorldGraph
from .walkability import WalkMap

IMMUTABLE_CACHE = "public, max-age=31536000, immutable"


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": {"code": code, "message": message}}
    )


# -- world loading -----------------------------------------------------------------


@dataclass
class World:
    graph: WorldGraph
    manifest_bytes: bytes
    assets_root: str
    walkmaps: dict[str, WalkMap]
    walkmap_gz: dict[str, bytes] = field(default_factory=dict)

    def video_ids(self) -> list[str]:
        return sorted({e.video_id for e in self.graph.edges.values()})


def load_world(manifest_path, assets_root=None) -> World:
    """Load and validate a world bundle: manifest plus every referenced
    walkmap; frame directories must exist (individual frames may not)."""
    manifest_path = str(manifest_path)
    if not os.path.isfile(manifest_path):
        raise ValidationError(f"manifest not found: {manifest_path}")
    with open(manifest_path, "rb") as f:
        manifest_bytes = f.read()
    graph = WorldGraph.from_manifest(json.loads(manifest_bytes))
    root = str(assets_root) if assets_root is not None else os.path.dirname(manifest_path)

    walkmaps: dict[str, WalkMap] = {}
    walkmap_gz: dict[str, bytes] = {}
    for edge in graph.edges.values():
        vid = edge.video_id
        if vid in walkmaps:
            continue
        wm_path = os.path.join(root, edge.walkmap_uri)
        if not os.path.isfile(wm_path):
            raise ValidationError(f"walkmap missing: {edge.walkmap_uri}")
        with open(wm_path, "rb") as f:
            raw = f.read()
        walkmaps[vid] = WalkMap.from_bytes(raw)
        walkmap_gz[vid] = gzip.compress(raw, mtime=0)
        frames_dir = os.path.join(root, edge.frames_uri)
        if not os.path.isdir(frames_dir):
            raise ValidationError(f"frames directory missing: {edge.frames_uri}")
    return World(
        graph=graph,
        manifest_bytes=manifest_bytes,
        assets_root=root,
        walkmaps=walkmaps,
        walkmap_gz=walkmap_gz,
    )


# -- session registry ----------------------------------------------------------------


@dataclass
class _Entry:
    state: navigation.SessionState
    last_seen: float
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionRegistry:
    """Thread-safe session table with idle eviction."""

    def __init__(self, ttl: float = 300.0, clock=time.monotonic):
        self.ttl = ttl
        self.clock = clock
        self._lock = threading.Lock()
        self._entries: dict[str, _Entry] = {}

    def _evict_locked(self) -> None:
        now = self.clock()
        dead = [sid for sid, e in self._entries.items() if now - e.last_seen > self.ttl]
        for sid in dead:
            del self._entries[sid]

    def add(self, state: navigation.SessionState) -> None:
        with self._lock:
            self._evict_locked()
            self._entries[state.session_id] = _Entry(state=state, last_seen=self.clock())

    def get(self, session_id: str) -> _Entry:
        with self._lock:
            self._evict_locked()
            entry = self._entries.get(session_id)
            if entry is None:
                raise ServiceError(404, "unknown_session", f"no session {session_id!r}")
            entry.last_seen = self.clock()
            return entry

    def snapshot(self) -> list[navigation.SessionState]:
        with self._lock:
            self._evict_locked()
            return sorted(
                (e.state for e in self._entries.values()), key=lambda s: s.session_id
            )


# -- app factory ----------------------------------------------------------------------


def create_app(
    world: World,
    ttl: float = 300.0,
    clock=time.monotonic,
    id_factory=None,
) -> FastAPI:
    app = FastAPI(title="panowalk world service", docs_url=None, redoc_url=None)
    registry = SessionRegistry(ttl=ttl, clock=clock)
    app.state.world = world
    app.state.registry = registry
    make_id = id_factory or (lambda: uuid.uuid4().hex)
    graph = world.graph

    @app.exception_handler(ServiceError)
    def _service_error(request: Request, exc: ServiceError):
        return _error_response(exc.status, exc.code, exc.message)

    @app.exception_handler(ValidationError)
    def _validation_error(request: Request, exc: ValidationError):
        return _error_response(400, "bad_input", str(exc))

    @app.exception_handler(RequestValidationError)
    def _request_error(request: Request, exc: RequestValidationError):
        return _error_response(400, "bad_input", str(exc))

    def _edge_or_404(edge_id: str):
        edge = graph.edges.get(edge_id)
        if edge is None:
            raise ServiceError(404, "unknown_edge", f"no edge {edge_id!r}")
        return edge

    def _edge_assets(edge) -> dict:
        return {
            "edge_id": edge.edge_id,
            "frames_uri": edge.frames_uri,
            "walkmap_uri": edge.walkmap_uri,
            "video_uri": edge.video_uri,
        }

    @app.get("/api/manifest")
    def get_manifest():
        return Response(
            content=world.manifest_bytes,
            media_type="application/json",
            headers={"Cache-Control": IMMUTABLE_CACHE},
        )

    @app.get("/api/edges/{edge_id}/frames/{n}")
    def get_frame(edge_id: str, n: int):
        edge = _edge_or_404(edge_id)
        if n < edge.frame_start or n > edge.frame_end:
            raise ServiceError(
                404, "frame_out_of_range",
                f"frame {n} outside [{edge.frame_start}, {edge.frame_end}]",
            )
        path = os.path.join(world.assets_root, edge.frames_uri, f"{n:06d}.png")
        if not os.path.isfile(path):
            raise ServiceError(404, "missing_frame", f"frame file not found: {path}")
        return FileResponse(
            path, media_type="image/png", headers={"Cache-Control": IMMUTABLE_CACHE}
        )

    @app.get("/api/edges/{edge_id}/walkmap")
    def get_walkmap(edge_id: str):
        edge = _edge_or_404(edge_id)
        gz = world.walkmap_gz.get(edge.video_id)
        if gz is None:
            raise ServiceError(404, "missing_walkmap", f"no walkmap for {edge.video_id}")
        return Response(
            content=gz,
            media_type="application/json",
            headers={
                "Content-Encoding": "gzip",
                "Cache-Control": IMMUTABLE_CACHE,
                "Vary": "Accept-Encoding",
            },
        )

    @app.get("/api/edges/{edge_id}/video")
    def get_video(edge_id: str, request: Request):
        edge = _edge_or_404(edge_id)
        path = os.path.join(world.assets_root, edge.video_uri)
        if not os.path.isfile(path):
            raise ServiceError(404, "missing_video", f"video not found: {edge.video_uri}")
        size = os.path.getsize(path)
        range_header = request.headers.get("range")
        if range_header is None:
            return FileResponse(
                path,
                media_type="video/mp4",
                headers={"Accept-Ranges": "bytes", "Cache-Control": IMMUTABLE_CACHE},
            )
        spec = range_header.strip()
        if not spec.startswith("bytes="):
            raise ServiceError(416, "bad_range", f"unsupported range unit: {spec!r}")
        try:
            start_s, _, end_s = spec[len("bytes=") :].partition("-")
            start = int(start_s) if start_s else None
            end = int(end_s) if end_s else None
        except ValueError:
            raise ServiceError(416, "bad_range", f"malformed range: {spec!r}") from None
        if start is None:
            if end is None or end == 0:
                raise ServiceError(416, "bad_range", f"malformed range: {spec!r}")
            start = max(0, size - end)  # suffix form: last `end` bytes
            end = size - 1
        else:
            end = size - 1 if end is None else min(end, size - 1)
        if start >= size or start > end:
            return Response(
                status_code=416,
                content=json.dumps(
                    {"error": {"code": "bad_range", "message": f"unsatisfiable: {spec!r}"}}
                ),
                media_type="application/json",
                headers={"Content-Range": f"bytes */{size}"},
            )
        with open(path, "rb") as f:
            f.seek(start)
            chunk = f.read(end - start + 1)
        return Response(
            content=chunk,
            status_code=206,
            media_type="video/mp4",
            headers={
                "Content-Range": f"bytes {start}-{end}/{size}",
                "Accept-Ranges": "bytes",
                "Cache-Control": IMMUTABLE_CACHE,
            },
        )

    @app.post("/api/sessions")
    def create_session(body: dict | None = None):
        body = body or {}
        spawn = body.get("spawn")
        state = navigation.create_session(graph, make_id())
        if spawn is not None:
            if spawn not in graph.nodes:
                raise ServiceError(404, "unknown_node", f"no node {spawn!r}")
            navigation.teleport(state, str(spawn), graph)
        registry.add(state)
        return JSONResponse(
            {
                "session_id": state.session_id,
                "state": state.to_dict(),
                "camera": navigation._camera_pose(state, graph),
            }
        )

    @app.post("/api/sessions/{session_id}/input")
    def session_input(session_id: str, body: dict):
        entry = registry.get(session_id)
        try:
            inp = navigation.StepInput.from_dict(body)
        except (ValidationError, TypeError, ValueError, KeyError, IndexError) as e:
            raise ServiceError(400, "bad_input", f"malformed step input: {e}") from None
        clamped = False
        norm = math.hypot(inp.move[0], inp.move[1])
        limit = graph.config.max_step
        if norm > limit:
            scale = limit / norm
            inp = navigation.StepInput(
                move=(inp.move[0] * scale, inp.move[1] * scale),
                action=inp.action,
                dt=inp.dt,
            )
            clamped = True
        with entry.lock:
            result = navigation.step(entry.state, inp, graph, world.walkmaps)
            payload = result.to_dict()
        payload["clamped"] = clamped
        if any(ev.get("type") == "edge_changed" for ev in payload["events"]):
            payload["assets"] = _edge_assets(graph.edges[entry.state.edge_id])
        return JSONResponse(payload)

    @app.get("/api/presence")
    def get_presence():
        sessions = registry.snapshot()
        return JSONResponse(
            {
                "sessions": [
                    {
                        "session_id": s.session_id,
                        "edge_id": s.edge_id,
                        "current_frame": s.current_frame,
                        "avatar": {"x": s.avatar_x, "y": s.avatar_y, "yaw": s.avatar_yaw},
                    }
                    for s in sessions
                ]
            }
        )

    return app


def serve(manifest_path, assets_root=None, host: str = "127.0.0.1", port: int = 8360):
    """Load the world, then block serving it until interrupted."""
    import uvicorn

    world = load_world(manifest_path, assets_root)
    app = create_app(world)
    uvicorn.run(app, host=host, port=port, log_level="warning")
