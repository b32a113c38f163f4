"""Avatar stepping, collision, intersections, edge switching, traces."""

import math

import numpy as np
import pytest

from panowalk.config import Config
from panowalk.errors import ValidationError
from panowalk.graph import Edge, Node, Trajectory, WorldGraph, arc_length_table, build_manifest
from panowalk.navigation import (
    DEFAULT_DT,
    SessionState,
    StepInput,
    create_session,
    foot_direction,
    preload_hints,
    simulate,
    step,
    switch_reverse,
    teleport,
    trace_to_jsonl,
)

from conftest import free_walkmaps_for, ground_walkmaps_for, make_cross_trajs


def rot_y(v, angle):
    c, s = math.cos(angle), math.sin(angle)
    x, y, z = v
    return np.array([c * x - s * z, y, s * x + c * z])


def make_solo_graph(length=10.0, step_m=0.5):
    n = int(round(length / step_m)) + 1
    x = np.round(np.arange(n) * step_m, 10)
    t = Trajectory("solo", np.arange(n), x, np.zeros(n), np.full(n, math.pi / 2))
    return build_manifest([t])


class TestFootDirection:
    def test_straight_ahead_45_down(self):
        # avatar exactly camera_height ahead: depression angle is 45 degrees
        d = foot_direction((0.0, 0.0), 1.7, 0.0, (0.0, 1.7))
        phi = math.asin(d[1])
        lam = math.atan2(d[0], d[2])
        assert phi == pytest.approx(-math.pi / 4, abs=1e-12)
        assert lam == pytest.approx(0.0, abs=1e-12)

    def test_yaw_rotates_longitude(self):
        # camera heading +x; avatar due +x of it: straight ahead again
        d = foot_direction((0.0, 0.0), 1.7, math.pi / 2, (1.7, 0.0))
        assert math.atan2(d[0], d[2]) == pytest.approx(0.0, abs=1e-12)
        # avatar due -x with zero yaw: quarter turn left
        d = foot_direction((0.0, 0.0), 1.7, 0.0, (-1.7, 0.0))
        assert math.atan2(d[0], d[2]) == pytest.approx(-math.pi / 2, abs=1e-12)

    def test_longitude_wraps_to_half_open_range(self):
        d = foot_direction((0.0, 0.0), 1.7, -3.0, (math.sin(3.0) * 5, math.cos(3.0) * 5))
        lam = math.atan2(d[0], d[2])
        assert -math.pi <= lam < math.pi
        assert lam == pytest.approx(6.0 - 2 * math.pi, abs=1e-9)

    def test_matches_rotation_oracle(self):
        rng = np.random.default_rng(61)
        for _ in range(200):
            cam = rng.uniform(-5, 5, 2)
            av = rng.uniform(-5, 5, 2)
            if np.hypot(*(av - cam)) < 1e-3:
                continue
            yaw = float(rng.uniform(-4, 4))
            world = np.array([av[0] - cam[0], -1.7, av[1] - cam[1]])
            world /= np.linalg.norm(world)
            expect = rot_y(world, yaw)
            got = foot_direction(tuple(cam), 1.7, yaw, tuple(av))
            assert np.allclose(got, expect, atol=1e-12)

    def test_coincident_raises(self):
        with pytest.raises(ValidationError, match="coincide"):
            foot_direction((1.0, 2.0), 0.0, 0.0, (1.0, 2.0))


class TestCreateSession:
    def test_default_spawn(self, cross_graph):
        st = create_session(cross_graph, "s1")
        assert st.edge_id == "e000"  # lowest edge id
        assert st.s == 0.0
        assert st.current_frame == cross_graph.edges["e000"].frame_start
        # camera (5.1, 0) walking toward -x: avatar sits avatar_distance ahead
        assert st.avatar_x == pytest.approx(3.6)
        assert st.avatar_y == pytest.approx(0.0)
        assert st.avatar_yaw == pytest.approx(math.atan2(-1.0, 0.0))
        assert st.mode == "at_intersection"  # spawn is within delta_end of the end node
        assert st.pending_options == ["e000", "e003"]

    def test_mid_edge_spawn(self, cross_graph):
        st = create_session(cross_graph, "s2", edge_id="e000", spawn_s=2.5)
        assert st.s == pytest.approx(2.5)
        assert st.current_frame == cross_graph.edges["e000"].frame_start + 10
        assert st.mode == "walking"
        assert st.pending_options == []
        assert st.avatar_x == pytest.approx(1.1)  # 1.5 m beyond the camera at x=2.6

    def test_spawn_near_far_end_faces_backward(self, cross_graph):
        e = cross_graph.edges["e000"]
        st = create_session(cross_graph, "s3", edge_id="e000", spawn_s=e.length)
        assert st.current_frame == e.frame_end
        # near the to-node the avatar is dropped back toward the edge interior
        assert st.avatar_x == pytest.approx(e.x[-1] + 1.5)
        assert st.avatar_yaw == pytest.approx(math.atan2(1.0, 0.0))

    def test_spawn_s_clamps(self, cross_graph):
        st = create_session(cross_graph, "s4", edge_id="e000", spawn_s=999.0)
        assert st.s == pytest.approx(cross_graph.edges["e000"].length)

    def test_arclen_tie_picks_lower_frame(self, cross_graph):
        st = create_session(cross_graph, "s5", edge_id="e000", spawn_s=0.125)
        assert st.current_frame == cross_graph.edges["e000"].frame_start

    def test_unknown_edge(self, cross_graph):
        with pytest.raises(ValidationError, match="unknown edge"):
            create_session(cross_graph, "s6", edge_id="nope")


class TestStepInput:
    def test_round_trip(self):
        inp = StepInput(move=(0.1, -0.2), action=("choose", "e001"), dt=0.05)
        again = StepInput.from_dict(inp.to_dict())
        assert again == inp

    def test_defaults(self):
        inp = StepInput.from_dict({})
        assert inp.move == (0.0, 0.0) and inp.action is None and inp.dt == DEFAULT_DT

    def test_validation(self):
        with pytest.raises(ValidationError, match="dt"):
            StepInput(dt=0.0)
        with pytest.raises(ValidationError, match="unknown action"):
            StepInput(action=("dance",))


class TestStepping:
    def test_forward_walk_advances_camera(self, cross_graph, ground_walkmaps):
        st = create_session(cross_graph, "w1", edge_id="e000", spawn_s=0.0)
        frames = [st.current_frame]
        for _ in range(10):
            r = step(st, StepInput(move=(-0.4, 0.0)), cross_graph, ground_walkmaps)
            assert not r.collided
            frames.append(st.current_frame)
        assert st.s == pytest.approx(5.0)  # clamped at the edge end
        assert st.current_frame == cross_graph.edges["e000"].frame_end
        assert frames == sorted(frames)  # camera never steps backward here
        assert st.mode == "at_intersection"
        assert st.pending_options == ["e001", "e003", "e005", "e007"]

    def test_arrival_events_fire_once(self, cross_graph, ground_walkmaps):
        st = create_session(cross_graph, "w2", edge_id="e000", spawn_s=2.5)
        arrived = []
        for _ in range(10):
            r = step(st, StepInput(move=(-0.4, 0.0)), cross_graph, ground_walkmaps)
            arrived.extend(ev for ev in r.events if ev["type"] == "arrived_at_intersection")
        assert len(arrived) == 1
        assert arrived[0]["node_id"] == "n000"

    def test_zero_move_is_inert(self, cross_graph, ground_walkmaps):
        st = create_session(cross_graph, "w3", edge_id="e000", spawn_s=2.5)
        before = st.to_dict()
        r = step(st, StepInput(), cross_graph, ground_walkmaps)
        assert st.to_dict() == before
        assert r.events == [] and not r.collided

    def test_oversized_move_rejected(self, cross_graph, ground_walkmaps):
        st = create_session(cross_graph, "w4", edge_id="e000", spawn_s=2.5)
        with pytest.raises(ValidationError, match="max step"):
            step(st, StepInput(move=(0.51, 0.0)), cross_graph, ground_walkmaps)

    def test_walking_off_road_collides_and_freezes_avatar(self, cross_graph, ground_walkmaps):
        st = create_session(cross_graph, "w5", edge_id="e000", spawn_s=0.5)
        assert (st.avatar_x, st.avatar_y) == (pytest.approx(3.1), pytest.approx(0.0))
        yaw_before_leave = None
        collided_at = None
        for i in range(8):
            prev = (st.avatar_x, st.avatar_y)
            r = step(st, StepInput(move=(0.0, 0.5)), cross_graph, ground_walkmaps)
            if r.collided:
                collided_at = i
                assert (st.avatar_x, st.avatar_y) == prev  # no sliding
                break
            yaw_before_leave = st.avatar_yaw
        # road is 2 m half-width; x stays > 2, so walking north must fail
        assert collided_at is not None
        assert st.avatar_y < 3.0
        assert st.avatar_yaw == yaw_before_leave  # yaw only changes on accepted moves
        # a retreat back toward the road is accepted again
        r = step(st, StepInput(move=(0.0, -0.5)), cross_graph, ground_walkmaps)
        assert not r.collided

    def test_collision_yaw_and_frame_stable(self, cross_graph, ground_walkmaps):
        st = create_session(cross_graph, "w6", edge_id="e000", spawn_s=0.5)
        # hammer the wall: state must not drift across collided steps
        saw_collision = False
        for _ in range(7):
            snap = st.to_dict()
            r = step(st, StepInput(move=(0.0, 0.5)), cross_graph, ground_walkmaps)
            if r.collided:
                saw_collision = True
                assert st.to_dict() == snap
        assert saw_collision

    def test_free_map_accepts_everything(self, cross_graph, free_walkmaps):
        st = create_session(cross_graph, "w7", edge_id="e000", spawn_s=2.5)
        for _ in range(6):
            r = step(st, StepInput(move=(0.35, 0.35)), cross_graph, free_walkmaps)
            assert not r.collided

    def test_camera_pose_tracks_frame_and_avatar(self, cross_graph, ground_walkmaps):
        st = create_session(cross_graph, "w8", edge_id="e000", spawn_s=2.5)
        r = step(st, StepInput(move=(-0.4, 0.0)), cross_graph, ground_walkmaps)
        e = cross_graph.edges["e000"]
        i = st.current_frame - e.frame_start
        assert r.camera_pose["position"] == [e.x[i], 1.7, e.y[i]]
        assert r.camera_pose["look_at"] == [st.avatar_x, 0.0, st.avatar_y]

    def test_missing_walkmap_errors(self, cross_graph):
        st = create_session(cross_graph, "w9", edge_id="e000", spawn_s=2.5)
        with pytest.raises(ValidationError, match="no walkmap"):
            step(st, StepInput(move=(0.1, 0.0)), cross_graph, {})


class TestIntersections:
    def reach_center(self, graph, walkmaps):
        st = create_session(graph, "ix", edge_id="e000", spawn_s=2.5)
        for _ in range(10):
            step(st, StepInput(move=(-0.4, 0.0)), graph, walkmaps)
        assert st.mode == "at_intersection"
        return st

    def test_choose_swaps_edge_with_fade_bracket(self, cross_graph, ground_walkmaps):
        st = self.reach_center(cross_graph, ground_walkmaps)
        r = step(st, StepInput(action=("choose", "e007")), cross_graph, ground_walkmaps)
        kinds = [ev["type"] for ev in r.events]
        assert kinds == ["fade_out", "edge_changed", "fade_in"]
        assert r.events[1]["edge_id"] == "e007"
        e = cross_graph.edges["e007"]
        assert st.edge_id == "e007"
        assert st.current_frame == e.frame_start
        assert st.s == 0.0
        assert st.mode == "fading"
        assert st.fade_t == pytest.approx(0.5)
        # avatar is placed avatar_distance into the new edge
        assert st.avatar_x == pytest.approx(e.x[0])
        assert st.avatar_y == pytest.approx(e.y[0] + 1.5)
        assert st.avatar_yaw == pytest.approx(0.0)  # heading +y

    def test_choose_rejects_unoffered_edge(self, cross_graph, ground_walkmaps):
        st = self.reach_center(cross_graph, ground_walkmaps)
        with pytest.raises(ValidationError, match="not among the offered"):
            step(st, StepInput(action=("choose", "e000")), cross_graph, ground_walkmaps)

    def test_choose_needs_intersection(self, cross_graph, ground_walkmaps):
        st = create_session(cross_graph, "ic", edge_id="e000", spawn_s=2.5)
        assert st.mode == "walking"
        with pytest.raises(ValidationError, match="no direction options"):
            step(st, StepInput(action=("choose", "e001")), cross_graph, ground_walkmaps)

    def test_fade_freezes_input_for_whole_duration(self, cross_graph, ground_walkmaps):
        st = self.reach_center(cross_graph, ground_walkmaps)
        step(st, StepInput(action=("choose", "e007")), cross_graph, ground_walkmaps)
        pos = (st.avatar_x, st.avatar_y)
        # fade_seconds=0.5 at dt=1/30: 15 ticks stay inside the fade
        for i in range(15):
            r = step(st, StepInput(move=(0.3, 0.0)), cross_graph, ground_walkmaps)
            assert (st.avatar_x, st.avatar_y) == pos, f"moved during fade tick {i}"
            assert st.mode == "fading"
            assert r.events == []
        # the 16th tick ends the fade and processes its input
        r = step(st, StepInput(move=(0.3, 0.0)), cross_graph, ground_walkmaps)
        assert st.fade_t == 0.0
        assert (st.avatar_x, st.avatar_y) != pos
        assert st.mode in ("walking", "at_intersection")

    def test_fade_end_reemits_arrival(self, cross_graph, ground_walkmaps):
        st = self.reach_center(cross_graph, ground_walkmaps)
        step(st, StepInput(action=("choose", "e007")), cross_graph, ground_walkmaps)
        events = []
        for _ in range(16):
            r = step(st, StepInput(), cross_graph, ground_walkmaps)
            events.extend(r.events)
        kinds = [ev["type"] for ev in events]
        # new edge starts at its from-node: arrival announced when fade lifts
        assert kinds.count("arrived_at_intersection") == 1
        assert kinds.count("options_shown") == 1


class TestReverse:
    def test_switch_keeps_avatar_small_camera_jump(self, cross_graph, ground_walkmaps):
        st = create_session(cross_graph, "r1", edge_id="e000", spawn_s=2.5)
        avatar = (st.avatar_x, st.avatar_y)
        e = cross_graph.edges["e000"]
        i = st.current_frame - e.frame_start
        cam_before = np.array([e.x[i], e.y[i]])
        r = step(st, StepInput(action=("reverse",)), cross_graph, ground_walkmaps)
        assert [ev["type"] for ev in r.events] == ["fade_out", "edge_changed", "fade_in"]
        assert st.edge_id == "e003"
        assert (st.avatar_x, st.avatar_y) == (pytest.approx(avatar[0]), pytest.approx(avatar[1]))
        rev = cross_graph.edges["e003"]
        j = st.current_frame - rev.frame_start
        cam_after = np.array([rev.x[j], rev.y[j]])
        spacing = float(np.max(np.hypot(np.diff(rev.x), np.diff(rev.y))))
        assert float(np.hypot(*(cam_after - cam_before))) <= spacing + 1e-9
        assert st.s == pytest.approx(rev.arclen[j])

    def test_random_switch_points_bounded_jump(self, cross_graph, ground_walkmaps):
        rng = np.random.default_rng(67)
        paired = [e for e in cross_graph.edges.values() if e.reverse_edge_id]
        for _ in range(25):
            e = paired[int(rng.integers(len(paired)))]
            s = float(rng.uniform(0, e.length))
            st = create_session(cross_graph, "rr", edge_id=e.edge_id, spawn_s=s)
            i = st.current_frame - e.frame_start
            cam_before = np.array([e.x[i], e.y[i]])
            switch_reverse(st, cross_graph)
            rev = cross_graph.edges[e.reverse_edge_id]
            j = st.current_frame - rev.frame_start
            cam_after = np.array([rev.x[j], rev.y[j]])
            spacing = float(np.max(np.hypot(np.diff(rev.x), np.diff(rev.y))))
            assert float(np.hypot(*(cam_after - cam_before))) <= spacing + 1e-9

    def test_double_switch_returns_near_start(self, cross_graph, ground_walkmaps):
        st = create_session(cross_graph, "r2", edge_id="e000", spawn_s=2.5)
        f0 = st.current_frame
        switch_reverse(st, cross_graph)
        switch_reverse(st, cross_graph)
        assert st.edge_id == "e000"
        assert abs(st.current_frame - f0) <= 1

    def test_one_way_raises(self):
        solo = make_solo_graph()
        st = create_session(solo, "r3")
        with pytest.raises(ValidationError, match="one-way"):
            switch_reverse(st, solo)


class TestTeleport:
    def test_teleport_lands_on_lowest_outgoing(self, cross_graph, ground_walkmaps):
        st = create_session(cross_graph, "t1", edge_id="e000", spawn_s=2.5)
        r = step(st, StepInput(action=("teleport", "n000")), cross_graph, ground_walkmaps)
        assert [ev["type"] for ev in r.events] == ["fade_out", "edge_changed", "fade_in"]
        assert st.edge_id == "e001"  # lowest-id edge leaving n000
        e = cross_graph.edges["e001"]
        assert st.current_frame == e.frame_start
        assert st.s == 0.0
        assert st.mode == "fading"

    def test_unknown_node(self, cross_graph, ground_walkmaps):
        st = create_session(cross_graph, "t2")
        with pytest.raises(ValidationError, match="unknown node"):
            teleport(st, "n999", cross_graph)

    def test_dead_end_node_rejected(self):
        n = 21
        x = np.round(np.arange(n) * 0.5, 10)
        e = Edge(
            edge_id="e000", from_node="n000", to_node="n001", video_id="v",
            frame_start=0, frame_end=n - 1, x=x, y=np.zeros(n), yaw=np.zeros(n),
            arclen=arc_length_table(x, np.zeros(n)),
        )
        wg = WorldGraph(
            config=Config(),
            nodes={"n000": Node("n000", 0.0, 0.0), "n001": Node("n001", 10.0, 0.0)},
            edges={"e000": e},
        )
        wg.validate()
        st = create_session(wg, "t3")
        with pytest.raises(ValidationError, match="no outgoing"):
            teleport(st, "n001", wg)


class TestPreload:
    def test_cross_hints_from_mid_edge(self, cross_graph):
        st = create_session(cross_graph, "p1", edge_id="e000", spawn_s=2.5)
        # camera x=2.6: center node (d=2.6) and near terminal (d=2.45) are in
        assert preload_hints(st, cross_graph) == ["e000", "e001", "e003", "e005", "e007"]

    def test_radius_is_closed(self):
        solo = make_solo_graph()  # slow street: frames every 0.5 m, nodes at 0 and 10
        st = create_session(solo, "p2", edge_id="e000", spawn_s=5.0)
        # camera exactly 5.0 m from both nodes: both inside the closed ball
        assert preload_hints(st, solo) == ["e000"]
        st2 = create_session(solo, "p3", edge_id="e000", spawn_s=5.5)
        # 5.5 m from the from-node now: only the far (edge-less) node remains
        assert preload_hints(st2, solo) == []


class TestTraces:
    def script(self):
        moves = [StepInput(move=(-0.4, 0.0)) for _ in range(10)]
        moves.append(StepInput(action=("choose", "e007")))
        moves.extend(StepInput() for _ in range(16))
        moves.extend(StepInput(move=(0.0, 0.4)) for _ in range(5))
        return moves

    def test_byte_identical_reruns(self, cross_graph, ground_walkmaps):
        a = trace_to_jsonl(simulate(cross_graph, ground_walkmaps, self.script(), edge_id="e000"))
        b = trace_to_jsonl(simulate(cross_graph, ground_walkmaps, self.script(), edge_id="e000"))
        assert a == b
        assert a.count(b"\n") == 1 + len(self.script())

    def test_trace_structure(self, cross_graph, ground_walkmaps):
        trace = simulate(cross_graph, ground_walkmaps, [StepInput()], session_id="tt")
        assert trace[0]["initial"]["session_id"] == "tt"
        assert trace[1]["step"] == 0
        assert set(trace[1]["result"]) == {"state", "collided", "events", "camera_pose", "preload_hints"}

    def test_state_dict_shape(self, cross_graph):
        st = create_session(cross_graph, "sd")
        d = st.to_dict()
        assert set(d) == {
            "session_id", "edge_id", "avatar", "current_frame", "s",
            "mode", "pending_options", "fade_t",
        }
        assert set(d["avatar"]) == {"x", "y", "yaw"}
