import json
import math

import numpy as np
import pytest

from graphmp.service import ARM_NAMES, Session, ServiceConfig, create_app

SIGMA_TR = 1.0 - math.exp(-1.0)


def make_session(**defaults_overrides):
    session = Session(ServiceConfig(realtime=False))
    if defaults_overrides:
        send(session, {"type": "config", **defaults_overrides})
    return session


def send(session, frame):
    return session.handle_frame(json.dumps(frame))


def only_acks(replies):
    return all(r["type"] in ("ack", "model_info") for r in replies)


def draw_line_demo(session, arm="left", n=100, speed=1.2, dt=0.01):
    """Scripted client stroke: n points at the capture rate."""
    send(session, {"type": "start_demo", "arm": arm})
    for k in range(n):
        reply = send(session, {"type": "demo_point", "arm": arm,
                               "x": [0.1 + speed * dt * k, 0.5], "t": k * dt})
        assert only_acks(reply)
    assert only_acks(send(session, {"type": "end_demo"}))


def fitted_session(**overrides):
    session = make_session(**overrides)
    draw_line_demo(session)
    replies = send(session, {"type": "fit"})
    infos = [r for r in replies if r["type"] == "model_info"]
    assert len(infos) == 1
    return session, infos[0]


def run_ticks(session, n):
    frames = []
    for _ in range(n):
        frame = session.tick()
        if frame is not None:
            frames.append(frame)
    return frames


# -- protocol basics ---------------------------------------------------------------

def test_hello_ack_echoes_id():
    session = make_session()
    replies = send(session, {"type": "hello", "version": 1, "id": "h-1"})
    assert replies == [{"type": "ack", "id": "h-1"}]


def test_version_mismatch_is_an_error():
    session = make_session()
    replies = send(session, {"type": "hello", "version": 99})
    assert replies[0]["type"] == "error"
    assert replies[0]["code"] == "version"


def test_garbage_bytes_yield_error_and_session_survives():
    session = make_session()
    for garbage in ("", "{", "\x00\xff", "[1,2,3]", '{"no_type": 1}', "null"):
        replies = session.handle_frame(garbage)
        assert len(replies) == 1
        assert replies[0]["type"] == "error"
    # still fully functional afterwards
    assert only_acks(send(session, {"type": "hello"}))


def test_unknown_frame_type_is_an_error():
    session = make_session()
    replies = send(session, {"type": "warp_drive"})
    assert replies[0]["type"] == "error"
    assert replies[0]["code"] == "bad_frame"


def test_every_frame_is_acked_or_errored():
    session = make_session()
    frames = [{"type": "hello"}, {"type": "nope"}, {"type": "start_demo"},
              {"type": "demo_point", "arm": "left", "x": [0.1, 0.5], "t": 0.0},
              {"type": "stop"}]
    for frame in frames:
        replies = send(session, frame)
        assert replies
        assert replies[0]["type"] in ("ack", "error")


# -- teaching flow ------------------------------------------------------------------

def test_demo_fit_reports_label_shift():
    session, info = fitted_session()
    assert info["n_nodes"] == 99  # N - 1 training pairs from N points
    assert len(info["goal"]) == 3


def test_demo_point_time_regression_rejected():
    session = make_session()
    send(session, {"type": "start_demo", "arm": "left"})
    send(session, {"type": "demo_point", "arm": "left", "x": [0.1, 0.5], "t": 0.5})
    replies = send(session, {"type": "demo_point", "arm": "left", "x": [0.11, 0.5], "t": 0.5})
    assert replies[0]["type"] == "error"
    assert replies[0]["code"] == "bad_value"


def test_demo_point_outside_recording_rejected():
    session = make_session()
    replies = send(session, {"type": "demo_point", "arm": "left", "x": [0.1, 0.5], "t": 0.0})
    assert replies[0]["code"] == "bad_phase"


def test_exec_without_model_rejected():
    session = make_session()
    replies = send(session, {"type": "start_exec"})
    assert replies[0]["type"] == "error"
    assert replies[0]["code"] == "bad_phase"


def test_fit_without_demo_rejected():
    session = make_session()
    replies = send(session, {"type": "fit"})
    assert replies[0]["code"] == "no_model"


def test_config_changes_kernel():
    session, info = fitted_session(lambda_time=0.5)
    assert session.slots["left"].model.params.lambda_time == 0.5


def test_config_rejected_outside_idle():
    session = make_session()
    send(session, {"type": "start_demo"})
    replies = send(session, {"type": "config", "lambda_pos": 0.1})
    assert replies[0]["code"] == "bad_phase"


# -- execution ticks ------------------------------------------------------------------

def test_tick_stream_monotone_and_decimated():
    session, _ = fitted_session()
    assert only_acks(send(session, {"type": "start_exec"}))
    frames = run_ticks(session, 200)
    assert len(frames) == 200 // session.cfg.broadcast_stride
    times = [f["t"] for f in frames]
    assert all(b > a for a, b in zip(times, times[1:]))
    assert all(f["phase"] == "executing" for f in frames)
    arm = frames[0]["arms"][0]
    for key in ("arm", "x", "v", "attractor", "sigma", "k_scale", "t_b", "f_ext"):
        assert key in arm
    assert all(np.isfinite(arm["x"]).all() for f in frames for arm in [f["arms"][0]])


def test_no_ticks_outside_running_phases():
    session, _ = fitted_session()
    assert session.tick() is None
    send(session, {"type": "start_exec"})
    assert run_ticks(session, 20)
    send(session, {"type": "stop"})
    assert session.tick() is None


def test_safety_ceiling_on_all_broadcast_frames():
    """No frame ever reports a command past the force or displacement caps."""
    session, _ = fitted_session()
    send(session, {"type": "start_exec"})
    send(session, {"type": "drag", "arm": "left", "pointer_x": [0.9, -0.4]})
    frames = run_ticks(session, 600)
    cap = 600.0 * 0.05  # stiffness at the displacement bound: 30 N
    dt = session.cfg.dt
    for frame in frames:
        for arm in frame["arms"]:
            # the broadcast x is post-step; the pre-step position is exactly
            # x - v dt under the semi-implicit update, recovering the command
            x_pre = np.asarray(arm["x"]) - np.asarray(arm["v"]) * dt
            delta = np.asarray(arm["attractor"]) - x_pre
            assert np.all(np.abs(delta) <= 0.05 + 1e-9)
            force = arm["k_scale"] * 600.0 * np.abs(delta)
            assert np.all(force <= cap + 1e-6)
            assert np.all(np.abs(arm["f_ext"]) <= 30.0 + 1e-9)


def test_drag_regulates_stiffness_then_recovers():
    # a slow time kernel keeps the match local, so release recovers in place
    session, _ = fitted_session(lambda_time=0.5)
    send(session, {"type": "start_exec"})
    run_ticks(session, 10)
    # pin the pointer 3 length scales below the stroke
    send(session, {"type": "drag", "arm": "left", "pointer_x": [0.3, 0.35]})
    dragged = run_ticks(session, 800)
    scales = [f["arms"][0]["k_scale"] for f in dragged]
    sigmas = [f["arms"][0]["sigma"] for f in dragged]
    assert any(s > SIGMA_TR for s in sigmas)
    for sigma, scale in zip(sigmas, scales):
        if sigma > SIGMA_TR:
            assert scale < 1.0  # k_scale < 1 exactly while sigma exceeds the threshold
        else:
            assert scale == 1.0
    assert min(scales) < 0.5

    send(session, {"type": "drag_end", "arm": "left"})
    release_t = session.t_sim
    recovered_at = None
    for _ in range(2000):
        frame = session.tick()
        if frame is None:
            continue
        arm = frame["arms"][0]
        assert np.allclose(arm["f_ext"], 0.0)  # force exactly zero after release
        if arm["k_scale"] == 1.0:
            recovered_at = frame["t"]
            break
    assert recovered_at is not None
    assert recovered_at - release_t < 2.0  # recovery within two simulated seconds


def test_drag_force_is_clamped_pointer_spring():
    from graphmp import ArmState
    from graphmp.service import DragState, drag_to_force

    arm = ArmState(x=np.array([0.2, 0.2]), v=np.zeros(2))
    drag = DragState(active=True, pointer=np.array([0.2, 0.2]), k_drag=1000.0)
    assert np.allclose(drag_to_force(drag, arm, [30.0, 30.0]), 0.0)
    drag.pointer = np.array([0.3, 0.2])  # 0.1 m away at 1000 N/m clamps at 30 N
    assert np.allclose(drag_to_force(drag, arm, [30.0, 30.0]), [30.0, 0.0])
    drag.active = False
    assert np.allclose(drag_to_force(drag, arm, [30.0, 30.0]), 0.0)


def test_drag_back_to_start_resets_time_belief():
    """Dragging a finished arm back to the stroke start snaps the time belief
    to the matched early node and the motion repeats."""
    session, _ = fitted_session(lambda_time=0.5)
    send(session, {"type": "start_exec"})
    frames = run_ticks(session, 4000)
    late_tb = frames[-1]["arms"][0]["t_b"]
    assert late_tb > 0.8  # rode most of the 1 s stroke
    send(session, {"type": "drag", "arm": "left", "pointer_x": [0.1, 0.5]})
    run_ticks(session, 1200)
    send(session, {"type": "drag_end", "arm": "left"})
    frames = run_ticks(session, 400)
    snapped_tb = frames[0]["arms"][0]["t_b"]
    assert snapped_tb < 0.3  # matched an early node again
    later_tb = frames[-1]["arms"][0]["t_b"]
    assert later_tb > snapped_tb  # and execution repeats forward


def test_reset_tb_frame():
    session, _ = fitted_session()
    send(session, {"type": "start_exec"})
    run_ticks(session, 50)
    assert session.slots["left"].arm.t_b > 0.0
    assert only_acks(send(session, {"type": "reset_tb", "arm": "left"}))
    assert session.slots["left"].arm.t_b == 0.0


# -- corrections -----------------------------------------------------------------------

def test_correction_appends_on_drag_end():
    session, info = fitted_session(lambda_time=0.5)
    before = info["n_nodes"]
    assert only_acks(send(session, {"type": "start_correct"}))
    run_ticks(session, 50)
    send(session, {"type": "drag", "arm": "left", "pointer_x": [0.4, 0.55]})
    run_ticks(session, 150)
    replies = send(session, {"type": "drag_end", "arm": "left"})
    infos = [r for r in replies if r["type"] == "model_info"]
    assert len(infos) == 1
    assert infos[0]["n_nodes"] == before + 1 + 200 - 1  # batch append at drag end
    assert only_acks(send(session, {"type": "stop"}))


def test_correction_too_short_to_refit():
    session, _ = fitted_session()
    send(session, {"type": "start_correct"})
    send(session, {"type": "drag", "arm": "left", "pointer_x": [0.2, 0.5]})
    replies = send(session, {"type": "drag_end", "arm": "left"})
    assert replies[0]["type"] == "error"
    assert "short" in replies[0]["msg"]


# -- bimanual ---------------------------------------------------------------------------

def draw_two_arm_demos(session):
    send(session, {"type": "start_demo", "arm": "left"})
    for k in range(60):
        send(session, {"type": "demo_point", "arm": "left",
                       "x": [0.1 + 0.012 * k, 0.4], "t": k * 0.01})
    send(session, {"type": "end_demo"})
    send(session, {"type": "start_demo", "arm": "right"})
    for k in range(60):
        send(session, {"type": "demo_point", "arm": "right",
                       "x": [0.1 + 0.012 * k, 0.6], "t": k * 0.01})
    send(session, {"type": "end_demo"})


def test_bimanual_coupling_drags_the_other_arm():
    session = make_session()
    draw_two_arm_demos(session)
    replies = send(session, {"type": "fit"})
    assert len([r for r in replies if r["type"] == "model_info"]) == 2
    assert only_acks(send(session, {"type": "set_coupling", "enabled": True,
                                    "rel_offset": [0.0, 0.2]}))
    send(session, {"type": "start_exec"})
    warmup = run_ticks(session, 30)
    baseline = {f["arm"]: np.asarray(f["x"]) for f in warmup[-1]["arms"]}
    send(session, {"type": "drag", "arm": "left", "pointer_x": [0.3, -0.5]})
    frames = run_ticks(session, 500)
    final = {f["arm"]: np.asarray(f["x"]) for f in frames[-1]["arms"]}
    assert final["left"][1] < baseline["left"][1] - 0.01  # dragged downward
    assert final["right"][1] < baseline["right"][1] - 0.005  # coupling follows


def test_coupling_disabled_leaves_arms_independent():
    session = make_session()
    draw_two_arm_demos(session)
    send(session, {"type": "fit"})
    assert only_acks(send(session, {"type": "set_coupling", "enabled": False}))
    send(session, {"type": "start_exec"})
    run_ticks(session, 30)
    before = session.slots["right"].arm.x.copy()
    send(session, {"type": "drag", "arm": "left", "pointer_x": [0.3, -0.5]})
    run_ticks(session, 300)
    after = session.slots["right"].arm.x
    assert abs(after[1] - before[1]) < 1e-3  # right arm unaffected by the drag


# -- websocket transport ------------------------------------------------------------------

@pytest.fixture
def ws_client():
    from fastapi.testclient import TestClient

    app = create_app(ServiceConfig(realtime=False))
    with TestClient(app) as client:
        yield client


def test_ws_round_trip_ack(ws_client):
    with ws_client.websocket_connect("/session") as ws:
        ws.send_text(json.dumps({"type": "hello", "version": 1, "id": 7}))
        reply = ws.receive_json()
        assert reply == {"type": "ack", "id": 7}


def test_ws_binary_garbage_gets_error_frame(ws_client):
    with ws_client.websocket_connect("/session") as ws:
        ws.send_bytes(b"\x00\x01\x02totally-not-json")
        reply = ws.receive_json()
        assert reply["type"] == "error"
        ws.send_text(json.dumps({"type": "hello"}))
        # the pump may interleave tick frames; scan for the ack
        for _ in range(50):
            reply = ws.receive_json()
            if reply["type"] == "ack":
                break
        assert reply["type"] == "ack"


def test_ws_sessions_are_isolated(ws_client):
    with ws_client.websocket_connect("/session") as a, \
            ws_client.websocket_connect("/session") as b:
        a.send_text(json.dumps({"type": "start_demo", "arm": "left", "id": 1}))
        assert a.receive_json()["type"] == "ack"
        # session b is still idle: a demo point there must fail on phase
        b.send_text(json.dumps({"type": "demo_point", "arm": "left",
                                "x": [0.1, 0.5], "t": 0.0}))
        reply = b.receive_json()
        assert reply["type"] == "error"
        assert reply["code"] == "bad_phase"
