"""Live teaching session server.

One WebSocket connection owns one session: a fixed-rate simulation loop
plus a frame handler, exchanging one JSON object per message.  The client
never sends forces, only pointer positions and demonstration points; the
server transduces pointers into clamped external forces, so the safety
ceilings cannot be bypassed from the wire.  Any malformed input yields an
error frame and the session stays alive.

Client frames:  hello, config, start_demo, demo_point, end_demo, fit,
start_exec, start_correct, drag, drag_end, reset_tb, set_coupling, stop.
Server frames:  ack{id}, error{code,msg}, model_info{arm,n_nodes,goal},
tick{t, phase, arms:[{arm,x,v,attractor,sigma,k_scale,t_b,f_ext}]}.
"""

from __future__ import annotations

import asyncio
import json
import math
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .config import Defaults
from .coupling import CouplingConfig, DualArmState, coupling_forces, saturate_coupling
from .engine import Phase, check_transition, execute_tick
from .impedance import ArmState, SimConfig, regulation_scale
from .model import Demonstration, append_session, fit_from_demonstration

PROTOCOL_VERSION = 1
ARM_NAMES = ("left", "right")


@dataclass
class ServiceConfig:
    sim_rate: float = 200.0
    broadcast_rate: float = 30.0
    realtime: bool = True
    defaults: Defaults = field(default_factory=Defaults)

    @property
    def dt(self) -> float:
        return 1.0 / self.sim_rate

    @property
    def broadcast_stride(self) -> int:
        return max(1, round(self.sim_rate / self.broadcast_rate))


@dataclass
class DragState:
    """Pointer-driven external force: a stiff spring from arm to pointer."""

    active: bool = False
    pointer: np.ndarray | None = None
    k_drag: float = 1000.0

    def force(self, arm: ArmState, f_max: np.ndarray) -> np.ndarray:
        if not self.active or self.pointer is None:
            return np.zeros(arm.dim)
        return np.clip(self.k_drag * (self.pointer - arm.x), -f_max, f_max)


def drag_to_force(drag: DragState, arm: ArmState, f_max) -> np.ndarray:
    """Clamped pointer force; zero the tick after release."""
    return drag.force(arm, np.asarray(f_max, dtype=float))


class _FrameError(Exception):
    def __init__(self, code: str, msg: str):
        self.code = code
        self.msg = msg
        super().__init__(msg)


@dataclass
class _ArmSlot:
    demo_points: list = field(default_factory=list)
    demo_times: list = field(default_factory=list)
    recording: bool = False
    demo: Demonstration | None = None
    model: object = None
    arm: ArmState | None = None
    drag: DragState = field(default_factory=DragState)
    correction_xs: list = field(default_factory=list)
    correction_ts: list = field(default_factory=list)
    last_f_ext: np.ndarray | None = None
    last_sigma: float = 0.0
    last_scale: float = 1.0
    last_attractor: np.ndarray | None = None


class Session:
    """State machine and simulation loop of one teaching session.

    handle_frame and tick are plain synchronous methods; the transport
    wrapper serializes them on one event loop, so a session has a single
    logical owner and needs no locking.
    """

    def __init__(self, cfg: ServiceConfig | None = None):
        self.cfg = cfg or ServiceConfig()
        self.defaults = self.cfg.defaults
        self.phase = Phase.IDLE
        self.slots = {name: _ArmSlot() for name in ARM_NAMES}
        self.coupling: CouplingConfig | None = None
        self.coupling_enabled = False
        self.t_sim = 0.0
        self._tick_count = 0
        self._seq = 0
        self._hello_seen = False

    # -- frame ingress ------------------------------------------------------

    def handle_frame(self, raw) -> list[dict]:
        """Process one wire message; always returns ack/error frames."""
        self._seq += 1
        frame_id = self._seq
        try:
            frame = json.loads(raw)
        except (TypeError, ValueError):
            return [self._error("bad_json", "message is not valid JSON", frame_id)]
        if not isinstance(frame, dict) or "type" not in frame:
            return [self._error("bad_frame", "frame must be an object with a type",
                                frame_id)]
        if "id" in frame and isinstance(frame["id"], (int, str)):
            frame_id = frame["id"]
        kind = frame["type"]
        handler = getattr(self, f"_on_{kind}", None)
        if handler is None:
            return [self._error("bad_frame", f"unknown frame type {kind!r}", frame_id)]
        try:
            extra = handler(frame) or []
            return [{"type": "ack", "id": frame_id}] + extra
        except _FrameError as exc:
            return [self._error(exc.code, exc.msg, frame_id)]
        except Exception as exc:  # totality: a session never dies on input
            return [self._error("internal", str(exc), frame_id)]

    def _error(self, code: str, msg: str, frame_id) -> dict:
        return {"type": "error", "code": code, "msg": msg, "id": frame_id}

    def _arm_name(self, frame) -> str:
        name = frame.get("arm", "left")
        if name not in ARM_NAMES:
            raise _FrameError("bad_value", f"unknown arm {name!r}")
        return name

    def _vector(self, frame, key: str) -> np.ndarray:
        value = frame.get(key)
        if not isinstance(value, (list, tuple)) or not value:
            raise _FrameError("bad_value", f"{key} must be a non-empty array")
        try:
            vec = np.asarray([float(v) for v in value])
        except (TypeError, ValueError):
            raise _FrameError("bad_value", f"{key} must hold numbers")
        if not np.all(np.isfinite(vec)):
            raise _FrameError("bad_value", f"{key} must be finite")
        return vec

    def _transition(self, target: Phase) -> None:
        has_model = any(s.model is not None for s in self.slots.values())
        try:
            check_transition(self.phase, target, has_model)
        except ValueError as exc:
            raise _FrameError("bad_phase", str(exc))
        self.phase = target

    # -- client frame handlers ---------------------------------------------

    def _on_hello(self, frame):
        version = frame.get("version", PROTOCOL_VERSION)
        if version != PROTOCOL_VERSION:
            raise _FrameError("version", f"server speaks version {PROTOCOL_VERSION}")
        self._hello_seen = True

    def _on_config(self, frame):
        if self.phase is not Phase.IDLE:
            raise _FrameError("bad_phase", "config changes are only allowed while idle")
        from dataclasses import fields, replace

        known = {f.name for f in fields(Defaults)}
        updates = {k: v for k, v in frame.items() if k not in ("type", "id")}
        unknown = set(updates) - known
        if unknown:
            raise _FrameError("bad_value", f"unknown config keys {sorted(unknown)}")
        try:
            for key, value in updates.items():
                coerced = str(value) if key == "mode" else float(value)
                self.defaults = replace(self.defaults, **{key: coerced})
            self.defaults.kernel_params()  # validate eagerly
        except (TypeError, ValueError) as exc:
            raise _FrameError("bad_value", str(exc))

    def _on_start_demo(self, frame):
        self._transition(Phase.PASSIVE_TEACHING)
        name = self._arm_name(frame)
        slot = self.slots[name]
        slot.recording = True
        slot.demo_points, slot.demo_times = [], []

    def _on_demo_point(self, frame):
        if self.phase is not Phase.PASSIVE_TEACHING:
            raise _FrameError("bad_phase", "demo points are only accepted while recording")
        name = self._arm_name(frame)
        slot = self.slots[name]
        if not slot.recording:
            raise _FrameError("bad_phase", f"arm {name} is not recording")
        x = self._vector(frame, "x")
        t = frame.get("t")
        if not isinstance(t, (int, float)) or not math.isfinite(t):
            raise _FrameError("bad_value", "t must be a finite number")
        if slot.demo_times and t <= slot.demo_times[-1]:
            raise _FrameError("bad_value",
                              f"timestamp {t} does not advance past {slot.demo_times[-1]}")
        slot.demo_points.append(x)
        slot.demo_times.append(float(t))

    def _on_end_demo(self, frame):
        self._transition(Phase.IDLE)
        recorded = [(name, slot) for name, slot in self.slots.items() if slot.recording]
        for _, slot in recorded:
            slot.recording = False
        problems = []
        for name, slot in recorded:
            try:
                slot.demo = Demonstration(np.vstack(slot.demo_points),
                                          np.asarray(slot.demo_times),
                                          max_gap=self.defaults.max_gap)
            except ValueError as exc:
                problems.append(f"arm {name}: {exc}")
        if problems:
            raise _FrameError("bad_value", "; ".join(problems))

    def _on_fit(self, frame):
        if self.phase is not Phase.IDLE:
            raise _FrameError("bad_phase", "fit is only allowed while idle")
        infos = []
        for name, slot in self.slots.items():
            if slot.demo is None:
                continue
            slot.model = fit_from_demonstration(slot.demo, self.defaults.kernel_params())
            slot.arm = ArmState(x=slot.model.states[0, :-1].copy(),
                                v=np.zeros(slot.model.dim), t_b=0.0)
            infos.append(self._model_info(name))
        if not infos:
            raise _FrameError("no_model", "no demonstration to fit from")
        return infos

    def _model_info(self, name: str) -> dict:
        model = self.slots[name].model
        return {"type": "model_info", "arm": name,
                "n_nodes": int(model.n_nodes), "goal": model.goal.tolist()}

    def _on_start_exec(self, frame):
        self._transition(Phase.EXECUTING)
        self._reset_time_beliefs()

    def _on_start_correct(self, frame):
        self._transition(Phase.ACTIVE_TEACHING)
        self._reset_time_beliefs()
        for slot in self.slots.values():
            slot.correction_xs, slot.correction_ts = [], []

    def _reset_time_beliefs(self):
        for slot in self.slots.values():
            if slot.arm is not None:
                slot.arm = ArmState(x=slot.arm.x, v=np.zeros(slot.arm.dim), t_b=0.0)

    def _on_drag(self, frame):
        if self.phase not in (Phase.EXECUTING, Phase.ACTIVE_TEACHING):
            raise _FrameError("bad_phase", "drags only act on a running arm")
        name = self._arm_name(frame)
        slot = self.slots[name]
        if slot.model is None:
            raise _FrameError("no_model", f"arm {name} has no model")
        pointer = self._vector(frame, "pointer_x")
        if pointer.shape[0] != slot.model.dim:
            raise _FrameError("bad_value", "pointer dimension does not match the model")
        slot.drag.active = True
        slot.drag.pointer = pointer
        slot.drag.k_drag = self.defaults.drag_stiffness

    def _on_drag_end(self, frame):
        name = self._arm_name(frame)
        slot = self.slots[name]
        slot.drag.active = False
        slot.drag.pointer = None
        if self.phase is Phase.ACTIVE_TEACHING:
            return [self._refit_from_correction(name)]

    def _refit_from_correction(self, name: str) -> dict:
        # batch refit: the visited stream is appended only when a drag ends
        slot = self.slots[name]
        if len(slot.correction_xs) < 2:
            raise _FrameError("bad_value", "correction too short to refit from")
        session = Demonstration(np.vstack(slot.correction_xs),
                                np.asarray(slot.correction_ts),
                                max_gap=self.defaults.max_gap)
        slot.model = append_session(slot.model, session)
        slot.correction_xs, slot.correction_ts = [], []
        return self._model_info(name)

    def _on_reset_tb(self, frame):
        name = self._arm_name(frame) if "arm" in frame else None
        for slot_name, slot in self.slots.items():
            if slot.arm is not None and (name is None or slot_name == name):
                slot.arm = ArmState(x=slot.arm.x, v=slot.arm.v, t_b=0.0)

    def _on_set_coupling(self, frame):
        enabled = bool(frame.get("enabled", True))
        if not enabled:
            self.coupling_enabled = False
            return
        dims = {s.model.dim for s in self.slots.values() if s.model is not None}
        dim = dims.pop() if len(dims) == 1 else 2
        stiffness = float(frame.get("stiffness", self.defaults.coupling_stiffness))
        cap = float(frame.get("cap", self.defaults.rel_error_cap))
        offset = (self._vector(frame, "rel_offset") if "rel_offset" in frame
                  else np.zeros(dim))
        if stiffness < 0 or cap <= 0:
            raise _FrameError("bad_value", "coupling stiffness/cap out of range")
        from .coupling import critical_coupling

        cfg = critical_coupling(stiffness * np.eye(dim), offset, cap)
        self.coupling = saturate_coupling(cfg, self.defaults.limits(dim))
        self.coupling_enabled = True

    def _on_stop(self, frame):
        self._transition(Phase.IDLE)
        for slot in self.slots.values():
            slot.drag.active = False
            slot.drag.pointer = None

    # -- simulation ---------------------------------------------------------

    def _active_arms(self) -> list[str]:
        return [n for n in ARM_NAMES
                if self.slots[n].model is not None and self.slots[n].arm is not None]

    def tick(self) -> dict | None:
        """Advance one simulation step; returns a tick frame on broadcast ticks."""
        if self.phase not in (Phase.EXECUTING, Phase.ACTIVE_TEACHING):
            return None
        names = self._active_arms()
        if not names:
            return None
        forces = {}
        for name in names:
            slot = self.slots[name]
            limits = self.defaults.limits(slot.model.dim)
            forces[name] = drag_to_force(slot.drag, slot.arm, limits.f_max)
        if self.coupling_enabled and self.coupling is not None and len(names) == 2:
            dual = DualArmState(self.slots["left"].arm, self.slots["right"].arm)
            c_left, c_right = coupling_forces(dual, self.coupling)
            forces["left"] = forces["left"] + c_left
            forces["right"] = forces["right"] + c_right
        self.t_sim += self.cfg.dt
        for name in names:
            slot = self.slots[name]
            dim = slot.model.dim
            gains = self.defaults.gains(dim)
            limits = self.defaults.limits(dim)
            sim = SimConfig(mass=self.defaults.mass, dt=self.cfg.dt)
            slot.arm, cmd, record = execute_tick(
                slot.model, slot.arm, gains, limits, sim, forces[name], now=self.t_sim)
            arm_tick = record.arms[0]
            slot.last_f_ext = arm_tick.f_ext
            slot.last_sigma = arm_tick.sigma
            slot.last_scale = regulation_scale(arm_tick.sigma, limits.sigma_tr)
            slot.last_attractor = arm_tick.attractor
            if self.phase is Phase.ACTIVE_TEACHING:
                slot.correction_xs.append(slot.arm.x.copy())
                slot.correction_ts.append(len(slot.correction_ts) * self.cfg.dt
                                          + self.cfg.dt)
        self._tick_count += 1
        if self._tick_count % self.cfg.broadcast_stride != 0:
            return None
        return self._tick_frame(names)

    def _tick_frame(self, names) -> dict:
        arms = []
        for name in names:
            slot = self.slots[name]
            arms.append({
                "arm": name,
                "x": slot.arm.x.tolist(),
                "v": slot.arm.v.tolist(),
                "attractor": slot.last_attractor.tolist(),
                "sigma": slot.last_sigma,
                "k_scale": slot.last_scale,
                "t_b": slot.arm.t_b,
                "f_ext": slot.last_f_ext.tolist(),
            })
        return {"type": "tick", "t": self.t_sim, "phase": self.phase.value, "arms": arms}


def create_app(cfg: ServiceConfig | None = None) -> FastAPI:
    """FastAPI app with one session per /session WebSocket connection."""
    cfg = cfg or ServiceConfig()
    app = FastAPI(title="graphmp teaching service")

    @app.websocket("/session")
    async def session_endpoint(ws: WebSocket):
        await ws.accept()
        session = Session(cfg)
        stop = asyncio.Event()

        async def pump():
            pace = cfg.dt if cfg.realtime else 0.0
            while not stop.is_set():
                frame = session.tick()
                if frame is not None:
                    await ws.send_text(json.dumps(frame))
                await asyncio.sleep(pace)

        pump_task = asyncio.create_task(pump())
        try:
            while True:
                message = await ws.receive()
                if message["type"] == "websocket.disconnect":
                    break
                raw = message.get("text")
                if raw is None:
                    raw = (message.get("bytes") or b"").decode("utf-8", errors="replace")
                for out in session.handle_frame(raw):
                    await ws.send_text(json.dumps(out))
        except WebSocketDisconnect:
            pass
        finally:
            stop.set()
            pump_task.cancel()
            try:
                await pump_task
            except (asyncio.CancelledError, Exception):
                pass

    return app
