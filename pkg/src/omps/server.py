"""Live steering server: one simulation session per connection, JSON
commands in, decimated frames out.

Protocol: text frames carrying JSON with a `type` discriminator.  The
server opens with {"type":"hello","proto":1}.  Commands: configure, start,
pause, resume, set_pump, add_beam, remove_beam, snapshot_request,
shutdown.  Frames carry base64 little-endian f32 arrays, at most 512
samples and 30 frames per second.
"""

from __future__ import annotations

import asyncio
import base64
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .config import ConfigError, RunConfig, parse_config, preset
from .field import Beam, DivergedError

PROTO_VERSION = 1
FRAME_INTERVAL = 1.0 / 30.0
MAX_SAMPLES = 512
DEFAULT_TAU_RATE = 25.0


def _b64_f32(values: np.ndarray) -> str:
    return base64.b64encode(
        np.ascontiguousarray(values, dtype="<f4").tobytes()).decode("ascii")


def decimate(values: np.ndarray, factor: int, how: str) -> np.ndarray:
    """Reduce a profile by an integer factor, max-pooling or averaging.

    The tail is padded with the last sample so peaks at the edge survive.
    """
    if factor <= 1:
        return values
    n = values.size
    m = math.ceil(n / factor)
    padded = np.concatenate([values, np.repeat(values[-1:], m * factor - n)])
    blocks = padded.reshape(m, factor)
    return blocks.max(axis=1) if how == "max" else blocks.mean(axis=1)


class CommandRejected(ValueError):
    """Command refused; the session keeps running."""


@dataclass
class SessionBeam:
    beam: Beam
    beam_id: str


@dataclass
class Session:
    """One owned simulation plus its dynamic pump state.

    Commands mutate state between step batches only, so a command sequence
    applied at given τ boundaries reproduces the equivalent batch run.
    """

    config: RunConfig | None = None
    tau_rate: float = DEFAULT_TAU_RATE
    sim: object = None
    running: bool = False
    alive: bool = True
    beams: dict[str, Beam] = field(default_factory=dict)
    sent_grid: bool = False
    _steady_quiet: int = 0
    _last_profile: tuple | None = None

    def configure(self, payload: dict) -> None:
        if "preset" in payload:
            cfg = preset(payload["preset"])
        elif "config" in payload:
            cfg = parse_config(payload["config"], label="session")
        else:
            raise CommandRejected("configure needs 'preset' or 'config'")
        if "tau_rate" in payload:
            rate = float(payload["tau_rate"])
            if not 0.0 < rate <= 1000.0:
                raise CommandRejected("tau_rate out of range")
            self.tau_rate = rate
        self.config = cfg
        self.sim = None
        self.running = False
        self.beams.clear()
        self.sent_grid = False
        self._steady_quiet = 0
        self._last_profile = None

    def _ensure_sim(self):
        if self.config is None:
            raise CommandRejected("session is not configured")
        if self.sim is None:
            from .cli import build_sim
            self.sim = build_sim(self.config)

    def start(self) -> None:
        self._ensure_sim()
        self.running = True

    def _rebuild_schedule(self) -> None:
        base = self.config.schedule
        sched = replace(base, beams=base.beams + tuple(self.beams.values()))
        self.sim.schedule = sched
        self.sim._pump_key = None

    def set_pump(self, payload: dict) -> None:
        self._ensure_sim()
        try:
            e0 = float(payload["E0"])
            sigma_x = float(payload.get("sigma_x",
                                        self.config.schedule.sigma_x))
            new = replace(self.config.schedule, e0=e0, sigma_x=sigma_x)
        except (KeyError, ValueError) as exc:
            raise CommandRejected(f"bad set_pump: {exc}")
        self.config = replace(self.config, schedule=new)
        self._rebuild_schedule()

    def add_beam(self, payload: dict) -> None:
        self._ensure_sim()
        try:
            beam_id = str(payload["id"])
            x0 = float(payload["x0"])
            amplitude = float(payload["amplitude"])
            phase = float(payload.get("phase", 0.0))
            width = float(payload["sigma_b"])
            duration = float(payload["duration"])
        except (KeyError, ValueError) as exc:
            raise CommandRejected(f"bad add_beam: {exc}")
        if beam_id in self.beams:
            raise CommandRejected(f"beam id {beam_id!r} already in use")
        if duration <= 0:
            raise CommandRejected("beam duration must be positive")
        tau = self.sim.tau
        try:
            beam = Beam(amplitude=amplitude * complex(math.cos(phase),
                                                      math.sin(phase)),
                        center=x0, width=width,
                        tau_on=tau, tau_off=tau + duration)
        except ValueError as exc:
            raise CommandRejected(str(exc))
        self.beams[beam_id] = beam
        self._rebuild_schedule()

    def remove_beam(self, payload: dict) -> None:
        beam_id = str(payload.get("id", ""))
        if beam_id not in self.beams:
            raise CommandRejected(f"no beam with id {beam_id!r}")
        del self.beams[beam_id]
        if self.sim is not None:
            self._rebuild_schedule()

    def apply(self, command: dict) -> dict | None:
        """Apply one command; returns an extra reply to send, if any."""
        ctype = command.get("type")
        if ctype == "configure":
            self.configure(command)
        elif ctype == "start":
            self.start()
        elif ctype == "pause":
            self.running = False
        elif ctype == "resume":
            self._ensure_sim()
            self.running = True
        elif ctype == "set_pump":
            self.set_pump(command)
        elif ctype == "add_beam":
            self.add_beam(command)
        elif ctype == "remove_beam":
            self.remove_beam(command)
        elif ctype == "snapshot_request":
            self._ensure_sim()
            return self.snapshot_message()
        elif ctype == "shutdown":
            self.alive = False
            self.running = False
        else:
            raise CommandRejected(f"unknown command type {ctype!r}")
        return None

    def tick(self, wall_budget: float) -> int:
        """Advance by the integer step count the wall budget buys."""
        if not self.running or self.sim is None or wall_budget <= 0:
            return 0
        dtau = self.config.dtau
        steps = int(wall_budget * self.tau_rate / dtau + 1e-9)
        for _ in range(steps):
            self.sim.step(dtau)
        self._expire_beams()
        return steps

    def _expire_beams(self) -> None:
        tau = self.sim.tau
        dead = [k for k, b in self.beams.items() if b.tau_off <= tau]
        for k in dead:
            del self.beams[k]
        if dead:
            self._rebuild_schedule()

    def _update_steady(self, intensity, zgrid) -> bool:
        cur = (intensity, zgrid, self.sim.tau)
        if self._last_profile is not None:
            pi, pz, pt = self._last_profile
            dt = self.sim.tau - pt
            if dt > 0:
                rate = max(float(np.max(np.abs(intensity - pi))),
                           float(np.max(np.abs(zgrid - pz)))) / dt
                self._steady_quiet = self._steady_quiet + 1 \
                    if rate < self.config.tol_steady else 0
        self._last_profile = cur
        return self._steady_quiet >= 10

    def frame_message(self) -> dict:
        snap = self.sim.snapshot()
        n = snap.n_points
        factor = max(1, math.ceil(n / MAX_SAMPLES))
        intensity = decimate(snap.intensity, factor, "max")
        zgrid = decimate(snap.zgrid, factor, "mean")
        steady = self._update_steady(snap.intensity, snap.zgrid)
        msg = {
            "type": "frame",
            "tau": snap.tau,
            "decimation": factor,
            "intensity": _b64_f32(intensity),
            "Z": _b64_f32(zgrid),
            "steady": steady,
            "beams": [{"id": k, "x0": b.center,
                       "amplitude": abs(b.amplitude),
                       "phase": float(np.angle(b.amplitude)) if b.amplitude else 0.0,
                       "sigma_b": b.width, "tau_off": b.tau_off}
                      for k, b in self.beams.items()],
        }
        if not self.sent_grid:
            msg["xbar"] = _b64_f32(decimate(snap.xbar, factor, "mean"))
            self.sent_grid = True
        return msg

    def snapshot_message(self) -> dict:
        snap = self.sim.snapshot()
        return {
            "type": "snapshot",
            "tau": snap.tau,
            "n_mirrors": snap.n_mirrors,
            "points_per_mirror": snap.points_per_mirror,
            "xbar": _b64_f32(snap.xbar),
            "intensity": _b64_f32(snap.intensity),
            "Z": _b64_f32(snap.zgrid),
            "z": _b64_f32(snap.z),
            "v": _b64_f32(snap.v),
        }


def _apply_raw(session, raw) -> list[dict]:
    """Turn one wire message into replies; bad input yields an error reply."""
    try:
        command = json.loads(raw)
        if not isinstance(command, dict):
            raise CommandRejected("command must be a JSON object")
        extra = session.apply(command)
        replies = [{"type": "ok", "cmd": command.get("type")}]
        if extra is not None:
            replies.append(extra)
        return replies
    except (json.JSONDecodeError, CommandRejected, ConfigError,
            ValueError) as exc:
        return [{"type": "error", "message": str(exc)}]


async def run_session(ws, default_config: RunConfig | None) -> None:
    """Serve one connection until shutdown or disconnect.

    A reader task feeds incoming messages into a queue; the stepping loop
    drains it between batches, so commands never land mid-step.
    """
    import websockets

    session = Session(config=default_config)
    await ws.send(json.dumps({"type": "hello", "proto": PROTO_VERSION}))
    loop = asyncio.get_running_loop()
    inbox: asyncio.Queue = asyncio.Queue()

    async def reader():
        try:
            async for raw in ws:
                await inbox.put(raw)
        except websockets.ConnectionClosed:
            pass
        finally:
            await inbox.put(None)

    reader_task = asyncio.create_task(reader())
    next_frame = loop.time()
    try:
        while session.alive:
            while True:
                try:
                    raw = inbox.get_nowait()
                except asyncio.QueueEmpty:
                    break
                if raw is None:
                    session.alive = False
                    break
                for msg in _apply_raw(session, raw):
                    await ws.send(json.dumps(msg))
            if not session.alive:
                break
            try:
                session.tick(FRAME_INTERVAL)
            except DivergedError as exc:
                await ws.send(json.dumps({"type": "fatal", "message": str(exc)}))
                break
            now = loop.time()
            if session.running and now >= next_frame:
                await ws.send(json.dumps(session.frame_message()))
                next_frame = now + FRAME_INTERVAL
            if session.running:
                await asyncio.sleep(max(0.0, next_frame - loop.time()))
            else:
                await asyncio.sleep(0.02)
    except websockets.ConnectionClosed:
        pass
    finally:
        reader_task.cancel()
        await ws.close()


def _static_handler(static_dir):
    from http import HTTPStatus
    from pathlib import Path

    from websockets.datastructures import Headers
    from websockets.http11 import Response

    root = Path(static_dir).resolve()
    types = {".html": "text/html", ".js": "text/javascript",
             ".css": "text/css", ".map": "application/json",
             ".svg": "image/svg+xml"}

    def process_request(connection, request):
        if "Upgrade" in request.headers:
            return None
        path = request.path.split("?", 1)[0]
        if path.endswith("/"):
            path += "index.html"
        target = (root / path.lstrip("/")).resolve()
        if not target.is_relative_to(root) or not target.is_file():
            return connection.respond(HTTPStatus.NOT_FOUND, "not found\n")
        body = target.read_bytes()
        ctype = types.get(target.suffix, "application/octet-stream")
        headers = Headers([("Content-Type", ctype),
                           ("Content-Length", str(len(body)))])
        return Response(HTTPStatus.OK, "OK", headers, body)

    return process_request


async def serve_async(default_config, host="127.0.0.1", port=8765,
                      static_dir=None, max_sessions=8, ready=None):
    """Run the server until cancelled; `ready` (an asyncio.Event) fires
    once the socket is listening."""
    from websockets.asyncio.server import serve

    gate = asyncio.Semaphore(max_sessions)

    async def handler(ws):
        if gate.locked():
            await ws.send(json.dumps(
                {"type": "error", "message": "server is at max sessions"}))
            await ws.close()
            return
        async with gate:
            await run_session(ws, default_config)

    kwargs = {}
    if static_dir:
        kwargs["process_request"] = _static_handler(static_dir)
    async with serve(handler, host, port, **kwargs) as server:
        if ready is not None:
            ready.set()
        await server.serve_forever()


def serve_forever(default_config, host="127.0.0.1", port=8765,
                  static_dir=None, max_sessions=8) -> int:
    print(f"listening on ws://{host}:{port}"
          + (f", serving {static_dir}" if static_dir else ""))
    try:
        asyncio.run(serve_async(default_config, host=host, port=port,
                                static_dir=static_dir,
                                max_sessions=max_sessions))
    except KeyboardInterrupt:
        pass
    return 0
