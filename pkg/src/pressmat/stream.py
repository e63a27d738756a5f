"""Live streaming service: frame source -> WebSocket clients.

One acquisition task drives the source at its real-time rate and fans out to
any number of clients over JSON text messages.  Each client has a bounded
outbound queue with a drop-oldest policy for ``field`` messages; ``hello``,
``report`` and ``status`` messages are never dropped, so a slow viewer can
lose display frames but never a capture result, and the acquisition tick is
isolated from client backpressure.

Message schema (protocol_version 1) is documented with examples in
docs/stream-schema.md.

    server -> client: hello, field, report, status
    client -> server: set_roi, capture, set_display_rate, subscribe
"""

from __future__ import annotations

import asyncio
import base64
import collections
import hashlib
import json
import time
from dataclasses import dataclass

import numpy as np

from .calibration import CalibrationCurve
from .frames import RawFrame
from .geometry import SensorLayout, reconstruct_grid
from .metrics import RegionError, RegionSet, full_report
from .pipeline import field_to_json, process_capture
from .simulate import MatSimulator
from .store import SessionWriter

PROTOCOL_VERSION = 1
CLIENT_QUEUE_LIMIT = 32
DEFAULT_DISPLAY_RATE = 20.0  # Hz, <= 30 by contract
CAPTURE_FRAMES = 50


class SimulatorSource:
    """Frames straight from a MatSimulator, on its exact simulated clock."""

    def __init__(self, simulator: MatSimulator, n_frames: int | None = None):
        self.simulator = simulator
        self.rate_hz = simulator.rate_hz
        self.layout = simulator.layout
        self._n_frames = n_frames
        self._index = 0

    def next_frame(self) -> RawFrame | None:
        if self._n_frames is not None and self._index >= self._n_frames:
            return None
        frame = self.simulator.scan_frame(self.simulator.frame_time(self._index))
        self._index += 1
        return frame


class ReplaySource:
    """Frames from a recorded session, optionally looping."""

    def __init__(self, frames, layout: SensorLayout, rate_hz: float = 155.0,
                 loop: bool = False, diagnostics: dict | None = None):
        self._frames = list(frames)
        if not self._frames:
            raise ValueError("replay source needs at least one frame")
        self.layout = layout
        self.rate_hz = rate_hz
        self.loop = loop
        self.diagnostics = diagnostics  # decode counters from the session read
        self._index = 0

    def next_frame(self) -> RawFrame | None:
        if self._index >= len(self._frames):
            if not self.loop:
                return None
            self._index = 0
        frame = self._frames[self._index]
        self._index += 1
        return frame


class TcpByteSource:
    """Frames decoded from a raw TCP byte stream (a `simulate --listen` or
    real device link).  The remote end paces the stream, so the acquisition
    loop consumes this source without its own wall-clock tick."""

    def __init__(self, host: str, port: int, layout: SensorLayout | None = None,
                 rate_hz: float = 155.0):
        self.host = host
        self.port = port
        self.layout = layout or SensorLayout()
        self.rate_hz = rate_hz
        self._decoder = None
        self._reader = None
        self._pending: collections.deque = collections.deque()

    @property
    def diagnostics(self) -> dict | None:
        return self._decoder.diagnostics.as_dict() if self._decoder else None

    async def open(self) -> None:
        from .protocol import StreamDecoder

        self._reader, self._writer = await asyncio.open_connection(self.host, self.port)
        self._decoder = StreamDecoder()

    async def async_next_frame(self) -> RawFrame | None:
        if self._reader is None:
            await self.open()
        while not self._pending:
            chunk = await self._reader.read(65536)
            if not chunk:
                return None
            self._pending.extend(self._decoder.feed(chunk))
        return self._pending.popleft()


class _Client:
    """Outbound side of one connection: a bounded deque drained by a writer
    task.  Fields are droppable, everything else is kept regardless."""

    def __init__(self, connection):
        self.connection = connection
        self.queue: collections.deque = collections.deque()
        self.wakeup = asyncio.Event()
        self.dropped_fields = 0
        self.mode = "processed"
        self.display_rate = None  # None = server default
        self.last_field_sent = 0.0

    def push(self, message: dict) -> None:
        if len(self.queue) >= CLIENT_QUEUE_LIMIT:
            for i, queued in enumerate(self.queue):
                if queued["type"] == "field":
                    del self.queue[i]
                    self.dropped_fields += 1
                    break
            else:
                if message["type"] == "field":
                    self.dropped_fields += 1
                    return  # nothing droppable queued; drop the new field
        self.queue.append(message)
        self.wakeup.set()

    async def writer(self) -> None:
        while True:
            while not self.queue:
                self.wakeup.clear()
                await self.wakeup.wait()
            message = self.queue.popleft()
            await self.connection.send(json.dumps(message))


def _b64_f32(values: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(values, dtype="<f4").tobytes()).decode("ascii")


@dataclass
class ServeOptions:
    display_rate_hz: float = DEFAULT_DISPLAY_RATE
    wallclock: bool = True
    record_path: str | None = None
    status_interval_s: float = 1.0
    ui_root: str | None = None  # serve static files for non-WS requests


class StreamServer:
    """Bridges one frame source to many WebSocket clients."""

    def __init__(self, source, curve: CalibrationCurve,
                 regions: RegionSet | None = None,
                 options: ServeOptions | None = None):
        self.source = source
        self.curve = curve
        self.layout = source.layout
        self.regions = regions
        self.options = options or ServeOptions()
        self.clients: set[_Client] = set()
        self.tick_times: list[float] = []  # perf_counter stamps, for jitter checks
        self._capture_id = 0
        self._captures: list[dict] = []
        self._capture_buffer: list[RawFrame] | None = None
        self._capture_want = 0
        self._frames_seen = 0
        self._ended = False
        self._last_field_time = 0.0
        self._writer = None
        self._ws_server = None
        self._roi_version = 0

    # -- lifecycle -------------------------------------------------------------

    async def serve(self, host: str = "127.0.0.1", port: int = 0):
        """Bind and run until the source ends or the task is cancelled.
        Returns once the server socket is listening; use ``wait_done``."""
        from websockets.asyncio.server import serve as ws_serve

        if self.options.record_path:
            self._writer = SessionWriter(self.options.record_path, self.session_header())
        process_request = _static_responder(self.options.ui_root) if self.options.ui_root else None
        self._ws_server = await ws_serve(
            self._handle_client, host, port,
            process_request=process_request,
        )
        self._acquire_task = asyncio.create_task(self._acquire_loop())
        self._status_task = asyncio.create_task(self._status_loop())
        return self

    @property
    def port(self) -> int:
        return self._ws_server.sockets[0].getsockname()[1]

    async def wait_done(self) -> None:
        await self._acquire_task

    async def close(self) -> None:
        for task in (self._acquire_task, self._status_task):
            task.cancel()
            try:
                await task
            except asyncio.CancelledError:
                pass
        if self._writer is not None:
            self._finish_recording()
        self._ws_server.close()
        await self._ws_server.wait_closed()

    def session_header(self) -> dict:
        return {
            "layout": self.layout.to_json(),
            "calibration": self.curve.to_json(),
            "source": type(self.source).__name__,
            "rate_hz": self.source.rate_hz,
        }

    def _finish_recording(self) -> None:
        annotations = {"captures": self._captures}
        if self.regions is not None:
            annotations["regions"] = self.regions.to_json()
        self._writer.write_annotations(annotations)
        self._writer.close()
        self._writer = None

    # -- acquisition ------------------------------------------------------------

    async def _acquire_loop(self) -> None:
        period = 1.0 / self.source.rate_hz
        next_tick = time.perf_counter()
        remote_paced = hasattr(self.source, "async_next_frame")
        while True:
            if remote_paced:
                frame = await self.source.async_next_frame()
            else:
                if self.options.wallclock:
                    now = time.perf_counter()
                    if now < next_tick:
                        await asyncio.sleep(next_tick - now)
                    next_tick = max(next_tick + period, time.perf_counter() - 5 * period)
                else:
                    await asyncio.sleep(0)
                frame = self.source.next_frame()
            if frame is None:
                self._ended = True
                self.broadcast(self._status_message(level="info", note="end", end=True))
                return
            self.tick_times.append(time.perf_counter())
            self._frames_seen += 1
            if self._writer is not None:
                self._writer.write_frame(frame)
            self._on_frame(frame)

    def _on_frame(self, frame: RawFrame) -> None:
        if self._capture_buffer is not None:
            self._capture_buffer.append(frame)
            if len(self._capture_buffer) >= self._capture_want:
                frames, self._capture_buffer = self._capture_buffer, None
                self._emit_report(frames)
        now = time.perf_counter()
        if now - self._last_field_time >= 1.0 / self.options.display_rate_hz:
            self._last_field_time = now
            self.broadcast_field(frame)

    def broadcast_field(self, frame: RawFrame) -> None:
        if not self.clients:
            return
        cached: dict[str, dict] = {}
        for client in self.clients:
            mode = client.mode
            if mode not in cached:
                cached[mode] = self._field_message(frame, mode)
            client.push(cached[mode])

    def _field_message(self, frame: RawFrame, mode: str) -> dict:
        if mode == "raw":
            grid = reconstruct_grid(self.layout, frame.counts.astype(float))
            units = "counts"
        else:
            kpa, _ = self.curve.apply(frame)
            grid = reconstruct_grid(self.layout, kpa)
            units = "kPa"
        return {
            "type": "field",
            "protocol_version": PROTOCOL_VERSION,
            "seq": frame.seq,
            "timestamp_us": frame.timestamp_us,
            "shape": list(grid.values.shape),
            "pitch_cm": grid.pitch,
            "origin_cm": list(grid.origin),
            "units": units,
            "dtype": "<f4",
            "values_b64": _b64_f32(grid.values),
        }

    def _emit_report(self, frames: list[RawFrame]) -> None:
        self._capture_id += 1
        field = process_capture(frames, self.curve, self.layout)
        message = {
            "type": "report",
            "protocol_version": PROTOCOL_VERSION,
            "capture_id": self._capture_id,
            "n_frames": len(frames),
            "first_seq": frames[0].seq,
            "field": field_to_json(field),
        }
        if self.regions is not None:
            message["report"] = full_report(field, self.regions).to_json()
        else:
            message["report"] = None
            message["note"] = "no regions set; metrics skipped"
        self._captures.append({
            "capture_id": self._capture_id,
            "first_seq": frames[0].seq,
            "n_frames": len(frames),
        })
        self.broadcast(message)

    # -- client handling ---------------------------------------------------------

    async def _handle_client(self, connection) -> None:
        import websockets.exceptions

        client = _Client(connection)
        self.clients.add(client)
        client.push(self._hello_message())
        writer = asyncio.create_task(client.writer())
        try:
            async for text in connection:
                self._handle_message(client, text)
        except websockets.exceptions.ConnectionClosed:
            pass
        finally:
            writer.cancel()
            self.clients.discard(client)

    def _hello_message(self) -> dict:
        rows, cols = self.layout.grid_shape
        return {
            "type": "hello",
            "protocol_version": PROTOCOL_VERSION,
            "layout": self.layout.to_json(),
            "channels": self.layout.channel_count,
            "field_shape": [rows, cols],
            "calibration_id": hashlib.sha1(self.curve.dumps().encode()).hexdigest()[:12],
            "source_rate_hz": self.source.rate_hz,
            "display_rate_hz": self.options.display_rate_hz,
            "roi_set": self.regions is not None,
        }

    def _handle_message(self, client: _Client, text: str) -> None:
        try:
            message = json.loads(text)
            mtype = message.get("type")
        except json.JSONDecodeError:
            client.push(self._status_message(level="error", note="malformed JSON"))
            return
        if mtype == "set_roi":
            self._handle_set_roi(client, message)
        elif mtype == "capture":
            want = int(message.get("n_frames", CAPTURE_FRAMES))
            if self._capture_buffer is not None:
                client.push(self._status_message(level="warning", note="capture already pending"))
                return
            self._capture_want = max(1, want)
            self._capture_buffer = []
            client.push(self._status_message(level="info", note=f"capture started ({want} frames)"))
        elif mtype == "set_display_rate":
            hz = float(message.get("hz", DEFAULT_DISPLAY_RATE))
            self.options.display_rate_hz = min(max(hz, 0.1), 30.0)
            client.push(self._status_message(level="info", note="display rate updated"))
        elif mtype == "subscribe":
            mode = message.get("mode", "processed")
            if mode not in ("raw", "processed"):
                client.push(self._status_message(level="error", note=f"unknown mode {mode!r}"))
                return
            client.mode = mode
            client.push(self._status_message(level="info", note=f"subscribed: {mode}"))
        else:
            # Forward compatibility: ignore, but tell the client.
            client.push(self._status_message(
                level="warning", note=f"unknown message type {mtype!r} ignored"))

    def _handle_set_roi(self, client: _Client, message: dict) -> None:
        try:
            regions = RegionSet.from_json(message.get("regions", {}))
        except (RegionError, KeyError, TypeError, IndexError) as exc:
            client.push(self._status_message(
                level="error", note=f"roi rejected: {exc}; prior regions kept"))
            return
        self.regions = regions
        self._roi_version += 1
        client.push(self._status_message(level="info", note="roi-accepted"))

    # -- status -------------------------------------------------------------------

    def _status_message(self, level: str = "info", note: str | None = None,
                        end: bool = False) -> dict:
        ticks = self.tick_times[-int(2 * self.source.rate_hz):]
        fps = 0.0
        if len(ticks) >= 2 and ticks[-1] > ticks[0]:
            fps = (len(ticks) - 1) / (ticks[-1] - ticks[0])
        message = {
            "type": "status",
            "protocol_version": PROTOCOL_VERSION,
            "level": level,
            "fps": round(fps, 2),
            "frames": self._frames_seen,
            "clients": len(self.clients),
            "dropped_fields": sum(c.dropped_fields for c in self.clients),
            "roi_version": self._roi_version,
        }
        if note is not None:
            message["note"] = note
        if end:
            message["end"] = True
        diagnostics = getattr(self.source, "diagnostics", None)
        if diagnostics is not None:
            message["source_diagnostics"] = diagnostics
        return message

    async def _status_loop(self) -> None:
        while True:
            await asyncio.sleep(self.options.status_interval_s)
            if self._ended:
                return
            self.broadcast(self._status_message())

    def broadcast(self, message: dict) -> None:
        for client in list(self.clients):
            client.push(message)


def _static_responder(root: str):
    """Serve files under ``root`` for plain HTTP requests (the UI assets)."""
    import http
    from pathlib import Path

    from websockets.datastructures import Headers
    from websockets.http11 import Response

    base = Path(root).resolve()
    types = {".html": "text/html", ".js": "text/javascript", ".css": "text/css",
             ".map": "application/json", ".json": "application/json"}

    def responder(connection, request):
        if request.headers.get("Upgrade", "").lower() == "websocket":
            return None
        path = request.path.split("?", 1)[0]
        target = (base / path.lstrip("/")).resolve()
        if path in ("", "/"):
            target = base / "index.html"
        if not str(target).startswith(str(base)) or not target.is_file():
            return connection.respond(http.HTTPStatus.NOT_FOUND, "not found\n")
        body = target.read_bytes()
        headers = Headers([
            ("Content-Type", types.get(target.suffix, "application/octet-stream")),
            ("Content-Length", str(len(body))),
        ])
        return Response(http.HTTPStatus.OK, "OK", headers, body)

    return responder


async def run_server(source, curve, regions=None, options=None,
                     host="127.0.0.1", port=0) -> StreamServer:
    server = StreamServer(source, curve, regions, options)
    await server.serve(host, port)
    return server
