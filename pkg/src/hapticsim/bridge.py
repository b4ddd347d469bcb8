"""WebSocket bridge: JSON mirror of the kernel state for a browser UI.

The bridge publishes snapshots, force and proximity readouts at the publish
cadence and accepts stylus input (mouse-derived device poses), mode commands,
and recording commands. It never lets the UI compute physics: every displayed
number originates in a kernel message.

The server side of RFC 6455 is implemented here directly (handshake, masked
client frames, ping/pong, close) so it polls inside the same non-blocking
loop as the haptic server; nothing in the kernel ever waits on a browser.
Plain HTTP GETs on the same port serve the static UI bundle when a directory
is configured.

Message vocabulary (JSON, one object per WebSocket text frame):

  outbound: hello, snapshot, force, proximity, ack, trajectory, error
  inbound:  stylus {position[3], quaternion[4], button}
            mode {scale | frame | pivot | force_class | viewport_extent}
            record {action: arm|disarm|capture, mode, value}
"""

from __future__ import annotations

import base64
import hashlib
import json
import selectors
import socket
import struct
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .entities.solids import PivotMode
from .forcefield import ForceClass
from .mapping import FrameMode, ScaleMode, engage
from .runtime import Recorder, RunSetup, Session
from .transforms import Pose

WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
WS_MAX_PAYLOAD = 1 << 20
OUTBOX_CAP = 1 << 20

_CONTENT_TYPES = {".html": "text/html", ".js": "text/javascript",
                  ".css": "text/css", ".map": "application/json",
                  ".json": "application/json"}


def ws_accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + WS_GUID).encode()).digest()
    return base64.b64encode(digest).decode()


def encode_text_frame(payload: str) -> bytes:
    data = payload.encode("utf-8")
    return _encode_frame(0x1, data)


def _encode_frame(opcode: int, data: bytes) -> bytes:
    head = bytearray([0x80 | opcode])
    n = len(data)
    if n < 126:
        head.append(n)
    elif n < 65536:
        head.append(126)
        head += struct.pack(">H", n)
    else:
        head.append(127)
        head += struct.pack(">Q", n)
    return bytes(head) + data


class WsFrameDecoder:
    """Incremental decoder for client-to-server (masked) frames."""

    def __init__(self):
        self.buf = bytearray()
        self._fragments = bytearray()

    def feed(self, data: bytes) -> None:
        self.buf.extend(data)

    def frames(self):
        """Yield (opcode, payload) for each complete message."""
        while True:
            parsed = self._try_parse()
            if parsed is None:
                return
            opcode, fin, payload = parsed
            if opcode == 0x0:  # continuation
                self._fragments.extend(payload)
                if fin:
                    out = bytes(self._fragments)
                    self._fragments.clear()
                    yield (0x1, out)
            elif not fin:
                self._fragments = bytearray(payload)
            else:
                yield (opcode, payload)

    def _try_parse(self):
        buf = self.buf
        if len(buf) < 2:
            return None
        b0, b1 = buf[0], buf[1]
        fin = bool(b0 & 0x80)
        opcode = b0 & 0x0F
        masked = bool(b1 & 0x80)
        length = b1 & 0x7F
        pos = 2
        if length == 126:
            if len(buf) < pos + 2:
                return None
            (length,) = struct.unpack(">H", buf[pos:pos + 2])
            pos += 2
        elif length == 127:
            if len(buf) < pos + 8:
                return None
            (length,) = struct.unpack(">Q", buf[pos:pos + 8])
            pos += 8
        if length > WS_MAX_PAYLOAD:
            raise ValueError(f"websocket payload {length} exceeds cap")
        mask = b""
        if masked:
            if len(buf) < pos + 4:
                return None
            mask = bytes(buf[pos:pos + 4])
            pos += 4
        if len(buf) < pos + length:
            return None
        payload = bytes(buf[pos:pos + length])
        del buf[:pos + length]
        if masked:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        return opcode, fin, payload


class _WsClient:
    def __init__(self, sock: socket.socket):
        self.sock = sock
        self.http_buf = bytearray()
        self.handshaken = False
        self.decoder = WsFrameDecoder()
        self.outbox = bytearray()
        self.alive = True

    def queue_bytes(self, data: bytes) -> None:
        if len(self.outbox) + len(data) > OUTBOX_CAP:
            return  # drop for slow consumers; snapshots are disposable
        self.outbox.extend(data)

    def queue_json(self, obj: dict) -> None:
        self.queue_bytes(encode_text_frame(json.dumps(obj)))


class BridgeServer:
    """Non-blocking WebSocket (and static-file) endpoint for the UI."""

    def __init__(self, host: str = "127.0.0.1", port: int = 8765,
                 static_dir: str | None = None):
        self.listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self.listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self.listener.bind((host, port))
        self.listener.listen(8)
        self.listener.setblocking(False)
        self.endpoint = self.listener.getsockname()
        self.selector = selectors.DefaultSelector()
        self.selector.register(self.listener, selectors.EVENT_READ, data=None)
        self.clients: list[_WsClient] = []
        self.static_dir = Path(static_dir) if static_dir else None
        self.inbound: list[dict] = []

    def poll(self) -> list:
        """Service sockets without blocking; return inbound JSON commands."""
        self.inbound = []
        for key, mask in self.selector.select(timeout=0):
            if key.data is None:
                self._accept()
            else:
                self._read(key.data)
        for client in list(self.clients):
            self._write(client)
        return self.inbound

    def broadcast(self, obj: dict) -> None:
        frame = encode_text_frame(json.dumps(obj))
        for client in self.clients:
            if client.handshaken:
                client.queue_bytes(frame)

    def _accept(self) -> None:
        try:
            sock, _ = self.listener.accept()
        except BlockingIOError:
            return
        sock.setblocking(False)
        client = _WsClient(sock)
        self.clients.append(client)
        self.selector.register(sock, selectors.EVENT_READ, data=client)

    def _drop(self, client: _WsClient) -> None:
        client.alive = False
        try:
            self.selector.unregister(client.sock)
        except (KeyError, ValueError):
            pass
        client.sock.close()
        if client in self.clients:
            self.clients.remove(client)

    def _read(self, client: _WsClient) -> None:
        try:
            data = client.sock.recv(65536)
        except BlockingIOError:
            return
        except OSError:
            self._drop(client)
            return
        if not data:
            self._drop(client)
            return
        if not client.handshaken:
            client.http_buf.extend(data)
            self._try_handshake(client)
            return
        client.decoder.feed(data)
        try:
            for opcode, payload in client.decoder.frames():
                if opcode == 0x1:
                    try:
                        msg = json.loads(payload.decode("utf-8"))
                        if isinstance(msg, dict):
                            msg["_client"] = client
                            self.inbound.append(msg)
                    except (UnicodeDecodeError, json.JSONDecodeError):
                        client.queue_json({"type": "error", "text": "bad JSON"})
                elif opcode == 0x8:
                    client.queue_bytes(_encode_frame(0x8, b""))
                    self._write(client)
                    self._drop(client)
                    return
                elif opcode == 0x9:
                    client.queue_bytes(_encode_frame(0xA, payload))
        except ValueError as exc:
            client.queue_json({"type": "error", "text": str(exc)})
            self._drop(client)

    def _try_handshake(self, client: _WsClient) -> None:
        if b"\r\n\r\n" not in client.http_buf:
            if len(client.http_buf) > 65536:
                self._drop(client)
            return
        head, _, rest = bytes(client.http_buf).partition(b"\r\n\r\n")
        lines = head.decode("latin-1").split("\r\n")
        request = lines[0] if lines else ""
        headers = {}
        for line in lines[1:]:
            name, _, value = line.partition(":")
            headers[name.strip().lower()] = value.strip()

        if "websocket" in headers.get("upgrade", "").lower():
            key = headers.get("sec-websocket-key")
            if not key:
                self._drop(client)
                return
            response = ("HTTP/1.1 101 Switching Protocols\r\n"
                        "Upgrade: websocket\r\n"
                        "Connection: Upgrade\r\n"
                        f"Sec-WebSocket-Accept: {ws_accept_key(key)}\r\n\r\n")
            client.queue_bytes(response.encode("latin-1"))
            client.handshaken = True
            client.http_buf.clear()
            if rest:
                client.decoder.feed(rest)
            return

        # plain HTTP: serve the static bundle if configured
        path = request.split(" ")[1] if len(request.split(" ")) > 1 else "/"
        self._serve_static(client, path)

    def _serve_static(self, client: _WsClient, path: str) -> None:
        body = b"not found"
        status = "404 Not Found"
        ctype = "text/plain"
        if self.static_dir is not None:
            rel = "index.html" if path in ("/", "") else path.lstrip("/")
            target = (self.static_dir / rel).resolve()
            if target.is_file() and str(target).startswith(str(self.static_dir.resolve())):
                body = target.read_bytes()
                status = "200 OK"
                ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        response = (f"HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\n"
                    f"Content-Length: {len(body)}\r\nConnection: close\r\n\r\n")
        client.queue_bytes(response.encode("latin-1") + body)
        self._write(client)
        self._drop(client)

    def _write(self, client: _WsClient) -> None:
        if not client.outbox or not client.alive:
            return
        try:
            sent = client.sock.send(client.outbox)
            del client.outbox[:sent]
        except BlockingIOError:
            pass
        except OSError:
            self._drop(client)

    def close(self) -> None:
        for client in list(self.clients):
            self._drop(client)
        try:
            self.selector.unregister(self.listener)
        except (KeyError, ValueError):
            pass
        self.listener.close()
        self.selector.close()


# ---------------------------------------------------------------------------
# Bridge session: kernel loop + command handling
# ---------------------------------------------------------------------------

SCALE_NAMES = ("rough", "medium", "fine", "screen_adaptive")
CLASS_NAMES = {"constant_contact": ForceClass.CONSTANT_CONTACT,
               "penetration_proportional": ForceClass.PENETRATION_PROPORTIONAL,
               "spring_damper": ForceClass.SPRING_DAMPER}


class BridgeSession:
    """A live kernel session steered through a BridgeServer."""

    def __init__(self, setup: RunSetup, server: BridgeServer):
        self.session = Session(setup)
        self.server = server
        self.session.add_observer(self.server.broadcast)
        self.tick_index = 0

    @property
    def core(self):
        return self.session.core

    def hello(self) -> dict:
        spec = self.core.device_spec
        return {
            "type": "hello",
            "version": 1,
            "entities": [{"id": e.id, "kind": e.kind,
                          "shapes": [s.vertices.tolist() for s in e.shapes]}
                         for e in self.core.entities.values()],
            "driven": self.core.driver.entity_id,
            "device": {
                "workspace_extents": [float(c) for c in spec.workspace_extents],
                "position_resolution": spec.position_resolution,
                "peak_force": spec.peak_force,
                "continuous_force": spec.continuous_force,
                "haptic_rate": spec.haptic_rate,
            },
            "modes": self._mode_state(),
        }

    def _mode_state(self) -> dict:
        mapping = self.core.mapping
        pivot = getattr(self.core.driver, "pivot", None)
        return {
            "scale": mapping.scale_mode.kind,
            "frame": mapping.frame_mode.kind,
            "pivot": pivot.kind if pivot is not None else None,
            "force_class": self.core.force_class.value,
            "viewport_extent": self.core.viewport_extent,
            "recording": self.core.recorder is not None and self.core.recorder.armed,
        }

    def tick(self) -> None:
        self.session.tick(self.tick_index)
        self.tick_index += 1
        for msg in self.server.poll():
            self.handle(msg)

    @property
    def t(self) -> float:
        return self.tick_index / self.session.rates.haptic_hz

    # -- inbound commands -----------------------------------------------------

    def handle(self, msg: dict) -> None:
        client = msg.pop("_client", None)
        kind = msg.get("type")
        try:
            if kind == "stylus":
                self._handle_stylus(msg)
            elif kind == "mode":
                self._handle_mode(msg, client)
            elif kind == "record":
                self._handle_record(msg, client)
            elif kind == "hello":
                if client is not None:
                    client.queue_json(self.hello())
            else:
                raise ValueError(f"unknown command type {kind!r}")
        except (ValueError, KeyError, RuntimeError) as exc:
            if client is not None:
                client.queue_json({"type": "error", "command": kind, "text": str(exc)})

    def _handle_stylus(self, msg: dict) -> None:
        pose = Pose(position=np.asarray(msg["position"], dtype=float),
                    orientation=np.asarray(msg.get("quaternion", (1.0, 0, 0, 0)), dtype=float))
        self.session.device.set_external_pose(pose, bool(msg.get("button", False)))

    def _reanchor(self) -> None:
        """Re-anchor the clutch after a mode change so the entity never jumps."""
        core = self.core
        if core.mapping.engaged and self.session.device.last_state is not None:
            core.mapping = engage(core.mapping, self.session.device.last_state,
                                  core.driver.anchor_pose(core))

    def _handle_mode(self, msg: dict, client) -> None:
        core = self.core
        if "scale" in msg:
            name = msg["scale"]
            if name not in SCALE_NAMES:
                raise ValueError(f"unknown scale {name!r}")
            core.mapping = replace(core.mapping,
                                   scale_mode=ScaleMode(kind=name, levels=core.mapping.scale_mode.levels))
            self._reanchor()
        if "frame" in msg:
            name = msg["frame"]
            if name == "world":
                frame_mode = FrameMode.world()
            elif name == "screen":
                frame_mode = FrameMode.screen()
            elif isinstance(name, dict) and "user" in name:
                from .transforms import pose_from_dict
                frame_mode = FrameMode.user(pose_from_dict(name["user"]))
            else:
                raise ValueError(f"unknown frame {name!r}")
            core.mapping = replace(core.mapping, frame_mode=frame_mode)
            self._reanchor()
        if "pivot" in msg:
            name = msg["pivot"]
            driver = core.driver
            if not hasattr(driver, "pivot"):
                raise ValueError("the driven entity has no pivot modes")
            if name == "self_origin":
                driver.pivot = PivotMode.self_origin()
            elif name == "geometric_center":
                driver.pivot = PivotMode.geometric_center()
            elif isinstance(name, dict) and "user_frame" in name:
                from .transforms import pose_from_dict
                driver.pivot = PivotMode.user(pose_from_dict(name["user_frame"]))
            else:
                raise ValueError(f"unknown pivot {name!r}")
            self._reanchor()
        if "force_class" in msg:
            name = msg["force_class"]
            if name not in CLASS_NAMES:
                raise ValueError(f"unknown force class {name!r}")
            core.force_class = CLASS_NAMES[name]
        if "viewport_extent" in msg:
            extent = float(msg["viewport_extent"])
            if extent <= 0:
                raise ValueError("viewport extent must be positive")
            core.viewport_extent = extent
        if client is not None:
            client.queue_json({"type": "ack", "command": "mode", "modes": self._mode_state()})

    def _handle_record(self, msg: dict, client) -> None:
        core = self.core
        action = msg.get("action")
        if action == "arm":
            if core.recorder is not None and core.recorder.armed:
                raise RuntimeError("recorder already armed")
            recorder = Recorder(msg.get("mode", "manual"), msg.get("value"))
            recorder.arm(self.t, core.driver.entity_id, core.entity().pose)
            core.recorder = recorder
            self.session.recorder = recorder
        elif action == "capture":
            if core.recorder is None or not core.recorder.armed:
                raise RuntimeError("recorder not armed")
            core.recorder.capture(self.t, core.driver.entity_id, core.entity().pose)
        elif action == "disarm":
            if core.recorder is None or not core.recorder.armed:
                raise RuntimeError("recorder not armed")
            trajectory = core.recorder.disarm(self.t, core.driver.entity_id, core.entity().pose)
            core.recorder = None
            self.session.recorder = None
            payload = {
                "type": "trajectory",
                "mode": trajectory.mode,
                "value": trajectory.value,
                "frames": [{"t": f.t, "entity_id": f.entity_id,
                            "position": [float(c) for c in f.pose.position],
                            "quaternion": [float(c) for c in f.pose.orientation]}
                           for f in trajectory.frames],
            }
            if client is not None:
                client.queue_json(payload)
            else:
                self.server.broadcast(payload)
        else:
            raise ValueError(f"unknown record action {action!r}")
        if client is not None:
            client.queue_json({"type": "ack", "command": "record",
                               "recording": core.recorder is not None and core.recorder.armed})


def serve_bridge(setup: RunSetup, host: str = "127.0.0.1", port: int = 8765,
                 duration: float | None = None, static_dir: str | None = None) -> int:
    """Run a live wall-clock session exposed over the WebSocket bridge."""
    server = BridgeServer(host=host, port=port, static_dir=static_dir)
    live = BridgeSession(setup, server)
    hz = live.session.rates.haptic_hz
    period = 1.0 / hz
    print(f"bridge on ws://{server.endpoint[0]}:{server.endpoint[1]} ({hz} Hz kernel)")
    start = time.perf_counter()
    try:
        n = 0
        while duration is None or n < duration * hz:
            live.tick()
            n += 1
            deadline = start + n * period
            delay = deadline - time.perf_counter()
            if delay > 0:
                time.sleep(delay)
    except KeyboardInterrupt:
        pass
    finally:
        live.session.close()
        server.close()
    return 0
