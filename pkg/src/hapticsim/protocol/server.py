"""Non-blocking TCP server wrapping the haptic loop.

The server never waits on the network inside a tick: socket readiness is
polled with a zero timeout, at most one inbound message is processed and one
outbound write attempted per tick and connection, and a stalled, flooding, or
absent client costs the loop nothing. One simulation client is served at a
time; extra connections are greeted and kept as observers of nothing (they
may still query poses)."""

from __future__ import annotations

import selectors
import socket
import time

from ..forcefield import ForceClass, ForceCommand
from .codec import (
    EngageSelect,
    ErrorMessage,
    GetStylusPose,
    Hello,
    Release,
    SceneSnapshot,
    SetForce,
    SetFrameMode,
    SetScaleMode,
    StreamDecoder,
    StylusPose,
    encode,
    PROTOCOL_VERSION,
)
from .device import VirtualStylusDevice

RECV_CHUNK = 65536
OUTBOX_CAP = 262144  # bytes; beyond this, new outbound frames are dropped


class _Connection:
    def __init__(self, sock: socket.socket):
        self.sock = sock
        self.decoder = StreamDecoder()
        self.outbox = bytearray()
        self.dropped_frames = 0
        self.alive = True

    def queue(self, msg) -> None:
        frame = encode(msg)
        if len(self.outbox) + len(frame) > OUTBOX_CAP:
            self.dropped_frames += 1
            return
        self.outbox.extend(frame)


class HapticServer:
    """Serves the virtual device over the framed binary protocol."""

    def __init__(self, device: VirtualStylusDevice, host: str = "127.0.0.1", port: int = 0):
        self.device = device
        self.listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self.listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            self.listener.bind((host, port))
        except OSError as exc:
            self.listener.close()
            raise RuntimeError(f"cannot bind haptic server to {host}:{port}: {exc}") from exc
        self.listener.listen(4)
        self.listener.setblocking(False)
        self.endpoint = self.listener.getsockname()
        self.selector = selectors.DefaultSelector()
        self.selector.register(self.listener, selectors.EVENT_READ, data=None)
        self.connections: list[_Connection] = []
        self.session = {"selected_entity": None, "scale_mode": None, "frame_mode": None,
                        "hello_seen": False}
        self.messages_handled = 0
        self.tick_count = 0

    # -- per-tick servicing --------------------------------------------------

    def tick(self, tick_index: int, force_cmd: ForceCommand | None = None) -> None:
        """One haptic tick: sample the device, serve force, poll the socket."""
        self.device.sample(tick_index)
        self.device.serve_force(force_cmd)
        self.poll()
        self.tick_count += 1

    def poll(self) -> None:
        """Zero-timeout socket servicing; bounded work per call.

        Per connection and per call: one socket read, one decoded message
        handled (buffered frames are drained on later ticks), one write.
        """
        events = self.selector.select(timeout=0)
        for key, mask in events:
            if key.data is None:
                self._accept()
            else:
                conn: _Connection = key.data
                if mask & selectors.EVENT_READ:
                    self._read_socket(conn)
        for conn in list(self.connections):
            self._handle_one(conn)
            self._write_once(conn)

    def _accept(self) -> None:
        try:
            sock, _addr = self.listener.accept()
        except BlockingIOError:
            return
        sock.setblocking(False)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        conn = _Connection(sock)
        self.connections.append(conn)
        self.selector.register(sock, selectors.EVENT_READ, data=conn)

    def _drop(self, conn: _Connection) -> None:
        conn.alive = False
        try:
            self.selector.unregister(conn.sock)
        except (KeyError, ValueError):
            pass
        conn.sock.close()
        if conn in self.connections:
            self.connections.remove(conn)

    def _read_socket(self, conn: _Connection) -> None:
        try:
            data = conn.sock.recv(RECV_CHUNK)
        except BlockingIOError:
            return
        except OSError:
            self._drop(conn)
            return
        if not data:
            self._drop(conn)
            return
        conn.decoder.feed(data)

    def _handle_one(self, conn: _Connection) -> None:
        if not conn.alive:
            return
        for msg in conn.decoder.messages():
            self._handle(conn, msg)
            break  # at most one message per tick; the rest stay buffered

    def _write_once(self, conn: _Connection) -> None:
        if not conn.outbox or not conn.alive:
            return
        try:
            sent = conn.sock.send(conn.outbox)
            del conn.outbox[:sent]
        except BlockingIOError:
            pass
        except OSError:
            self._drop(conn)

    # -- message handling ------------------------------------------------------

    def _handle(self, conn: _Connection, msg) -> None:
        self.messages_handled += 1
        if isinstance(msg, Hello):
            self.session["hello_seen"] = True
            conn.queue(Hello(version=PROTOCOL_VERSION))
        elif isinstance(msg, GetStylusPose):
            state = self.device.last_state or self.device.sample(0)
            conn.queue(StylusPose(
                tick=state.tick,
                position=tuple(float(c) for c in state.pose.position),
                quaternion=tuple(float(c) for c in state.pose.orientation),
                button=1 if state.button else 0,
            ))
        elif isinstance(msg, SetForce):
            try:
                force_class = ForceClass(_FORCE_CLASS_BY_CODE[msg.force_class])
            except KeyError:
                conn.queue(ErrorMessage(code=4, text=f"unknown force class {msg.force_class}"))
                return
            self.device.set_commanded_force(ForceCommand(
                force=list(msg.force), force_class=force_class))
        elif isinstance(msg, EngageSelect):
            self.session["selected_entity"] = msg.entity_id
        elif isinstance(msg, Release):
            self.session["selected_entity"] = None
        elif isinstance(msg, SetScaleMode):
            self.session["scale_mode"] = (msg.mode, msg.value)
        elif isinstance(msg, SetFrameMode):
            self.session["frame_mode"] = (msg.mode, msg.frame)
        elif isinstance(msg, SceneSnapshot):
            pass  # informational; the device side has no scene
        elif isinstance(msg, ErrorMessage):
            # decoder-produced (malformed input) or client-sent: echo back so
            # the peer knows, but keep the connection
            conn.queue(msg)

    # -- standalone operation ---------------------------------------------------

    def run_wall(self, duration: float | None = None) -> None:
        """Wall-clock paced loop at the device's haptic rate (standalone serve)."""
        period = 1.0 / self.device.haptic_hz
        start = time.perf_counter()
        n = 0
        try:
            while duration is None or n < duration * self.device.haptic_hz:
                self.tick(n)
                n += 1
                next_deadline = start + n * period
                delay = next_deadline - time.perf_counter()
                if delay > 0:
                    time.sleep(delay)
        except KeyboardInterrupt:
            pass

    def close(self) -> None:
        for conn in list(self.connections):
            self._drop(conn)
        try:
            self.selector.unregister(self.listener)
        except (KeyError, ValueError):
            pass
        self.listener.close()
        self.selector.close()


_FORCE_CLASS_BY_CODE = {1: "constant_contact", 2: "penetration_proportional", 3: "spring_damper"}
FORCE_CLASS_CODES = {v: k for k, v in _FORCE_CLASS_BY_CODE.items()}
