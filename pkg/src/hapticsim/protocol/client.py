"""Simulation-side client of the haptic server.

``SimulationClient`` runs the exchange cycle of the integrated loop remotely:
request the stylus pose, hand it to a simulation core (mapping, driving, and
proximity live there), and return the rendered force to the stylus. The
``StallingClientStub`` is a deliberately unhelpful client used to verify that
the server's haptic loop never depends on client behavior."""

from __future__ import annotations

import select
import socket
import time

from ..forcefield import ForceCommand
from .codec import GetStylusPose, Hello, SetForce, StreamDecoder, StylusPose, encode
from .server import FORCE_CLASS_CODES


class ClientDisconnected(ConnectionError):
    pass


class SimulationClient:
    """Blocking-with-deadline client for live (wall-clock) operation."""

    def __init__(self, host: str, port: int, timeout: float = 1.0):
        self.addr = (host, port)
        self.timeout = timeout
        self.sock: socket.socket | None = None
        self.decoder = StreamDecoder()
        self.connect()

    def connect(self) -> None:
        self.sock = socket.create_connection(self.addr, timeout=self.timeout)
        self.sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self.decoder = StreamDecoder()
        self.server_version = None
        # fire-and-forget hello; the server's version lands with later replies
        self.send(Hello())

    def close(self) -> None:
        if self.sock is not None:
            self.sock.close()
            self.sock = None

    def send(self, msg) -> None:
        if self.sock is None:
            raise ClientDisconnected("not connected")
        try:
            self.sock.sendall(encode(msg))
        except OSError as exc:
            self.close()
            raise ClientDisconnected(str(exc)) from exc

    def _wait_message(self, kind):
        deadline = time.perf_counter() + self.timeout
        while True:
            for msg in self.decoder.messages():
                if isinstance(msg, Hello):
                    self.server_version = msg.version
                if isinstance(msg, kind):
                    return msg
            remaining = deadline - time.perf_counter()
            if remaining <= 0:
                raise TimeoutError(f"no {kind.__name__} within {self.timeout}s")
            ready, _, _ = select.select([self.sock], [], [], remaining)
            if not ready:
                continue
            data = self.sock.recv(65536)
            if not data:
                self.close()
                raise ClientDisconnected("server closed the connection")
            self.decoder.feed(data)

    def request_pose(self) -> StylusPose:
        self.send(GetStylusPose())
        return self._wait_message(StylusPose)

    def set_force(self, cmd: ForceCommand) -> None:
        self.send(SetForce(force=tuple(float(c) for c in cmd.force),
                           force_class=FORCE_CLASS_CODES[cmd.force_class.value]))

    def cycle(self, core, t: float) -> dict:
        """One exchange cycle: pose request -> simulation core -> force reply.

        ``core`` is a simulation core exposing ``on_stylus_wire(t, pose_msg)``
        and returning the cycle outcome dict (see runtime.SimulationCore).
        Connection loss preserves the core state; after ``connect()`` the core
        requires a fresh engage, so the clutch guarantees continuity.
        """
        pose_msg = self.request_pose()
        outcome = core.on_stylus_wire(t, pose_msg)
        force = outcome.get("force")
        if force is not None:
            self.set_force(force)
        return outcome


class StallingClientStub:
    """Non-blocking observer client with scripted stall windows.

    Sends a pose request every ``request_period`` ticks except while stalled;
    inbound replies are drained opportunistically. Used to inject client
    misbehavior into deterministic runs.
    """

    def __init__(self, host: str, port: int, request_period: int = 100,
                 stall_windows=((1.0, 2.0),), haptic_hz: int = 1000):
        self.sock = socket.create_connection((host, port))
        self.sock.setblocking(False)
        self.request_period = request_period
        self.stall_windows = tuple(stall_windows)
        self.haptic_hz = haptic_hz
        self.decoder = StreamDecoder()
        self.replies = 0
        self.requests = 0
        self.received_positions: list[tuple] = []

    def _stalled(self, tick: int) -> bool:
        t = tick / self.haptic_hz
        return any(lo <= t < hi for lo, hi in self.stall_windows)

    def tick(self, tick: int) -> None:
        if self._stalled(tick):
            return
        try:
            data = self.sock.recv(65536)
            if data:
                self.decoder.feed(data)
                for msg in self.decoder.messages():
                    if isinstance(msg, StylusPose):
                        self.replies += 1
                        self.received_positions.append(msg.position)
        except BlockingIOError:
            pass
        if tick % self.request_period == 0:
            try:
                self.sock.sendall(encode(GetStylusPose()))
                self.requests += 1
            except (BlockingIOError, OSError):
                pass

    def close(self) -> None:
        self.sock.close()
