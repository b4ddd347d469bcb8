"""Binary wire codec for the haptic-loop client/server exchange.

Frame layout, fixed and bit-exact:

    [u32 length, little-endian] [u8 type tag] [payload fields]

The length counts the type tag plus the payload. All integers and IEEE-754
f64 values are little-endian; strings are u16-length-prefixed UTF-8; lists
are u16-count-prefixed. Frames longer than 1 MiB are rejected. Decoding is
total: truncated input yields the NEED_MORE sentinel and malformed input
yields an ErrorMessage, never an exception.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

MAX_FRAME_PAYLOAD = 1 << 20  # tag + fields, 1 MiB

ERR_BAD_TAG = 1
ERR_MALFORMED = 2
ERR_TOO_LARGE = 3
ERR_UNSUPPORTED = 4

PROTOCOL_VERSION = 1


class NeedMoreBytes:
    """Sentinel: the buffer does not yet hold a complete frame."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NEED_MORE"


NEED_MORE = NeedMoreBytes()


@dataclass(frozen=True)
class GetStylusPose:
    pass


@dataclass(frozen=True)
class StylusPose:
    tick: int
    position: tuple          # 3 x f64, device meters
    quaternion: tuple        # 4 x f64 (w, x, y, z)
    button: int              # u8


@dataclass(frozen=True)
class SetForce:
    force: tuple             # 3 x f64, newtons
    force_class: int         # u8


@dataclass(frozen=True)
class EngageSelect:
    entity_id: str


@dataclass(frozen=True)
class Release:
    pass


@dataclass(frozen=True)
class SetScaleMode:
    mode: int                # u8
    value: float             # f64


@dataclass(frozen=True)
class SetFrameMode:
    mode: int                # u8
    frame: tuple | None = None   # optional 7 x f64 (px py pz qw qx qy qz)


@dataclass(frozen=True)
class SceneSnapshot:
    poses: tuple             # ((entity_id, 7 x f64), ...)


@dataclass(frozen=True)
class ErrorMessage:
    code: int                # u16
    text: str


@dataclass(frozen=True)
class Hello:
    version: int = PROTOCOL_VERSION   # u8


TAG_GET_STYLUS_POSE = 1
TAG_STYLUS_POSE = 2
TAG_SET_FORCE = 3
TAG_ENGAGE_SELECT = 4
TAG_RELEASE = 5
TAG_SET_SCALE_MODE = 6
TAG_SET_FRAME_MODE = 7
TAG_SCENE_SNAPSHOT = 8
TAG_ERROR = 9
TAG_HELLO = 10

WIRE_MESSAGE_TYPES = (GetStylusPose, StylusPose, SetForce, EngageSelect, Release,
                      SetScaleMode, SetFrameMode, SceneSnapshot, ErrorMessage, Hello)

_HEADER = struct.Struct("<I")
_STYLUS_POSE = struct.Struct("<Q3d4dB")
_SET_FORCE = struct.Struct("<3dB")
_SCALE_MODE = struct.Struct("<Bd")
_U16 = struct.Struct("<H")
_POSE7 = struct.Struct("<7d")


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValueError("string field exceeds u16 length")
    return _U16.pack(len(raw)) + raw


def encode(msg) -> bytes:
    """Encode one message as a complete frame."""
    if isinstance(msg, GetStylusPose):
        body = bytes([TAG_GET_STYLUS_POSE])
    elif isinstance(msg, StylusPose):
        body = bytes([TAG_STYLUS_POSE]) + _STYLUS_POSE.pack(
            msg.tick, *msg.position, *msg.quaternion, msg.button)
    elif isinstance(msg, SetForce):
        body = bytes([TAG_SET_FORCE]) + _SET_FORCE.pack(*msg.force, msg.force_class)
    elif isinstance(msg, EngageSelect):
        body = bytes([TAG_ENGAGE_SELECT]) + _pack_str(msg.entity_id)
    elif isinstance(msg, Release):
        body = bytes([TAG_RELEASE])
    elif isinstance(msg, SetScaleMode):
        body = bytes([TAG_SET_SCALE_MODE]) + _SCALE_MODE.pack(msg.mode, msg.value)
    elif isinstance(msg, SetFrameMode):
        if msg.frame is None:
            body = bytes([TAG_SET_FRAME_MODE, msg.mode, 0])
        else:
            body = bytes([TAG_SET_FRAME_MODE, msg.mode, 1]) + _POSE7.pack(*msg.frame)
    elif isinstance(msg, SceneSnapshot):
        if len(msg.poses) > 0xFFFF:
            raise ValueError("snapshot exceeds u16 entity count")
        parts = [bytes([TAG_SCENE_SNAPSHOT]), _U16.pack(len(msg.poses))]
        for entity_id, pose7 in msg.poses:
            parts.append(_pack_str(entity_id))
            parts.append(_POSE7.pack(*pose7))
        body = b"".join(parts)
    elif isinstance(msg, ErrorMessage):
        body = bytes([TAG_ERROR]) + _U16.pack(msg.code) + _pack_str(msg.text)
    elif isinstance(msg, Hello):
        body = bytes([TAG_HELLO, msg.version])
    else:
        raise TypeError(f"not a wire message: {type(msg).__name__}")
    if len(body) > MAX_FRAME_PAYLOAD:
        raise ValueError("frame exceeds the 1 MiB payload cap")
    return _HEADER.pack(len(body)) + body


class _Reader:
    def __init__(self, buf: memoryview):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> memoryview:
        if self.pos + n > len(self.buf):
            raise _Truncated()
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return _U16.unpack(self.take(2))[0]

    def string(self) -> str:
        n = self.u16()
        return bytes(self.take(n)).decode("utf-8")

    def done(self) -> bool:
        return self.pos == len(self.buf)


class _Truncated(Exception):
    pass


def _parse_body(body: memoryview):
    tag = body[0]
    r = _Reader(body[1:])
    if tag == TAG_GET_STYLUS_POSE:
        msg = GetStylusPose()
    elif tag == TAG_STYLUS_POSE:
        vals = _STYLUS_POSE.unpack(r.take(_STYLUS_POSE.size))
        msg = StylusPose(tick=vals[0], position=tuple(vals[1:4]),
                         quaternion=tuple(vals[4:8]), button=vals[8])
    elif tag == TAG_SET_FORCE:
        vals = _SET_FORCE.unpack(r.take(_SET_FORCE.size))
        msg = SetForce(force=tuple(vals[:3]), force_class=vals[3])
    elif tag == TAG_ENGAGE_SELECT:
        msg = EngageSelect(entity_id=r.string())
    elif tag == TAG_RELEASE:
        msg = Release()
    elif tag == TAG_SET_SCALE_MODE:
        vals = _SCALE_MODE.unpack(r.take(_SCALE_MODE.size))
        msg = SetScaleMode(mode=vals[0], value=vals[1])
    elif tag == TAG_SET_FRAME_MODE:
        mode = r.u8()
        has_frame = r.u8()
        frame = tuple(_POSE7.unpack(r.take(_POSE7.size))) if has_frame else None
        msg = SetFrameMode(mode=mode, frame=frame)
    elif tag == TAG_SCENE_SNAPSHOT:
        count = r.u16()
        poses = []
        for _ in range(count):
            entity_id = r.string()
            poses.append((entity_id, tuple(_POSE7.unpack(r.take(_POSE7.size)))))
        msg = SceneSnapshot(poses=tuple(poses))
    elif tag == TAG_ERROR:
        code = r.u16()
        msg = ErrorMessage(code=code, text=r.string())
    elif tag == TAG_HELLO:
        msg = Hello(version=r.u8())
    else:
        return ErrorMessage(code=ERR_BAD_TAG, text=f"unknown message tag {tag}")
    if not r.done():
        return ErrorMessage(code=ERR_MALFORMED, text=f"trailing bytes after tag {tag}")
    return msg


def decode(data):
    """Decode one frame from the head of ``data``.

    Returns ``(message, bytes_consumed)``. ``message`` is NEED_MORE when the
    buffer is incomplete, and an ErrorMessage (still consuming the frame) for
    malformed content. Oversized frames yield an ErrorMessage with zero bytes
    consumed: the stream cannot be resynchronized by this function (see
    StreamDecoder for skip-and-recover handling).
    """
    buf = memoryview(bytes(data) if not isinstance(data, (bytes, bytearray, memoryview)) else data)
    if len(buf) < 4:
        return NEED_MORE, 0
    (length,) = _HEADER.unpack(buf[:4])
    if length > MAX_FRAME_PAYLOAD:
        return ErrorMessage(code=ERR_TOO_LARGE, text=f"frame payload {length} exceeds 1 MiB"), 0
    if length == 0:
        return ErrorMessage(code=ERR_MALFORMED, text="empty frame"), 4
    if len(buf) < 4 + length:
        return NEED_MORE, 0
    body = buf[4:4 + length]
    try:
        msg = _parse_body(body)
    except _Truncated:
        msg = ErrorMessage(code=ERR_MALFORMED, text=f"payload too short for tag {body[0]}")
    except (UnicodeDecodeError, struct.error) as exc:
        msg = ErrorMessage(code=ERR_MALFORMED, text=f"bad payload: {exc}")
    return msg, 4 + length


class StreamDecoder:
    """Incremental frame decoder with oversize skip-and-recover.

    Feed raw socket bytes in; iterate complete messages out. A frame whose
    declared payload exceeds the cap is reported as an ErrorMessage and its
    bytes are discarded as they arrive, keeping the connection usable.
    """

    def __init__(self):
        self._buf = bytearray()
        self._skip = 0

    def feed(self, data: bytes) -> None:
        self._buf.extend(data)

    def pending_bytes(self) -> int:
        return len(self._buf)

    def messages(self):
        while True:
            if self._skip:
                drop = min(self._skip, len(self._buf))
                del self._buf[:drop]
                self._skip -= drop
                if self._skip:
                    return
            msg, consumed = decode(self._buf)
            if msg is NEED_MORE:
                return
            if consumed == 0:  # oversize frame: discard header now, payload as it arrives
                (length,) = _HEADER.unpack(bytes(self._buf[:4]))
                del self._buf[:4]
                self._skip = length
                yield msg
                continue
            del self._buf[:consumed]
            yield msg
