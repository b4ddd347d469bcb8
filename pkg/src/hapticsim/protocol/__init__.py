from .codec import (
    MAX_FRAME_PAYLOAD,
    NEED_MORE,
    EngageSelect,
    ErrorMessage,
    GetStylusPose,
    Hello,
    NeedMoreBytes,
    Release,
    SceneSnapshot,
    SetForce,
    SetFrameMode,
    SetScaleMode,
    StreamDecoder,
    StylusPose,
    WIRE_MESSAGE_TYPES,
    decode,
    encode,
)
from .script import ScriptSegment, StylusScript, script_from_dict
from .device import VirtualStylusDevice
from .server import HapticServer
from .client import SimulationClient, StallingClientStub

__all__ = [
    "GetStylusPose", "StylusPose", "SetForce", "EngageSelect", "Release",
    "SetScaleMode", "SetFrameMode", "SceneSnapshot", "ErrorMessage", "Hello",
    "NeedMoreBytes", "NEED_MORE", "MAX_FRAME_PAYLOAD", "WIRE_MESSAGE_TYPES",
    "encode", "decode", "StreamDecoder",
    "StylusScript", "ScriptSegment", "script_from_dict",
    "VirtualStylusDevice", "HapticServer", "SimulationClient", "StallingClientStub",
]
