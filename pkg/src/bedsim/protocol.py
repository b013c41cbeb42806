"""Wire schema for the remote-console link.

One frame is one UTF-8 JSON object on a single newline-terminated line,
carrying a "type" tag and protocol version "v" (currently 1). Unknown
fields are ignored on decode so newer peers can add fields. Decode
failures map to error codes and never kill a session.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .morphology import FirmnessMode

PROTOCOL_VERSION = 1
MAX_FRAME_BYTES = 64 * 1024


class ProtocolError(Exception):
    """Decode or request failure with a wire-level error code."""

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)

    @property
    def message(self) -> str:
        return self.args[0]


# --- client -> server -------------------------------------------------------


@dataclass(frozen=True)
class Hello:
    pass


@dataclass(frozen=True)
class GetStatus:
    pass


@dataclass(frozen=True)
class Activate:
    mode: FirmnessMode


@dataclass(frozen=True)
class Deactivate:
    pass


@dataclass(frozen=True)
class SetMode:
    mode: FirmnessMode


@dataclass(frozen=True)
class LoadBody:
    profile_name: str | None = None
    profile: dict | None = None  # inline profile document

    def __post_init__(self):
        if (self.profile_name is None) == (self.profile is None):
            raise ProtocolError(
                "bad_request", "load_body needs exactly one of profile_name or profile"
            )


@dataclass(frozen=True)
class Subscribe:
    rate_hz: float

    def __post_init__(self):
        if not (isinstance(self.rate_hz, (int, float)) and 0 < self.rate_hz < 1000):
            raise ProtocolError("bad_request", f"bad subscription rate {self.rate_hz!r}")


@dataclass(frozen=True)
class Unsubscribe:
    pass


# --- server -> client -------------------------------------------------------


@dataclass(frozen=True)
class Status:
    weight_kgf: float
    mode: FirmnessMode
    active: bool
    converged: bool
    tick: int
    excluded_count: int


@dataclass(frozen=True)
class Snapshot:
    tick: int
    pressures: tuple[tuple[float, ...], ...]   # kgf, 4 decimals on the wire
    extensions: tuple[tuple[float, ...], ...]  # mm, 2 decimals on the wire
    support: tuple[tuple[int, ...], ...]       # 0/1 bits


@dataclass(frozen=True)
class Ack:
    request_type: str


@dataclass(frozen=True)
class Error:
    code: str
    message: str


Message = (
    Hello | GetStatus | Activate | Deactivate | SetMode | LoadBody | Subscribe
    | Unsubscribe | Status | Snapshot | Ack | Error
)

_TYPE_TAGS = {
    Hello: "hello",
    GetStatus: "get_status",
    Activate: "activate",
    Deactivate: "deactivate",
    SetMode: "set_mode",
    LoadBody: "load_body",
    Subscribe: "subscribe",
    Unsubscribe: "unsubscribe",
    Status: "status",
    Snapshot: "snapshot",
    Ack: "ack",
    Error: "error",
}
_TAG_TYPES = {tag: cls for cls, tag in _TYPE_TAGS.items()}


def _round_grid(grid, digits: int) -> list[list[float]]:
    return [[round(float(v), digits) for v in row] for row in grid]


def _payload(msg: Message) -> dict:
    if isinstance(msg, (Activate, SetMode)):
        return {"mode": msg.mode.value}
    if isinstance(msg, LoadBody):
        if msg.profile_name is not None:
            return {"profile_name": msg.profile_name}
        return {"profile": msg.profile}
    if isinstance(msg, Subscribe):
        return {"rate_hz": msg.rate_hz}
    if isinstance(msg, Status):
        return {
            "weight_kgf": round(msg.weight_kgf, 4),
            "mode": msg.mode.value,
            "active": msg.active,
            "converged": msg.converged,
            "tick": msg.tick,
            "excluded_count": msg.excluded_count,
        }
    if isinstance(msg, Snapshot):
        return {
            "tick": msg.tick,
            "pressures": _round_grid(msg.pressures, 4),
            "extensions": _round_grid(msg.extensions, 2),
            "support": [[int(b) for b in row] for row in msg.support],
        }
    if isinstance(msg, Ack):
        return {"request_type": msg.request_type}
    if isinstance(msg, Error):
        return {"code": msg.code, "message": msg.message}
    return {}


def encode(msg: Message) -> bytes:
    """Canonical single-line frame: version, type, then payload fields."""
    obj = {"v": PROTOCOL_VERSION, "type": _TYPE_TAGS[type(msg)]}
    obj.update(_payload(msg))
    line = json.dumps(obj, separators=(",", ":"), allow_nan=False)
    return line.encode("utf-8") + b"\n"


def _require(obj: dict, key: str, kinds) -> object:
    if key not in obj:
        raise ProtocolError("bad_frame", f"missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kinds) or isinstance(value, bool) and bool not in (
        kinds if isinstance(kinds, tuple) else (kinds,)
    ):
        raise ProtocolError("bad_frame", f"field {key!r} has wrong type")
    return value


def _parse_mode(obj: dict) -> FirmnessMode:
    raw = _require(obj, "mode", str)
    try:
        return FirmnessMode(raw)
    except ValueError:
        raise ProtocolError("bad_request", f"unknown firmness mode {raw!r}") from None


def _parse_grid(obj: dict, key: str, cast) -> tuple[tuple, ...]:
    raw = _require(obj, key, list)
    try:
        grid = tuple(tuple(cast(v) for v in row) for row in raw)
    except (TypeError, ValueError) as exc:
        raise ProtocolError("bad_frame", f"field {key!r}: {exc}") from exc
    if any(not all(math.isfinite(v) for v in row) for row in grid) and cast is float:
        raise ProtocolError("bad_frame", f"field {key!r} has non-finite values")
    return grid


def decode(frame: bytes | str) -> Message:
    """Parse one frame back into a message. Raises ProtocolError, never kills state."""
    if isinstance(frame, str):
        frame = frame.encode("utf-8")
    if len(frame) > MAX_FRAME_BYTES:
        raise ProtocolError("frame_too_large", f"frame exceeds {MAX_FRAME_BYTES} bytes")
    try:
        obj = json.loads(frame.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError("bad_frame", f"not a JSON frame: {exc}") from exc
    if not isinstance(obj, dict):
        raise ProtocolError("bad_frame", "frame is not a JSON object")
    version = obj.get("v")
    if version != PROTOCOL_VERSION:
        raise ProtocolError("bad_version", f"unsupported protocol version {version!r}")
    tag = obj.get("type")
    if not isinstance(tag, str) or tag not in _TAG_TYPES:
        raise ProtocolError("unknown_type", f"unknown message type {tag!r}")

    cls = _TAG_TYPES[tag]
    if cls in (Hello, GetStatus, Deactivate, Unsubscribe):
        return cls()
    if cls in (Activate, SetMode):
        return cls(_parse_mode(obj))
    if cls is LoadBody:
        if "profile_name" in obj:
            return LoadBody(profile_name=str(_require(obj, "profile_name", str)))
        if "profile" in obj:
            return LoadBody(profile=dict(_require(obj, "profile", dict)))
        raise ProtocolError("bad_request", "load_body needs profile_name or profile")
    if cls is Subscribe:
        return Subscribe(float(_require(obj, "rate_hz", (int, float))))
    if cls is Status:
        return Status(
            weight_kgf=float(_require(obj, "weight_kgf", (int, float))),
            mode=_parse_mode(obj),
            active=bool(_require(obj, "active", bool)),
            converged=bool(_require(obj, "converged", bool)),
            tick=int(_require(obj, "tick", int)),
            excluded_count=int(_require(obj, "excluded_count", int)),
        )
    if cls is Snapshot:
        return Snapshot(
            tick=int(_require(obj, "tick", int)),
            pressures=_parse_grid(obj, "pressures", float),
            extensions=_parse_grid(obj, "extensions", float),
            support=_parse_grid(obj, "support", int),
        )
    if cls is Ack:
        return Ack(str(_require(obj, "request_type", str)))
    return Error(
        code=str(_require(obj, "code", str)),
        message=str(_require(obj, "message", str)),
    )
