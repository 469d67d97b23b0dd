"""Binary message format carried over TCP frames or UDP datagrams.

One message, all integers big-endian, no text escaping anywhere:

    magic          2 bytes   0x4E 0x4D
    version        1 byte    0x01
    type tag       1 byte    see MessageType
    flags          1 byte    bit 0 SIGNED, bit 1 ENCRYPTED
    correlation_id 4 bytes
    field count    1 byte    at most 16
    fields         each: 2-byte length + raw bytes (<= 65535)

The identical payload bytes travel in a TCP frame (4-byte length prefix)
or as exactly one UDP datagram.  When SIGNED is set the last field is the
signature block computed over the encoding of the message without that
field (flag included); when ENCRYPTED is set, value fields carry cipher
blocks instead of plaintext.

Field layout by type (community is always field 0 on requests):

    INITIALISE          [community]
    NEXT_LEVEL          [community, oid]
    UPPER_LEVEL         [community, oid]
    GET                 [community, oid]
    GET_NEXT            [community, oid]
    SET                 [community, oid, value]
    DESCRIBE            [community, oid]
    CONNECTION_RELEASE  [community]
    SUBSCRIBE_TRAP      [community, oid, threshold, period_ms, report_host,
                         report_port]   (empty report_host = requester's)
    DISCOVERY_PROBE     [community]
    DISCOVERY_REPLY     [host, tcp_port, udp_port]
    AGENT_ANNOUNCE      [community, host, tcp_port, udp_port]
    AGENT_FAREWELL      [community, host, tcp_port, udp_port]
    EVENT_REPORT        [instance_oid, value, threshold, timestamp_ms]
    RESPONSE            level replies: [level_listing]
                        get/get-next/set: [instance_oid, value]
                        describe: [name, syntax, access, status, description]
                        subscribe/release: [acknowledgement]
    ERROR_RESPONSE      [reason, detail]

A level listing packs (name, identifier) pairs as "name identifier" lines
inside a single field; see encode_level/parse_level.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field, replace
from typing import BinaryIO, Iterable, Sequence, Union

__all__ = [
    "MessageType", "Message", "FLAG_SIGNED", "FLAG_ENCRYPTED",
    "MAGIC", "VERSION", "MAX_FIELDS", "MAX_FIELD_LEN", "MAX_FRAME",
    "MAX_UDP_PAYLOAD",
    "WireError", "FieldTooLong", "TooManyFields", "DecodeError", "BadMagic",
    "BadVersion", "UnknownType", "Truncated", "TrailingGarbage",
    "PeerClosed", "OversizeFrame", "DECODE_ERRORS",
    "encode_message", "decode_message", "read_frame", "write_frame",
    "encode_level", "parse_level", "make_message",
    "ERR_NO_SUCH_OBJECT", "ERR_NO_SUCH_INSTANCE", "ERR_NOT_WRITABLE",
    "ERR_END_OF_MIB", "ERR_BAD_REQUEST", "ERR_DENIED", "ERR_BUSY",
]

MAGIC = b"\x4e\x4d"
VERSION = 1
MAX_FIELDS = 16
MAX_FIELD_LEN = 0xFFFF
MAX_FRAME = 1 << 20          # TCP frame payload cap
MAX_UDP_PAYLOAD = 8192

FLAG_SIGNED = 0x01
FLAG_ENCRYPTED = 0x02

# error reason codes carried in ERROR_RESPONSE field 0
ERR_NO_SUCH_OBJECT = "NoSuchObject"
ERR_NO_SUCH_INSTANCE = "NoSuchInstance"
ERR_NOT_WRITABLE = "NotWritable"
ERR_END_OF_MIB = "EndOfMib"
ERR_BAD_REQUEST = "BadRequest"
ERR_DENIED = "Denied"
ERR_BUSY = "Busy"


class MessageType(enum.IntEnum):
    INITIALISE = 0x01
    NEXT_LEVEL = 0x02
    UPPER_LEVEL = 0x03
    GET = 0x04
    GET_NEXT = 0x05
    SET = 0x06
    DESCRIBE = 0x07
    CONNECTION_RELEASE = 0x08
    SUBSCRIBE_TRAP = 0x09
    EVENT_REPORT = 0x0A
    DISCOVERY_PROBE = 0x0B
    DISCOVERY_REPLY = 0x0C
    AGENT_ANNOUNCE = 0x0D
    AGENT_FAREWELL = 0x0E
    RESPONSE = 0x10
    ERROR_RESPONSE = 0x11


_TAGS = {t.value for t in MessageType}


class WireError(Exception):
    pass


class FieldTooLong(WireError):
    pass


class TooManyFields(WireError):
    pass


class DecodeError(WireError):
    pass


class BadMagic(DecodeError):
    pass


class BadVersion(DecodeError):
    pass


class UnknownType(DecodeError):
    pass


class Truncated(DecodeError):
    pass


class TrailingGarbage(DecodeError):
    pass


class PeerClosed(WireError):
    """The peer closed cleanly between frames."""


class OversizeFrame(WireError):
    pass


# every decode failure is exactly one of these
DECODE_ERRORS = (BadMagic, BadVersion, UnknownType, Truncated,
                 TrailingGarbage, TooManyFields)


@dataclass
class Message:
    type: MessageType
    flags: int = 0
    fields: list[bytes] = field(default_factory=list)
    correlation_id: int = 0

    def field_str(self, index: int, default: str | None = None) -> str:
        if index >= len(self.fields):
            if default is not None:
                return default
            raise IndexError(f"message has no field {index}")
        return self.fields[index].decode("utf-8", errors="replace")

    @property
    def signed(self) -> bool:
        return bool(self.flags & FLAG_SIGNED)

    @property
    def encrypted(self) -> bool:
        return bool(self.flags & FLAG_ENCRYPTED)

    def without_last_field(self) -> "Message":
        return replace(self, fields=list(self.fields[:-1]))


def make_message(type: MessageType,
                 fields: Iterable[Union[bytes, str, int]] = (),
                 correlation_id: int = 0, flags: int = 0) -> Message:
    """Build a message, encoding str/int convenience values to UTF-8."""
    raw: list[bytes] = []
    for value in fields:
        if isinstance(value, bytes):
            raw.append(value)
        elif isinstance(value, str):
            raw.append(value.encode("utf-8"))
        else:
            raw.append(str(value).encode("ascii"))
    return Message(type=type, flags=flags, fields=raw,
                   correlation_id=correlation_id)


_HEAD = struct.Struct(">2sBBBIB")  # magic, version, type, flags, corr, count


def encode_message(message: Message) -> bytes:
    """Serialize a message to its wire bytes."""
    if len(message.fields) > MAX_FIELDS:
        raise TooManyFields(f"{len(message.fields)} fields (max {MAX_FIELDS})")
    parts = [_HEAD.pack(MAGIC, VERSION, int(message.type),
                        message.flags & 0xFF,
                        message.correlation_id & 0xFFFFFFFF,
                        len(message.fields))]
    for data in message.fields:
        if len(data) > MAX_FIELD_LEN:
            raise FieldTooLong(f"field of {len(data)} bytes (max {MAX_FIELD_LEN})")
        parts.append(struct.pack(">H", len(data)))
        parts.append(data)
    return b"".join(parts)


def decode_message(data: bytes) -> Message:
    """Parse wire bytes back into a message (exact inverse of encode).

    Every input either decodes or raises exactly one member of
    DECODE_ERRORS; nothing else escapes.
    """
    if len(data) < 2:
        if data == MAGIC[: len(data)]:
            raise Truncated("short of the full header")
        raise BadMagic(f"magic mismatch in {data[:2]!r}")
    if data[:2] != MAGIC:
        raise BadMagic(f"magic mismatch in {data[:2]!r}")
    if len(data) < _HEAD.size:
        raise Truncated("short of the full header")
    _magic, version, tag, flags, correlation_id, count = _HEAD.unpack_from(data)
    if version != VERSION:
        raise BadVersion(f"version {version}")
    if tag not in _TAGS:
        raise UnknownType(f"type tag 0x{tag:02x}")
    if count > MAX_FIELDS:
        raise TooManyFields(f"{count} fields (max {MAX_FIELDS})")
    fields: list[bytes] = []
    pos = _HEAD.size
    for _ in range(count):
        if pos + 2 > len(data):
            raise Truncated("field length prefix cut off")
        (length,) = struct.unpack_from(">H", data, pos)
        pos += 2
        if pos + length > len(data):
            raise Truncated("field body cut off")
        fields.append(data[pos:pos + length])
        pos += length
    if pos != len(data):
        raise TrailingGarbage(f"{len(data) - pos} extra bytes")
    return Message(type=MessageType(tag), flags=flags, fields=fields,
                   correlation_id=correlation_id)


# -- TCP framing -----------------------------------------------------------

def _read_exact(stream: BinaryIO, n: int) -> bytes:
    chunks: list[bytes] = []
    remaining = n
    while remaining > 0:
        chunk = stream.read(remaining)
        if not chunk:
            break
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def read_frame(stream: BinaryIO) -> bytes:
    """Read one length-prefixed frame from an ordered byte stream.

    A clean close between frames raises PeerClosed; a close mid-frame
    raises Truncated; a declared length above 1 MiB raises OversizeFrame.
    """
    prefix = _read_exact(stream, 4)
    if not prefix:
        raise PeerClosed("connection closed")
    if len(prefix) < 4:
        raise Truncated("length prefix cut off")
    (length,) = struct.unpack(">I", prefix)
    if length > MAX_FRAME:
        raise OversizeFrame(f"{length} byte frame (max {MAX_FRAME})")
    payload = _read_exact(stream, length)
    if len(payload) < length:
        raise Truncated(f"frame body cut off at {len(payload)}/{length}")
    return payload


def write_frame(stream: BinaryIO, payload: bytes) -> None:
    stream.write(struct.pack(">I", len(payload)) + payload)


# -- level listings ---------------------------------------------------------

def encode_level(entries: Sequence[tuple[str, int]]) -> bytes:
    """Pack (name, identifier) pairs into one field as "name id" lines."""
    return "\n".join(f"{name} {identifier}" for name, identifier in entries
                     ).encode("utf-8")


def parse_level(data: bytes) -> list[tuple[str, int]]:
    entries: list[tuple[str, int]] = []
    if not data:
        return entries
    for line in data.decode("utf-8").split("\n"):
        name, _, identifier = line.rpartition(" ")
        entries.append((name, int(identifier)))
    return entries
