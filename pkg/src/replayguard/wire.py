"""TinySec packet formats and replay tags.

Two layouts are supported, every multi-byte field big-endian::

    AE:    dest(2) am(1) len(1) src(2) ctr(2) data(0..29) mac(4)
    Auth:  dest(2) am(1) len(1)               data(0..29) mac(4)

The MAC is carried as opaque bytes and never verified.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Union

from .errors import FormatError, UnsupportedFormatError

MAX_PAYLOAD = 29
MAC_SIZE = 4

_AE_HEADER = struct.Struct(">HBBHH")
_AUTH_HEADER = struct.Struct(">HBB")

AE_MIN_SIZE = _AE_HEADER.size + MAC_SIZE
AUTH_MIN_SIZE = _AUTH_HEADER.size + MAC_SIZE

COUNTER_SCHEMES = frozenset({"counter"})
BYTE_SCHEMES = frozenset({"hash_window", "bloom_single", "bloom_multi"})


def _check_u(name: str, value: int, bits: int) -> None:
    if not isinstance(value, int) or not 0 <= value < (1 << bits):
        raise FormatError(f"{name}={value!r} does not fit in {bits} unsigned bits")


def _check_body(length: int, payload: bytes, mac: bytes) -> None:
    _check_u("len", length, 8)
    if len(payload) > MAX_PAYLOAD:
        raise FormatError(f"payload of {len(payload)} bytes exceeds {MAX_PAYLOAD}")
    if length != len(payload):
        raise FormatError(f"len={length} but payload has {len(payload)} bytes")
    if len(mac) != MAC_SIZE:
        raise FormatError(f"mac must be {MAC_SIZE} bytes, got {len(mac)}")


@dataclass(frozen=True)
class PacketAE:
    dest: int
    am: int
    len: int
    src: int
    ctr: int
    payload: bytes = b""
    mac: bytes = field(default=bytes(MAC_SIZE))

    def validate(self) -> None:
        _check_u("dest", self.dest, 16)
        _check_u("am", self.am, 8)
        _check_u("src", self.src, 16)
        _check_u("ctr", self.ctr, 16)
        _check_body(self.len, self.payload, self.mac)


@dataclass(frozen=True)
class PacketAuth:
    dest: int
    am: int
    len: int
    payload: bytes = b""
    mac: bytes = field(default=bytes(MAC_SIZE))

    def validate(self) -> None:
        _check_u("dest", self.dest, 16)
        _check_u("am", self.am, 8)
        _check_body(self.len, self.payload, self.mac)


Packet = Union[PacketAE, PacketAuth]


def make_ae(dest: int, src: int, ctr: int, payload: bytes = b"", am: int = 0,
            mac: bytes = bytes(MAC_SIZE)) -> PacketAE:
    """Build an AE packet with ``len`` filled in from the payload."""
    return PacketAE(dest, am, len(payload), src, ctr, bytes(payload), bytes(mac))


def make_auth(dest: int, payload: bytes = b"", am: int = 0,
              mac: bytes = bytes(MAC_SIZE)) -> PacketAuth:
    return PacketAuth(dest, am, len(payload), bytes(payload), bytes(mac))


def encode_ae(p: PacketAE) -> bytes:
    p.validate()
    return _AE_HEADER.pack(p.dest, p.am, p.len, p.src, p.ctr) + p.payload + p.mac


def decode_ae(b: bytes) -> PacketAE:
    b = bytes(b)
    if len(b) < AE_MIN_SIZE:
        raise FormatError(f"AE packet needs at least {AE_MIN_SIZE} bytes, got {len(b)}")
    dest, am, length, src, ctr = _AE_HEADER.unpack_from(b)
    if len(b) != AE_MIN_SIZE + length:
        raise FormatError(
            f"len={length} implies {AE_MIN_SIZE + length} bytes, buffer has {len(b)}")
    start = _AE_HEADER.size
    p = PacketAE(dest, am, length, src, ctr, b[start:start + length], b[start + length:])
    p.validate()
    return p


def encode_auth(p: PacketAuth) -> bytes:
    p.validate()
    return _AUTH_HEADER.pack(p.dest, p.am, p.len) + p.payload + p.mac


def decode_auth(b: bytes) -> PacketAuth:
    b = bytes(b)
    if len(b) < AUTH_MIN_SIZE:
        raise FormatError(f"Auth packet needs at least {AUTH_MIN_SIZE} bytes, got {len(b)}")
    dest, am, length = _AUTH_HEADER.unpack_from(b)
    if len(b) != AUTH_MIN_SIZE + length:
        raise FormatError(
            f"len={length} implies {AUTH_MIN_SIZE + length} bytes, buffer has {len(b)}")
    start = _AUTH_HEADER.size
    p = PacketAuth(dest, am, length, b[start:start + length], b[start + length:])
    p.validate()
    return p


def encode(p: Packet) -> bytes:
    if isinstance(p, PacketAE):
        return encode_ae(p)
    if isinstance(p, PacketAuth):
        return encode_auth(p)
    raise TypeError(f"not a packet: {type(p).__name__}")


def replay_tag(p: Packet, scheme: str) -> bytes:
    """Bytes a detector of kind `scheme` inspects for packet `p`.

    The counter scheme reads the 4-byte ``src || ctr`` tail of the IV, so it
    only works on AE packets. Hash and Bloom schemes use the whole packet.
    """
    if scheme in COUNTER_SCHEMES:
        if not isinstance(p, PacketAE):
            raise UnsupportedFormatError("counter detection needs the AE format (no ctr field)")
        p.validate()
        return struct.pack(">HH", p.src, p.ctr)
    if scheme in BYTE_SCHEMES:
        return encode(p)
    raise ValueError(f"unknown detector kind {scheme!r}")
