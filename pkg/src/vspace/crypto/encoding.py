"""Canonical binary encoding shared by hashing, signatures and the ledger.

Every value is ``tag (1 byte) || length (4 bytes, big-endian) || body``:

======  ==========  ==================================================
tag     type        body
======  ==========  ==================================================
0x00    None        empty
0x01    int >= 0    big-endian magnitude, minimal length (0 -> empty)
0x02    bytes       raw bytes
0x03    str         UTF-8
0x04    list        ``length`` is the item count; items follow encoded
======  ==========  ==================================================

Records are lists with a fixed field order per type. See FORMAT.md.
"""

from __future__ import annotations

import struct
from typing import Any, Iterable

from .errors import DecodeError

TAG_NONE = 0x00
TAG_INT = 0x01
TAG_BYTES = 0x02
TAG_STR = 0x03
TAG_LIST = 0x04

_HEADER = struct.Struct(">BI")


def encode_int(value: int) -> bytes:
    if value < 0:
        raise ValueError("canonical integers are non-negative")
    body = value.to_bytes((value.bit_length() + 7) // 8, "big")
    return _HEADER.pack(TAG_INT, len(body)) + body


def encode(value: Any) -> bytes:
    out = bytearray()
    _encode_into(value, out)
    return bytes(out)


def _encode_into(value: Any, out: bytearray) -> None:
    if value is None:
        out += _HEADER.pack(TAG_NONE, 0)
    elif isinstance(value, bool):
        out += encode_int(int(value))
    elif isinstance(value, int):
        out += encode_int(value)
    elif isinstance(value, (bytes, bytearray)):
        out += _HEADER.pack(TAG_BYTES, len(value))
        out += value
    elif isinstance(value, str):
        raw = value.encode("utf-8")
        out += _HEADER.pack(TAG_STR, len(raw))
        out += raw
    elif isinstance(value, (list, tuple)):
        out += _HEADER.pack(TAG_LIST, len(value))
        for item in value:
            _encode_into(item, out)
    elif hasattr(value, "to_canonical"):
        _encode_into(value.to_canonical(), out)
    else:
        raise TypeError(f"cannot canonically encode {type(value).__name__}")


def encode_seq(items: Iterable[Any]) -> bytes:
    return encode(list(items))


def decode(data: bytes) -> Any:
    value, end = decode_prefix(data, 0)
    if end != len(data):
        raise DecodeError("trailing bytes after canonical value", end)
    return value


def decode_prefix(data: bytes, offset: int) -> tuple[Any, int]:
    if offset + _HEADER.size > len(data):
        raise DecodeError("truncated header", offset)
    tag, length = _HEADER.unpack_from(data, offset)
    pos = offset + _HEADER.size
    if tag == TAG_LIST:
        items = []
        for _ in range(length):
            item, pos = decode_prefix(data, pos)
            items.append(item)
        return items, pos
    end = pos + length
    if end > len(data):
        raise DecodeError("truncated body", offset)
    body = bytes(data[pos:end])
    if tag == TAG_NONE:
        if length:
            raise DecodeError("non-empty None", offset)
        return None, end
    if tag == TAG_INT:
        if body[:1] == b"\x00":
            raise DecodeError("non-minimal integer", offset)
        return int.from_bytes(body, "big"), end
    if tag == TAG_BYTES:
        return body, end
    if tag == TAG_STR:
        try:
            return body.decode("utf-8"), end
        except UnicodeDecodeError as exc:
            raise DecodeError("invalid UTF-8", offset) from exc
    raise DecodeError(f"unknown tag 0x{tag:02x}", offset)


def expect_list(value: Any, length: int, what: str) -> list:
    if not isinstance(value, list) or len(value) != length:
        raise DecodeError(f"{what}: expected {length}-field record")
    return value


def expect_int(value: Any, what: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise DecodeError(f"{what}: expected integer")
    return value


def expect_bytes(value: Any, what: str, size: int | None = None) -> bytes:
    if not isinstance(value, bytes) or (size is not None and len(value) != size):
        raise DecodeError(f"{what}: expected {size or ''} bytes")
    return value


def expect_str(value: Any, what: str) -> str:
    if not isinstance(value, str):
        raise DecodeError(f"{what}: expected string")
    return value
