"""Binary container shared by grid and mask files.

Layout: an 8-byte ASCII magic, a 4-byte little-endian header length, a UTF-8
JSON header, then raw array payloads. Headers are serialized with sorted keys
and no whitespace so identical metadata always produces identical bytes.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from typing import BinaryIO

GRID_MAGIC = b"QLGRID01"
MASK_MAGIC = b"QLMASK01"
_LEN = struct.Struct("<I")


class FormatError(Exception):
    """Raised when a file does not parse as the expected container."""


def encode_header(header: dict) -> bytes:
    return json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")


def write_container(fh: BinaryIO, magic: bytes, header: dict, payloads) -> None:
    blob = encode_header(header)
    fh.write(magic)
    fh.write(_LEN.pack(len(blob)))
    fh.write(blob)
    for payload in payloads:
        fh.write(payload)


def read_container(fh: BinaryIO, magic: bytes) -> dict:
    """Validate the magic and return the decoded header; leaves ``fh`` at the payload."""
    got = fh.read(len(magic))
    if got != magic:
        raise FormatError(f"bad magic at offset 0: expected {magic!r}, got {got!r}")
    raw_len = fh.read(_LEN.size)
    if len(raw_len) != _LEN.size:
        raise FormatError(f"truncated header length at offset {len(magic)}")
    (n,) = _LEN.unpack(raw_len)
    blob = read_exact(fh, n, "header")
    try:
        header = json.loads(blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"header is not valid JSON: {exc}") from exc
    if not isinstance(header, dict):
        raise FormatError("header must be a JSON object")
    return header


def read_exact(fh: BinaryIO, n: int, what: str) -> bytes:
    pos = fh.tell()
    data = fh.read(n)
    if len(data) != n:
        raise FormatError(
            f"truncated {what} at offset {pos}: wanted {n} bytes, got {len(data)}"
        )
    return data


def expect_eof(fh: BinaryIO) -> None:
    if fh.read(1):
        raise FormatError(f"trailing bytes after payload at offset {fh.tell() - 1}")


def atomic_write(path, data: bytes) -> None:
    """Write via a temp file in the same directory and rename into place,
    so readers never observe a partially written artifact."""
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
