"""Bit-exact framing and serialization for protocol messages.

Frame layout: magic "LSRP", version byte 0x01, kind byte, 4-byte
big-endian body length, body.  All integers are big-endian; bit matrices
pack row-major, MSB first.  Matrix entries are fixed 4-byte words
regardless of q: wasteful for small q but one canonical encoding keeps
cross-implementation vectors trivial.

Session keys and confirmation secrets never appear as fields; only
32-byte tags cross the wire.
"""
from __future__ import annotations

import enum
import struct
from dataclasses import dataclass

import numpy as np

from .errors import LsrpError
from .modq import ModQMatrix
from .reconcile import SignalMatrix

MAGIC = b"LSRP"
VERSION = 1
HEADER_LEN = 10
TAG_LEN = 32
MAX_BODY = 1 << 26  # generous cap; n=1024 matrices fit with room to spare
MAX_MATRIX_N = 4096


class WireError(LsrpError, ValueError):
    pass


class BadMagic(WireError):
    pass


class UnsupportedVersion(WireError):
    pass


class UnknownKind(WireError):
    pass


class TruncatedFrame(WireError):
    pass


class TrailingBytes(WireError):
    pass


class FieldOutOfRange(WireError):
    pass


class Kind(enum.IntEnum):
    REGISTER = 1
    HELLO = 2
    CHALLENGE = 3
    CONFIRM_C = 4
    CONFIRM_S = 5
    ERROR = 6


class ErrorCode(enum.IntEnum):
    BAD_REQUEST = 1
    AUTH_FAILED = 2
    INTERNAL = 3


@dataclass(frozen=True)
class Register:
    client_id: bytes
    salt: bytes
    verifier: ModQMatrix


@dataclass(frozen=True)
class Hello:
    client_id: bytes
    b_c: ModQMatrix


@dataclass(frozen=True)
class Challenge:
    salt: bytes
    b_s: ModQMatrix
    sigma: SignalMatrix


@dataclass(frozen=True)
class ConfirmClient:
    tag: bytes


@dataclass(frozen=True)
class ConfirmServer:
    tag: bytes


@dataclass(frozen=True)
class ErrorMessage:
    code: int
    text: bytes


WireMessage = Register | Hello | Challenge | ConfirmClient | ConfirmServer | ErrorMessage


def encode_matrix(m: ModQMatrix) -> bytes:
    """4-byte n, 8-byte q, then n*n entries as 4-byte words, row-major."""
    head = struct.pack(">IQ", m.n, m.q)
    return head + m.entries.astype(">u4").tobytes()


def encode_signal(s: SignalMatrix) -> bytes:
    """4-byte n, then ceil(n^2/8) bytes of packed bits."""
    return struct.pack(">I", s.n) + s.packed()


class _Cursor:
    """Sequential reader over a body with typed out-of-data errors."""

    def __init__(self, data: bytes) -> None:
        self.data = data
        self.off = 0

    def take(self, k: int) -> bytes:
        if k < 0 or self.off + k > len(self.data):
            raise TruncatedFrame(f"need {k} bytes at offset {self.off}, have {len(self.data) - self.off}")
        out = self.data[self.off:self.off + k]
        self.off += k
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def lp_bytes(self) -> bytes:
        return self.take(self.u32())

    def done(self) -> None:
        if self.off != len(self.data):
            raise TrailingBytes(f"{len(self.data) - self.off} unconsumed body bytes")


def _read_matrix(cur: _Cursor) -> ModQMatrix:
    n = cur.u32()
    q = cur.u64()
    if n < 1 or n > MAX_MATRIX_N:
        raise FieldOutOfRange(f"matrix dimension {n} out of range")
    if q < 2:
        raise FieldOutOfRange(f"modulus {q} out of range")
    raw = cur.take(4 * n * n)
    entries = np.frombuffer(raw, dtype=">u4").astype(np.int64).reshape(n, n)
    if entries.max() >= q:
        raise FieldOutOfRange("matrix entry not reduced mod q")
    return ModQMatrix(n, q, entries)


def _read_signal(cur: _Cursor) -> SignalMatrix:
    n = cur.u32()
    if n < 1 or n > MAX_MATRIX_N:
        raise FieldOutOfRange(f"signal dimension {n} out of range")
    nbytes = (n * n + 7) // 8
    raw = np.frombuffer(cur.take(nbytes), dtype=np.uint8)
    bits = np.unpackbits(raw)
    if bits[n * n:].any():
        raise FieldOutOfRange("nonzero padding bits in signal")
    return SignalMatrix(n, bits[:n * n].reshape(n, n))


def _lp(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def _encode_body(w: WireMessage) -> tuple[Kind, bytes]:
    if isinstance(w, Register):
        return Kind.REGISTER, _lp(w.client_id) + _lp(w.salt) + encode_matrix(w.verifier)
    if isinstance(w, Hello):
        return Kind.HELLO, _lp(w.client_id) + encode_matrix(w.b_c)
    if isinstance(w, Challenge):
        return Kind.CHALLENGE, _lp(w.salt) + encode_matrix(w.b_s) + encode_signal(w.sigma)
    if isinstance(w, ConfirmClient):
        return Kind.CONFIRM_C, w.tag
    if isinstance(w, ConfirmServer):
        return Kind.CONFIRM_S, w.tag
    if isinstance(w, ErrorMessage):
        return Kind.ERROR, struct.pack(">B", w.code) + _lp(w.text)
    raise UnknownKind(f"cannot encode {type(w).__name__}")


def encode_message(w: WireMessage) -> bytes:
    kind, body = _encode_body(w)
    if isinstance(w, (ConfirmClient, ConfirmServer)) and len(w.tag) != TAG_LEN:
        raise FieldOutOfRange(f"confirmation tag must be {TAG_LEN} bytes")
    if len(body) > MAX_BODY:
        raise FieldOutOfRange("body too large")
    return MAGIC + bytes([VERSION, int(kind)]) + struct.pack(">I", len(body)) + body


def _decode_body(kind: Kind, body: bytes) -> WireMessage:
    cur = _Cursor(body)
    if kind is Kind.REGISTER:
        msg: WireMessage = Register(cur.lp_bytes(), cur.lp_bytes(), _read_matrix(cur))
    elif kind is Kind.HELLO:
        msg = Hello(cur.lp_bytes(), _read_matrix(cur))
    elif kind is Kind.CHALLENGE:
        msg = Challenge(cur.lp_bytes(), _read_matrix(cur), _read_signal(cur))
    elif kind is Kind.CONFIRM_C:
        msg = ConfirmClient(cur.take(TAG_LEN))
    elif kind is Kind.CONFIRM_S:
        msg = ConfirmServer(cur.take(TAG_LEN))
    elif kind is Kind.ERROR:
        code = cur.u8()
        if code < 1:
            raise FieldOutOfRange("error code must be positive")
        msg = ErrorMessage(code, cur.lp_bytes())
    else:  # pragma: no cover - Kind is closed
        raise UnknownKind(str(kind))
    cur.done()
    return msg


def parse_header(head: bytes) -> tuple[Kind, int]:
    """Validate a 10-byte frame header; returns (kind, body length)."""
    if len(head) < HEADER_LEN:
        raise TruncatedFrame(f"header needs {HEADER_LEN} bytes, got {len(head)}")
    if head[:4] != MAGIC:
        raise BadMagic(repr(head[:4]))
    if head[4] != VERSION:
        raise UnsupportedVersion(str(head[4]))
    try:
        kind = Kind(head[5])
    except ValueError as exc:
        raise UnknownKind(str(head[5])) from exc
    body_len = struct.unpack(">I", head[6:10])[0]
    if body_len > MAX_BODY:
        raise FieldOutOfRange(f"declared body length {body_len} exceeds cap")
    return kind, body_len


def decode_message(b: bytes) -> WireMessage:
    kind, body_len = parse_header(b[:HEADER_LEN])
    if len(b) < HEADER_LEN + body_len:
        raise TruncatedFrame(f"frame declares {body_len} body bytes, buffer has {len(b) - HEADER_LEN}")
    if len(b) > HEADER_LEN + body_len:
        raise TrailingBytes(f"{len(b) - HEADER_LEN - body_len} bytes past frame end")
    return _decode_body(kind, b[HEADER_LEN:])


def read_frame(sock) -> WireMessage:
    """Read exactly one frame from a connected socket."""
    head = _recv_exact(sock, HEADER_LEN)
    kind, body_len = parse_header(head)
    body = _recv_exact(sock, body_len)
    return _decode_body(kind, body)


def _recv_exact(sock, k: int) -> bytes:
    chunks = []
    got = 0
    while got < k:
        chunk = sock.recv(k - got)
        if not chunk:
            raise TruncatedFrame(f"connection closed with {k - got} bytes outstanding")
        chunks.append(chunk)
        got += len(chunk)
    return b"".join(chunks)
