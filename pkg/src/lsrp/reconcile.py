"""Signal and extractor functions collapsing close key material to equal bits.

The hint functions tell the peer which half of Z_q a value lies in; the
extractor then maps value + hint to one shared bit.  Two values whose
centered difference is even and at most floor(q/4) - 2 in absolute value
extract to the same bit when the hint is computed on either of them.

Both the hint intervals and the extractor parity operate on centered
representatives in (-q/2, q/2): the intervals are symmetric about zero,
and with q odd the parity of a residue depends on the representative, so
only the centered choice makes the agreement guarantee hold across the
wrap of the canonical range.
"""
from __future__ import annotations

import secrets
from typing import Callable

import numpy as np

from .errors import DimensionMismatch
from .modq import ModQMatrix, centered


class BitMatrix:
    """Immutable n x n matrix of bits."""

    __slots__ = ("n", "bits")

    def __init__(self, n: int, bits) -> None:
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.shape != (n, n):
            raise DimensionMismatch(f"expected shape ({n}, {n}), got {arr.shape}")
        if arr.size and arr.max() > 1:
            raise ValueError("entries must be bits")
        self.n = n
        self.bits = arr
        arr.setflags(write=False)

    @classmethod
    def zeros(cls, n: int) -> "BitMatrix":
        return cls(n, np.zeros((n, n), dtype=np.uint8))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self):
        return hash((self.n, self.bits.tobytes()))

    def packed(self) -> bytes:
        """Row-major bits packed 8 per byte, MSB first, zero padded."""
        return np.packbits(self.bits.reshape(-1)).tobytes()


SignalMatrix = BitMatrix
KeyBits = BitMatrix


def hint0(x: int, q: int) -> int:
    """0 iff the centered value lies in [-floor(q/4), floor(q/4)]."""
    b = q // 4
    return 0 if -b <= centered(x, q) <= b else 1


def hint1(x: int, q: int) -> int:
    """0 iff the centered value lies in [-floor(q/4)+1, floor(q/4)+1]."""
    b = q // 4
    return 0 if -b + 1 <= centered(x, q) <= b + 1 else 1


def hint_bits(m: ModQMatrix, variant_bits: np.ndarray) -> np.ndarray:
    """Vectorized hint evaluation: per-entry variant bit selects hint0 or hint1."""
    b = m.q // 4
    xc = m.centered()
    in0 = (xc >= -b) & (xc <= b)
    in1 = (xc >= -b + 1) & (xc <= b + 1)
    inside = np.where(variant_bits.astype(bool), in1, in0)
    return (~inside).astype(np.uint8)


def _fresh_bits(count: int) -> np.ndarray:
    raw = np.frombuffer(secrets.token_bytes((count + 7) // 8), dtype=np.uint8)
    return np.unpackbits(raw)[:count]


def signal(m: ModQMatrix, bit_source: Callable[[int], np.ndarray] | None = None) -> SignalMatrix:
    """Entrywise randomized signal: an independent fresh variant bit per entry.

    bit_source(k) must return k bits; defaults to OS entropy.  A seeded
    source makes the output deterministic.
    """
    src = bit_source if bit_source is not None else _fresh_bits
    variants = np.asarray(src(m.n * m.n), dtype=np.uint8).reshape(m.n, m.n)
    return SignalMatrix(m.n, hint_bits(m, variants))


def extract_bit(x: int, sigma: int, q: int) -> int:
    """Shared bit: parity of the CENTERED value of (x + sigma*(q-1)/2) mod q.

    Parity of a residue depends on the representative when q is odd; the
    agreement guarantee only holds on the centered one (a small negative
    offset that wraps the canonical range shifts the representative by q
    and would flip canonical parity).
    """
    return centered((x + sigma * ((q - 1) // 2)) % q, q) % 2


def extract(m: ModQMatrix, s: SignalMatrix) -> KeyBits:
    """Entrywise extractor; deterministic in (m, s)."""
    if m.n != s.n:
        raise DimensionMismatch(f"{m.n} vs {s.n}")
    half = (m.q - 1) // 2
    vals = (m.entries + s.bits.astype(np.int64) * half) % m.q
    vals = np.where(vals <= half, vals, vals - m.q)
    return KeyBits(m.n, (vals % 2).astype(np.uint8))
