"""Arithmetic over Z_q and over square matrices of Z_q elements.

Entries are stored canonically in [0, q); the centered representative in
(-q/2, q/2) is computed on demand (reconciliation and norms are the only
consumers).  Products are routed through float64 BLAS when the exact
bound n*(q-1)^2 fits in the 53-bit mantissa, through int64 otherwise, and
through Python big integers as a last resort, so no parameter choice can
silently wrap.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, ModulusMismatch


def centered(x: int, q: int) -> int:
    """Map a canonical residue in [0, q) to its representative in (-q/2, q/2]."""
    x = int(x)
    return x if x <= (q - 1) // 2 else x - q


def centered_array(entries: np.ndarray, q: int) -> np.ndarray:
    return np.where(entries <= (q - 1) // 2, entries, entries - q)


class ModQMatrix:
    """Immutable n x n matrix over Z_q."""

    __slots__ = ("n", "q", "entries")

    def __init__(self, n: int, q: int, entries) -> None:
        arr = np.asarray(entries, dtype=np.int64)
        if arr.shape != (n, n):
            raise DimensionMismatch(f"expected shape ({n}, {n}), got {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() >= q):
            raise ValueError(f"entries must lie in [0, {q})")
        self.n = n
        self.q = q
        self.entries = arr
        arr.setflags(write=False)

    @classmethod
    def zeros(cls, n: int, q: int) -> "ModQMatrix":
        return cls(n, q, np.zeros((n, n), dtype=np.int64))

    @classmethod
    def identity(cls, n: int, q: int) -> "ModQMatrix":
        return cls(n, q, np.eye(n, dtype=np.int64))

    @classmethod
    def from_signed(cls, n: int, q: int, entries) -> "ModQMatrix":
        """Reduce arbitrary signed integer entries into [0, q)."""
        arr = np.asarray(entries, dtype=np.int64) % q
        return cls(n, q, arr)

    def _check(self, other: "ModQMatrix") -> None:
        if self.n != other.n:
            raise DimensionMismatch(f"{self.n} vs {other.n}")
        if self.q != other.q:
            raise ModulusMismatch(f"{self.q} vs {other.q}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModQMatrix):
            return NotImplemented
        return (self.n == other.n and self.q == other.q
                and bool(np.array_equal(self.entries, other.entries)))

    def __hash__(self):
        return hash((self.n, self.q, self.entries.tobytes()))

    def __repr__(self) -> str:
        return f"ModQMatrix(n={self.n}, q={self.q})"

    def __add__(self, other: "ModQMatrix") -> "ModQMatrix":
        self._check(other)
        return ModQMatrix(self.n, self.q, (self.entries + other.entries) % self.q)

    def __sub__(self, other: "ModQMatrix") -> "ModQMatrix":
        self._check(other)
        return ModQMatrix(self.n, self.q, (self.entries - other.entries) % self.q)

    def __neg__(self) -> "ModQMatrix":
        return ModQMatrix(self.n, self.q, (-self.entries) % self.q)

    def __matmul__(self, other: "ModQMatrix") -> "ModQMatrix":
        self._check(other)
        n, q = self.n, self.q
        peak = n * (q - 1) ** 2
        if peak <= 2 ** 53:
            # exact in float64; BLAS makes this the fast path for default params
            prod = self.entries.astype(np.float64) @ other.entries.astype(np.float64)
            red = np.mod(prod, float(q)).astype(np.int64)
        elif peak < 2 ** 63:
            red = (self.entries @ other.entries) % q
        else:
            obj = self.entries.astype(object) @ other.entries.astype(object)
            red = (obj % q).astype(np.int64)
        return ModQMatrix(n, q, red)

    def scale2(self) -> "ModQMatrix":
        """Entrywise doubling mod q (the protocol's noise factor 2)."""
        return ModQMatrix(self.n, self.q, (2 * self.entries) % self.q)

    def centered(self) -> np.ndarray:
        """Entries as centered representatives in (-q/2, q/2)."""
        return centered_array(self.entries, self.q)

    def inf_norm(self) -> int:
        """Max absolute centered entry."""
        return int(np.abs(self.centered()).max())


def add(a: ModQMatrix, b: ModQMatrix) -> ModQMatrix:
    return a + b


def sub(a: ModQMatrix, b: ModQMatrix) -> ModQMatrix:
    return a - b


def mul(a: ModQMatrix, b: ModQMatrix) -> ModQMatrix:
    return a @ b


def scale2(a: ModQMatrix) -> ModQMatrix:
    return a.scale2()


def inf_norm(a: ModQMatrix) -> int:
    return a.inf_norm()
