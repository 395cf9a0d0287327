"""Seeded and fresh sampling of uniform and discrete-Gaussian matrices.

All seeded randomness flows through one SHAKE-256 expander so that any
(tag, seed) pair yields the same byte stream on every platform.  Gaussian
sampling is inverse-CDT on a 64-bit fixed-point cumulative table: the
table is plain integer data, so seeded draws are bit-exact, unlike
rejection samplers whose float rounding varies across platforms.
"""
from __future__ import annotations

import hashlib
import math
import secrets
from dataclasses import dataclass

import numpy as np

from .errors import EmptyField
from .modq import ModQMatrix
from .params import ProtocolParams

_U64_MAX = 2 ** 64 - 1


class StreamExpander:
    """Unbounded deterministic byte stream from SHAKE-256(tag, seed).

    Single-owner: reading advances internal position.  Distinct tags give
    independent streams for the same seed.
    """

    def __init__(self, tag: bytes, seed: bytes) -> None:
        self._shake = hashlib.shake_256()
        self._shake.update(len(tag).to_bytes(4, "big") + tag + seed)
        self._buf = b""
        self._off = 0

    def read(self, k: int) -> bytes:
        need = self._off + k
        if need > len(self._buf):
            # SHAKE output is prefix-consistent, so re-digesting extends the stream
            self._buf = self._shake.digest(max(need, 2 * len(self._buf), 4096))
        out = self._buf[self._off:need]
        self._off = need
        return out

    def read_u64(self, count: int) -> np.ndarray:
        return np.frombuffer(self.read(8 * count), dtype=">u8").astype(np.uint64)

    def read_bits(self, count: int) -> np.ndarray:
        raw = np.frombuffer(self.read((count + 7) // 8), dtype=np.uint8)
        return np.unpackbits(raw)[:count]


@dataclass(frozen=True)
class GaussianTable:
    """Cumulative 64-bit table for the integer Gaussian with weight exp(-pi x^2 / tau^2).

    Support is the integers in [-cutoff*tau, cutoff*tau]; the final
    cumulative weight is pinned to 2^64 - 1 and the sequence is strictly
    increasing (tail increments are clamped up to 1 so lookups stay
    well-defined; the distortion is far below 2^-64 per point).

    Truncation error: the discarded mass is bounded by the geometric-decay
    tail estimate sum_{|x| > c} exp(-pi x^2 / tau^2) < 2 exp(-pi c^2 / tau^2)
    / (1 - exp(-pi (2c+1) / tau^2)) with c = cutoff * tau.  For cutoff 10
    the exponent is -100 pi, so the statistical distance to the ideal
    integer Gaussian is below 2^-453, far under the 2^-100 target; no
    runtime test is needed.
    """

    tau: float
    cutoff: int
    support: np.ndarray
    cdf: np.ndarray

    @classmethod
    def build(cls, tau: float, cutoff: int) -> "GaussianTable":
        c = int(math.floor(cutoff * tau))
        support = np.arange(-c, c + 1, dtype=np.int64)
        cum = _scaled_cumulative_weights(tau, c)
        return cls(tau=tau, cutoff=cutoff, support=support,
                   cdf=np.array([np.uint64(c) for c in cum], dtype=np.uint64))

    def sample(self, draws: np.ndarray) -> np.ndarray:
        """Map uniform 64-bit draws to signed support values (smallest i with cdf[i] >= u)."""
        idx = np.searchsorted(self.cdf, draws, side="left")
        return self.support[idx]


def _scaled_cumulative_weights(tau: float, c: int, prec: int = 300) -> list[int]:
    """Integer cumulative weights rounded from `prec`-bit reals.

    At 300 bits of working precision the rounding to the 64-bit scale is
    exact barring ties within ~2^-230 of a boundary; a higher-precision
    recomputation in the test suite cross-checks every table entry.
    """
    import mpmath

    with mpmath.workprec(prec):
        t2 = mpmath.mpf(tau) ** 2
        weights = [mpmath.exp(-mpmath.pi * (x * x) / t2) for x in range(-c, c + 1)]
        total = mpmath.fsum(weights)
        cum: list[int] = []
        acc = mpmath.mpf(0)
        for w in weights:
            acc += w
            cum.append(int(mpmath.nint(acc / total * _U64_MAX)))
    # pin the anchor, then force strict monotonicity from both ends (the
    # far tails round to flat runs of 0 or 2^64-1)
    for i in range(1, len(cum)):
        cum[i] = max(cum[i], cum[i - 1] + 1)
    cum[-1] = _U64_MAX
    for i in range(len(cum) - 2, -1, -1):
        cum[i] = min(cum[i], cum[i + 1] - 1)
    if cum[0] < 0:
        raise ValueError("support too wide for 64-bit cumulative weights")
    return cum


def _table_for(p: ProtocolParams) -> GaussianTable:
    key = (p.tau, p.tail_cutoff)
    tbl = _TABLE_CACHE.get(key)
    if tbl is None:
        tbl = GaussianTable.build(p.tau, p.tail_cutoff)
        _TABLE_CACHE[key] = tbl
    return tbl


_TABLE_CACHE: dict = {}


def uniform_ints(expander: StreamExpander, count: int, q: int) -> np.ndarray:
    """count i.i.d. uniform values on [0, q) by rejection on byte-width draws."""
    nbytes = (max(q - 1, 1).bit_length() + 7) // 8
    width = 1 << (8 * nbytes)
    limit = (width // q) * q  # accept region; acceptance probability > 1/2
    out = np.empty(count, dtype=np.int64)
    filled = 0
    while filled < count:
        want = count - filled
        # oversample slightly to cover rejections in one pass most of the time
        batch = want + 8 + want // 8
        raw = np.frombuffer(expander.read(nbytes * batch), dtype=np.uint8)
        raw = raw.reshape(batch, nbytes).astype(np.uint64)
        vals = np.zeros(batch, dtype=np.uint64)
        for b in range(nbytes):
            vals = (vals << np.uint64(8)) | raw[:, b]
        accepted = vals[vals < limit]
        take = min(want, accepted.size)
        out[filled:filled + take] = (accepted[:take] % q).astype(np.int64)
        filled += take
    return out


def gaussian_ints(expander: StreamExpander, count: int, table: GaussianTable) -> np.ndarray:
    """count signed integers from the truncated discrete Gaussian, one u64 per draw."""
    return table.sample(expander.read_u64(count))


def uniform_matrix(p: ProtocolParams, tag: bytes, seed: bytes) -> ModQMatrix:
    """Deterministic n x n uniform matrix over Z_q from (tag, seed), row-major fill."""
    if not seed:
        raise EmptyField("seed must be nonempty")
    exp = StreamExpander(tag, seed)
    vals = uniform_ints(exp, p.n * p.n, p.q)
    return ModQMatrix(p.n, p.q, vals.reshape(p.n, p.n))


def gaussian_matrix_from(p: ProtocolParams, expander: StreamExpander) -> ModQMatrix:
    """Next n x n Gaussian matrix drawn from an already-open expander stream.

    Kept separate from gaussian_matrix so several matrices can be drawn in
    a fixed order from one stream (registration draws the secret then the
    noise from the same seed).
    """
    signed = gaussian_ints(expander, p.n * p.n, _table_for(p))
    return ModQMatrix.from_signed(p.n, p.q, signed.reshape(p.n, p.n))


def gaussian_matrix(p: ProtocolParams, tag: bytes, seed: bytes | None = None) -> ModQMatrix:
    """n x n matrix with entries from the integer Gaussian D_{Z,tau} reduced mod q.

    Deterministic when a seed is supplied; fresh entropy otherwise.
    """
    if seed is None:
        seed = secrets.token_bytes(32)
    return gaussian_matrix_from(p, StreamExpander(tag, seed))


GEN_TAG = b"LSRP-gen"


def derive_registration_seed(client_id: bytes, salt: bytes, password: bytes) -> bytes:
    """32-byte registration seed from (id, salt, password).

    Fields are length-prefixed (4-byte big-endian) so the encoding is
    injective: ("ab","c") and ("a","bc") can never collide.
    """
    if not client_id:
        raise EmptyField("id must be nonempty")
    if not salt:
        raise EmptyField("salt must be nonempty")
    shake = hashlib.shake_256()
    shake.update(GEN_TAG)
    for field in (client_id, salt, password):
        shake.update(len(field).to_bytes(4, "big") + field)
    return shake.digest(32)


def fresh_salt(p: ProtocolParams) -> bytes:
    """salt_len bytes from the OS CSPRNG."""
    return secrets.token_bytes(p.salt_len)
