"""Seedable deterministic byte stream for all sampling in the package.

The stream is SHAKE256 run in counter mode: block k of the stream is
``shake_256(seed || le64(k)).digest(BLOCK_BYTES)``.  A stream is fully
determined by (seed, position), so every sampler built on top of it is
reproducible and golden-testable.  The stream construction is wire-format
relevant (the random oracle consumes it); its identity is recorded as the
``xof_id`` byte in serialized artifacts.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

from .errors import ParameterError

BLOCK_BYTES = 4096
SEED_BYTES = 32

# xof_id value for this construction, embedded in artifact headers.
XOF_SHAKE256_CTR = 1


class RngState:
    """Deterministic byte stream with an explicit position.

    A state is single-owner: concurrent consumers must use independent
    states derived with :meth:`child`.
    """

    def __init__(self, seed: bytes, position: int = 0):
        if len(seed) != SEED_BYTES:
            raise ParameterError(f"seed must be {SEED_BYTES} bytes, got {len(seed)}")
        self.seed = bytes(seed)
        self.position = int(position)

    def _block(self, index: int) -> bytes:
        return hashlib.shake_256(self.seed + struct.pack("<Q", index)).digest(BLOCK_BYTES)

    def draw(self, nbytes: int) -> bytes:
        """Return the next nbytes of the stream and advance the position."""
        if nbytes == 0:
            return b""
        start, end = self.position, self.position + nbytes
        first, last = start // BLOCK_BYTES, (end - 1) // BLOCK_BYTES
        buf = b"".join(self._block(k) for k in range(first, last + 1))
        off = start - first * BLOCK_BYTES
        self.position = end
        return buf[off : off + nbytes]

    def draw_u64(self, count: int) -> np.ndarray:
        """count uniform 64-bit words (little-endian), as a uint64 array."""
        return np.frombuffer(self.draw(8 * count), dtype="<u8").copy()

    def draw_u128(self, count: int) -> tuple[np.ndarray, np.ndarray]:
        """count uniform 128-bit words as (low, high) uint64 arrays."""
        words = np.frombuffer(self.draw(16 * count), dtype="<u8")
        return words[0::2].copy(), words[1::2].copy()

    def draw_uniform_mod(self, q: int, count: int) -> np.ndarray:
        """count uniform values in [0, q), 128 bits consumed per value.

        Reducing 128 bits mod q keeps the bias below q / 2^128 for every
        supported modulus (and exactly zero when q is a power of two).
        """
        lo, hi = self.draw_u128(count)
        if q <= 1 << 32:
            shift = (1 << 64) % q
            out = ((hi % q) * np.uint64(shift) + lo % np.uint64(q)) % np.uint64(q)
            return out.astype(np.int64)
        return np.array(
            [((int(h) << 64) | int(l)) % q for l, h in zip(lo, hi)], dtype=np.int64
        )

    def child(self, tag: bytes) -> "RngState":
        """Independent stream derived by domain-separated reseeding."""
        h = hashlib.shake_256(b"mafe/reseed/" + self.seed + b"/" + tag)
        return RngState(h.digest(SEED_BYTES))

    def __repr__(self):
        return f"RngState(seed={self.seed.hex()[:16]}..., position={self.position})"
