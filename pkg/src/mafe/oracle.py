"""Deterministic hash onto short Gaussian vectors.

Maps (gid, key vector) pairs to vectors distributed as D_{Z,chi'}^{m'}:
the injectively encoded input seeds a SHAKE256 counter-mode stream, and
each output coordinate consumes 128 stream bits through the same CDT
inversion used by the rest of the package.  Identical inputs always give
bitwise-identical outputs, which is what binds key shares issued by
independent authorities to one user.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .gauss import GaussParam, sample_z_vector
from .rng import SEED_BYTES, RngState
from .zq import ZqVector

DEFAULT_DOMAIN_TAG = b"mafe/hash-to-gaussian/v1"


@dataclass(frozen=True)
class GlobalId:
    """User identifier of the configured byte length."""

    gid: bytes

    def __post_init__(self):
        if not isinstance(self.gid, bytes):
            raise ParameterError("gid must be bytes")


@dataclass(frozen=True)
class OracleConfig:
    chi_prime: GaussParam
    m_prime: int
    domain_tag: bytes = DEFAULT_DOMAIN_TAG

    def __post_init__(self):
        if self.chi_prime.s < 4:
            raise ParameterError(f"oracle width must be >= 4, got {self.chi_prime.s}")
        if self.m_prime <= 0:
            raise ParameterError(f"m' must be positive, got {self.m_prime}")


def encode_oracle_input(cfg: OracleConfig, gid: GlobalId, v: ZqVector) -> bytes:
    """Injective byte encoding: tag || len(gid) || gid || n || entries.

    All integers are 8-byte little-endian; the length prefix keeps
    (gid1 || x, v) and (gid1, x || v) distinct.
    """
    parts = [
        cfg.domain_tag,
        struct.pack("<Q", len(gid.gid)),
        gid.gid,
        struct.pack("<Q", len(v)),
    ]
    parts.append(v.a.astype("<u8").tobytes())
    return b"".join(parts)


def hash_to_gaussian(cfg: OracleConfig, gid: GlobalId, v: ZqVector) -> np.ndarray:
    """Deterministic D_{Z,chi'}^{m'}-distributed digest of (gid, v)."""
    seed = hashlib.shake_256(encode_oracle_input(cfg, gid, v)).digest(SEED_BYTES)
    return sample_z_vector(cfg.chi_prime, cfg.m_prime, RngState(seed))
