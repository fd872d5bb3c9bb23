"""Exact arithmetic over Z_q: dense matrices, vectors and centering.

Entries are stored as canonical representatives in [0, q) inside int64
arrays.  Products are computed exactly for any modulus up to 2^62 by
splitting operands into limbs small enough that every int64 accumulation
stays below 2^63 (the software equivalent of a double-width multiply);
the few cross-limb recombinations that would overflow go through Python
integers.  Centered representatives are computed on demand, never stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ModulusMismatchError, ParameterError

Q_MAX = 1 << 62


@dataclass(frozen=True)
class Modulus:
    """A modulus q with 2 < q <= 2^62 and logq = smallest k with 2^k >= q."""

    q: int
    logq: int = field(init=False)

    def __post_init__(self):
        if not (2 < self.q <= Q_MAX):
            raise ParameterError(f"modulus must satisfy 2 < q <= 2^62, got {self.q}")
        object.__setattr__(self, "logq", (self.q - 1).bit_length())

    @property
    def is_power_of_two(self) -> bool:
        return self.q & (self.q - 1) == 0

    def center(self, x: int) -> int:
        """Unique representative of x in (-q/2, q/2]; a q/2 tie maps to +q/2."""
        x = int(x) % self.q
        return x if x <= self.q // 2 else x - self.q

    def center_vec(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64) % self.q
        return np.where(a <= self.q // 2, a, a - self.q)


def _as_int64(entries, expect_dim: int) -> np.ndarray:
    a = np.asarray(entries, dtype=np.int64)
    if a.ndim != expect_dim:
        raise DimensionError(f"expected {expect_dim}-dimensional entries, got shape {a.shape}")
    return a


def _check_canonical(a: np.ndarray, q: int):
    if a.size and (int(a.min()) < 0 or int(a.max()) >= q):
        raise ParameterError("entries must be canonical representatives in [0, q)")


@dataclass
class ZqMatrix:
    """Dense row-major matrix over Z_q with canonical entries."""

    mod: Modulus
    a: np.ndarray

    def __post_init__(self):
        self.a = _as_int64(self.a, 2)
        _check_canonical(self.a, self.mod.q)

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ZqMatrix)
            and self.mod == other.mod
            and self.a.shape == other.a.shape
            and bool(np.array_equal(self.a, other.a))
        )


@dataclass
class ZqVector:
    """Column vector over Z_q with canonical entries."""

    mod: Modulus
    a: np.ndarray

    def __post_init__(self):
        self.a = _as_int64(self.a, 1)
        _check_canonical(self.a, self.mod.q)

    def __len__(self) -> int:
        return self.a.shape[0]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ZqVector)
            and self.mod == other.mod
            and bool(np.array_equal(self.a, other.a))
        )


# Signed integer vectors (discrete Gaussian outputs, preimages, noise) are
# plain 1-D int64 arrays; norm checks are explicit operations on them.
SignedVector = np.ndarray


def matmul_mod(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """Exact (a @ b) mod q for integer arrays, any 2 < q <= 2^62.

    Inputs are reduced mod q first, so signed operands are accepted.
    """
    a = np.asarray(a, dtype=np.int64) % q
    b = np.asarray(b, dtype=np.int64) % q
    inner = a.shape[-1]
    if inner != b.shape[0]:
        raise DimensionError(f"inner dimensions differ: {a.shape} @ {b.shape}")
    out_shape = a.shape[:-1] + b.shape[1:]
    if inner == 0:
        return np.zeros(out_shape, dtype=np.int64)
    qbits = (q - 1).bit_length()
    if 2 * qbits + inner.bit_length() <= 62:
        return (a @ b) % q
    # Limb width chosen so each partial product accumulated over the inner
    # dimension stays below 2^62.
    b_bits = max(1, (62 - inner.bit_length()) // 2)
    n_limbs = -(-qbits // b_bits)
    mask = (1 << b_bits) - 1
    a_limbs = [(a >> (b_bits * i)) & mask for i in range(n_limbs)]
    b_limbs = [(b >> (b_bits * j)) & mask for j in range(n_limbs)]
    acc = np.zeros(out_shape, dtype=object)
    for i in range(n_limbs):
        for j in range(n_limbs):
            shift = pow(2, b_bits * (i + j), q)
            part = (a_limbs[i] @ b_limbs[j]) % q
            acc = acc + part.astype(object) * shift
    return (acc % q).astype(np.int64)


def mat_mul(a: ZqMatrix, b: ZqMatrix) -> ZqMatrix:
    """Exact matrix product over Z_q."""
    if a.mod != b.mod:
        raise ModulusMismatchError(f"moduli differ: {a.mod.q} vs {b.mod.q}")
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    return ZqMatrix(a.mod, matmul_mod(a.a, b.a, a.mod.q))


def vec_mat_mul(s: ZqVector, a: ZqMatrix) -> ZqVector:
    """Row-vector times matrix: (s^T A)^T over Z_q."""
    if s.mod != a.mod:
        raise ModulusMismatchError(f"moduli differ: {s.mod.q} vs {a.mod.q}")
    if len(s) != a.rows:
        raise DimensionError(f"vector length {len(s)} does not match {a.rows} rows")
    return ZqVector(s.mod, matmul_mod(s.a[None, :], a.a, a.mod.q)[0])


def inner_product(u: ZqVector, v: ZqVector) -> int:
    """<u, v> mod q."""
    if u.mod != v.mod:
        raise ModulusMismatchError(f"moduli differ: {u.mod.q} vs {v.mod.q}")
    if len(u) != len(v):
        raise DimensionError(f"vector lengths differ: {len(u)} vs {len(v)}")
    return int(matmul_mod(u.a[None, :], v.a[:, None], u.mod.q)[0, 0])


def center(mod: Modulus, x: int) -> int:
    """Centered representative of x in (-q/2, q/2]."""
    return mod.center(x)


def vec_add(u: ZqVector, v: ZqVector) -> ZqVector:
    if u.mod != v.mod:
        raise ModulusMismatchError(f"moduli differ: {u.mod.q} vs {v.mod.q}")
    if len(u) != len(v):
        raise DimensionError(f"vector lengths differ: {len(u)} vs {len(v)}")
    return ZqVector(u.mod, (u.a + v.a) % u.mod.q)
