"""Gadget matrix operations and modulus switching.

The gadget matrix G = I_n (x) (1, 2, ..., 2^(logq-1)) is never materialized;
decomposition, application and Gaussian preimage sampling all work on its
block structure.  Bit order is little-endian within each block: bit j of
block i carries the 2^j coefficient of x[i].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError
from .gauss import GaussParam, build_cdt
from .rng import RngState
from .zq import Modulus, ZqVector, matmul_mod

GADGET_MIN_WIDTH = 4.0


@dataclass(frozen=True)
class GadgetShape:
    """Dimensions of the gadget matrix for (n, q)."""

    n: int
    mod: Modulus
    w: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "w", self.n * self.mod.logq)


def gadget_decompose(x: ZqVector) -> np.ndarray:
    """Binary expansion y in {0,1}^(n*logq) with G y = x (mod q)."""
    logq = x.mod.logq
    bits = (x.a[:, None] >> np.arange(logq, dtype=np.int64)) & 1
    return bits.reshape(-1).astype(np.int64)


def gadget_apply(shape: GadgetShape, y: np.ndarray) -> ZqVector:
    """G y mod q for a signed coefficient vector y of length n*logq."""
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (shape.w,):
        raise DimensionError(f"expected length {shape.w}, got {y.shape}")
    logq = shape.mod.logq
    q = shape.mod.q
    powers = np.array([pow(2, j, q) for j in range(logq)], dtype=np.int64)
    out = matmul_mod(y.reshape(shape.n, logq), powers[:, None], q)[:, 0]
    return ZqVector(shape.mod, out)


def gadget_gaussian_preimage(
    shape: GadgetShape, target: ZqVector, param: GaussParam, rng: RngState
) -> np.ndarray:
    """Random short y with G y = target (mod q), q a power of two.

    Works bit by bit: coefficient j of each block is drawn from the
    discrete Gaussian restricted to the residue class forced by the j-th
    carry, so the preimage identity holds exactly while every coefficient
    stays within the tail cut of the width parameter.
    """
    if not shape.mod.is_power_of_two:
        raise ParameterError(f"gadget preimage needs a power-of-two modulus, got {shape.mod.q}")
    if param.s < GADGET_MIN_WIDTH:
        raise ParameterError(f"gadget preimage width must be >= {GADGET_MIN_WIDTH}, got {param.s}")
    if len(target) != shape.n:
        raise DimensionError(f"target length {len(target)} != n = {shape.n}")
    tables = (build_cdt(param, parity=0), build_cdt(param, parity=1))
    logq = shape.mod.logq
    u = target.a.astype(np.int64).copy()
    z = np.empty((shape.n, logq), dtype=np.int64)
    for j in range(logq):
        par = u & 1
        # One 128-bit draw per coefficient, inverted against the residue
        # table its carry parity selects.
        lo, hi = rng.draw_u128(shape.n)
        zj = np.empty(shape.n, dtype=np.int64)
        for pbit in (0, 1):
            mask = par == pbit
            if mask.any():
                zj[mask] = tables[pbit].invert(lo[mask], hi[mask])
        z[:, j] = zj
        u = (u - zj) >> 1
    return z.reshape(-1)


def mod_switch_up(u: np.ndarray, p: int, q_mod: Modulus) -> ZqVector:
    """Entry-wise round(q*u/p) mod q with round-half-up on the exact rational."""
    q = q_mod.q
    out = [((2 * q * int(x) + p) // (2 * p)) % q for x in np.asarray(u).tolist()]
    return ZqVector(q_mod, np.array(out, dtype=np.int64))


def mod_switch_down(x: int, q_mod: Modulus, p: int) -> int:
    """round(p*x/q) mod p with round-half-up on the exact rational."""
    if not 0 <= x < q_mod.q:
        raise ParameterError(f"input {x} not canonical mod {q_mod.q}")
    return ((2 * p * int(x) + q_mod.q) // (2 * q_mod.q)) % p
