"""Discrete Gaussian sampling over Z by 128-bit CDT inversion.

Width convention: a parameter s describes the density rho_s(x) =
exp(-pi x^2 / s^2), so the standard deviation is approximately
s / sqrt(2*pi).  This is the convention used consistently throughout the
package for noise, trapdoor and oracle sampling.

Sampling consumes 128 stream bits per draw and inverts a precomputed
cumulative table with binary search.  Tables are truncated at
tail_cut = ceil(13.3 * s), leaving tail mass far below 2^-128.  Widths too
large for an in-memory table (above WIDE_WIDTH) are sampled as
c * z1 + z0 with z1, z0 from in-table widths chosen so the combined
parameter matches s; such draws consume 2 x 128 bits.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import ParameterError
from .rng import RngState

TAIL_FACTOR = 13.3
MAX_TABLE_ENTRIES = 1 << 20
# Widths above this are sampled by two-table convolution.
WIDE_WIDTH = 4096.0
# Base width of the low-order convolution term.
WIDE_BASE = 64.0

_SCALE = 1 << 128


@dataclass(frozen=True)
class GaussParam:
    """Width parameter and tail cut for a centered discrete Gaussian."""

    s: float
    tail_cut: int = field(default=0)

    def __post_init__(self):
        if not self.s > 0:
            raise ParameterError(f"Gaussian width must be positive, got {self.s}")
        minimum = math.ceil(TAIL_FACTOR * self.s)
        if self.tail_cut == 0:
            object.__setattr__(self, "tail_cut", minimum)
        elif self.tail_cut < minimum:
            raise ParameterError(
                f"tail_cut {self.tail_cut} below ceil(13.3*s) = {minimum}"
            )

    @property
    def sigma(self) -> float:
        """Approximate standard deviation s / sqrt(2*pi)."""
        return self.s / math.sqrt(2.0 * math.pi)


class CdtTable:
    """Cumulative distribution table over a symmetric integer support.

    cum[i] is the cumulative mass of support[0..i] in 128-bit fixed point;
    the final entry equals 2^128 exactly (the clamped uint64 view used for
    vectorized search stores 2^128 - 1, a bias below 2^-120).
    """

    def __init__(self, support: np.ndarray, cum: list[int]):
        self.support = support
        self.cum = cum
        clamped = [min(c, _SCALE - 1) for c in cum]
        self.cum_hi = np.array([c >> 64 for c in clamped], dtype=np.uint64)
        self.cum_lo = np.array([c & ((1 << 64) - 1) for c in clamped], dtype=np.uint64)

    def masses(self) -> list[int]:
        prev = 0
        out = []
        for c in self.cum:
            out.append(c - prev)
            prev = c
        return out

    def sample_one(self, rng: RngState) -> int:
        u = int.from_bytes(rng.draw(16), "little")
        idx = bisect.bisect_right(self.cum, u)
        if idx >= len(self.support):
            idx = len(self.support) - 1
        return int(self.support[idx])

    def sample_many(self, count: int, rng: RngState) -> np.ndarray:
        lo, hi = rng.draw_u128(count)
        return _invert(self, lo, hi)

    def invert(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Map 128-bit uniforms (as low/high words) to support values."""
        return _invert(self, lo, hi)


def _build_table(s: float, tail_cut: int, parity: int | None) -> CdtTable:
    """Build a CDT for D_{Z,s} on [-tail_cut, tail_cut], optionally restricted
    to the even (parity=0) or odd (parity=1) residues mod 2."""
    if 2 * tail_cut + 1 > MAX_TABLE_ENTRIES:
        raise ParameterError(
            f"tail_cut {tail_cut} needs {2 * tail_cut + 1} entries, over the 2^20 budget"
        )
    with mpmath.workprec(250):
        inv = mpmath.pi / (mpmath.mpf(s) * mpmath.mpf(s))
        xs = [x for x in range(0, tail_cut + 1) if parity is None or x % 2 == parity]
        rho = [mpmath.exp(-inv * x * x) for x in xs]
        include_zero = xs and xs[0] == 0
        total = (rho[0] if include_zero else 0) + 2 * sum(rho[1 if include_zero else 0 :])
        # Integer masses mirrored around 0 so the table is exactly symmetric
        # and sums to 2^128.
        pos = [int(mpmath.nint(r / total * _SCALE)) for r in rho]
    if include_zero:
        m0 = _SCALE - 2 * sum(pos[1:])
        masses_pos = pos[1:]
        zero_mass = [m0]
        support_pos = xs[1:]
    else:
        half = sum(pos)
        pos[0] += _SCALE // 2 - half  # absorb rounding residue in the largest mass
        masses_pos = pos
        zero_mass = []
        support_pos = xs
    support = np.array(
        [-x for x in reversed(support_pos)] + ([0] if zero_mass else []) + support_pos,
        dtype=np.int64,
    )
    masses = list(reversed(masses_pos)) + zero_mass + masses_pos
    cum, acc = [], 0
    for m in masses:
        acc += m
        cum.append(acc)
    assert cum[-1] == _SCALE
    return CdtTable(support, cum)


_table_cache: dict[tuple[float, int, int | None], CdtTable] = {}


def build_cdt(param: GaussParam, parity: int | None = None) -> CdtTable:
    """Cumulative table for D_{Z,s} (optionally restricted to a residue mod 2).

    Raises ParameterError when the tail cut exceeds the 2^20-entry budget.
    """
    key = (float(param.s), int(param.tail_cut), parity)
    table = _table_cache.get(key)
    if table is None:
        table = _build_table(param.s, param.tail_cut, parity)
        _table_cache[key] = table
    return table


def _wide_split(s: float) -> tuple[int, GaussParam, GaussParam]:
    """Decompose a wide width as c*z1 + z0 with both parts in table range."""
    c = 1 << max(1, math.ceil(math.log2(s / WIDE_WIDTH)))
    s0 = WIDE_BASE
    s1 = math.sqrt(s * s - s0 * s0) / c
    return c, GaussParam(s1), GaussParam(s0)


def sample_z(param: GaussParam, rng: RngState) -> int:
    """One draw from the truncated D_{Z,s}; never exceeds tail_cut in magnitude."""
    if param.s <= WIDE_WIDTH:
        return build_cdt(param).sample_one(rng)
    c, p1, p0 = _wide_split(param.s)
    z = c * build_cdt(p1).sample_one(rng) + build_cdt(p0).sample_one(rng)
    return max(-param.tail_cut, min(param.tail_cut, z))


def sample_z_vector(param: GaussParam, length: int, rng: RngState) -> np.ndarray:
    """length independent draws; consumes the same stream bytes as repeated
    sample_z calls."""
    if length == 0:
        return np.zeros(0, dtype=np.int64)
    if param.s <= WIDE_WIDTH:
        return build_cdt(param).sample_many(length, rng)
    c, p1, p0 = _wide_split(param.s)
    lo, hi = rng.draw_u128(2 * length)
    t1, t0 = build_cdt(p1), build_cdt(p0)
    z1 = _invert(t1, lo[0::2], hi[0::2])
    z0 = _invert(t0, lo[1::2], hi[1::2])
    z = c * z1 + z0
    return np.clip(z, -param.tail_cut, param.tail_cut)


def _invert(table: CdtTable, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Vectorized 128-bit CDT inversion.

    The search runs on the high 64 bits; in the ~2^-44-probability event
    that the high word collides with a table boundary, the exact 128-bit
    comparison settles it.
    """
    idx = np.searchsorted(table.cum_hi, hi, side="right")
    risky = np.flatnonzero(table.cum_hi[np.maximum(idx, 1) - 1] == hi)
    for j in risky:
        u = (int(hi[j]) << 64) | int(lo[j])
        idx[j] = bisect.bisect_right(table.cum, u)
    idx = np.minimum(idx, len(table.support) - 1)
    return table.support[idx].astype(np.int64)
