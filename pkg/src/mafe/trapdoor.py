"""Gadget-trapdoor generation and discrete Gaussian preimage sampling.

A trapdoor matrix is A = [Abar | G - Abar R] with Abar uniform and R a
short secret, so A [R; I] = G (mod q) holds exactly.  Preimage sampling
follows the convolution method: a perturbation with covariance parameter
s^2 I - s_g^2 T T^T (T = [R; I]) plus a gadget preimage of the adjusted
target, giving an exact preimage with near-spherical width s.

The width precondition s >= SPHERICAL_MARGIN * s_g * s1(T) is validated
against the largest singular value s1(T) measured at generation time and
stored with the trapdoor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, WidthError
from .gadget import GadgetShape, gadget_gaussian_preimage
from .gauss import GaussParam, sample_z_vector
from .rng import RngState
from .zq import Modulus, ZqMatrix, ZqVector, matmul_mod

# Width of the per-bit gadget coset sampler.
GADGET_WIDTH = 8.0
# Width of the randomized-rounding dither inside perturbation sampling.
DITHER_WIDTH = 4.0
# Safety factor in the spherical-output width validation.
SPHERICAL_MARGIN = 1.2


@dataclass
class TrapMatrix:
    """Public matrix A = [Abar | G - Abar R] of shape n x (m_bar + w)."""

    mat: ZqMatrix
    n: int
    m_bar: int

    @property
    def w(self) -> int:
        return self.mat.cols - self.m_bar

    @property
    def m_total(self) -> int:
        return self.mat.cols


@dataclass
class Trapdoor:
    """Secret R with A [R; I_w] = G (mod q), plus sampling metadata."""

    r: np.ndarray
    s_td: float
    s1_t: float
    _chol_cache: dict = field(default_factory=dict, repr=False)

    @property
    def m_bar(self) -> int:
        return self.r.shape[0]

    @property
    def w(self) -> int:
        return self.r.shape[1]


def gadget_row_dense(mod: Modulus, n: int) -> np.ndarray:
    """Dense n x (n*logq) gadget matrix, for verification and embedding."""
    logq = mod.logq
    g = np.zeros((n, n * logq), dtype=np.int64)
    powers = np.array([pow(2, j, mod.q) for j in range(logq)], dtype=np.int64)
    for i in range(n):
        g[i, i * logq : (i + 1) * logq] = powers
    return g


def trap_gen(
    n: int, mod: Modulus, s_td: GaussParam, rng: RngState
) -> tuple[TrapMatrix, Trapdoor]:
    """Sample (A, R) with the exact trapdoor relation A [R; I] = G."""
    w = n * mod.logq
    m_bar = w
    abar = rng.draw_uniform_mod(mod.q, n * m_bar).reshape(n, m_bar)
    r = sample_z_vector(s_td, m_bar * w, rng).reshape(m_bar, w)
    a2 = (gadget_row_dense(mod, n) - matmul_mod(abar, r, mod.q)) % mod.q
    a = ZqMatrix(mod, np.hstack([abar, a2]))
    t = np.vstack([r, np.eye(w, dtype=np.int64)]).astype(np.float64)
    s1_t = float(np.linalg.svd(t, compute_uv=False)[0])
    return TrapMatrix(a, n, m_bar), Trapdoor(r=r, s_td=s_td.s, s1_t=s1_t)


def min_preimage_width(td: Trapdoor) -> float:
    """Smallest width accepted by sample_pre for this trapdoor."""
    return SPHERICAL_MARGIN * GADGET_WIDTH * td.s1_t


def _perturbation_chol(tm: TrapMatrix, td: Trapdoor, s: float) -> np.ndarray:
    key = (s, GADGET_WIDTH, DITHER_WIDTH)
    chol = td._chol_cache.get(key)
    if chol is None:
        m_total = tm.m_total
        t = np.vstack([td.r, np.eye(tm.w, dtype=np.int64)]).astype(np.float64)
        cov = (s * s - DITHER_WIDTH * DITHER_WIDTH) * np.eye(m_total)
        cov -= (GADGET_WIDTH * GADGET_WIDTH) * (t @ t.T)
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise WidthError(
                f"width {s} leaves the perturbation covariance not positive definite "
                f"(need s > sqrt(s_g^2 s1(T)^2 + r^2) ~ "
                f"{math.hypot(GADGET_WIDTH * td.s1_t, DITHER_WIDTH):.1f})"
            ) from exc
        td._chol_cache[key] = chol
    return chol


def _standard_normals(count: int, rng: RngState) -> np.ndarray:
    """count N(0,1) deviates via Box-Muller, 128 stream bits each."""
    u = rng.draw_u64(2 * count).astype(np.float64)
    u1 = (u[0::2] + 1.0) / 2.0**64
    u2 = u[1::2] / 2.0**64
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u2)


def _randomized_round(c: np.ndarray, r_width: float, rng: RngState) -> np.ndarray:
    """Round each real center to an integer with a width-r Gaussian dither."""
    k = min(math.ceil(13.3 * r_width), 64)
    base = np.floor(c)
    frac = c - base
    offsets = np.arange(-k, k + 2, dtype=np.float64)
    delta = offsets[None, :] - frac[:, None]
    weights = np.exp(-(math.pi / (r_width * r_width)) * delta * delta)
    cum = np.cumsum(weights, axis=1)
    u = rng.draw_u64(len(c)).astype(np.float64) / 2.0**64
    pick = (cum < (u * cum[:, -1])[:, None]).sum(axis=1)
    return (base + offsets[pick]).astype(np.int64)


def sample_pre(
    tm: TrapMatrix, td: Trapdoor, y: ZqVector, s: GaussParam, rng: RngState
) -> np.ndarray:
    """Short x with A x = y (mod q), drawn near D_{Z,s}^m on that coset.

    The preimage identity is exact in every invocation; the width
    precondition is validated against the stored trapdoor quality.
    """
    if len(y) != tm.n:
        raise DimensionError(f"target length {len(y)} != n = {tm.n}")
    floor = min_preimage_width(td)
    if s.s < floor:
        raise WidthError(
            f"preimage width {s.s} below {SPHERICAL_MARGIN} * s_g * s1(T) = {floor:.1f}"
        )
    mod = tm.mat.mod
    chol = _perturbation_chol(tm, td, s.s)
    g = _standard_normals(tm.m_total, rng)
    c = (chol @ g) / math.sqrt(2.0 * math.pi)
    p = _randomized_round(c, DITHER_WIDTH, rng)
    residual = (y.a - matmul_mod(tm.mat.a, p[:, None], mod.q)[:, 0]) % mod.q
    shape = GadgetShape(tm.n, mod)
    z = gadget_gaussian_preimage(shape, ZqVector(mod, residual), GaussParam(GADGET_WIDTH), rng)
    x = p.copy()
    x[: tm.m_bar] += td.r @ z
    x[tm.m_bar :] += z
    return x
