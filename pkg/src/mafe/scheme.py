"""Multi-authority attribute-based inner-product functional encryption.

Implements the five algorithms (global setup, per-authority setup, key
generation, encryption, decryption) for subset policies over Z_q^n, in two
modes sharing one code path:

* noisy mode - decryption of a ciphertext for u under a key share set for
  v returns Gamma with center(Gamma - u^T v) within the additive bound B0;
* exact mode - plaintexts and key vectors live in Z_p^n, the plaintext is
  embedded through modulus switching, and decryption returns u^T v mod p
  exactly whenever q > n p^2 + 2 p B0.

Every key share satisfies A k = P G^-1(v) + B H(gid, v) (mod q) exactly;
that identity is what decryption relies on and what verify_share checks.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .errors import (
    DimensionError,
    ParameterError,
    PolicyError,
    ShareMismatchError,
)
from .gadget import GadgetShape, gadget_decompose, mod_switch_down, mod_switch_up
from .gauss import GaussParam, sample_z_vector
from .oracle import DEFAULT_DOMAIN_TAG, GlobalId, OracleConfig, hash_to_gaussian
from .rng import RngState
from .trapdoor import (
    GADGET_WIDTH,
    SPHERICAL_MARGIN,
    TrapMatrix,
    Trapdoor,
    min_preimage_width,
    sample_pre,
    trap_gen,
)
from .zq import Modulus, ZqMatrix, ZqVector, matmul_mod

MODE_NOISY = "noisy"
MODE_EXACT = "exact"

# Trapdoor widths are derived, never configured: the standard width when
# the preimage width chi leaves room for it, narrower otherwise.
_TRAPDOOR_WIDTH_DEFAULT = 4.0
_TRAPDOOR_WIDTH_FLOOR = 0.25
_S1_FLUCTUATION_SLACK = 4.0


@dataclass(frozen=True)
class GlobalParams:
    """All public parameters shared by every algorithm."""

    lambda_: int
    n: int
    mod: Modulus
    m: int
    m_a: int
    m_prime: int
    chi: GaussParam
    chi_prime: GaussParam
    p: int | None
    id_len: int
    max_attrs: int
    s_td: float
    b0: int
    oracle_cfg: OracleConfig

    @property
    def gadget(self) -> GadgetShape:
        return GadgetShape(self.n, self.mod)

    def check_id(self, ident: bytes, what: str):
        if not isinstance(ident, bytes) or len(ident) != self.id_len:
            raise ParameterError(f"{what} must be exactly {self.id_len} bytes")


@dataclass(frozen=True)
class AuthorityPublicKey:
    aid: bytes
    a: TrapMatrix
    b: ZqMatrix
    p_mat: ZqMatrix


@dataclass(frozen=True)
class AuthorityKeyPair:
    pk: AuthorityPublicKey
    msk: Trapdoor

    @property
    def aid(self) -> bytes:
        return self.pk.aid


@dataclass(frozen=True)
class FunctionalKeyShare:
    """One authority's short preimage for a (gid, key-vector) pair."""

    aid: bytes
    gid: bytes
    v: ZqVector
    k: np.ndarray


@dataclass(frozen=True)
class Ciphertext:
    attr_aids: tuple[bytes, ...]
    c1: dict[bytes, ZqVector]
    c2: ZqVector
    c3: ZqVector
    mode: str


def _derive_trapdoor_width(chi_s: float, m_bar: int, w: int) -> float:
    """Widest trapdoor width whose expected quality still admits chi.

    The preimage sampler needs chi >= SPHERICAL_MARGIN * s_g * s1([R; I]),
    and s1 grows with the width R is sampled at; when the default width
    does not fit, the trapdoor is generated narrower (degenerate at desk
    scale, where it trades away security margin that is out of scope
    anyway for the exact preimage identity the scheme needs).
    """
    budget = chi_s / (SPHERICAL_MARGIN * GADGET_WIDTH)
    sigma_default = _TRAPDOOR_WIDTH_DEFAULT / math.sqrt(2 * math.pi)
    s1_default = math.hypot(1.0, sigma_default * (math.sqrt(m_bar) + math.sqrt(w)) + _S1_FLUCTUATION_SLACK)
    if budget >= s1_default:
        return _TRAPDOOR_WIDTH_DEFAULT
    spare = math.sqrt(max(budget * budget - 1.0, 0.0)) - _S1_FLUCTUATION_SLACK
    if spare <= 0:
        return _TRAPDOOR_WIDTH_FLOOR
    sigma = spare / (math.sqrt(m_bar) + math.sqrt(w))
    return max(sigma * math.sqrt(2 * math.pi), _TRAPDOOR_WIDTH_FLOOR)


def noise_bound(
    lambda_: int, chi_s: float, m: int, chi_prime_s: float, m_prime: int, m_a: int, attr_count: int
) -> int:
    """The decryption noise bound

        ceil(sqrt(lambda)) chi m  +  lambda chi chi' m'  +  lambda chi^2 m_A L

    with sqrt(lambda) rounded up; the third term uses the key-share length
    m_A.  Exact integer arithmetic whenever the widths are integral."""
    sqrt_lam = math.isqrt(lambda_)
    if sqrt_lam * sqrt_lam < lambda_:
        sqrt_lam += 1
    chi = Fraction(chi_s)
    chi_p = Fraction(chi_prime_s)
    total = (
        sqrt_lam * chi * m
        + lambda_ * chi * chi_p * m_prime
        + lambda_ * chi * chi * m_a * attr_count
    )
    return math.ceil(total)


def compute_b0(gp: GlobalParams, attr_count: int) -> int:
    """Decryption noise bound for ciphertexts carrying attr_count authorities."""
    return noise_bound(
        gp.lambda_, gp.chi.s, gp.m, gp.chi_prime.s, gp.m_prime, gp.m_a, attr_count
    )


def inner_product_mod(gp: GlobalParams, u: ZqVector, v: ZqVector, mode: str) -> int:
    """Reference value a correct decryption approximates or equals:
    u^T v mod p in exact mode, mod q in noisy mode."""
    total = int(np.dot(u.a.astype(object), v.a.astype(object)))
    if mode == MODE_EXACT:
        if gp.p is None:
            raise ParameterError("exact mode requires a plaintext modulus")
        return total % gp.p
    return total % gp.mod.q


def inner_gap_centered(u0: ZqVector, u1: ZqVector, v: ZqVector) -> int:
    """center((u0 - u1)^T v mod q): the functional gap between two
    plaintexts on a key vector, measured as a centered magnitude."""
    if u0.mod != u1.mod or u0.mod != v.mod:
        raise ParameterError("vectors must share one modulus")
    if len(u0) != len(u1) or len(u0) != len(v):
        raise DimensionError("vectors must share one length")
    q = u0.mod.q
    diff = (u0.a - u1.a) % q
    val = int(matmul_mod(diff[None, :], v.a[:, None], q)[0, 0])
    return u0.mod.center(val)


def global_setup(
    *,
    lambda_: int = 16,
    n: int = 8,
    q: int = 1 << 32,
    chi_s: float = 20,
    chi_prime_s: float = 20,
    m_prime: int = 2048,
    p: int | None = None,
    max_attrs: int = 3,
    id_len: int = 32,
    domain_tag: bytes = DEFAULT_DOMAIN_TAG,
) -> GlobalParams:
    """Validate a parameter profile and derive all dependent quantities.

    Raises ParameterError naming the violated inequality; the m' security
    bound is reported as a warning only.
    """
    if lambda_ < 1 or n < 1 or m_prime < 1 or max_attrs < 1 or id_len < 1:
        raise ParameterError("lambda, n, m', max_attrs and id_len must be positive")
    mod = Modulus(q)
    if not mod.is_power_of_two:
        raise ParameterError(f"q must be a power of two for gadget preimage sampling, got {q}")
    m = n * mod.logq
    m_a = 2 * m
    chi = GaussParam(float(chi_s))
    chi_prime = GaussParam(float(chi_prime_s))
    chi0 = math.sqrt(n * mod.logq)
    if chi.s < chi0:
        raise ParameterError(
            f"chi.s = {chi.s} below the preimage width floor sqrt(n log2 q) = {chi0:.2f}"
        )
    pd_floor = SPHERICAL_MARGIN * GADGET_WIDTH * math.sqrt(2.0)
    if chi.s < pd_floor:
        raise ParameterError(
            f"chi.s = {chi.s} below the trapdoor sampling floor "
            f"{SPHERICAL_MARGIN} * s_g * sqrt(2) = {pd_floor:.2f}"
        )
    if chi_prime.s < 4:
        raise ParameterError(f"chi'.s = {chi_prime.s} below the oracle width floor 4")
    if m_prime <= 6 * n * mod.logq:
        warnings.warn(
            f"m' = {m_prime} does not exceed the security-side bound "
            f"6 n log2 q = {6 * n * mod.logq}",
            stacklevel=2,
        )
    s_td = _derive_trapdoor_width(chi.s, m, m)
    oracle_cfg = OracleConfig(chi_prime, m_prime, domain_tag)
    gp = GlobalParams(
        lambda_=lambda_,
        n=n,
        mod=mod,
        m=m,
        m_a=m_a,
        m_prime=m_prime,
        chi=chi,
        chi_prime=chi_prime,
        p=None,
        id_len=id_len,
        max_attrs=max_attrs,
        s_td=s_td,
        b0=0,
        oracle_cfg=oracle_cfg,
    )
    b0 = compute_b0(gp, max_attrs)
    gp = replace(gp, b0=b0)
    if p is not None:
        if not 2 <= p <= q:
            raise ParameterError(f"plaintext modulus p must satisfy 2 <= p <= q, got {p}")
        bound = n * p * p + 2 * p * b0
        if q <= bound:
            raise ParameterError(
                f"exactness condition violated: q = {q} must exceed "
                f"n p^2 + 2 p B0 = {bound}"
            )
        gp = replace(gp, p=p)
    return gp


def auth_setup(gp: GlobalParams, aid: bytes, rng: RngState) -> AuthorityKeyPair:
    """Generate one authority's key material (trapdoor plus uniform B, P)."""
    gp.check_id(aid, "authority id")
    tm, td = trap_gen(gp.n, gp.mod, GaussParam(gp.s_td), rng)
    floor = min_preimage_width(td)
    if gp.chi.s < floor:
        raise ParameterError(
            f"generated trapdoor needs preimage width {floor:.1f} > chi.s = {gp.chi.s}; "
            "regenerate with a different seed or a wider chi"
        )
    b = ZqMatrix(gp.mod, rng.draw_uniform_mod(gp.mod.q, gp.n * gp.m_prime).reshape(gp.n, gp.m_prime))
    p_mat = ZqMatrix(gp.mod, rng.draw_uniform_mod(gp.mod.q, gp.n * gp.m).reshape(gp.n, gp.m))
    return AuthorityKeyPair(AuthorityPublicKey(aid, tm, b, p_mat), td)


def _check_key_vector(gp: GlobalParams, v: ZqVector):
    if v.mod != gp.mod or len(v) != gp.n:
        raise DimensionError(f"key vector must have length {gp.n} over q = {gp.mod.q}")
    if gp.p is not None and v.a.size and int(v.a.max()) >= gp.p:
        raise ParameterError(f"key vector entries must lie in [0, p) with p = {gp.p}")


def keygen_target(gp: GlobalParams, pk: AuthorityPublicKey, gid: bytes, v: ZqVector) -> ZqVector:
    """The vector P G^-1(v) + B H(gid, v) that a key share must map to."""
    r = hash_to_gaussian(gp.oracle_cfg, GlobalId(gid), v)
    bits = gadget_decompose(v)
    target = (
        matmul_mod(pk.p_mat.a, bits[:, None], gp.mod.q)[:, 0]
        + matmul_mod(pk.b.a, r[:, None], gp.mod.q)[:, 0]
    ) % gp.mod.q
    return ZqVector(gp.mod, target)


def keygen(
    gp: GlobalParams,
    pk: AuthorityPublicKey,
    msk: Trapdoor,
    gid: bytes,
    v: ZqVector,
    rng: RngState,
) -> FunctionalKeyShare:
    """Issue one authority's key share for (gid, v).

    The returned share satisfies A k = P G^-1(v) + B H(gid, v) (mod q)
    exactly; the share is randomized but the target is deterministic in
    (gid, v).
    """
    gp.check_id(gid, "gid")
    _check_key_vector(gp, v)
    target = keygen_target(gp, pk, gid, v)
    k = sample_pre(pk.a, msk, target, gp.chi, rng)
    return FunctionalKeyShare(aid=pk.aid, gid=gid, v=v, k=k)


def verify_share(gp: GlobalParams, pk: AuthorityPublicKey, share: FunctionalKeyShare) -> bool:
    """True iff the share's preimage identity holds exactly under pk."""
    if share.k.shape != (gp.m_a,):
        return False
    lhs = matmul_mod(pk.a.mat.a, share.k[:, None], gp.mod.q)[:, 0]
    rhs = keygen_target(gp, pk, share.gid, share.v)
    return bool(np.array_equal(lhs, rhs.a))


def _embed_plaintext(gp: GlobalParams, u: ZqVector, mode: str) -> np.ndarray:
    """u^T G (noisy) or (round(q u / p))^T G (exact), as a length-m row."""
    if mode == MODE_EXACT:
        row = mod_switch_up(u.a, gp.p, gp.mod).a
    else:
        row = u.a
    logq = gp.mod.logq
    powers = np.array([pow(2, j, gp.mod.q) for j in range(logq)], dtype=object)
    blocks = (row.astype(object)[:, None] * powers[None, :]) % gp.mod.q
    return blocks.reshape(-1).astype(np.int64)


def encrypt(
    gp: GlobalParams,
    pks: list[AuthorityPublicKey],
    u: ZqVector,
    mode: str,
    rng: RngState,
    *,
    unsafe_zero_noise: bool = False,
) -> Ciphertext:
    """Encrypt u under the subset policy given by the public keys' aids.

    Stream consumption order (relevant for reproducibility): for each aid
    in sorted order, the per-authority secret then its noise; then the
    aggregate noise for c2 and c3.  With unsafe_zero_noise (a test hook,
    not safe for security) all noise is zero and only the secrets are
    drawn.
    """
    if mode not in (MODE_NOISY, MODE_EXACT):
        raise ParameterError(f"mode must be '{MODE_NOISY}' or '{MODE_EXACT}', got {mode!r}")
    if mode == MODE_EXACT and gp.p is None:
        raise ParameterError("exact mode requires global parameters with a plaintext modulus p")
    if not pks:
        raise ParameterError("attribute set must be nonempty")
    aids = [pk.aid for pk in pks]
    if len(set(aids)) != len(aids):
        raise ParameterError("duplicate authority ids in attribute set")
    if u.mod != gp.mod or len(u) != gp.n:
        raise DimensionError(f"plaintext must have length {gp.n} over q = {gp.mod.q}")
    limit = gp.p if mode == MODE_EXACT else gp.mod.q
    if u.a.size and int(u.a.max()) >= limit:
        raise ParameterError(f"plaintext entries must lie in [0, {limit})")

    q = gp.mod.q
    by_aid = {pk.aid: pk for pk in pks}
    order = tuple(sorted(aids))

    def noise(length: int) -> np.ndarray:
        if unsafe_zero_noise:
            return np.zeros(length, dtype=np.int64)
        return sample_z_vector(gp.chi, length, rng)

    c1: dict[bytes, ZqVector] = {}
    sum_b = np.zeros(gp.m_prime, dtype=np.int64)
    sum_p = np.zeros(gp.m, dtype=np.int64)
    for aid in order:
        pk = by_aid[aid]
        s = rng.draw_uniform_mod(q, gp.n)
        e1 = noise(gp.m_a)
        row = (matmul_mod(s[None, :], pk.a.mat.a, q)[0] + e1) % q
        c1[aid] = ZqVector(gp.mod, row)
        sum_b = (sum_b + matmul_mod(s[None, :], pk.b.a, q)[0]) % q
        sum_p = (sum_p + matmul_mod(s[None, :], pk.p_mat.a, q)[0]) % q
    c2 = ZqVector(gp.mod, (sum_b + noise(gp.m_prime)) % q)
    c3 = ZqVector(gp.mod, (sum_p + noise(gp.m) + _embed_plaintext(gp, u, mode)) % q)
    return Ciphertext(attr_aids=order, c1=c1, c2=c2, c3=c3, mode=mode)


def decrypt(
    gp: GlobalParams,
    shares: list[FunctionalKeyShare],
    gid: bytes,
    v: ZqVector,
    ct: Ciphertext,
) -> int:
    """Recover the (approximate or exact) inner product <u, v>.

    Requires one share per authority in the ciphertext's attribute set,
    all bound to the same (gid, v); extra shares are ignored.  Returns a
    canonical element of Z_q in noisy mode and of Z_p in exact mode.
    """
    gp.check_id(gid, "gid")
    _check_key_vector(gp, v)
    chosen: dict[bytes, FunctionalKeyShare] = {}
    for share in shares:
        if share.aid not in ct.attr_aids:
            continue
        if share.aid in chosen:
            raise ShareMismatchError(f"two shares supplied for authority {share.aid.hex()}")
        if share.gid != gid or share.v != v:
            raise ShareMismatchError(
                f"share for authority {share.aid.hex()} is bound to a different (gid, v)"
            )
        chosen[share.aid] = share
    missing = [aid for aid in ct.attr_aids if aid not in chosen]
    if missing:
        raise PolicyError(
            "policy unsatisfied: missing key shares for authorities "
            + ", ".join(aid.hex() for aid in missing)
        )
    q = gp.mod.q
    r = hash_to_gaussian(gp.oracle_cfg, GlobalId(gid), v)
    bits = gadget_decompose(v)
    gamma = int(matmul_mod(ct.c3.a[None, :], bits[:, None], q)[0, 0])
    gamma = (gamma + int(matmul_mod(ct.c2.a[None, :], r[:, None], q)[0, 0])) % q
    for aid in ct.attr_aids:
        term = int(matmul_mod(ct.c1[aid].a[None, :], chosen[aid].k[:, None], q)[0, 0])
        gamma = (gamma - term) % q
    if ct.mode == MODE_EXACT:
        if gp.p is None:
            raise ParameterError("ciphertext is exact-mode but gp has no plaintext modulus")
        return mod_switch_down(gamma, gp.mod, gp.p)
    return gamma
