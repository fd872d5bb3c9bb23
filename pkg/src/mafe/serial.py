"""Bit-exact serialization of all public artifacts.

Layout: an 8-byte header (magic "MAFE", format version, artifact kind,
xof id, reserved byte), a 16-byte digest of the owning global-parameter
body, then the kind-specific body.  All integers are little-endian;
matrix and vector entries are 8-byte canonical representatives; signed
vectors are zig-zag encoded into 8-byte words; attribute sets are
length-prefixed sorted lists.  Deserialization is strict: bad magic,
unknown versions or kinds, truncation, digest mismatches and dimension
inconsistencies all raise ArtifactError.
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ArtifactError
from .game import QueryRecord, QueryType, Transcript
from .rng import XOF_SHAKE256_CTR
from .scheme import (
    AuthorityKeyPair,
    AuthorityPublicKey,
    Ciphertext,
    FunctionalKeyShare,
    GlobalParams,
    global_setup,
)
from .trapdoor import TrapMatrix, Trapdoor
from .zq import Modulus, ZqMatrix, ZqVector

MAGIC = b"MAFE"
VERSION = 1

KIND_GP = 1
KIND_PK = 2
KIND_MSK = 3
KIND_SK = 4
KIND_CT = 5
KIND_TRANSCRIPT = 6

_KIND_NAMES = {
    KIND_GP: "gp",
    KIND_PK: "pk",
    KIND_MSK: "msk",
    KIND_SK: "sk",
    KIND_CT: "ct",
    KIND_TRANSCRIPT: "transcript",
}

_MODE_CODES = {"noisy": 1, "exact": 2}
_MODE_NAMES = {v: k for k, v in _MODE_CODES.items()}
_CLASS_CODES = {None: 0, QueryType.TYPE_I: 1, QueryType.TYPE_II: 2, QueryType.INADMISSIBLE: 3}
_CLASS_NAMES = {v: k for k, v in _CLASS_CODES.items()}


@dataclass(frozen=True)
class MasterSecret:
    """An authority's trapdoor bound to its identifier, as stored on disk."""

    aid: bytes
    td: Trapdoor


class _Writer:
    def __init__(self):
        self.parts: list[bytes] = []

    def u8(self, x: int):
        self.parts.append(struct.pack("<B", x))

    def u64(self, x: int):
        self.parts.append(struct.pack("<Q", x))

    def f64(self, x: float):
        self.parts.append(struct.pack("<d", x))

    def blob(self, b: bytes):
        self.u64(len(b))
        self.parts.append(bytes(b))

    def entries(self, a: np.ndarray):
        self.parts.append(np.ascontiguousarray(a, dtype="<i8").tobytes())

    def signed(self, a: np.ndarray):
        a = np.asarray(a, dtype=np.int64)
        self.u64(a.size)
        zz = ((a << 1) ^ (a >> 63)).view(np.uint64)
        self.parts.append(zz.astype("<u8").tobytes())

    def zqvec(self, v: ZqVector):
        self.u64(len(v))
        self.entries(v.a)

    def matrix(self, m: ZqMatrix):
        self.u64(m.rows)
        self.u64(m.cols)
        self.entries(m.a)

    def getvalue(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.off = 0

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.data):
            raise ArtifactError(
                f"truncated artifact: wanted {n} bytes at offset {self.off}, "
                f"have {len(self.data) - self.off}"
            )
        out = self.data[self.off : self.off + n]
        self.off += n
        return out

    def u8(self) -> int:
        return struct.unpack("<B", self.take(1))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def blob(self) -> bytes:
        return self.take(self.u64())

    def entries(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<i8").astype(np.int64)

    def signed(self) -> np.ndarray:
        count = self.u64()
        zz = np.frombuffer(self.take(8 * count), dtype="<u8").astype(np.uint64)
        return ((zz >> np.uint64(1)).astype(np.int64)) ^ -((zz & np.uint64(1)).astype(np.int64))

    def zqvec(self, mod: Modulus, expect_len: int | None = None) -> ZqVector:
        n = self.u64()
        if expect_len is not None and n != expect_len:
            raise ArtifactError(f"vector length {n} does not match parameters ({expect_len})")
        return ZqVector(mod, self.entries(n))

    def matrix(self, mod: Modulus, expect_shape: tuple[int, int] | None = None) -> ZqMatrix:
        rows, cols = self.u64(), self.u64()
        if expect_shape is not None and (rows, cols) != expect_shape:
            raise ArtifactError(
                f"matrix shape {(rows, cols)} does not match parameters {expect_shape}"
            )
        return ZqMatrix(mod, self.entries(rows * cols).reshape(rows, cols))

    def done(self):
        if self.off != len(self.data):
            raise ArtifactError(f"{len(self.data) - self.off} trailing bytes after artifact body")


def _gp_body(gp: GlobalParams) -> bytes:
    w = _Writer()
    w.u64(gp.lambda_)
    w.u64(gp.n)
    w.u64(gp.mod.q)
    w.u64(gp.m_prime)
    w.u64(gp.max_attrs)
    w.u64(gp.id_len)
    w.u64(gp.p if gp.p is not None else 0)
    w.f64(gp.chi.s)
    w.f64(gp.chi_prime.s)
    w.blob(gp.oracle_cfg.domain_tag)
    return w.getvalue()


def gp_digest(gp: GlobalParams) -> bytes:
    return hashlib.sha256(_gp_body(gp)).digest()[:16]


def _header(kind: int) -> bytes:
    return MAGIC + bytes([VERSION, kind, XOF_SHAKE256_CTR, 0])


def _serialize_pk(w: _Writer, pk: AuthorityPublicKey):
    w.blob(pk.aid)
    w.u64(pk.a.n)
    w.u64(pk.a.m_bar)
    w.matrix(pk.a.mat)
    w.matrix(pk.b)
    w.matrix(pk.p_mat)


def _read_pk(r: _Reader, gp: GlobalParams) -> AuthorityPublicKey:
    aid = r.blob()
    if len(aid) != gp.id_len:
        raise ArtifactError(f"authority id length {len(aid)} != {gp.id_len}")
    n, m_bar = r.u64(), r.u64()
    if n != gp.n or m_bar != gp.m:
        raise ArtifactError("trapdoor matrix split does not match parameters")
    mat = r.matrix(gp.mod, (gp.n, gp.m_a))
    b = r.matrix(gp.mod, (gp.n, gp.m_prime))
    p_mat = r.matrix(gp.mod, (gp.n, gp.m))
    return AuthorityPublicKey(aid, TrapMatrix(mat, n, m_bar), b, p_mat)


def _serialize_msk(w: _Writer, msk: MasterSecret):
    w.blob(msk.aid)
    w.u64(msk.td.r.shape[0])
    w.u64(msk.td.r.shape[1])
    w.signed(msk.td.r.reshape(-1))
    w.f64(msk.td.s_td)
    w.f64(msk.td.s1_t)


def _read_msk(r: _Reader, gp: GlobalParams) -> MasterSecret:
    aid = r.blob()
    if len(aid) != gp.id_len:
        raise ArtifactError(f"authority id length {len(aid)} != {gp.id_len}")
    rows, cols = r.u64(), r.u64()
    if (rows, cols) != (gp.m, gp.m):
        raise ArtifactError(f"trapdoor shape {(rows, cols)} does not match parameters")
    flat = r.signed()
    if flat.size != rows * cols:
        raise ArtifactError("trapdoor entry count does not match its declared shape")
    s_td, s1_t = r.f64(), r.f64()
    return MasterSecret(aid, Trapdoor(r=flat.reshape(rows, cols), s_td=s_td, s1_t=s1_t))


def _serialize_sk(w: _Writer, sk: FunctionalKeyShare):
    w.blob(sk.aid)
    w.blob(sk.gid)
    w.zqvec(sk.v)
    w.signed(sk.k)


def _read_sk(r: _Reader, gp: GlobalParams) -> FunctionalKeyShare:
    aid, gid = r.blob(), r.blob()
    if len(aid) != gp.id_len or len(gid) != gp.id_len:
        raise ArtifactError(f"identifier lengths must be {gp.id_len} bytes")
    v = r.zqvec(gp.mod, gp.n)
    k = r.signed()
    if k.size != gp.m_a:
        raise ArtifactError(f"key share length {k.size} != m_A = {gp.m_a}")
    return FunctionalKeyShare(aid=aid, gid=gid, v=v, k=k)


def _serialize_ct(w: _Writer, ct: Ciphertext):
    w.u8(_MODE_CODES[ct.mode])
    w.u64(len(ct.attr_aids))
    for aid in ct.attr_aids:
        w.blob(aid)
        w.zqvec(ct.c1[aid])
    w.zqvec(ct.c2)
    w.zqvec(ct.c3)


def _read_ct(r: _Reader, gp: GlobalParams) -> Ciphertext:
    mode_code = r.u8()
    if mode_code not in _MODE_NAMES:
        raise ArtifactError(f"unknown ciphertext mode code {mode_code}")
    count = r.u64()
    aids, c1 = [], {}
    for _ in range(count):
        aid = r.blob()
        if len(aid) != gp.id_len:
            raise ArtifactError(f"authority id length {len(aid)} != {gp.id_len}")
        aids.append(aid)
        c1[aid] = r.zqvec(gp.mod, gp.m_a)
    if list(aids) != sorted(aids) or len(set(aids)) != len(aids):
        raise ArtifactError("ciphertext attribute list must be sorted and duplicate-free")
    c2 = r.zqvec(gp.mod, gp.m_prime)
    c3 = r.zqvec(gp.mod, gp.m)
    return Ciphertext(attr_aids=tuple(aids), c1=c1, c2=c2, c3=c3, mode=_MODE_NAMES[mode_code])


def _serialize_transcript(w: _Writer, tr: Transcript, gp: GlobalParams):
    w.u8(tr.beta)
    w.u64(len(tr.authorities))
    for aid in sorted(tr.authorities):
        pair = tr.authorities[aid]
        w.u8(1 if aid in tr.corrupt_aids else 0)
        w.blob(serialize(pair.pk, gp))
        w.blob(serialize(MasterSecret(aid, pair.msk), gp))
    w.u64(len(tr.queries))
    for query in tr.queries:
        w.blob(query.gid)
        w.u64(len(query.attrs))
        for aid in sorted(query.attrs):
            w.blob(aid)
        w.zqvec(query.v)
        w.u8(_CLASS_CODES[query.classification])
    w.u64(len(tr.shares))
    for share in tr.shares:
        w.blob(serialize(share, gp))
    w.blob(serialize(tr.challenge_ct, gp))
    w.u64(len(tr.oracle_table))
    for (gid, vbytes), rvec in sorted(tr.oracle_table.items()):
        w.blob(gid)
        w.blob(vbytes)
        w.signed(rvec)


def _read_transcript(r: _Reader, gp: GlobalParams) -> Transcript:
    beta = r.u8()
    n_auth = r.u64()
    authorities, corrupt = {}, set()
    for _ in range(n_auth):
        is_corrupt = r.u8()
        pk = deserialize(r.blob(), gp=gp, expected_kind=KIND_PK)
        msk = deserialize(r.blob(), gp=gp, expected_kind=KIND_MSK)
        if pk.aid != msk.aid:
            raise ArtifactError("transcript pairs a public key with a foreign trapdoor")
        authorities[pk.aid] = AuthorityKeyPair(pk, msk.td)
        if is_corrupt:
            corrupt.add(pk.aid)
    queries = []
    for _ in range(r.u64()):
        gid = r.blob()
        attrs = frozenset(r.blob() for _ in range(r.u64()))
        v = r.zqvec(gp.mod, gp.n)
        cls = r.u8()
        if cls not in _CLASS_NAMES:
            raise ArtifactError(f"unknown query classification code {cls}")
        queries.append(QueryRecord(gid=gid, attrs=attrs, v=v, classification=_CLASS_NAMES[cls]))
    shares = [deserialize(r.blob(), gp=gp, expected_kind=KIND_SK) for _ in range(r.u64())]
    ct = deserialize(r.blob(), gp=gp, expected_kind=KIND_CT)
    oracle_table = {}
    for _ in range(r.u64()):
        gid = r.blob()
        vbytes = r.blob()
        oracle_table[(gid, vbytes)] = r.signed()
    return Transcript(
        beta=beta,
        authorities=authorities,
        corrupt_aids=frozenset(corrupt),
        queries=queries,
        shares=shares,
        challenge_ct=ct,
        oracle_table=oracle_table,
    )


def serialize(artifact, gp: GlobalParams | None = None) -> bytes:
    """Serialize any public artifact; gp is required for every kind but
    GlobalParams itself, and its digest is embedded for cross-checking."""
    if isinstance(artifact, GlobalParams):
        body = _gp_body(artifact)
        return _header(KIND_GP) + gp_digest(artifact) + body
    if gp is None:
        raise ArtifactError("serializing this artifact kind requires its GlobalParams")
    w = _Writer()
    if isinstance(artifact, AuthorityPublicKey):
        kind = KIND_PK
        _serialize_pk(w, artifact)
    elif isinstance(artifact, MasterSecret):
        kind = KIND_MSK
        _serialize_msk(w, artifact)
    elif isinstance(artifact, FunctionalKeyShare):
        kind = KIND_SK
        _serialize_sk(w, artifact)
    elif isinstance(artifact, Ciphertext):
        kind = KIND_CT
        _serialize_ct(w, artifact)
    elif isinstance(artifact, Transcript):
        kind = KIND_TRANSCRIPT
        _serialize_transcript(w, artifact, gp)
    else:
        raise ArtifactError(f"cannot serialize object of type {type(artifact).__name__}")
    return _header(kind) + gp_digest(gp) + w.getvalue()


def deserialize(data: bytes, gp: GlobalParams | None = None, expected_kind: int | None = None):
    """Parse and validate an artifact; returns the reconstructed object.

    Kind gp returns GlobalParams (revalidated through global_setup); all
    other kinds require the owning gp and reject a digest mismatch.
    """
    if len(data) < 24:
        raise ArtifactError(f"artifact too short ({len(data)} bytes)")
    if data[:4] != MAGIC:
        raise ArtifactError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    version, kind, xof_id = data[4], data[5], data[6]
    if version != VERSION:
        raise ArtifactError(f"unsupported format version {version}")
    if kind not in _KIND_NAMES:
        raise ArtifactError(f"unknown artifact kind {kind}")
    if xof_id != XOF_SHAKE256_CTR:
        raise ArtifactError(f"unsupported xof id {xof_id}")
    if data[7] != 0:
        raise ArtifactError(f"reserved header byte must be zero, found {data[7]}")
    if expected_kind is not None and kind != expected_kind:
        raise ArtifactError(
            f"expected a {_KIND_NAMES[expected_kind]} artifact, found {_KIND_NAMES[kind]}"
        )
    digest = data[8:24]
    body = data[24:]
    if kind == KIND_GP:
        if hashlib.sha256(body).digest()[:16] != digest:
            raise ArtifactError("global-parameter digest does not match its body")
        r = _Reader(body)
        fields = dict(
            lambda_=r.u64(),
            n=r.u64(),
            q=r.u64(),
            m_prime=r.u64(),
            max_attrs=r.u64(),
            id_len=r.u64(),
        )
        p = r.u64()
        chi_s, chi_prime_s = r.f64(), r.f64()
        tag = r.blob()
        r.done()
        return global_setup(
            p=p if p else None,
            chi_s=chi_s,
            chi_prime_s=chi_prime_s,
            domain_tag=tag,
            **fields,
        )
    if gp is None:
        raise ArtifactError(f"deserializing a {_KIND_NAMES[kind]} artifact requires GlobalParams")
    if digest != gp_digest(gp):
        raise ArtifactError("artifact was produced under different global parameters")
    r = _Reader(body)
    if kind == KIND_PK:
        out = _read_pk(r, gp)
    elif kind == KIND_MSK:
        out = _read_msk(r, gp)
    elif kind == KIND_SK:
        out = _read_sk(r, gp)
    elif kind == KIND_CT:
        out = _read_ct(r, gp)
    else:
        out = _read_transcript(r, gp)
    r.done()
    return out


def write_artifact(path: str, data: bytes):
    """Atomic write: to a temporary sibling, then rename into place."""
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def read_artifact(path: str) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()
