"""Static-security game bookkeeping and an honest challenger.

Implements the subset-policy admissibility logic (unauthorized queries
versus functionally indistinguishable ones), duplicate-pair checking, and
a challenger that drives the real scheme end to end to produce a fully
reproducible transcript for integration tests.  No adversary is modeled;
corrupt authorities are realized as honestly generated key pairs whose
secrets are exposed in the transcript.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ParameterError
from .oracle import GlobalId, hash_to_gaussian
from .rng import RngState
from .scheme import (
    AuthorityKeyPair,
    Ciphertext,
    FunctionalKeyShare,
    GlobalParams,
    auth_setup,
    encrypt,
    keygen,
    inner_gap_centered,
)
from .zq import ZqVector


class QueryType(enum.Enum):
    TYPE_I = "TypeI"
    TYPE_II = "TypeII"
    INADMISSIBLE = "Inadmissible"


@dataclass(frozen=True)
class GameSetup:
    """Corruption pattern, challenge attribute set and challenge plaintexts."""

    corrupt: frozenset[bytes]
    honest: frozenset[bytes]
    challenge_attrs: frozenset[bytes]
    u0: ZqVector
    u1: ZqVector
    b1_bound: int

    def __post_init__(self):
        if self.corrupt & self.honest:
            raise ParameterError("corrupt and honest authority sets must be disjoint")
        if not self.challenge_attrs <= (self.corrupt | self.honest):
            raise ParameterError("challenge attributes must belong to declared authorities")
        if not self.challenge_attrs:
            raise ParameterError("challenge attribute set must be nonempty")
        if self.challenge_attrs <= self.corrupt:
            raise ParameterError(
                "corrupt subset of the challenge attributes is authorized: "
                "A* & C must be a proper subset of A*"
            )
        if self.u0.mod != self.u1.mod or len(self.u0) != len(self.u1):
            raise ParameterError("challenge plaintexts must match in modulus and length")
        if self.b1_bound < 0:
            raise ParameterError("B1 must be nonnegative")


@dataclass(frozen=True)
class QueryRecord:
    gid: bytes
    attrs: frozenset[bytes]
    v: ZqVector
    classification: QueryType | None = None


def classify_query(setup: GameSetup, query: QueryRecord) -> QueryType:
    """Type I if the joint attribute set misses part of the challenge set;
    Type II if it covers it but the challenge plaintexts agree on v within
    B1 (centered magnitude); inadmissible otherwise."""
    if not query.attrs <= setup.honest:
        raise ParameterError("query attributes must be a subset of the honest authorities")
    joint = (query.attrs | setup.corrupt) & setup.challenge_attrs
    if joint != setup.challenge_attrs:
        return QueryType.TYPE_I
    gap = inner_gap_centered(setup.u0, setup.u1, query.v)
    if abs(gap) <= setup.b1_bound:
        return QueryType.TYPE_II
    return QueryType.INADMISSIBLE


@dataclass(frozen=True)
class AdmissibilityReport:
    ok: bool
    first_violation: str | None = None


def check_admissible(setup: GameSetup, queries: list[QueryRecord]) -> AdmissibilityReport:
    """Setup is valid, every query is Type I or Type II, and no
    (gid, key-vector) pair repeats across queries."""
    seen: set[tuple[bytes, bytes]] = set()
    for i, query in enumerate(queries):
        pair = (query.gid, query.v.a.tobytes())
        if pair in seen:
            return AdmissibilityReport(
                False, f"query {i} repeats the (gid, v) pair of an earlier query"
            )
        seen.add(pair)
        kind = classify_query(setup, query)
        if kind is QueryType.INADMISSIBLE:
            return AdmissibilityReport(
                False,
                f"query {i} is authorized for the challenge set but its "
                f"inner-product gap exceeds B1 = {setup.b1_bound}",
            )
    return AdmissibilityReport(True)


@dataclass
class Transcript:
    """Everything the honest challenger produced, fully reproducible."""

    beta: int
    authorities: dict[bytes, AuthorityKeyPair]
    corrupt_aids: frozenset[bytes]
    queries: list[QueryRecord]
    shares: list[FunctionalKeyShare]
    challenge_ct: Ciphertext
    oracle_table: dict[tuple[bytes, bytes], np.ndarray] = field(default_factory=dict)


def run_honest_game(
    gp: GlobalParams,
    setup: GameSetup,
    queries: list[QueryRecord],
    beta: int,
    rng: RngState,
    *,
    partial_queries: list[tuple[bytes, frozenset[bytes]]] | None = None,
    v_sampler: Callable[[RngState], ZqVector] | None = None,
    unsafe_zero_noise: bool = False,
) -> Transcript:
    """Run the challenger: authority setup, key shares for every admissible
    query, and the challenge ciphertext encrypting u_beta under A*.

    partial_queries supplies (gid, attrs) pairs whose key vectors come from
    v_sampler seeded with public randomness, mirroring generator-driven
    authorized queries; they join the admissibility check like any other
    query.
    """
    if beta not in (0, 1):
        raise ParameterError("beta must be 0 or 1")
    queries = list(queries)
    if partial_queries:
        if v_sampler is None:
            raise ParameterError("partial queries need a v_sampler")
        pub = rng.child(b"public-coins")
        for gid, attrs in partial_queries:
            queries.append(QueryRecord(gid=gid, attrs=attrs, v=v_sampler(pub)))
    report = check_admissible(setup, queries)
    if not report.ok:
        raise ParameterError(f"inadmissible game: {report.first_violation}")

    authorities: dict[bytes, AuthorityKeyPair] = {}
    for aid in sorted(setup.corrupt | setup.honest):
        authorities[aid] = auth_setup(gp, aid, rng.child(b"auth/" + aid))

    classified: list[QueryRecord] = []
    shares: list[FunctionalKeyShare] = []
    oracle_table: dict[tuple[bytes, bytes], np.ndarray] = {}
    for i, query in enumerate(queries):
        kind = classify_query(setup, query)
        classified.append(QueryRecord(query.gid, query.attrs, query.v, kind))
        key = (query.gid, query.v.a.tobytes())
        if key not in oracle_table:
            oracle_table[key] = hash_to_gaussian(gp.oracle_cfg, GlobalId(query.gid), query.v)
        for aid in sorted(query.attrs):
            pair = authorities[aid]
            shares.append(
                keygen(gp, pair.pk, pair.msk, query.gid, query.v, rng.child(b"share/%d/" % i + aid))
            )

    challenge_pks = [authorities[aid].pk for aid in sorted(setup.challenge_attrs)]
    u_beta = setup.u0 if beta == 0 else setup.u1
    ct = encrypt(
        gp,
        challenge_pks,
        u_beta,
        mode="noisy",
        rng=rng.child(b"challenge"),
        unsafe_zero_noise=unsafe_zero_noise,
    )
    return Transcript(
        beta=beta,
        authorities=authorities,
        corrupt_aids=frozenset(setup.corrupt),
        queries=classified,
        shares=shares,
        challenge_ct=ct,
        oracle_table=oracle_table,
    )
