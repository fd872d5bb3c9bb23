"""Command-line surface for the multi-authority workflow.

Subcommands: gp-setup, auth-setup, keygen, encrypt, decrypt, classify,
selftest.  Exit codes: 0 success, 1 usage error, 2 validation failure,
3 I/O failure, 4 policy-unsatisfied decryption.  decrypt prints a single
decimal value on stdout; all diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .errors import ArtifactError, MafeError, ParameterError, PolicyError
from .game import GameSetup, QueryRecord, classify_query
from .rng import SEED_BYTES, RngState
from .scheme import (
    FunctionalKeyShare,
    GlobalParams,
    auth_setup,
    decrypt,
    encrypt,
    global_setup,
    inner_product_mod,
    keygen,
)
from .serial import (
    KIND_CT,
    KIND_GP,
    KIND_MSK,
    KIND_PK,
    KIND_SK,
    MasterSecret,
    deserialize,
    read_artifact,
    serialize,
    write_artifact,
)
from .zq import ZqVector

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_POLICY = 4

SECRET_SUFFIX = "SECRET"


class _UsageExit(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageExit(message)


def _rng_from(seed_hex: str | None) -> RngState:
    if seed_hex is None:
        return RngState(os.urandom(SEED_BYTES))
    seed = bytes.fromhex(seed_hex)
    if len(seed) != SEED_BYTES:
        raise ParameterError(f"--seed must be {SEED_BYTES} hex-encoded bytes")
    return RngState(seed)


def _ident(gp: GlobalParams, text: str, what: str) -> bytes:
    """Identifier from hex (exact length) or utf-8 padded with NULs."""
    try:
        raw = bytes.fromhex(text)
        if len(raw) == gp.id_len:
            return raw
    except ValueError:
        pass
    raw = text.encode()
    if len(raw) > gp.id_len:
        raise ParameterError(f"{what} longer than {gp.id_len} bytes")
    return raw.ljust(gp.id_len, b"\x00")


def _read_vector(gp: GlobalParams, path: str, limit: int) -> ZqVector:
    """One decimal integer per line, validated against [0, limit)."""
    entries = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                value = int(line)
            except ValueError:
                raise ParameterError(f"{path}:{lineno}: not a decimal integer: {line!r}")
            if not 0 <= value < limit:
                raise ParameterError(f"{path}:{lineno}: entry {value} outside [0, {limit})")
            entries.append(value)
    if len(entries) != gp.n:
        raise ParameterError(f"{path}: expected {gp.n} entries, found {len(entries)}")
    return ZqVector(gp.mod, np.array(entries, dtype=np.int64))


def _load_gp(path: str) -> GlobalParams:
    return deserialize(read_artifact(path), expected_kind=KIND_GP)


def _cmd_gp_setup(args) -> int:
    gp = global_setup(
        lambda_=args.lam,
        n=args.n,
        q=1 << args.logq,
        chi_s=args.chi,
        chi_prime_s=args.chi_prime,
        m_prime=args.m_prime,
        p=args.p,
        max_attrs=args.max_attrs,
        id_len=args.id_len,
    )
    write_artifact(args.out, serialize(gp))
    print(f"wrote {args.out} (n={gp.n}, m={gp.m}, m_A={gp.m_a}, B0={gp.b0})", file=sys.stderr)
    return EXIT_OK


def _cmd_auth_setup(args) -> int:
    gp = _load_gp(args.gp)
    aid = _ident(gp, args.aid, "authority id")
    pair = auth_setup(gp, aid, _rng_from(args.seed))
    write_artifact(args.pk_out, serialize(pair.pk, gp))
    if SECRET_SUFFIX not in os.path.basename(args.msk_out):
        print(
            f"warning: master secret written to {args.msk_out!r} without "
            f"'{SECRET_SUFFIX}' in its name",
            file=sys.stderr,
        )
    write_artifact(args.msk_out, serialize(MasterSecret(aid, pair.msk), gp))
    print(f"wrote {args.pk_out} and {args.msk_out}", file=sys.stderr)
    return EXIT_OK


def _cmd_keygen(args) -> int:
    gp = _load_gp(args.gp)
    pk = deserialize(read_artifact(args.pk), gp=gp, expected_kind=KIND_PK)
    msk = deserialize(read_artifact(args.msk), gp=gp, expected_kind=KIND_MSK)
    if pk.aid != msk.aid:
        raise ParameterError("public key and master secret belong to different authorities")
    gid = _ident(gp, args.gid, "gid")
    v = _read_vector(gp, args.vector, gp.p if gp.p is not None else gp.mod.q)
    share = keygen(gp, pk, msk.td, gid, v, _rng_from(args.seed))
    write_artifact(args.out, serialize(share, gp))
    print(f"wrote {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_encrypt(args) -> int:
    gp = _load_gp(args.gp)
    pks = [deserialize(read_artifact(path), gp=gp, expected_kind=KIND_PK) for path in args.pk]
    limit = gp.p if args.mode == "exact" else gp.mod.q
    if args.mode == "exact" and gp.p is None:
        raise ParameterError("exact mode requires global parameters with p set")
    u = _read_vector(gp, args.vector, limit)
    ct = encrypt(gp, pks, u, args.mode, _rng_from(args.seed))
    write_artifact(args.out, serialize(ct, gp))
    print(f"wrote {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_decrypt(args) -> int:
    gp = _load_gp(args.gp)
    shares: list[FunctionalKeyShare] = [
        deserialize(read_artifact(path), gp=gp, expected_kind=KIND_SK) for path in args.sk
    ]
    ct = deserialize(read_artifact(args.ct), gp=gp, expected_kind=KIND_CT)
    gid = _ident(gp, args.gid, "gid")
    limit = gp.p if (gp.p is not None and ct.mode == "exact") else gp.mod.q
    v = _read_vector(gp, args.vector, limit)
    gamma = decrypt(gp, shares, gid, v, ct)
    print(gamma)
    if args.expected:
        u = _read_vector(gp, args.expected, limit)
        reference = inner_product_mod(gp, u, v, ct.mode)
        if ct.mode == "exact":
            err = (gamma - reference) % gp.p
            err = err if err <= gp.p // 2 else err - gp.p
        else:
            err = gp.mod.center((gamma - reference) % gp.mod.q)
        print(f"centered error vs expected plaintext: {err}", file=sys.stderr)
    return EXIT_OK


def _cmd_classify(args) -> int:
    gp = _load_gp(args.gp)
    setup = GameSetup(
        corrupt=frozenset(_ident(gp, a, "authority id") for a in args.corrupt),
        honest=frozenset(_ident(gp, a, "authority id") for a in args.honest),
        challenge_attrs=frozenset(_ident(gp, a, "authority id") for a in args.challenge),
        u0=_read_vector(gp, args.u0, gp.mod.q),
        u1=_read_vector(gp, args.u1, gp.mod.q),
        b1_bound=args.b1,
    )
    query = QueryRecord(
        gid=_ident(gp, args.query_gid, "gid"),
        attrs=frozenset(_ident(gp, a, "authority id") for a in args.query_attrs),
        v=_read_vector(gp, args.query_vector, gp.mod.q),
    )
    print(classify_query(setup, query).value)
    return EXIT_OK


def _cmd_selftest(args) -> int:
    from . import selftest

    return selftest.run(verbose=not args.quiet)


def _build_parser() -> _Parser:
    parser = _Parser(prog="mafe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gp-setup", help="create global parameters")
    sp.add_argument("--lambda", dest="lam", type=int, default=16)
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--logq", type=int, default=32, help="q = 2^logq")
    sp.add_argument("--chi", type=float, default=20)
    sp.add_argument("--chi-prime", type=float, default=20)
    sp.add_argument("--m-prime", type=int, default=2048)
    sp.add_argument("--p", type=int, default=None, help="plaintext modulus for exact mode")
    sp.add_argument("--max-attrs", type=int, default=3)
    sp.add_argument("--id-len", type=int, default=32)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_gp_setup)

    sp = sub.add_parser("auth-setup", help="create one authority's key pair")
    sp.add_argument("--gp", required=True)
    sp.add_argument("--aid", required=True)
    sp.add_argument("--pk-out", required=True)
    sp.add_argument("--msk-out", required=True)
    sp.add_argument("--seed")
    sp.set_defaults(func=_cmd_auth_setup)

    sp = sub.add_parser("keygen", help="issue a key share for (gid, v)")
    sp.add_argument("--gp", required=True)
    sp.add_argument("--pk", required=True)
    sp.add_argument("--msk", required=True)
    sp.add_argument("--gid", required=True)
    sp.add_argument("--vector", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed")
    sp.set_defaults(func=_cmd_keygen)

    sp = sub.add_parser("encrypt", help="encrypt a plaintext vector")
    sp.add_argument("--gp", required=True)
    sp.add_argument("--pk", action="append", required=True, help="repeat per authority")
    sp.add_argument("--vector", required=True)
    sp.add_argument("--mode", choices=["noisy", "exact"], required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed")
    sp.set_defaults(func=_cmd_encrypt)

    sp = sub.add_parser("decrypt", help="decrypt with a set of key shares")
    sp.add_argument("--gp", required=True)
    sp.add_argument("--sk", action="append", required=True, help="repeat per share")
    sp.add_argument("--gid", required=True)
    sp.add_argument("--vector", required=True)
    sp.add_argument("--ct", required=True)
    sp.add_argument("--expected", help="plaintext file; prints the centered error")
    sp.set_defaults(func=_cmd_decrypt)

    sp = sub.add_parser("classify", help="classify a secret-key query")
    sp.add_argument("--gp", required=True)
    sp.add_argument("--corrupt", action="append", default=[])
    sp.add_argument("--honest", action="append", default=[])
    sp.add_argument("--challenge", action="append", required=True)
    sp.add_argument("--u0", required=True)
    sp.add_argument("--u1", required=True)
    sp.add_argument("--b1", type=int, required=True)
    sp.add_argument("--query-gid", required=True)
    sp.add_argument("--query-attrs", action="append", default=[])
    sp.add_argument("--query-vector", required=True)
    sp.set_defaults(func=_cmd_classify)

    sp = sub.add_parser("selftest", help="run the fast acceptance tier")
    sp.add_argument("--quiet", action="store_true")
    sp.set_defaults(func=_cmd_selftest)

    return parser


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageExit as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PolicyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_POLICY
    except (ArtifactError, OSError) as exc:
        if isinstance(exc, ArtifactError):
            print(f"artifact error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MafeError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
