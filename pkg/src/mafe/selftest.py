"""Fast self-contained checks, used by the `mafe selftest` subcommand.

Runs a reduced-size slice of the acceptance surface: gadget and trapdoor
identities, sampler moments, one noisy and one exact end-to-end workflow,
policy rejection, and a serialization round trip.  Prints one PASS/FAIL
line per check and returns a process exit code.
"""

from __future__ import annotations

import math
import sys
import warnings

import numpy as np

from .errors import PolicyError
from .gadget import GadgetShape, gadget_apply, gadget_decompose, gadget_gaussian_preimage
from .gauss import GaussParam, sample_z_vector
from .rng import RngState
from .scheme import (
    auth_setup,
    decrypt,
    encrypt,
    global_setup,
    inner_product_mod,
    keygen,
    verify_share,
)
from .serial import MasterSecret, deserialize, serialize
from .zq import Modulus, ZqVector


def _small_gp():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return global_setup(
            lambda_=16, n=4, q=1 << 26, chi_s=16, chi_prime_s=16,
            m_prime=632, p=4, max_attrs=3, id_len=4,
        )


def run(verbose: bool = True) -> int:
    checks: list[tuple[str, bool]] = []
    rng = RngState(b"mafe-selftest-seed-0123456789abc")
    npr = np.random.default_rng(0)

    mod = Modulus(1 << 16)
    shape = GadgetShape(4, mod)
    ok = True
    for _ in range(100):
        x = ZqVector(mod, npr.integers(0, mod.q, 4))
        ok &= gadget_apply(shape, gadget_decompose(x)) == x
    checks.append(("gadget decompose/apply identity", ok))

    ok = True
    for _ in range(20):
        x = ZqVector(mod, npr.integers(0, mod.q, 4))
        z = gadget_gaussian_preimage(shape, x, GaussParam(8.0), rng)
        ok &= gadget_apply(shape, z) == x
    checks.append(("gadget Gaussian preimage identity", ok))

    s = 8.0
    draws = sample_z_vector(GaussParam(s), 200_000, rng)
    var_target = s * s / (2 * math.pi)
    checks.append(
        (
            "sampler moments (s=8)",
            abs(float(draws.mean())) < 0.05 * s
            and abs(float(draws.var()) - var_target) / var_target < 0.15,
        )
    )

    gp = _small_gp()
    aids = [bytes([i]) * gp.id_len for i in (1, 2, 3)]
    pairs = [auth_setup(gp, aid, rng.child(aid)) for aid in aids]
    gid = b"usr1"
    u = ZqVector(gp.mod, npr.integers(0, gp.p, gp.n))
    v = ZqVector(gp.mod, npr.integers(0, gp.p, gp.n))
    shares = [keygen(gp, pa.pk, pa.msk, gid, v, rng.child(b"k" + pa.aid)) for pa in pairs]
    checks.append(("key shares verify", all(verify_share(gp, pa.pk, sh) for pa, sh in zip(pairs, shares))))

    ct = encrypt(gp, [pa.pk for pa in pairs], u, "exact", rng.child(b"ct"))
    gamma = decrypt(gp, shares, gid, v, ct)
    checks.append(("exact end-to-end inner product", gamma == inner_product_mod(gp, u, v, "exact")))

    ctn = encrypt(gp, [pa.pk for pa in pairs], u, "noisy", rng.child(b"ctn"))
    gamma_n = decrypt(gp, shares, gid, v, ctn)
    err = gp.mod.center((gamma_n - inner_product_mod(gp, u, v, "noisy")) % gp.mod.q)
    checks.append(("noisy end-to-end within B0", abs(err) <= gp.b0))

    try:
        decrypt(gp, shares[:2], gid, v, ct)
        checks.append(("policy rejection on missing share", False))
    except PolicyError:
        checks.append(("policy rejection on missing share", True))

    blob = serialize(ct, gp)
    ct2 = deserialize(blob, gp=gp)
    checks.append(("ciphertext serialization round trip", serialize(ct2, gp) == blob))
    blob = serialize(MasterSecret(aids[0], pairs[0].msk), gp)
    checks.append(("master-secret serialization round trip", serialize(deserialize(blob, gp=gp), gp) == blob))

    failed = 0
    for name, passed in checks:
        if verbose:
            print(f"{'PASS' if passed else 'FAIL'}  {name}", file=sys.stderr)
        failed += 0 if passed else 1
    if verbose:
        print(f"{len(checks) - failed}/{len(checks)} selftest checks passed", file=sys.stderr)
    return 0 if failed == 0 else 2
