import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mafe.errors import ParameterError
from mafe.gadget import (
    GadgetShape,
    gadget_apply,
    gadget_decompose,
    gadget_gaussian_preimage,
    mod_switch_down,
    mod_switch_up,
)
from mafe.gauss import GaussParam
from mafe.rng import RngState
from mafe.zq import Modulus, ZqVector


def recompose(mod: Modulus, bits: np.ndarray) -> list[int]:
    """Independent reference: sum of 2^j * bit per block."""
    logq = mod.logq
    out = []
    for i in range(len(bits) // logq):
        block = bits[i * logq : (i + 1) * logq]
        out.append(sum(int(b) << j for j, b in enumerate(block)) % mod.q)
    return out


def test_decompose_examples():
    mod = Modulus(13)
    bits = gadget_decompose(ZqVector(mod, [11]))
    assert bits.tolist() == [1, 1, 0, 1]  # 11 = 1 + 2 + 8
    assert gadget_decompose(ZqVector(mod, [0])).tolist() == [0, 0, 0, 0]


def test_apply_examples():
    mod = Modulus(13)
    shape = GadgetShape(1, mod)
    assert gadget_apply(shape, np.array([1, 1, 0, 1])).a.tolist() == [11]
    assert gadget_apply(shape, np.zeros(4, dtype=np.int64)).a.tolist() == [0]


@pytest.mark.parametrize("n,q", [(1, 16), (4, 1 << 16), (8, 1 << 32)])
def test_roundtrip_against_recompose_oracle(n, q):
    mod = Modulus(q)
    shape = GadgetShape(n, mod)
    npr = np.random.default_rng(n)
    for _ in range(200):
        x = ZqVector(mod, npr.integers(0, q, n))
        bits = gadget_decompose(x)
        assert set(np.unique(bits)) <= {0, 1}
        assert recompose(mod, bits) == x.a.tolist()
        assert gadget_apply(shape, bits) == x


def test_preimage_examples():
    mod = Modulus(16)
    shape = GadgetShape(1, mod)
    rng = RngState(bytes(32))
    z0 = gadget_gaussian_preimage(shape, ZqVector(mod, [0]), GaussParam(8.0), rng)
    assert gadget_apply(shape, z0).a.tolist() == [0]
    z5 = gadget_gaussian_preimage(shape, ZqVector(mod, [5]), GaussParam(8.0), rng)
    assert sum(int(z5[j]) << j for j in range(4)) % 16 == 5


def test_preimage_exact_every_trial():
    mod = Modulus(1 << 16)
    shape = GadgetShape(4, mod)
    rng = RngState(b"\x01" * 32)
    npr = np.random.default_rng(11)
    for _ in range(300):
        target = ZqVector(mod, npr.integers(0, mod.q, 4))
        z = gadget_gaussian_preimage(shape, target, GaussParam(8.0), rng)
        assert gadget_apply(shape, z) == target


def test_preimage_moments_ten_thousand():
    # 10^4 preimages of n=4 targets, batched as independent blocks of one
    # wide target (blocks do not interact).
    s = 8.0
    mod = Modulus(1 << 16)
    batch, per = 10, 1000
    rng = RngState(b"\x02" * 32)
    npr = np.random.default_rng(12)
    coords = []
    for _ in range(batch):
        shape = GadgetShape(4 * per, mod)
        target = ZqVector(mod, npr.integers(0, mod.q, 4 * per))
        z = gadget_gaussian_preimage(shape, target, GaussParam(s), rng)
        assert gadget_apply(shape, z) == target
        coords.append(z)
    z = np.concatenate(coords)
    target_var = s * s / (2 * math.pi)
    assert abs(float(z.var()) - target_var) / target_var < 0.25


def test_preimage_norm_within_tail():
    p = GaussParam(8.0)
    mod = Modulus(1 << 32)
    shape = GadgetShape(8, mod)
    rng = RngState(b"\x03" * 32)
    z = gadget_gaussian_preimage(shape, ZqVector(mod, np.arange(8)), p, rng)
    assert int(np.abs(z).max()) <= p.tail_cut


def test_preimage_requires_power_of_two():
    mod = Modulus(13)
    with pytest.raises(ParameterError):
        gadget_gaussian_preimage(GadgetShape(1, mod), ZqVector(mod, [5]), GaussParam(8.0), RngState(bytes(32)))


def test_preimage_width_floor():
    mod = Modulus(16)
    with pytest.raises(ParameterError):
        gadget_gaussian_preimage(GadgetShape(1, mod), ZqVector(mod, [5]), GaussParam(2.0), RngState(bytes(32)))


def test_mod_switch_examples():
    assert mod_switch_up(np.array([3]), 4, Modulus(64)).a.tolist() == [48]
    assert mod_switch_up(np.array([2]), 3, Modulus(8)).a.tolist() == [5]
    assert mod_switch_up(np.array([0]), 4, Modulus(64)).a.tolist() == [0]
    assert mod_switch_down(48, Modulus(64), 4) == 3
    assert mod_switch_down(33, Modulus(64), 4) == 2


def test_mod_switch_roundtrip_when_p_divides_q():
    q_mod = Modulus(1 << 10)
    for p in (2, 4, 16, 256):
        for u in range(p):
            up = mod_switch_up(np.array([u]), p, q_mod).a[0]
            assert mod_switch_down(int(up), q_mod, p) == u


def test_mod_switch_up_injective():
    q_mod = Modulus(64)
    for p in (3, 5, 17, 64):
        ups = [int(mod_switch_up(np.array([u]), p, q_mod).a[0]) for u in range(p)]
        assert len(set(ups)) == p


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=2, max_value=1 << 20), st.data())
def test_mod_switch_up_rounding_gap(p, data):
    # round(q u / p) differs from the exact rational q u / p by at most 1/2.
    u = data.draw(st.integers(min_value=0, max_value=p - 1))
    q_mod = Modulus(1 << 26)
    up = int(mod_switch_up(np.array([u]), p, q_mod).a[0])
    gap = Fraction(up) - Fraction(q_mod.q * u, p)
    assert abs(gap) <= Fraction(1, 2)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=2, max_value=255), st.data())
def test_mod_switch_down_half_up_tie(p, data):
    q_mod = Modulus(1 << 16)
    x = data.draw(st.integers(min_value=0, max_value=q_mod.q - 1))
    got = mod_switch_down(x, q_mod, p)
    exact = Fraction(p * x, q_mod.q)
    rounded = int(exact) + (1 if exact - int(exact) >= Fraction(1, 2) else 0)
    assert got == rounded % p
