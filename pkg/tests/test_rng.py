import numpy as np
import pytest

from mafe.errors import ParameterError
from mafe.rng import BLOCK_BYTES, RngState


def test_determinism():
    a = RngState(bytes(32))
    b = RngState(bytes(32))
    assert a.draw(100) == b.draw(100)
    assert a.position == b.position == 100


def test_position_resume():
    a = RngState(bytes(32))
    first = a.draw(40)
    rest = a.draw(24)
    b = RngState(bytes(32), position=40)
    assert b.draw(24) == rest
    assert first != rest


def test_block_boundary_straddle():
    a = RngState(b"\x07" * 32)
    whole = a.draw(3 * BLOCK_BYTES)
    b = RngState(b"\x07" * 32)
    pieces = b.draw(BLOCK_BYTES - 5) + b.draw(10) + b.draw(2 * BLOCK_BYTES - 5)
    assert whole == pieces


def test_children_are_domain_separated():
    root = RngState(bytes(32))
    c1, c2 = root.child(b"a"), root.child(b"b")
    assert c1.seed != c2.seed != root.seed
    assert root.child(b"a").seed == c1.seed


def test_seed_length_enforced():
    with pytest.raises(ParameterError):
        RngState(b"short")


def test_draw_u128_layout():
    a = RngState(bytes(32))
    lo, hi = a.draw_u128(3)
    b = RngState(bytes(32))
    raw = b.draw(48)
    for i in range(3):
        val = int.from_bytes(raw[16 * i : 16 * (i + 1)], "little")
        assert int(lo[i]) == val & ((1 << 64) - 1)
        assert int(hi[i]) == val >> 64


@pytest.mark.parametrize("q", [17, 1 << 16, 1 << 32, (1 << 32) + 15, 1 << 62])
def test_uniform_mod_matches_reference(q):
    a = RngState(b"\x03" * 32)
    vals = a.draw_uniform_mod(q, 64)
    b = RngState(b"\x03" * 32)
    lo, hi = b.draw_u128(64)
    expect = [(((int(h) << 64) | int(l)) % q) for l, h in zip(lo, hi)]
    assert vals.tolist() == expect
    assert int(vals.min()) >= 0 and int(vals.max()) < q


def test_uniform_mod_covers_range():
    vals = RngState(b"\x04" * 32).draw_uniform_mod(7, 20000)
    counts = np.bincount(vals, minlength=7)
    assert counts.min() > 0.9 * 20000 / 7
