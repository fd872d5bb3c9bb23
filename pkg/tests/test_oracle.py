import math

import numpy as np
import pytest

from mafe.errors import ParameterError
from mafe.gauss import GaussParam
from mafe.oracle import GlobalId, OracleConfig, encode_oracle_input, hash_to_gaussian
from mafe.zq import Modulus, ZqVector

# Frozen first-run goldens under the fixed encoding format.
GOLDEN_ENCODE_HEX = (
    "7461672d76310200000000000000010202000000000000000700000000000000ffff000000000000"
)
GOLDEN_OUTPUT = [-8, -10, -9, 7, -4, -6, 7, 2]


def small_cfg(m_prime=8, s=16.0):
    return OracleConfig(GaussParam(s), m_prime, b"tag-v1")


def test_encode_golden():
    cfg = small_cfg()
    v = ZqVector(Modulus(1 << 16), [7, 65535])
    assert encode_oracle_input(cfg, GlobalId(b"\x01\x02"), v).hex() == GOLDEN_ENCODE_HEX


def test_hash_golden():
    cfg = small_cfg()
    v = ZqVector(Modulus(1 << 16), [7, 65535])
    assert hash_to_gaussian(cfg, GlobalId(b"\x01\x02"), v).tolist() == GOLDEN_OUTPUT


def test_encode_length_prefix_injectivity():
    cfg = small_cfg()
    mod = Modulus(1 << 16)
    # (gid || x, v) vs (gid, x || v): length prefixing must separate them.
    a = encode_oracle_input(cfg, GlobalId(b"\x01\x07"), ZqVector(mod, [9]))
    b = encode_oracle_input(cfg, GlobalId(b"\x01"), ZqVector(mod, [7, 9]))
    assert a != b


def test_encode_empty_vector_is_header_only():
    cfg = small_cfg()
    enc = encode_oracle_input(cfg, GlobalId(b"ab"), ZqVector(Modulus(17), np.zeros(0, dtype=np.int64)))
    assert enc == b"tag-v1" + (2).to_bytes(8, "little") + b"ab" + (0).to_bytes(8, "little")


def test_determinism():
    cfg = small_cfg(m_prime=64)
    mod = Modulus(1 << 16)
    v = ZqVector(mod, np.arange(5, dtype=np.int64))
    a = hash_to_gaussian(cfg, GlobalId(b"\x03\x04"), v)
    b = hash_to_gaussian(cfg, GlobalId(b"\x03\x04"), v)
    assert np.array_equal(a, b)


def test_distinct_inputs_distinct_outputs():
    cfg = small_cfg(m_prime=16)
    mod = Modulus(1 << 16)
    npr = np.random.default_rng(1)
    collisions = 0
    for _ in range(2000):
        base = npr.integers(0, mod.q, 4)
        other = base.copy()
        other[npr.integers(0, 4)] = (other[npr.integers(0, 4)] + 1 + npr.integers(0, 100)) % mod.q
        va, vb = ZqVector(mod, base), ZqVector(mod, other)
        if va == vb:
            continue
        ga = hash_to_gaussian(cfg, GlobalId(b"\x01\x01"), va)
        gb = hash_to_gaussian(cfg, GlobalId(b"\x01\x01"), vb)
        collisions += int(np.array_equal(ga, gb))
    assert collisions == 0


def test_pooled_variance():
    s = 20.0
    cfg = OracleConfig(GaussParam(s), 512, b"tag-v1")
    mod = Modulus(1 << 32)
    npr = np.random.default_rng(2)
    pool = []
    for i in range(200):
        v = ZqVector(mod, npr.integers(0, mod.q, 8))
        pool.append(hash_to_gaussian(cfg, GlobalId(i.to_bytes(2, "little")), v))
    pooled = np.concatenate(pool)
    assert pooled.size >= 100_000
    target = s * s / (2 * math.pi)
    assert abs(float(pooled.var()) - target) / target < 0.15


def test_adjacent_coordinate_correlation():
    cfg = OracleConfig(GaussParam(16.0), 512, b"tag-v1")
    mod = Modulus(1 << 16)
    npr = np.random.default_rng(3)
    pool = []
    for i in range(200):
        v = ZqVector(mod, npr.integers(0, mod.q, 4))
        pool.append(hash_to_gaussian(cfg, GlobalId(i.to_bytes(2, "little")), v))
    flat = np.concatenate(pool).astype(np.float64)
    corr = float(np.corrcoef(flat[:-1], flat[1:])[0, 1])
    assert abs(corr) < 0.02


def test_norm_bound():
    lam, s = 16, 20.0
    cfg = OracleConfig(GaussParam(s), 256, b"tag-v1")
    mod = Modulus(1 << 16)
    bound = math.sqrt(lam) * s
    bad = 0
    trials = 1000
    for i in range(trials):
        v = ZqVector(mod, np.array([i, i + 1, 2 * i, 3], dtype=np.int64) % mod.q)
        r = hash_to_gaussian(cfg, GlobalId(i.to_bytes(2, "little")), v)
        bad += int(np.abs(r).max()) > bound
    assert bad / trials < 0.001


def test_config_validation():
    with pytest.raises(ParameterError):
        OracleConfig(GaussParam(2.0), 8)
    with pytest.raises(ParameterError):
        OracleConfig(GaussParam(16.0), 0)
