import warnings

import pytest

from mafe.rng import RngState
from mafe.scheme import auth_setup, global_setup

# Small profiles intentionally sit below the m' security-side bound, which
# is a warning, not an error.
warnings.filterwarnings("ignore", message="m' =")


def small_profile():
    """Tiny power-of-two profile for fast structural tests."""
    return global_setup(
        lambda_=16, n=4, q=1 << 16, chi_s=16, chi_prime_s=16,
        m_prime=400, max_attrs=3, id_len=4,
    )


def small_exact_profile():
    """Smallest profile that satisfies the exactness inequality with p=4."""
    return global_setup(
        lambda_=16, n=4, q=1 << 26, chi_s=16, chi_prime_s=16,
        m_prime=632, p=4, max_attrs=3, id_len=4,
    )


@pytest.fixture(scope="session")
def small_gp():
    return small_profile()


@pytest.fixture(scope="session")
def small_exact_gp():
    return small_exact_profile()


@pytest.fixture(scope="session")
def desk_gp():
    """The reference desk profile (noisy mode)."""
    return global_setup()


@pytest.fixture(scope="session")
def desk_exact_gp():
    """Desk profile with the p=16 exactness inequality pre-validated."""
    return global_setup(p=16)


def make_authorities(gp, count, seed_tag: bytes):
    rng = RngState(seed_tag.ljust(32, b"\x00"))
    return [
        auth_setup(gp, bytes([i + 1]) * gp.id_len, rng.child(bytes([i])))
        for i in range(count)
    ]


@pytest.fixture(scope="session")
def desk_authorities(desk_gp):
    return make_authorities(desk_gp, 3, b"desk-authorities")


@pytest.fixture(scope="session")
def desk_exact_authorities(desk_exact_gp):
    return make_authorities(desk_exact_gp, 3, b"desk-exact-authorities")
