import pytest

from lsrp.params import ProtocolParams, default_params, validate

LAMBDA = b"\x01" * 32


@pytest.fixture(scope="session")
def params():
    """Default demonstration profile with a pinned public seed."""
    return default_params(LAMBDA)


@pytest.fixture(scope="session")
def toy():
    """Small but bound-respecting profile for fast full handshakes.

    n=8 keeps the extracted key at 64 bits; much smaller and wrong-password
    runs can collide on the handful of possible bit matrices.
    """
    return validate(ProtocolParams(n=8, q=1153, tau=1.0, lambda_seed=LAMBDA))
