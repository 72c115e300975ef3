import time

import pytest

from eigenkit.padic import PadicContext

SESSION_START = time.monotonic()


@pytest.fixture(scope="session")
def ctx5():
    """Unramified Q_5 at 20 digits."""
    return PadicContext(5, 1, 20)


@pytest.fixture(scope="session")
def ctx5_40():
    """Unramified Q_5 with headroom for spectral pipelines."""
    return PadicContext(5, 1, 40)


@pytest.fixture(scope="session")
def ctx_ram():
    """Default ramified context e = 2(p-1) = 8 at 20 pi-digits."""
    return PadicContext.default(5, 20)


def session_elapsed() -> float:
    return time.monotonic() - SESSION_START
