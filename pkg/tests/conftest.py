
import pytest

from wendy.crypto import bls_keygen, wendy_keygen


@pytest.fixture(scope="session")
def wendy_keys():
    """Eight Wendy key pairs per bit width, generated once per session."""
    cache = {}

    def get(ell: int, count: int = 8):
        if ell not in cache:
            cache[ell] = [wendy_keygen(f"test:{ell}:{i}".encode(), ell) for i in range(8)]
        return cache[ell][:count]

    return get


@pytest.fixture(scope="session")
def bls_keys():
    return [bls_keygen(b"test-bls", i) for i in range(64)]


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        terminalreporter.write_line(results[key])
