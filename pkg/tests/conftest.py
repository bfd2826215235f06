import time
from contextlib import contextmanager

import numpy as np
import pytest

_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record one acceptance criterion's outcome for the end-of-run summary."""

    @contextmanager
    def run(number, title):
        start = time.perf_counter()
        try:
            yield
        except BaseException:
            _ACCEPTANCE[number] = ("FAIL", title, time.perf_counter() - start)
            raise
        _ACCEPTANCE[number] = ("PASS", title, time.perf_counter() - start)

    return run


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title, secs = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}  ({secs:.2f} s)")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_density(rng, n, rank=None):
    rank = n if rank is None else rank
    A = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    R = A @ A.conj().T
    return R / np.trace(R).real


def random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (A + A.conj().T) / 2


def random_unitary(rng, n):
    from scipy.stats import unitary_group

    return unitary_group.rvs(n, random_state=rng)
