import math

import numpy as np
import pytest

from modnr.harness import lemma_elements
from modnr.oprep import left_mult

SQRT2 = 1.4142135623730951
HALF_ONE_PLUS_SQRT2 = 1.2071067811865475  # (1 + sqrt 2) / 2

# lines printed by the acceptance tests, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def brute_nr(m, n=20001):
    """Dense-grid lower estimate of the numerical radius."""
    th = np.linspace(0, 2 * math.pi, n, endpoint=False)
    e = np.exp(1j * th)[:, None, None]
    h = (e * m + np.conj(e) * m.conj().T) / 2
    return float(np.linalg.eigvalsh(h)[:, -1].max())


@pytest.fixture
def lemma():
    el = lemma_elements()
    return {**el, "T1": left_mult(el["b"]), "T2": left_mult(el["a"])}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
