"""Shared fixtures: the three-state reference model, a random-generator
factory, and the acceptance-criteria result table printed at the end of
the run."""

import numpy as np
import pytest

from mmbinom import Generator, chain_statics, validate_generator

REF_Q = np.array([[-5.0, 1.0, 5.0], [2.0, -2.0, 5.0], [3.0, 1.0, -10.0]])
REF_LAM = (0.1, 1.0, 3.0)

# filled by the acceptance tests via the record_criterion fixture
_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def ref_gen() -> Generator:
    return validate_generator(REF_Q)


@pytest.fixture(scope="session")
def ref_statics(ref_gen):
    return chain_statics(ref_gen, REF_LAM)


def random_generator(gen: np.random.Generator, d: int) -> Generator:
    """A random irreducible generator: a guaranteed cycle plus a random
    sprinkle of extra transitions, rates in [0.1, 2.1)."""
    Q = np.zeros((d, d))
    for i in range(d):
        Q[(i + 1) % d, i] = 0.1 + 2.0 * gen.random()
    extra = gen.random((d, d)) < 0.4
    np.fill_diagonal(extra, False)
    Q[extra] += gen.random((d, d))[extra]
    np.fill_diagonal(Q, 0.0)
    np.fill_diagonal(Q, -Q.sum(axis=0))
    return validate_generator(Q)


@pytest.fixture
def record_criterion():
    """Record one acceptance-criterion outcome line; returns ok."""

    def _record(tag: str, ok: bool, detail: str) -> bool:
        _ACCEPTANCE_LINES.append(f"[{tag}] {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
