import numpy as np
import pytest

from pdlsim.fock import DensityOperator, ModeRegistry

ACCEPTANCE_LINES: list[str] = []


def random_density(rng: np.random.Generator, registry: ModeRegistry, rank: int | None = None) -> DensityOperator:
    """Random full- or low-rank density operator on ``registry``."""
    d = registry.dim
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    return DensityOperator(registry, m / np.trace(m).real)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
