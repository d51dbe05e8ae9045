import numpy as np
import pytest
from scipy import stats

from hmmrate.model import ChannelModel, MarkovModel

ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


@pytest.fixture
def record():
    """Log one PASS/FAIL line for an acceptance criterion, then assert it."""

    def _record(criterion, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
        ACCEPTANCE.append(line)
        print(line)
        assert ok, line

    return _record


@pytest.fixture
def two_state():
    return MarkovModel([[0.9, 0.1], [0.2, 0.8]])


def random_positive_stochastic(rng, l, floor=0.02):
    P = rng.dirichlet(np.ones(l), size=l) + floor
    return P / P.sum(axis=1, keepdims=True)


def scipy_densities(channel, z):
    """Independent evaluation of q(z|y) for every state via scipy.stats."""
    if channel.kind.value == "gaussian":
        return stats.norm.pdf(z, loc=channel.mu, scale=channel.scale)
    return stats.cauchy.pdf(z, loc=channel.mu, scale=channel.scale)


def random_channel(rng, l, kind=None):
    kind = kind or rng.choice(["gaussian", "cauchy"])
    mu = rng.uniform(-3, 3, l)
    scale = rng.uniform(0.5, 2.0, l)
    return ChannelModel(kind, mu, scale)
