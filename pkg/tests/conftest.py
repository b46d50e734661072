import itertools
import math

import numpy as np
import pytest

from renyitv.coding import DistanceSpectrum

HAMMING74_ROWS = ["1000110", "0100101", "0010011", "0001111"]


def brute_force_weights(rows):
    """Weight distribution by explicit sums over all message vectors (no bit tricks)."""
    g = [[int(c) for c in r] for r in rows]
    n = len(g[0])
    counts = [0] * (n + 1)
    for msg in itertools.product((0, 1), repeat=len(g)):
        word = [sum(m * row[j] for m, row in zip(msg, g)) % 2 for j in range(n)]
        counts[sum(word)] += 1
    return counts


def random_simplex(rng, size, floor=0.0):
    w = rng.dirichlet(np.ones(size))
    w = np.maximum(w, floor)
    return w / w.sum()


def near_binomial_spectrum(rng, n, rate):
    """Real-valued spectrum with M = exp(nR) whose shape is a perturbed binomial."""
    m = math.exp(n * rate)
    base = np.array([math.comb(n, l) for l in range(1, n + 1)], float)
    shape = base * rng.lognormal(0.0, 0.6, size=n)
    counts = (m - 1.0) * shape / shape.sum()
    return DistanceSpectrum(n, [1.0] + list(counts))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def hamming74():
    return DistanceSpectrum(7, [1, 0, 0, 7, 7, 0, 0, 1])


ACCEPTANCE_LINES = []


@pytest.fixture
def report(capsys):
    """Print one pass/fail line per acceptance criterion and keep it for the summary."""

    def _report(label, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
