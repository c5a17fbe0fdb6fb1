"""Shared brute-force oracles.

These are deliberately naive (plain loops over Python sets) so they share
no code path with the vectorized implementations under test.
"""

import itertools

import numpy as np
import pytest


def subsets(n):
    items = range(1, n + 1)
    for r in range(n + 1):
        for c in itertools.combinations(items, r):
            yield frozenset(c)


def brute_dr_ratios(fn, n):
    """Pairwise enumeration over A subset-of B, i outside B."""
    alpha = beta = np.inf
    every = list(subsets(n))
    for B in every:
        for A in every:
            if not A <= B:
                continue
            for i in range(1, n + 1):
                if i in B:
                    continue
                gA = fn(A | {i}) - fn(A)
                gB = fn(B | {i}) - fn(B)
                if gB > 0:
                    alpha = min(alpha, gA / gB)
                if gA > 0:
                    beta = min(beta, gB / gA)
    return alpha, beta


def brute_lovasz(fn, x):
    """Lovasz value via the integral form int_0^1 f({i : x_i >= theta}) dtheta."""
    levels = sorted(set([0.0, 1.0] + [float(v) for v in x]))
    total = 0.0
    for lo, hi in zip(levels[:-1], levels[1:]):
        S = frozenset(i + 1 for i, v in enumerate(x) if v >= hi)
        total += (hi - lo) * fn(S)
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


# acceptance reporting: one line per criterion, printed after the run
ACCEPTANCE_LINES = {}


def record_criterion(number, name, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {name} ({detail})"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
