"""Independent oracles and fixtures shared by the unit and acceptance suites."""

import math

import numpy as np

from shiftlab.dynamics import PatternAutomaton
from shiftlab.measures import base_cell_masses


class FiniteUniform:
    """Uniform on {1..8}: a genuinely finite-alphabet comparison measure."""

    def pmf(self, n):
        return 0.125 if 1 <= n <= 8 else 0.0

    def cell_mass(self, cell):
        hi = cell.hi if cell.hi is not None else 8
        return max(0, min(hi, 8) - cell.lo + 1) / 8.0

    def log2_cell_mass(self, cell):
        return math.log2(self.cell_mass(cell))


def brute_expected_hitting(pattern, probs, tol=1e-9):
    """Independent tail-sum oracle for k <= 2: survival DP over the raw
    symbol process (state = last symbol), no failure links involved.

    E[tau] = sum_{n>=0} P(tau > n); the truncation tail is bounded by
    P(tau > D) * 2/m with m the pattern's joint probability, since a match
    lands inside any two consecutive steps with probability >= m."""
    probs = np.asarray(probs, dtype=np.float64)
    k = len(pattern)
    K = len(probs)
    m = float(np.prod(probs[list(pattern)]))
    if k == 1:
        # P(tau > n) is exactly (1 - p)^n
        return 1.0 / probs[pattern[0]]
    assert k == 2
    a, b = pattern
    # alive[s] = P(tau > n, last symbol = s)
    alive = probs.copy()  # after the (uncounted) initial window's last symbol
    total = 1.0  # n = 0 term
    survival = 1.0
    while survival * 2.0 / m > tol:
        nxt = np.zeros(K)
        for s in range(K):
            if alive[s] == 0.0:
                continue
            for t in range(K):
                if s == a and t == b:
                    continue
                nxt[t] += alive[s] * probs[t]
        alive = nxt
        survival = float(np.sum(alive))
        total += survival
    return total


def exact_survival(cell, cov, model, n):
    """P(tau > n) from the automaton: alive mass after n steps, with a
    matching initial window continued through its longest proper border."""
    auto = PatternAutomaton(cov.unpack(cell), base_cell_masses(cov.base, model))
    k = auto.k
    nu = auto.stationary_entry_distribution()
    start = nu[:k].copy()
    start[auto.fail[k]] += nu[k]
    Q = auto.step_matrix()[:k, :k]
    alive = start
    for _ in range(n):
        alive = alive @ Q
    return float(np.sum(alive))
