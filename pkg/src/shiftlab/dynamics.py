"""Orbit dynamics over a product cover: exact expected hitting times via a
pattern automaton, Monte Carlo hitting / return / cover times on reduced
symbol streams, cover-time brackets across scales, and the hitting tail law.

Conventions: the orbit's window at time n is (x_n, ..., x_{n+k-1}); hitting,
return and cover statistics count times n >= 1, never the initial window.
Every trial consumes its own counter-based stream, so results depend only on
(master_seed, trial_index) and never on batching or worker count."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _rng
from .errors import BudgetError, TrialOverflowError
from .measures import base_cell_masses, min_cell_log2, sample_within_cell
from .metrics import MetricParams, coarsest_valid_scale
from .natcover import NatCover
from .productcover import ProductCover, build_product_cover, DEFAULT_CELL_BUDGET

DEFAULT_STEP_CAP = 10 ** 9
DEFAULT_STEP_BUDGET = 10 ** 7
_VISITED_BYTES_CAP = 1 << 28


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    trials: int
    master_seed: int

    def interval(self, z: float = 3.0) -> tuple[float, float]:
        return self.mean - z * self.stderr, self.mean + z * self.stderr


def estimate_from(values: np.ndarray, master_seed: int) -> Estimate:
    n = len(values)
    mean = float(np.mean(values))
    stderr = float(np.std(values, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return Estimate(mean, stderr, n, master_seed)


class OrbitStream:
    """Scalar reduced-symbol orbit for one trial: base-cell indices drawn
    from the cell mass distribution of the cover."""

    def __init__(self, cover: ProductCover, model, master_seed: int,
                 trial_index: int = 0):
        self.cover = cover
        self.cum = np.cumsum(base_cell_masses(cover.base, model))
        self.rng = _rng.StreamRng(master_seed, trial_index)
        self.position = 0

    def next_symbol(self) -> int:
        self.position += 1
        u = self.rng.uniform()
        return min(int(np.searchsorted(self.cum, u, side="left")),
                   len(self.cum) - 1)


# ---------------------------------------------------------------------------
# exact hitting times


class PatternAutomaton:
    """KMP automaton for one cell tuple over the base-cell alphabet.

    States 0..k track the longest suffix of the emitted symbols that is a
    prefix of the pattern; state k is a match."""

    def __init__(self, pattern: tuple[int, ...], probs: np.ndarray):
        k = len(pattern)
        if k < 1:
            raise ValueError("empty pattern")
        K = len(probs)
        if any(not 0 <= t < K for t in pattern):
            raise ValueError("pattern symbol out of range")
        if any(probs[t] <= 0.0 for t in pattern):
            raise ValueError("pattern uses a zero-mass symbol")
        self.pattern = pattern
        self.probs = np.asarray(probs, dtype=np.float64)
        self.k = k
        # prefix function: fail[s] = longest proper border of pattern[:s]
        fail = [0] * (k + 1)
        for s in range(2, k + 1):
            j = fail[s - 1]
            while j and pattern[s - 1] != pattern[j]:
                j = fail[j]
            fail[s] = j + 1 if pattern[s - 1] == pattern[j] else 0
        self.fail = fail
        delta = np.zeros((k + 1, K), dtype=np.int64)
        for s in range(k + 1):
            for a in range(K):
                if s < k and a == pattern[s]:
                    delta[s, a] = s + 1
                elif s == 0:
                    delta[s, a] = 0
                else:
                    delta[s, a] = delta[fail[s], a]
        self.delta = delta

    def step_matrix(self) -> np.ndarray:
        """Markov kernel on states 0..k under stationary symbols."""
        k, K = self.k, len(self.probs)
        M = np.zeros((k + 1, k + 1))
        for s in range(k + 1):
            for a in range(K):
                M[s, self.delta[s, a]] += self.probs[a]
        return M

    def mean_steps_to_match(self) -> np.ndarray:
        """h[s] = expected symbols until first reaching state k from s."""
        k = self.k
        M = self.step_matrix()
        Q = M[:k, :k]
        h = np.linalg.solve(np.eye(k) - Q, np.ones(k))
        return h

    def stationary_entry_distribution(self) -> np.ndarray:
        """State distribution after emitting k stationary symbols from an
        empty window: the law of a mu-random initial window."""
        nu = np.zeros(self.k + 1)
        nu[0] = 1.0
        M = self.step_matrix()
        for _ in range(self.k):
            nu = nu @ M
        return nu

    def expected_hitting(self) -> float:
        """E over a stationary start of the first n >= 1 whose window matches.

        A start already in state k continues through its longest proper
        border, exactly like an overlapping-match restart."""
        h = self.mean_steps_to_match()
        nu = self.stationary_entry_distribution()
        # fail[k] < k always (proper border), so h covers the match state
        h_ext = np.append(h, h[self.fail[self.k]])
        return float(nu @ h_ext)


def expected_hitting_exact(cell: int, cover: ProductCover, model) -> float:
    probs = base_cell_masses(cover.base, model)
    return PatternAutomaton(cover.unpack(cell), probs).expected_hitting()


def worst_cell(cover: ProductCover, model) -> int:
    """Cell maximizing the exact expected hitting time: the constant run of
    the minimal-mass symbol (ties toward the tail cell), which maximizes both
    1/mass and the self-overlap boost."""
    probs = base_cell_masses(cover.base, model)
    best_idx = 0
    best = math.inf
    for i, m in enumerate(probs):
        if 0.0 < m <= best:
            best, best_idx = m, i
    return cover.pack((best_idx,) * cover.k)


def worst_hitting_exact(delta: float, params: MetricParams, model) -> float:
    """Exact worst-cell expected hitting time from the base cover alone, so
    it stays available when the product cover is over the cell budget.

    The worst cell is the constant run of the minimal-mass symbol. Its chain
    is solved in exact rational arithmetic: the float linear system loses all
    precision once 1/mass approaches the reciprocal machine epsilon."""
    from fractions import Fraction

    from .measures import _argmin_base_cell
    from .metrics import depth_for_scale
    from .natcover import build_cover
    base = build_cover(delta, params)
    k = depth_for_scale(delta, params)
    _, mass, _ = _argmin_base_cell(base, model)
    p = Fraction(mass)
    one = Fraction(1)
    # h[s] = a[s] + b[s]*h[0] by a backward sweep; h[k] = 0
    a = [Fraction(0)] * (k + 1)
    b = [Fraction(0)] * (k + 1)
    for s in range(k - 1, -1, -1):
        a[s] = one + p * a[s + 1]
        b[s] = p * b[s + 1] + (one - p)
    h0 = a[0] / (one - b[0])
    h = [a[s] + b[s] * h0 for s in range(k)]
    # entry distribution of a stationary window: terminal-run length law;
    # a start already matching continues through its longest proper border
    expect = (p ** k) * h[k - 1]
    for s in range(k):
        expect += (one - p) * (p ** s) * h[s]
    try:
        return float(expect)
    except OverflowError:
        return math.inf


def exact_hitting_all_cells(cover: ProductCover, model,
                            limit: int = 100_000) -> np.ndarray:
    if cover.cell_count > limit:
        raise BudgetError(
            f"exhaustive hitting scan over {cover.cell_count} cells exceeds {limit}",
            cell_count=cover.cell_count, budget=limit)
    probs = base_cell_masses(cover.base, model)
    out = np.empty(cover.cell_count)
    for packed in range(cover.cell_count):
        out[packed] = PatternAutomaton(cover.unpack(packed), probs).expected_hitting()
    return out


# ---------------------------------------------------------------------------
# vectorized reduced-symbol kernels


def _draw_symbols(states, gammas, active, cum):
    u = _rng.vec_next_uniform_at(states, gammas, active)
    return np.minimum(np.searchsorted(cum, u, side="left"), len(cum) - 1)


def _first_match_times(cover: ProductCover, model, target: int, trials: int,
                       master_seed: int, trial_offset: int = 0,
                       cap: int = DEFAULT_STEP_CAP, censor: bool = False,
                       start_at_target: bool = False) -> np.ndarray:
    """First n >= 1 whose rolled window equals target, per trial.

    start_at_target seeds every trial's initial window at the target cell
    (return-time convention); otherwise k stationary symbols are drawn.
    censor=True records cap + 1 for unfinished trials instead of raising."""
    K, k = cover.K, cover.k
    cum = np.cumsum(base_cell_masses(cover.base, model))
    idx = np.arange(trial_offset, trial_offset + trials)
    states, gammas = _rng.vec_derive_streams(master_seed, idx)
    all_idx = np.arange(trials)

    win = np.zeros(trials, dtype=np.int64)
    if start_at_target:
        win[:] = target
    else:
        for _ in range(k):
            sym = _draw_symbols(states, gammas, all_idx, cum)
            win = win * K + sym

    out = np.full(trials, -1, dtype=np.int64)
    active = all_idx
    radix = K ** (k - 1)
    n = 0
    while active.size and n < cap:
        n += 1
        sym = _draw_symbols(states, gammas, active, cum)
        win[active] = (win[active] % radix) * K + sym
        hit = win[active] == target
        out[active[hit]] = n
        active = active[~hit]
    if active.size:
        if censor:
            out[active] = cap + 1
        else:
            done = out[out > 0]
            raise TrialOverflowError(
                f"{active.size} of {trials} trials unfinished after {cap} steps",
                cap=cap, unfinished=int(active.size), finished=int(done.size),
                finished_mean=float(done.mean()) if done.size else math.nan)
    return out


def _cover_times(cover: ProductCover, model, trials: int, master_seed: int,
                 trial_offset: int = 0, cap: int = DEFAULT_STEP_CAP) -> np.ndarray:
    """First n >= 1 by which every product cell has been a window, per trial.
    Batched so the visited matrix stays under a fixed memory cap."""
    cells = cover.cell_count
    batch = max(1, min(trials, _VISITED_BYTES_CAP // max(cells, 1)))
    parts = []
    done = 0
    while done < trials:
        size = min(batch, trials - done)
        parts.append(_cover_times_batch(cover, model, size, master_seed,
                                        trial_offset + done, cap))
        done += size
    return np.concatenate(parts) if len(parts) > 1 else parts[0]


def _cover_times_batch(cover: ProductCover, model, trials: int,
                       master_seed: int, trial_offset: int,
                       cap: int) -> np.ndarray:
    K, k = cover.K, cover.k
    cells = cover.cell_count
    cum = np.cumsum(base_cell_masses(cover.base, model))
    idx = np.arange(trial_offset, trial_offset + trials)
    states, gammas = _rng.vec_derive_streams(master_seed, idx)
    all_idx = np.arange(trials)

    win = np.zeros(trials, dtype=np.int64)
    for _ in range(k):
        sym = _draw_symbols(states, gammas, all_idx, cum)
        win = win * K + sym

    visited = np.zeros((trials, cells), dtype=bool)
    counts = np.zeros(trials, dtype=np.int64)
    out = np.full(trials, -1, dtype=np.int64)
    active = all_idx
    radix = K ** (k - 1)
    n = 0
    while active.size and n < cap:
        n += 1
        sym = _draw_symbols(states, gammas, active, cum)
        win[active] = (win[active] % radix) * K + sym
        first = ~visited[active, win[active]]
        hitters = active[first]
        visited[hitters, win[hitters]] = True
        counts[hitters] += 1
        full = counts[active] == cells
        out[active[full]] = n
        active = active[~full]
    if active.size:
        finished = out[out > 0]
        raise TrialOverflowError(
            f"{active.size} of {trials} cover trials unfinished after {cap} steps",
            cap=cap, unfinished=int(active.size), finished=int(finished.size),
            finished_mean=float(finished.mean()) if finished.size else math.nan)
    return out


def _sharded(kernel, trials: int, workers: int, **kw) -> np.ndarray:
    """Split trials into contiguous index ranges and merge in trial order;
    per-trial streams make the result identical for every worker count."""
    if workers <= 1 or trials < 2 * workers:
        return kernel(trials=trials, trial_offset=0, **kw)
    from concurrent.futures import ThreadPoolExecutor
    bounds = np.linspace(0, trials, workers + 1).astype(int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(kernel, trials=int(b - a), trial_offset=int(a), **kw)
                for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        return np.concatenate([f.result() for f in futs])


# ---------------------------------------------------------------------------
# public Monte Carlo estimators


def hitting_times_mc(cell: int, cover: ProductCover, model, trials: int,
                     master_seed: int, cap: int = DEFAULT_STEP_CAP,
                     workers: int = 1) -> np.ndarray:
    if trials < 100:
        raise ValueError("hitting estimates need at least 100 trials")
    return _sharded(
        lambda trials, trial_offset: _first_match_times(
            cover, model, cell, trials, master_seed, trial_offset, cap),
        trials, workers)


def expected_hitting_mc(cell: int, cover: ProductCover, model, trials: int,
                        master_seed: int, cap: int = DEFAULT_STEP_CAP,
                        workers: int = 1) -> Estimate:
    return estimate_from(
        hitting_times_mc(cell, cover, model, trials, master_seed, cap, workers),
        master_seed)


def kac_return_times_mc(cell: int, cover: ProductCover, model, trials: int,
                        master_seed: int, cap: int = DEFAULT_STEP_CAP,
                        workers: int = 1) -> np.ndarray:
    if trials < 100:
        raise ValueError("return estimates need at least 100 trials")
    return _sharded(
        lambda trials, trial_offset: _first_match_times(
            cover, model, cell, trials, master_seed, trial_offset, cap,
            start_at_target=True),
        trials, workers)


def kac_return_mc(cell: int, cover: ProductCover, model, trials: int,
                  master_seed: int, cap: int = DEFAULT_STEP_CAP,
                  workers: int = 1) -> Estimate:
    """Mean return time started from the cell; the return dynamics of a
    conditioned start depend on it only through its window cell, so the
    reduced chain starts at the target tuple exactly."""
    return estimate_from(
        kac_return_times_mc(cell, cover, model, trials, master_seed, cap, workers),
        master_seed)


def conditional_start_window(cell: int, cover: ProductCover, model,
                             rng: _rng.StreamRng) -> tuple[int, ...]:
    """Per-coordinate conditional draw of an explicit start window inside the
    cell; its window cell is the target tuple by construction."""
    return tuple(sample_within_cell(cover.base.cells[i], model, rng)
                 for i in cover.unpack(cell))


def cover_step_preflight(delta: float, params: MetricParams, model,
                         step_budget: float = DEFAULT_STEP_BUDGET) -> float:
    """Reciprocal minimal cell mass, the floor of the expected cover time.
    Raises when it already exceeds the step budget."""
    log2_m = min_cell_log2(delta, params, model)
    log2_budget = math.log2(step_budget)
    if -log2_m > log2_budget:
        needed = 2.0 ** (-log2_m) if -log2_m < 1000 else math.inf
        raise BudgetError(
            f"expected cover time at scale {delta:g} is at least "
            f"2^{-log2_m:.1f} ~ {needed:.3g} steps, over the budget {step_budget:.3g}; "
            f"finest feasible scale is {feasible_cover_scale(params, model, step_budget):.6g}",
            delta=delta, log2_min_mass=log2_m, step_budget=step_budget,
            feasible_scale=feasible_cover_scale(params, model, step_budget))
    return 2.0 ** (-log2_m)


def feasible_cover_scale(params: MetricParams, model,
                         step_budget: float = DEFAULT_STEP_BUDGET) -> float:
    """Smallest scale on a 2% grid whose reciprocal minimal mass fits the
    step budget."""
    log2_budget = math.log2(step_budget)
    s = coarsest_valid_scale(params)
    best = s
    while s > 1e-12:
        if -min_cell_log2(s, params, model) <= log2_budget:
            best = s
        else:
            return best
        s *= 0.98
    return best


def cover_times_mc(delta: float, params: MetricParams, model, trials: int,
                   master_seed: int, step_budget: float = DEFAULT_STEP_BUDGET,
                   cap: int = DEFAULT_STEP_CAP,
                   cell_budget: int | None = DEFAULT_CELL_BUDGET,
                   workers: int = 1) -> np.ndarray:
    if trials < 2:
        raise ValueError("cover estimates need at least 2 trials")
    cover = build_product_cover(delta, params, cell_budget)
    cover_step_preflight(delta, params, model, step_budget)
    return _sharded(
        lambda trials, trial_offset: _cover_times(
            cover, model, trials, master_seed, trial_offset, cap),
        trials, workers)


def expected_cover_mc(delta: float, params: MetricParams, model, trials: int,
                      master_seed: int, step_budget: float = DEFAULT_STEP_BUDGET,
                      cap: int = DEFAULT_STEP_CAP,
                      cell_budget: int | None = DEFAULT_CELL_BUDGET,
                      workers: int = 1) -> Estimate:
    return estimate_from(
        cover_times_mc(delta, params, model, trials, master_seed, step_budget,
                       cap, cell_budget, workers),
        master_seed)


@dataclass(frozen=True)
class CoverBracket:
    delta: float
    scale_lower: float
    scale_upper: float
    lower: Estimate
    upper: Estimate


def cover_bracket(delta: float, params: MetricParams, model, trials: int,
                  master_seed: int, step_budget: float = DEFAULT_STEP_BUDGET,
                  cap: int = DEFAULT_STEP_CAP,
                  cell_budget: int | None = DEFAULT_CELL_BUDGET,
                  workers: int = 1) -> CoverBracket:
    """Cover-time estimates at the bracketing scales min(2*delta, coarsest)
    and delta/(2T): ball cover times at delta are squeezed between them."""
    T = params.sandwich_constant
    lo_scale = min(2.0 * delta, coarsest_valid_scale(params))
    hi_scale = delta / (2.0 * T)
    lower = expected_cover_mc(lo_scale, params, model, trials, master_seed,
                              step_budget, cap, cell_budget, workers)
    upper = expected_cover_mc(hi_scale, params, model, trials, master_seed,
                              step_budget, cap, cell_budget, workers)
    return CoverBracket(delta, lo_scale, hi_scale, lower, upper)


@dataclass(frozen=True)
class TailLawRow:
    n: int
    survival: float
    stderr: float
    law: float


def hitting_tail_law(cell: int, cover: ProductCover, model, n_grid,
                     trials: int, master_seed: int,
                     workers: int = 1) -> list[TailLawRow]:
    """Empirical P(tau > n) on the grid against the exponential law
    exp(-mass * n). Trials are censored at the grid maximum, which only the
    survival probabilities beyond it would need."""
    grid = sorted(int(n) for n in n_grid)
    if not grid or grid[0] < 0:
        raise ValueError("survival grid times must be >= 0")
    if trials < 100:
        raise ValueError("tail-law estimates need at least 100 trials")
    horizon = max(grid[-1], 1)
    times = _sharded(
        lambda trials, trial_offset: _first_match_times(
            cover, model, cell, trials, master_seed, trial_offset,
            cap=horizon, censor=True),
        trials, workers)
    from .measures import product_cell_measure
    mass = product_cell_measure(cell, cover, model)
    rows = []
    for n in grid:
        p = float(np.mean(times > n))
        se = math.sqrt(p * (1.0 - p) / trials)
        rows.append(TailLawRow(n, p, se, math.exp(-mass * n)))
    return rows
