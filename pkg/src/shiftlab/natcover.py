"""Finite interval covers of the positive naturals for the base metrics.

Each cover is a partition into singletons, maximal merged blocks, and one
infinite tail cell. Blocks come from the exact maximal-merge recurrence
(anchor at N-1, walking down); the asymptotic closed-form endpoints are
exposed separately as predictions and compared, never silently substituted.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass

from .errors import BudgetError
from .metrics import ATOL, D1, D2, MetricParams

# Golden-ratio regime split for the exponential base metric.
GAMMA = math.log((1.0 + math.sqrt(5.0)) / 2.0)

# Base covers are explicit cell lists; ~2/sqrt(delta) cells for d1.
MAX_BASE_CELLS = 5_000_000


@dataclass(frozen=True)
class NatCell:
    """Interval {lo..hi}; hi None means the infinite tail {lo, lo+1, ...}."""

    lo: int
    hi: int | None

    def __post_init__(self) -> None:
        if self.lo < 1 or (self.hi is not None and self.hi < self.lo):
            raise ValueError("invalid cell bounds")

    @property
    def is_tail(self) -> bool:
        return self.hi is None

    def __contains__(self, n: int) -> bool:
        return n >= self.lo and (self.hi is None or n <= self.hi)


@dataclass(frozen=True)
class NatCover:
    params: MetricParams
    delta: float
    cells: tuple[NatCell, ...]
    threshold: float
    N: int
    Ns: int

    @property
    def count(self) -> int:
        return len(self.cells)

    def cell_of(self, n: int) -> int:
        """Index of the unique cell containing n (cells are adjacent intervals)."""
        if n < 1:
            raise ValueError("alphabet starts at 1")
        los = self._los()
        return bisect_right(los, n) - 1

    def _los(self) -> list[int]:
        cached = getattr(self, "_los_cache", None)
        if cached is None:
            cached = [c.lo for c in self.cells]
            object.__setattr__(self, "_los_cache", cached)
        return cached

    def validate(self) -> None:
        """Adjacency partition check plus the diameter contracts."""
        cells = self.cells
        if cells[0].lo != 1 or cells[-1].hi is not None or any(
            c.hi is None for c in cells[:-1]
        ):
            raise AssertionError("cover is not a partition of the naturals")
        for a, b in zip(cells, cells[1:]):
            if b.lo != a.hi + 1:
                raise AssertionError(f"gap or overlap between {a} and {b}")
        rho = self.params.rho
        for c in cells[:-1]:
            if rho(c.lo, c.hi) > self.threshold + ATOL:
                raise AssertionError(f"cell {c} wider than threshold {self.threshold}")
        tail = cells[-1]
        base_at_lo = 1.0 / tail.lo if self.params.kind == D1 else math.exp(
            -self.params.alpha * tail.lo
        )
        if base_at_lo > self.delta + ATOL:
            raise AssertionError("tail cell starts too early for the scale")

    def to_json_dict(self) -> dict:
        doc = {
            "metric": self.params.kind,
            "delta": self.delta,
            "threshold": self.threshold,
            "cells": [[c.lo, c.hi] for c in self.cells],
        }
        if self.params.kind == D2:
            doc["alpha"] = self.params.alpha
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


def count_cells(cover: NatCover) -> int:
    return cover.count


def _minimal_n_at_most(value_fn, delta: float, start: int) -> int:
    """Minimal n >= 1 with value_fn(n) <= delta, seeded by a closed form.

    The slack is relative: delta spans many decades, and an absolute epsilon
    above delta would turn the walk-down loop into an O(1/delta) scan.
    """
    thresh = delta * (1.0 + 1e-12)
    n = max(start, 1)
    while n > 1 and value_fn(n - 1) <= thresh:
        n -= 1
    while value_fn(n) > thresh:
        n += 1
    return n


def build_cover_d1(delta: float) -> NatCover:
    """Singletons {1}..{Ns}, maximal merged blocks, tail {N..}.

    N is minimal with 1/N <= delta; Ns is the largest n with n(n-1) <= 1/delta;
    each block anchored at a is the widest {lo..a} with 1/lo - 1/a <= 1/N,
    which in integers is N(a - lo) <= lo*a, so lo = ceil(N*a/(N+a)).
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError("d1 scale must lie in (0, 1]")
    params = MetricParams(D1)
    N = _minimal_n_at_most(lambda n: 1.0 / n, delta, math.ceil(1.0 / delta))
    ns = int((1.0 + math.sqrt(1.0 + 4.0 / delta)) / 2.0)
    while ns > 1 and delta * ns * (ns - 1) > 1.0 + ATOL:
        ns -= 1
    while delta * (ns + 1) * ns <= 1.0 + ATOL:
        ns += 1
    Ns = max(0, min(ns, N - 1))
    if Ns + 2.0 * math.sqrt(N) > MAX_BASE_CELLS:
        raise BudgetError(
            f"base cover at scale {delta} would need ~{int(2 * math.sqrt(N))} cells",
            delta=delta,
        )
    blocks: list[NatCell] = []
    a = N - 1
    while a > Ns:
        lo = max((N * a + N + a - 1) // (N + a), Ns + 1)
        blocks.append(NatCell(lo, a))
        a = lo - 1
    cells = (
        [NatCell(i, i) for i in range(1, Ns + 1)]
        + sorted(blocks, key=lambda c: c.lo)
        + [NatCell(N, None)]
    )
    return NatCover(params, delta, tuple(cells), 1.0 / N, N, Ns)


def build_cover_d2(delta: float, alpha: float) -> NatCover:
    """Exponential-base cover. Above the golden-ratio threshold every finite
    cell is a singleton; below it, blocks come from the same maximal-merge
    recurrence with threshold e^(-alpha*N)."""
    if not 0.0 < delta < 1.0:
        raise ValueError("d2 scale must lie in (0, 1)")
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    params = MetricParams(D2, alpha=alpha)
    N = _minimal_n_at_most(
        lambda n: math.exp(-alpha * n), delta, math.ceil(math.log(1.0 / delta) / alpha)
    )
    if N > MAX_BASE_CELLS:
        raise BudgetError(f"base cover at scale {delta} would need ~{N} cells", delta=delta)
    threshold = math.exp(-alpha * N)
    if alpha > GAMMA:
        cells = [NatCell(i, i) for i in range(1, N)] + [NatCell(N, None)]
        return NatCover(params, delta, tuple(cells), threshold, N, N - 1)
    ns = math.floor(N + math.log(1.0 - math.exp(-alpha)) / alpha + 1.0 + ATOL)
    Ns = max(0, min(ns, N - 1))
    blocks: list[NatCell] = []
    a = N - 1
    while a > Ns:
        seed = math.ceil(-math.log(threshold + math.exp(-alpha * a)) / alpha - ATOL)
        lo = max(seed, Ns + 1)
        while lo > Ns + 1 and math.exp(-alpha * (lo - 1)) - math.exp(-alpha * a) <= threshold + ATOL:
            lo -= 1
        while math.exp(-alpha * lo) - math.exp(-alpha * a) > threshold + ATOL:
            lo += 1
        lo = max(lo, Ns + 1)
        blocks.append(NatCell(lo, a))
        a = lo - 1
    cells = (
        [NatCell(i, i) for i in range(1, Ns + 1)]
        + sorted(blocks, key=lambda c: c.lo)
        + [NatCell(N, None)]
    )
    return NatCover(params, delta, tuple(cells), threshold, N, Ns)


def build_cover(delta: float, params: MetricParams) -> NatCover:
    if params.kind == D1:
        return build_cover_d1(delta)
    return build_cover_d2(delta, params.alpha)


def greedy_min_cover(delta: float, params: MetricParams) -> NatCover:
    """Bottom-up greedy oracle: maximal intervals under the same threshold.

    Greedy maximal-interval covering of a linear order is minimal in cell
    count, so this is an exact minimum against which the construction above
    is compared.
    """
    reference = build_cover(delta, params)
    N, threshold = reference.N, reference.threshold
    cells: list[NatCell] = []
    a = 1
    while True:
        base_at_a = 1.0 / a if params.kind == D1 else math.exp(-params.alpha * a)
        if base_at_a <= delta + ATOL:
            cells.append(NatCell(a, None))
            break
        if params.kind == D1:
            # rho1(a, b) <= 1/N in integers: N(b - a) <= a*b
            b = max((a * N) // (N - a), a)
            while N * (b + 1 - a) <= a * (b + 1):
                b += 1
            while b > a and N * (b - a) > a * b:
                b -= 1
        else:
            b = a
            ea = math.exp(-params.alpha * a)
            while ea - math.exp(-params.alpha * (b + 1)) <= threshold + ATOL:
                b += 1
        cells.append(NatCell(a, b))
        a = b + 1
        if len(cells) > MAX_BASE_CELLS:
            raise BudgetError("greedy cover exceeded the base cell budget", delta=delta)
    return NatCover(params, delta, tuple(cells), threshold, N, reference.Ns)


def predicted_count_d1(delta: float) -> float:
    """Leading-order predicted cell count 2*sqrt(1/delta)."""
    if delta <= 0.0:
        raise ValueError("scale must be positive")
    return 2.0 * math.sqrt(1.0 / delta)


def predicted_count_d2(delta: float, alpha: float) -> float:
    """Leading-order predicted cell count (1/alpha)*log(1/delta)."""
    if delta <= 0.0 or alpha <= 0.0:
        raise ValueError("invalid parameters")
    return math.log(1.0 / delta) / alpha


def displayed_blocks_d1(delta: float) -> list[NatCell]:
    """Blocks from the asymptotic endpoint formulas {ceil(N/(j+1))..ceil(N/j)-1},
    clipped at the singleton boundary and with empty blocks skipped. These are
    predictions only; the shipped cover uses the exact recurrence."""
    cover = build_cover_d1(delta)
    N, Ns = cover.N, cover.Ns
    blocks: list[NatCell] = []
    j = 1
    while True:
        lo = -(-N // (j + 1))  # ceil
        hi = -(-N // j) - 1
        lo_clip = max(lo, Ns + 1)
        if hi >= lo_clip and hi > Ns:
            blocks.append(NatCell(lo_clip, min(hi, N - 1)))
        if lo <= Ns + 1:
            break
        j += 1
    blocks.sort(key=lambda c: c.lo)
    # collapse potential duplicate endpoints at the clip boundary
    dedup: list[NatCell] = []
    for b in blocks:
        if dedup and b.lo <= dedup[-1].hi:
            continue
        dedup.append(b)
    return dedup


def block_disagreement_d1(delta: float) -> dict:
    """Exact-recurrence cells versus displayed-endpoint cells, reported."""
    cover = build_cover_d1(delta)
    exact = list(cover.cells[:-1])
    displayed = [NatCell(i, i) for i in range(1, cover.Ns + 1)] + displayed_blocks_d1(delta)
    agree = [(c.lo, c.hi) for c in exact] == [(c.lo, c.hi) for c in displayed]
    return {
        "delta": delta,
        "recurrence_cells": [(c.lo, c.hi) for c in exact],
        "displayed_cells": [(c.lo, c.hi) for c in displayed],
        "recurrence_count": len(exact) + 1,
        "displayed_count": len(displayed) + 1,
        "agree": agree,
    }
