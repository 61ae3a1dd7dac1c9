"""Product covers: the depth-k cartesian power of a base cover of the
naturals, packed cell ids, window classification, and the sandwich check
that product cells sit between metric balls at comparable scales."""

from __future__ import annotations

from dataclasses import dataclass, field

from ._rng import StreamRng
from .errors import BudgetError
from .metrics import ATOL, MetricParams, Point, depth_for_scale, coarsest_valid_scale, shift_distance
from .natcover import NatCover, build_cover

DEFAULT_CELL_BUDGET = 1 << 24


@dataclass(frozen=True)
class ProductCover:
    """Cells are k-tuples of base-cell indices, packed big-endian: the
    oldest window coordinate is the most significant digit."""

    base: NatCover
    k: int
    delta: float
    cell_count: int = field(init=False)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("depth must be >= 1")
        object.__setattr__(self, "cell_count", self.base.count ** self.k)

    @property
    def K(self) -> int:
        return self.base.count

    @property
    def T(self) -> float:
        return self.base.params.sandwich_constant

    @property
    def roll_radix(self) -> int:
        return self.K ** (self.k - 1)

    def pack(self, indices) -> int:
        idx = tuple(indices)
        if len(idx) != self.k:
            raise ValueError(f"need {self.k} indices, got {len(idx)}")
        packed = 0
        for i in idx:
            if not 0 <= i < self.K:
                raise ValueError(f"base index {i} out of range")
            packed = packed * self.K + i
        return packed

    def unpack(self, packed: int) -> tuple[int, ...]:
        if not 0 <= packed < self.cell_count:
            raise ValueError("cell id out of range")
        out = []
        for _ in range(self.k):
            packed, r = divmod(packed, self.K)
            out.append(r)
        return tuple(reversed(out))

    def window_cell(self, window) -> int:
        """Classify a length-k window of naturals into its packed cell id."""
        w = tuple(window)
        if len(w) != self.k:
            raise ValueError(f"need a window of length {self.k}")
        return self.pack(self.base.cell_of(n) for n in w)

    def point_cell(self, x: Point) -> int:
        return self.window_cell(x.window(self.k))

    def roll(self, packed: int, new_base_index: int) -> int:
        """Slide the window one step: drop the oldest digit, append the new."""
        if not 0 <= new_base_index < self.K:
            raise ValueError("base index out of range")
        return (packed % self.roll_radix) * self.K + new_base_index

    def cell_tuple_str(self, packed: int) -> str:
        return "(" + ",".join(str(i) for i in self.unpack(packed)) + ")"


def build_product_cover(delta: float, params: MetricParams,
                        cell_budget: int | None = DEFAULT_CELL_BUDGET) -> ProductCover:
    if delta > coarsest_valid_scale(params) + ATOL:
        raise ValueError(
            f"scale {delta:g} exceeds the coarsest valid scale "
            f"{coarsest_valid_scale(params):g} for {params.kind}")
    base = build_cover(delta, params)
    k = depth_for_scale(delta, params)
    count = base.count ** k
    if cell_budget is not None and count > cell_budget:
        raise BudgetError(
            f"product cover needs {count} cells (K={base.count}, k={k}), "
            f"over the budget of {cell_budget}",
            cell_count=count, K=base.count, k=k, budget=cell_budget)
    return ProductCover(base, k, delta)


@dataclass(frozen=True)
class SandwichReport:
    delta: float
    samples: int
    inner_attempted: int
    inner_accepted: int
    inner_violations: int
    outer_violations: int
    inner_examples: tuple
    outer_examples: tuple

    @property
    def inner_ok(self) -> bool:
        return self.inner_violations == 0

    @property
    def outer_ok(self) -> bool:
        return self.outer_violations == 0


def _perturb(x: Point, horizon: int, rng: StreamRng) -> Point:
    """Random small modification of coordinates below the horizon; the
    candidate agrees with x everywhere else."""
    coords = list(x.window(max(horizon, len(x.prefix))))
    for _ in range(1 + rng.next_u64() % 3):
        pos = rng.randint(0, horizon - 1)
        cur = coords[pos]
        if rng.next_u64() & 1:
            step = rng.randint(1, 3)
            coords[pos] = max(1, cur + (step if rng.next_u64() & 1 else -step))
        else:
            coords[pos] = rng.randint(1, cur + 4)
    return Point(tuple(coords), x.tail)


def _sample_in_cell(cover: ProductCover, packed: int, tail_sym: int,
                    rng: StreamRng) -> Point:
    """A point of the product cell: uniform inside finite base cells, a
    geometric offset inside tail cells; coordinates past the window are free."""
    coords = []
    for idx in cover.unpack(packed):
        cell = cover.base.cells[idx]
        if cell.is_tail:
            offset = 0
            while rng.next_u64() & 1:
                offset += 1
            coords.append(cell.lo + offset)
        else:
            coords.append(rng.randint(cell.lo, cell.hi))
    return Point(tuple(coords), tail_sym)


def verify_sandwich(x: Point, cover: ProductCover, samples: int,
                    seed: int, max_examples: int = 5) -> SandwichReport:
    """Check both inclusions at the point x.

    Inner: points within delta of x must share x's cell. Candidates are
    rejection-sampled from coordinate perturbations, so acceptance is by the
    true distance; any violation found is a genuine counterexample.
    Outer: points of x's cell must lie within T*delta of x.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = StreamRng(seed, 0)
    delta = cover.delta
    home = cover.point_cell(x)
    horizon = cover.k + 3

    inner_viol = 0
    inner_examples = []
    accepted = 0
    attempts = 0
    max_attempts = 200 * samples
    while accepted < samples and attempts < max_attempts:
        attempts += 1
        y = _perturb(x, horizon, rng)
        if shift_distance(x, y, cover.base.params) > delta + ATOL:
            continue
        accepted += 1
        if cover.point_cell(y) != home:
            inner_viol += 1
            if len(inner_examples) < max_examples:
                inner_examples.append((y.window(cover.k), shift_distance(x, y, cover.base.params)))

    outer_viol = 0
    outer_examples = []
    bound = cover.T * delta + ATOL
    for _ in range(samples):
        y = _sample_in_cell(cover, home, x.tail, rng)
        d = shift_distance(x, y, cover.base.params)
        if d > bound:
            outer_viol += 1
            if len(outer_examples) < max_examples:
                outer_examples.append((y.window(cover.k), d))

    return SandwichReport(delta, samples, attempts, accepted, inner_viol,
                          outer_viol, tuple(inner_examples), tuple(outer_examples))
