"""Base metrics on the positive naturals and shift metrics on eventually
constant sequences, with closed-form diameters and the depth-for-scale map."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# Absolute tolerance for threshold comparisons; every quantity in play is O(1).
ATOL = 1e-12

D1 = "d1"
D2 = "d2"


@dataclass(frozen=True)
class MetricParams:
    """Metric selector: kind 'd1' (polynomial base) or 'd2' (exponential base)."""

    kind: str
    theta: float = 0.5
    alpha: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in (D1, D2):
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie in (0, 1)")
        if self.kind == D2:
            if self.alpha is None or self.alpha <= 0.0:
                raise ValueError("d2 requires alpha > 0")

    def rho(self, a: int, b: int) -> float:
        if self.kind == D1:
            return rho1(a, b)
        return rho2(a, b, self.alpha)

    @property
    def sandwich_constant(self) -> float:
        """T = 1/(1-theta) + 1: cell-in-ball inflation factor."""
        return 1.0 / (1.0 - self.theta) + 1.0


@dataclass(frozen=True)
class Point:
    """Eventually constant sequence: prefix then a repeated tail symbol.

    Dense in the shift space and closed under every metric evaluation needed
    here; fully general sequences are never required.
    """

    prefix: tuple[int, ...] = field(default_factory=tuple)
    tail: int = 1

    def __post_init__(self) -> None:
        if self.tail < 1 or any(c < 1 for c in self.prefix):
            raise ValueError("coordinates must be >= 1")

    def coordinate(self, n: int) -> int:
        return self.prefix[n] if n < len(self.prefix) else self.tail

    def window(self, k: int) -> tuple[int, ...]:
        return tuple(self.coordinate(n) for n in range(k))


def rho1(a: int, b: int) -> float:
    if a < 1 or b < 1:
        raise ValueError("alphabet starts at 1")
    return abs(1.0 / a - 1.0 / b)


def rho2(a: int, b: int, alpha: float) -> float:
    if a < 1 or b < 1:
        raise ValueError("alphabet starts at 1")
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    return abs(math.exp(-alpha * a) - math.exp(-alpha * b))


def shift_distance(x: Point, y: Point, params: MetricParams) -> float:
    """Sum_{n>=0} theta^n rho(x_n, y_n): finite head plus exact geometric tail."""
    theta = params.theta
    m = max(len(x.prefix), len(y.prefix))
    total = 0.0
    weight = 1.0
    for n in range(m):
        total += weight * params.rho(x.coordinate(n), y.coordinate(n))
        weight *= theta
    total += weight * params.rho(x.tail, y.tail) / (1.0 - theta)
    return total


def space_diameter(params: MetricParams) -> float:
    """sup over pairs: rho suprema are 1 (d1) and e^-alpha (d2)."""
    base_sup = 1.0 if params.kind == D1 else math.exp(-params.alpha)
    return base_sup / (1.0 - params.theta)


def cylinder_diameter(k: int, params: MetricParams) -> float:
    if k < 0:
        raise ValueError("depth must be >= 0")
    scale = params.theta ** k / (1.0 - params.theta)
    if params.kind == D2:
        scale *= math.exp(-params.alpha)
    return scale


def product_cell_diameter(k: int, delta: float, params: MetricParams) -> float:
    if k < 1:
        raise ValueError("depth must be >= 1")
    if delta <= 0.0:
        raise ValueError("scale must be positive")
    theta = params.theta
    head = delta * (1.0 - theta ** k) / (1.0 - theta)
    tail = theta ** k / (1.0 - theta)
    if params.kind == D2:
        tail *= math.exp(-params.alpha)
    return head + tail


def _depth_argument(delta: float, params: MetricParams) -> float:
    arg = delta * (1.0 - params.theta)
    if params.kind == D2:
        arg *= math.exp(params.alpha)
    return arg


def depth_for_scale(delta: float, params: MetricParams) -> int:
    """Window depth k with cylinder_diameter(k) <= delta, smallest such k."""
    if delta <= 0.0:
        raise ValueError("scale must be positive")
    arg = _depth_argument(delta, params)
    if arg > 1.0 + ATOL:
        raise ValueError(f"scale {delta} is coarser than the space at these parameters")
    if arg >= 1.0:
        return 1
    k = math.ceil(math.log(arg) / math.log(params.theta) - ATOL)
    return max(k, 1)


def coarsest_valid_scale(params: MetricParams) -> float:
    """Largest scale the cover constructions accept; clamp target for coarse requests."""
    if params.kind == D1:
        return 1.0
    # d2: depth argument delta*e^alpha*(1-theta) must stay <= 1, and the base
    # cover needs N >= 1, i.e. delta < 1.
    return min(1.0 / (math.exp(params.alpha) * (1.0 - params.theta)), 1.0 - 1e-12)
