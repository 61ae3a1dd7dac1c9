"""Envelopes and diagnostics for cover statistics: the coupon-collector
upper bound, two-sided cover-time envelopes from minimal-mass brackets at
bracketing scales, the dyadic example's exponent band, and the box-dimension
blowup diagnostic. Heavy masses are carried in log2; float fields degrade to
0/inf only past the representable range."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import expected_hitting_exact, worst_cell
from .measures import min_cell_log2, mmin_bracket
from .metrics import MetricParams, coarsest_valid_scale, depth_for_scale
from .natcover import build_cover_d1
from .productcover import ProductCover

EULER_GAMMA = 0.5772156649015329


def harmonic(n: int) -> float:
    if n < 1:
        raise ValueError("harmonic numbers start at 1")
    if n <= 10 ** 6:
        return float(np.sum(1.0 / np.arange(1, n + 1)))
    return math.log(n) + EULER_GAMMA + 1.0 / (2 * n) - 1.0 / (12 * n * n)


def coupon_envelope(cover: ProductCover, model,
                    exact_hitting=None) -> float:
    """Upper envelope for the expected cover time: every cell is hit in mean
    time at most k + max-cell expected hitting, and the coupon argument pays
    a harmonic factor in the number of cells. exact_hitting, when given, is
    the per-cell expectation array; otherwise the worst cell is located
    directly."""
    if exact_hitting is not None:
        worst = float(np.max(np.asarray(exact_hitting, dtype=np.float64)))
    else:
        worst = expected_hitting_exact(worst_cell(cover, model), cover, model)
    return (cover.k + worst) * harmonic(cover.cell_count)


def _pow2(log2_value: float) -> float:
    if log2_value > 1024.0:
        return math.inf
    if log2_value < -1074.0:
        return 0.0
    return 2.0 ** log2_value


@dataclass(frozen=True)
class EnvelopePair:
    """Two-sided envelope for the expected delta-ball cover time. The log10
    fields are authoritative; lo/hi floats saturate at 0/inf."""

    delta: float
    eps: float
    lo: float
    hi: float
    log10_lo: float
    log10_hi: float
    scale_lo: float
    scale_hi: float


def _envelope(delta: float, params: MetricParams, model, eps: float,
              slow_factor: float) -> EnvelopePair:
    # eps = 1 degenerates to the same scale on both sides
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    if delta <= 0.0:
        raise ValueError("scale must be positive")
    # coarse side: balls at delta contain cells at delta/eps (clamped), so
    # the cover time dominates the reciprocal largest-scale minimal mass
    scale_lo = min(delta / eps, coarsest_valid_scale(params))
    log2_lo_mass = min_cell_log2(scale_lo, params, model)
    log10_lo = -log2_lo_mass * math.log10(2.0)
    # fine side: cells at eps*delta sit inside balls at delta, and the
    # coupon factor contributes the slowly varying term
    bracket = mmin_bracket(eps * delta, params, model)
    log10_hi = -bracket.log2_lo * math.log10(2.0) + math.log10(slow_factor)
    return EnvelopePair(delta, eps, _pow2(-log2_lo_mass),
                        _pow2(-bracket.log2_lo + math.log2(slow_factor)),
                        log10_lo, log10_hi, scale_lo, eps * delta)


def main_envelope_d1(delta: float, params: MetricParams, model,
                     eps: float | None = None) -> EnvelopePair:
    if params.kind != "d1":
        raise ValueError("d1 envelope needs d1 parameters")
    if eps is None:
        eps = 1.0 / (2.0 * params.sandwich_constant)
    slow = math.log(1.0 / delta) ** 2
    if slow <= 0.0:
        raise ValueError("envelope needs delta < 1")
    return _envelope(delta, params, model, eps, slow)


def main_envelope_d2(delta: float, params: MetricParams, model,
                     eps: float | None = None) -> EnvelopePair:
    if params.kind != "d2":
        raise ValueError("d2 envelope needs d2 parameters")
    if eps is None:
        eps = 1.0 / (2.0 * params.sandwich_constant)
    L = math.log(1.0 / delta)
    if L <= 1.0:
        raise ValueError("d2 envelope needs delta < 1/e")
    return _envelope(delta, params, model, eps, L * math.log(L))


def bernoulli_example_bounds(delta: float, theta: float = 0.5) -> dict:
    """Exponent of the minimal product-cell mass for the dyadic example, in
    two algebraic arrangements, against the reference (1/delta) log2(1/delta).

    exponent_product multiplies the per-coordinate tail exponent N-1 by the
    depth; exponent_collapsed absorbs the geometric normalization into the
    depth term. mass = 2^-exponent."""
    if theta != 0.5:
        raise ValueError("the dyadic example uses theta = 1/2")
    params = MetricParams("d1", theta)
    cover = build_cover_d1(delta)
    N = cover.N
    k = depth_for_scale(delta, params)
    exponent_product = float(k * (N - 1))
    exponent_collapsed = k * N - math.log2(1.0 / (1.0 - 2.0 ** -k))
    reference = (1.0 / delta) * math.log2(1.0 / delta)
    return {
        "delta": delta,
        "N": N,
        "k": k,
        "exponent_product": exponent_product,
        "exponent_collapsed": exponent_collapsed,
        "reference": reference,
        "band_product": exponent_product / reference,
        "band_collapsed": exponent_collapsed / reference,
        # the two arrangements disagree whenever k > 0; recorded, not resolved
        "discrepancy": abs(exponent_product - exponent_collapsed) > 1e-9,
    }


@dataclass(frozen=True)
class DimRow:
    delta: float
    log2_min_mass: float
    ratio: float


def dim_diagnostic(delta_grid, params: MetricParams, model) -> list[DimRow]:
    """Ratio log(minimal cell mass)/log(delta) along a decreasing grid; a
    finite box dimension would keep it bounded, so blowup is the signal."""
    grid = [float(d) for d in delta_grid]
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("scale grid must be strictly decreasing")
    rows = []
    for d in grid:
        if not 0.0 < d < 1.0:
            raise ValueError("diagnostic scales must lie in (0, 1)")
        log2_mass = min_cell_log2(d, params, model)
        rows.append(DimRow(d, log2_mass, log2_mass / math.log2(d)))
    return rows


def normalized_cover_ratio(mean_cover: float, delta: float,
                           params: MetricParams, model) -> float:
    """Measured cover time times the minimal cell mass at the same scale,
    against the square-log factor: the scale-free comparison number."""
    log2_mass = min_cell_log2(delta, params, model)
    return mean_cover * _pow2(log2_mass) / math.log(1.0 / delta) ** 2
