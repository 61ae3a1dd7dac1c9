"""Bernoulli product measures on the shift space: exact coordinate weights,
cover-cell masses, minimal-mass brackets, the power-envelope check on the
weight decay, coordinate sampling, and the window-independence estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _rng
from .metrics import ATOL, MetricParams, depth_for_scale, coarsest_valid_scale
from .natcover import NatCell, NatCover, build_cover

LOG2_10 = math.log2(10.0)


def _partial_power_tail(start: int, kappa: float) -> float:
    """Sum_{t>=start} t^-kappa: direct sum to a fixed cutoff, then the
    Euler-Maclaurin tail. The first omitted term is O(M^-(kappa+5)), giving
    relative error below 1e-20 at the cutoff regardless of kappa > 1."""
    if start < 1:
        raise ValueError("start must be >= 1")
    if kappa <= 1.0:
        raise ValueError("exponent must exceed 1")
    M = max(start, 4096)
    head = 0.0
    if start < M:
        ns = np.arange(start, M, dtype=np.float64)
        head = float(np.sum(ns ** -kappa))
    fM = M ** -kappa
    tail = (M * fM / (kappa - 1.0)
            + 0.5 * fM
            + kappa * fM / (12.0 * M)
            - kappa * (kappa + 1.0) * (kappa + 2.0) * fM / (720.0 * M ** 3))
    return head + tail


class Geometric:
    """Weights p(n) = 2^-n on n >= 1. All masses are exact dyadics."""

    name = "geometric"

    def pmf(self, n: int) -> float:
        if n < 1:
            raise ValueError("support starts at 1")
        return 2.0 ** -n

    def log2_pmf(self, n: int) -> float:
        if n < 1:
            raise ValueError("support starts at 1")
        return -float(n)

    def tail_mass(self, n: int) -> float:
        return 2.0 ** -(n - 1)

    def log2_tail_mass(self, n: int) -> float:
        return -(n - 1.0)

    def cell_mass(self, cell: NatCell) -> float:
        if cell.is_tail:
            return self.tail_mass(cell.lo)
        return 2.0 ** -(cell.lo - 1) - 2.0 ** -cell.hi

    def log2_cell_mass(self, cell: NatCell) -> float:
        if cell.is_tail:
            return self.log2_tail_mass(cell.lo)
        # 2^-(lo-1) * (1 - 2^-(hi-lo+1)), stable for large lo
        return -(cell.lo - 1.0) + math.log2(1.0 - 2.0 ** -(cell.hi - cell.lo + 1))

    def quantile(self, u: float) -> int:
        # u in (0, 1]; boundary u = 0.5 maps to 1
        return max(math.ceil(-math.log2(u)), 1)

    def sample_batch(self, states: np.ndarray, gammas: np.ndarray) -> np.ndarray:
        u = _rng.vec_next_uniform(states, gammas)
        return np.maximum(np.ceil(-np.log2(u)), 1.0).astype(np.int64)

    def dominates_power_envelope(self, kappa: float) -> bool:
        # exponential decay beats every power
        return True

    def envelope_gap_tail_decreasing_from(self, kappa: float) -> int:
        # g(n) = kappa*ln(n+1) - n*ln 2 decreases once n+1 > kappa/ln 2
        return max(1, math.ceil(kappa / math.log(2.0)))


class PowerLaw:
    """Weights p(n) = (n+1)^-kappa / Z on n >= 1, Z = sum_{n>=1} (n+1)^-kappa."""

    # CDF table cutoff: adaptive toward 1e-9 residual, hard-capped; the
    # residual tail is sampled exactly by accept-reject, so the cutoff only
    # affects speed, never the sampled law.
    TABLE_CAP = 1 << 20
    TABLE_RESIDUAL_TARGET = 1e-9

    def __init__(self, kappa: float):
        if kappa <= 1.0:
            raise ValueError("power-law exponent must exceed 1")
        self.kappa = float(kappa)
        self.Z = _partial_power_tail(2, self.kappa)
        self.name = f"powerlaw:{kappa:g}"
        self._cdf_table: np.ndarray | None = None

    def pmf(self, n: int) -> float:
        if n < 1:
            raise ValueError("support starts at 1")
        return (n + 1.0) ** -self.kappa / self.Z

    def log2_pmf(self, n: int) -> float:
        if n < 1:
            raise ValueError("support starts at 1")
        return (-self.kappa * math.log2(n + 1.0)) - math.log2(self.Z)

    def tail_mass(self, n: int) -> float:
        return _partial_power_tail(n + 1, self.kappa) / self.Z

    def log2_tail_mass(self, n: int) -> float:
        return math.log2(self.tail_mass(n))

    def cell_mass(self, cell: NatCell) -> float:
        if cell.is_tail:
            return self.tail_mass(cell.lo)
        if cell.hi - cell.lo < 4096:
            ns = np.arange(cell.lo, cell.hi + 1, dtype=np.float64)
            return float(np.sum((ns + 1.0) ** -self.kappa)) / self.Z
        return self.tail_mass(cell.lo) - self.tail_mass(cell.hi + 1)

    def log2_cell_mass(self, cell: NatCell) -> float:
        return math.log2(self.cell_mass(cell))

    def _table(self) -> np.ndarray:
        if self._cdf_table is None:
            # grow until the residual target or the cap
            size = 4096
            while size < self.TABLE_CAP and self.tail_mass(size + 1) > self.TABLE_RESIDUAL_TARGET:
                size *= 2
            ns = np.arange(1, size + 1, dtype=np.float64)
            self._cdf_table = np.cumsum((ns + 1.0) ** -self.kappa) / self.Z
        return self._cdf_table

    def quantile(self, u: float) -> int:
        table = self._table()
        if u <= table[-1]:
            return int(np.searchsorted(table, u, side="left")) + 1
        # bisect the analytic tail: smallest n with 1 - CDF(n) <= 1 - u
        resid = 1.0 - u
        lo, hi = len(table), 2 * len(table)
        while self.tail_mass(hi + 1) > resid:
            lo, hi = hi, 2 * hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.tail_mass(mid + 1) <= resid:
                hi = mid
            else:
                lo = mid
        return hi

    def sample_batch(self, states: np.ndarray, gammas: np.ndarray) -> np.ndarray:
        table = self._table()
        u = _rng.vec_next_uniform(states, gammas)
        out = (np.searchsorted(table, u, side="left") + 1).astype(np.int64)
        over = u > table[-1]
        if np.any(over):
            idx = np.nonzero(over)[0]
            out[idx] = self._tail_ar_streams(states, gammas, idx, len(table))
        return out

    def _tail_ar_streams(self, states: np.ndarray, gammas: np.ndarray,
                         idx: np.ndarray, cutoff: int) -> np.ndarray:
        """Exact accept-reject on {cutoff+1, ...} drawing more uniforms from
        the owning per-trial streams only."""
        a = self.kappa - 1.0
        M = float(cutoff)
        # acceptance ceiling: ratio of target (m+1)^-k to the discretized
        # Pareto proposal (m^-a - (m+1)^-a)/a is maximal near the boundary
        ms = np.arange(cutoff + 1, cutoff + 256, dtype=np.float64)
        ceiling = float(np.max((ms + 1.0) ** -self.kappa /
                               ((ms ** -a - (ms + 1.0) ** -a) / a))) * (1.0 + 1e-9)
        out = np.zeros(len(idx), dtype=np.int64)
        pending = np.arange(len(idx))
        while pending.size:
            owners = idx[pending]
            u1 = _rng.vec_next_uniform_at(states, gammas, owners)
            y = (M + 1.0) * u1 ** (-1.0 / a)
            # int64 saturation: covers classify everything this deep into the
            # tail cell, so magnitude past 2^63 carries no information
            m = np.floor(np.minimum(y, 9.0e18))
            u2 = _rng.vec_next_uniform_at(states, gammas, owners)
            # m^-a - (m+1)^-a via expm1: the direct difference cancels to 0
            # for huge m, which would turn accept_p into inf
            prop = -np.expm1(-a * np.log1p(1.0 / m)) * m ** -a
            accept_p = (m + 1.0) ** -self.kappa / (ceiling * prop / a)
            ok = u2 < accept_p
            out[pending[ok]] = m[ok].astype(np.int64)
            pending = pending[~ok]
        return out

    def _tail_ar(self, _sink, cutoff, draw):
        a = self.kappa - 1.0
        M = float(cutoff)
        ms = np.arange(cutoff + 1, cutoff + 256, dtype=np.float64)
        ceiling = float(np.max((ms + 1.0) ** -self.kappa /
                               ((ms ** -a - (ms + 1.0) ** -a) / a))) * (1.0 + 1e-9)
        while True:
            u1, u2 = draw(2)
            y = (M + 1.0) * float(u1) ** (-1.0 / a)
            m = min(math.floor(y), 9.0e18)
            prop = -math.expm1(-a * math.log1p(1.0 / m)) * m ** -a
            accept_p = (m + 1.0) ** -self.kappa / (ceiling * prop / a)
            if float(u2) < accept_p:
                return np.array([int(m)], dtype=np.int64)

    def dominates_power_envelope(self, kappa: float) -> bool:
        return self.kappa >= kappa - 1e-12

    def envelope_gap_tail_decreasing_from(self, kappa: float) -> int:
        # gap (kappa - self.kappa)*ln(n+1) is monotone; any point works
        return 1


def parse_model(spec: str):
    """Model string: 'geometric' or 'powerlaw:KAPPA'."""
    s = spec.strip().lower()
    if s == "geometric":
        return Geometric()
    if s.startswith("powerlaw:"):
        try:
            kappa = float(s.split(":", 1)[1])
        except ValueError as exc:
            raise ValueError(f"bad power-law exponent in {spec!r}") from exc
        return PowerLaw(kappa)
    raise ValueError(f"unknown model spec {spec!r}")


def cylinder_measure(word, model) -> float:
    """Product of coordinate weights; the empty word is the whole space."""
    out = 1.0
    for letter in word:
        out *= model.pmf(letter)
    return out


def natcell_mass(cell: NatCell, model) -> float:
    return model.cell_mass(cell)


def base_cell_masses(cover: NatCover, model) -> np.ndarray:
    masses = np.array([model.cell_mass(c) for c in cover.cells], dtype=np.float64)
    if abs(float(np.sum(masses)) - 1.0) > 1e-10:
        raise AssertionError("base cell masses do not sum to 1")
    return masses


def product_cell_measure(cell_id: int, cover, model) -> float:
    """cover is a ProductCover; mass = product of per-coordinate cell masses."""
    out = 1.0
    for idx in cover.unpack(cell_id):
        out *= model.cell_mass(cover.base.cells[idx])
    return out


def _argmin_base_cell(cover: NatCover, model) -> tuple[int, float, float]:
    """(index, mass, log2 mass) of the minimal positive-mass base cell;
    ties resolve toward the last (tail-most) cell."""
    best_idx = -1
    best = math.inf
    for i, c in enumerate(cover.cells):
        m = model.cell_mass(c)
        if m > 0.0 and m <= best:
            best, best_idx = m, i
    if best_idx < 0:
        raise ValueError("no cell carries positive mass")
    return best_idx, best, model.log2_cell_mass(cover.cells[best_idx])


def min_cell_measure(cover, model) -> tuple[int, float]:
    """Minimal-mass product cell of a ProductCover: minimization separates
    across coordinates for product measures."""
    idx, mass, _ = _argmin_base_cell(cover.base, model)
    packed = cover.pack((idx,) * cover.k)
    return packed, mass ** cover.k


def min_cell_log2(delta: float, params: MetricParams, model) -> float:
    """log2 of the minimal product-cell mass at the given scale, computed
    from the base cover alone (never enumerates product cells)."""
    cover = build_cover(delta, params)
    k = depth_for_scale(delta, params)
    _, _, log2_base = _argmin_base_cell(cover, model)
    return k * log2_base


@dataclass(frozen=True)
class MassBracket:
    """Bracket for the minimal delta-ball mass: lo at scale delta/T, hi at
    scale delta. Log2 fields are authoritative when the floats under/overflow."""

    delta: float
    lo: float
    hi: float
    log2_lo: float
    log2_hi: float


def mmin_bracket(delta: float, params: MetricParams, model) -> MassBracket:
    if delta <= 0.0:
        raise ValueError("scale must be positive")
    T = params.sandwich_constant
    eff = min(delta, coarsest_valid_scale(params))
    log2_hi = min_cell_log2(eff, params, model)
    log2_lo = min_cell_log2(eff / T, params, model)
    return MassBracket(eff, 2.0 ** log2_lo, 2.0 ** log2_hi, log2_lo, log2_hi)


def gibbs_envelope_check(model, kappa: float, n_max: int = 10 ** 6) -> bool:
    """True iff p(n) <= C (n+1)^-kappa for some constant C and all n: finite
    scan for the sup constant plus the analytic tail comparison. Weights are
    only meaningful up to a multiplicative constant here."""
    return gibbs_envelope_report(model, kappa, n_max)["ok"]


def gibbs_envelope_report(model, kappa: float, n_max: int = 10 ** 6) -> dict:
    if kappa <= 1.0:
        raise ValueError("envelope exponent must exceed 1")
    ns = np.arange(1, n_max + 1, dtype=np.float64)
    # gap(n) = log2 p(n) + kappa log2(n+1); bounded above iff dominated
    if isinstance(model, Geometric):
        gaps = -ns + kappa * np.log2(ns + 1.0)
    elif isinstance(model, PowerLaw):
        gaps = (kappa - model.kappa) * np.log2(ns + 1.0) - math.log2(model.Z)
    else:
        gaps = np.array([model.log2_pmf(int(n)) + kappa * math.log2(n + 1.0) for n in ns])
    ok = bool(model.dominates_power_envelope(kappa))
    arg = int(np.argmax(gaps))
    return {
        "ok": ok,
        "sup_log2_constant": float(gaps[arg]),
        "argmax_n": arg + 1,
        "n_scanned": n_max,
    }


def sample_coordinate(model, rng: _rng.StreamRng) -> int:
    """Exact inverse-CDF draw (plus accept-reject tail for power laws)."""
    if isinstance(model, PowerLaw):
        table = model._table()
        u = rng.uniform()
        if u <= table[-1]:
            return int(np.searchsorted(table, u, side="left")) + 1
        return int(model._tail_ar(None, len(table),
                                  lambda m: [rng.uniform() for _ in range(m)])[0])
    return model.quantile(rng.uniform())


def sample_within_cell(cell: NatCell, model, rng: _rng.StreamRng) -> int:
    """Draw from the model conditioned on landing in the cell (exact)."""
    if cell.is_tail:
        if isinstance(model, Geometric):
            # memoryless: offset is a fresh geometric
            return cell.lo - 1 + model.quantile(rng.uniform())
        mass_before = model.tail_mass(cell.lo)
        u = rng.uniform() * mass_before
        # invert the conditional CDF by walking tails (cells are shallow)
        n = cell.lo
        acc = 0.0
        while True:
            acc += model.pmf(n)
            if acc >= u - 1e-15 or n > cell.lo + 10 ** 7:
                return n
            n += 1
    weights = [model.pmf(n) for n in range(cell.lo, cell.hi + 1)]
    total = sum(weights)
    u = rng.uniform() * total
    acc = 0.0
    for offset, w in enumerate(weights):
        acc += w
        if acc >= u - 1e-15:
            return cell.lo + offset
    return cell.hi


# ---------------------------------------------------------------------------
# window-independence (psi) estimator


@dataclass(frozen=True)
class PsiPair:
    word_a: tuple[int, ...]
    word_b: tuple[int, ...]
    psi: float | None
    stderr: float | None
    joint_hits: int


@dataclass(frozen=True)
class PsiReport:
    mean: float
    stderr: float
    trials: int
    master_seed: int
    gap: int
    pairs: tuple[PsiPair, ...]
    excluded: tuple[PsiPair, ...]

    def max_abs_z(self) -> float:
        zs = [abs(p.psi) / p.stderr for p in self.pairs if p.stderr]
        return max(zs) if zs else 0.0

    def consistent_with_independence(self, z: float = 3.0) -> bool:
        return all(abs(p.psi) <= z * p.stderr for p in self.pairs)


def _letter_matrix(model, trials: int, length: int, master_seed: int,
                   perturb_repeat: float) -> np.ndarray:
    states, gammas = _rng.vec_derive_streams(master_seed, np.arange(trials))
    cols = []
    for t in range(length):
        if perturb_repeat > 0.0 and t > 0:
            flips = _rng.vec_next_uniform(states, gammas) < perturb_repeat
            fresh = model.sample_batch(states, gammas)
            cols.append(np.where(flips, cols[-1], fresh))
        else:
            cols.append(model.sample_batch(states, gammas))
    return np.stack(cols, axis=1)


def psi_mixing_gap(depth_i: int, gap_j: int, depth_l: int, model, trials: int,
                   master_seed: int, perturb_repeat: float = 0.0,
                   min_joint_hits: int = 100) -> PsiReport:
    """Empirical sup over word pairs of |P(A and shifted B)/(P(A)P(B)) - 1|.

    Words range over {1,2}^depth (the two heaviest letters). perturb_repeat
    is the deliberately corrupted negative-control stream: each letter repeats
    its predecessor with that probability instead of being drawn fresh.
    """
    if depth_i < 1 or depth_l < 1 or gap_j < 0:
        raise ValueError("depths must be >= 1 and the gap >= 0")
    if trials < 2:
        raise ValueError("need at least 2 trials")
    L = depth_i + gap_j + depth_l
    X = _letter_matrix(model, trials, L, master_seed, perturb_repeat)

    def words(depth: int):
        out, layer = [], [()]
        for _ in range(depth):
            layer = [w + (c,) for w in layer for c in (1, 2)]
            out.extend(layer)
        return out

    start_b = depth_i + gap_j
    included: list[PsiPair] = []
    excluded: list[PsiPair] = []
    for wa in words(depth_i):
        ia = np.all(X[:, :len(wa)] == np.array(wa), axis=1)
        for wb in words(depth_l):
            ib = np.all(X[:, start_b:start_b + len(wb)] == np.array(wb), axis=1)
            iab = ia & ib
            joint = int(np.sum(iab))
            if joint < min_joint_hits:
                excluded.append(PsiPair(wa, wb, None, None, joint))
                continue
            pa, pb, pab = float(np.mean(ia)), float(np.mean(ib)), float(np.mean(iab))
            ratio = pab / (pa * pb)
            grad = np.array([-pab / (pa * pa * pb), -pab / (pa * pb * pb), 1.0 / (pa * pb)])
            cov = np.cov(np.stack([ia, ib, iab]).astype(np.float64))
            se = math.sqrt(max(float(grad @ cov @ grad), 0.0) / trials)
            included.append(PsiPair(wa, wb, ratio - 1.0, se, joint))
    if not included:
        raise ValueError("every word pair was undersampled; raise trials")
    top = max(included, key=lambda p: abs(p.psi))
    return PsiReport(top.psi, top.stderr, trials, master_seed, gap_j,
                     tuple(included), tuple(excluded))
