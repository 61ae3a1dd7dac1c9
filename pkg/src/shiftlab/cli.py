"""Command-line interface: cover construction, measure queries, simulations,
verification suites, and grid reports.

Exit codes: 0 success, 1 verification failure, 2 validation error,
3 budget refusal, 4 runtime abort.

Config precedence: flags > --config JSON file > built-in defaults; the
effective statistical config is echoed into every output. Execution-only
settings (worker count, output paths) are excluded from the echo so that
identical statistical configs produce byte-identical outputs."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import bounds as bounds_mod
from . import dynamics, measures
from ._rng import StreamRng
from .errors import BudgetError, TrialOverflowError
from .metrics import MetricParams, Point, coarsest_valid_scale, depth_for_scale, product_cell_diameter
from .natcover import build_cover, build_cover_d1, build_cover_d2, greedy_min_cover
from .productcover import DEFAULT_CELL_BUDGET, build_product_cover, verify_sandwich

DEFAULT_SEED = 12345
CSV_HEADER = ("delta,K,k,cells,min_mass,mmin_lo,mmin_hi,Ehit_exact,"
              "Ecov_mean,Ecov_se,coupon,main_lo,main_hi,dim_ratio")


# ---------------------------------------------------------------------------
# formatting


def fmt_csv(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".12g")


def fmt_csv_log10(log10_value: float) -> str:
    """Scientific notation straight from log10, for masses and envelopes
    outside the float range; 12 significant digits."""
    if math.isinf(log10_value):
        return "0" if log10_value < 0 else "inf"
    exp = math.floor(log10_value)
    mant = 10.0 ** (log10_value - exp)
    if mant >= 10.0:
        mant /= 10.0
        exp += 1
    return f"{mant:.11g}e{exp:+03d}"


def dumps(obj) -> str:
    """JSON with full-precision floats (shortest exact round-trip, at most
    17 significant digits)."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True)


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# config handling


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config file must hold a JSON object")
    return cfg


def _effective(args, cfg: dict, key: str, default):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in cfg:
        return cfg[key]
    return default


def _seed(args, cfg: dict) -> int:
    env = os.environ.get("SHIFTLAB_SEED")
    return int(_effective(args, cfg, "seed", int(env) if env else DEFAULT_SEED))


def _params(args, cfg: dict) -> MetricParams:
    metric = _effective(args, cfg, "metric", "d1")
    theta = float(_effective(args, cfg, "theta", 0.5))
    alpha = _effective(args, cfg, "alpha", None)
    return MetricParams(metric, theta, float(alpha) if alpha is not None else None)


def _model(args, cfg: dict):
    return measures.parse_model(_effective(args, cfg, "model", "geometric"))


def _parse_grid(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        vals = [float(v) for v in text]
    else:
        vals = [float(tok) for tok in text.split(",") if tok.strip()]
    if not vals:
        raise ValueError("empty scale grid")
    return vals


def _parse_cell(spec: str, cover, model) -> int:
    if spec == "worst":
        return dynamics.worst_cell(cover, model)
    if "," in spec:
        return cover.pack(int(tok) for tok in spec.split(","))
    packed = int(spec)
    if not 0 <= packed < cover.cell_count:
        raise ValueError(f"cell id {packed} out of range")
    return packed


# ---------------------------------------------------------------------------
# cover


def cmd_cover(args) -> int:
    cfg = _load_config(args.config)
    params = _params(args, cfg)
    delta = float(_effective(args, cfg, "delta", 0.25))
    budget = int(_effective(args, cfg, "cell_budget", DEFAULT_CELL_BUDGET))
    cover = build_product_cover(delta, params, budget)
    base = cover.base
    echo = {"command": "cover", "metric": params.kind, "theta": params.theta,
            "alpha": params.alpha, "delta": delta, "cell_budget": budget}
    out = {
        "config": echo,
        "base": base.to_json_dict(),
        "N": base.N,
        "Ns": base.Ns,
        "count": base.count,
        "product": {"k": cover.k, "cell_count": cover.cell_count,
                    "T": cover.T, "delta": delta,
                    "cell_diameter": product_cell_diameter(cover.k, delta, params)},
    }
    if args.verify_sandwich:
        model = _model(args, cfg)
        seed = _seed(args, cfg)
        rng = StreamRng(seed, 1)
        reports = []
        for i in range(10):
            prefix = tuple(measures.sample_coordinate(model, rng)
                           for _ in range(cover.k + 2))
            x = Point(prefix, measures.sample_coordinate(model, rng))
            rep = verify_sandwich(x, cover, args.verify_sandwich, seed + i)
            reports.append({"point": list(prefix), "tail": x.tail,
                            "inner_violations": rep.inner_violations,
                            "outer_violations": rep.outer_violations,
                            "inner_accepted": rep.inner_accepted})
        out["sandwich"] = reports
    _emit(dumps(out) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# measure


def cmd_measure(args) -> int:
    cfg = _load_config(args.config)
    model = _model(args, cfg)
    out = {"config": {"command": "measure", "model": model.name}}
    did_something = False
    if args.cell_word:
        word = [int(t) for t in args.cell_word.split(",") if t.strip()]
        out["cell_word"] = word
        out["cylinder_mass"] = measures.cylinder_measure(word, model)
        did_something = True
    if args.natcell:
        lo_s, hi_s = args.natcell.split(":")
        from .natcover import NatCell
        cell = NatCell(int(lo_s), None if hi_s in ("inf", "") else int(hi_s))
        out["natcell"] = [cell.lo, cell.hi]
        out["natcell_mass"] = measures.natcell_mass(cell, model)
        did_something = True
    needs_scale = args.min_cell or args.mmin_bracket
    if needs_scale:
        params = _params(args, cfg)
        delta = float(_effective(args, cfg, "delta", 0.25))
        out["config"].update({"metric": params.kind, "theta": params.theta,
                              "alpha": params.alpha, "delta": delta})
        if args.min_cell:
            cover = build_product_cover(delta, params)
            packed, mass = measures.min_cell_measure(cover, model)
            out["min_cell"] = {"cell": cover.cell_tuple_str(packed),
                               "packed": packed, "mass": mass}
            did_something = True
        if args.mmin_bracket:
            br = measures.mmin_bracket(delta, params, model)
            out["mmin_bracket"] = {"delta": br.delta, "lo": br.lo, "hi": br.hi,
                                   "log2_lo": br.log2_lo, "log2_hi": br.log2_hi}
            did_something = True
    if args.gibbs_check is not None:
        rep = measures.gibbs_envelope_report(model, float(args.gibbs_check))
        out["gibbs_check"] = rep
        did_something = True
    if not did_something:
        raise ValueError("nothing to do: pass --cell-word, --natcell, "
                         "--min-cell, --mmin-bracket, or --gibbs-check")
    _emit(dumps(out) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# simulate


def _write_jsonl(path: str, values, seed: int):
    with open(path, "w") as fh:
        for i, v in enumerate(values):
            fh.write(json.dumps({"trial": i, "seed": seed, "value": int(v)}) + "\n")


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    params = _params(args, cfg)
    model = _model(args, cfg)
    delta = float(_effective(args, cfg, "delta", 0.25))
    trials = int(_effective(args, cfg, "trials", 2000))
    seed = _seed(args, cfg)
    workers = int(_effective(args, cfg, "workers", 1))
    echo = {"command": f"simulate {args.what}", "metric": params.kind,
            "theta": params.theta, "alpha": params.alpha, "model": model.name,
            "delta": delta, "trials": trials, "seed": seed}

    if args.what == "cover":
        values = dynamics.cover_times_mc(delta, params, model, trials, seed,
                                         workers=workers)
        est = dynamics.estimate_from(values, seed)
        out = {"config": echo, "estimate": est.__dict__}
    else:
        cover = build_product_cover(delta, params)
        cell = _parse_cell(args.cell, cover, model)
        echo["cell"] = cover.cell_tuple_str(cell)
        if args.what == "hit":
            values = dynamics.hitting_times_mc(cell, cover, model, trials, seed,
                                               workers=workers)
            est = dynamics.estimate_from(values, seed)
            out = {"config": echo, "estimate": est.__dict__,
                   "exact": dynamics.expected_hitting_exact(cell, cover, model)}
        elif args.what == "kac":
            values = dynamics.kac_return_times_mc(cell, cover, model, trials,
                                                  seed, workers=workers)
            est = dynamics.estimate_from(values, seed)
            out = {"config": echo, "estimate": est.__dict__,
                   "kac_reciprocal_mass":
                       1.0 / measures.product_cell_measure(cell, cover, model)}
        else:  # tail
            grid = _parse_grid(args.n_grid)
            rows = dynamics.hitting_tail_law(cell, cover, model,
                                             [int(n) for n in grid],
                                             trials, seed, workers=workers)
            echo["n_grid"] = [int(n) for n in grid]
            out = {"config": echo,
                   "rows": [{"n": r.n, "survival": r.survival,
                             "stderr": r.stderr, "law": r.law} for r in rows]}
            values = None
    if args.jsonl and values is not None:
        _write_jsonl(args.jsonl, values, seed)
    _emit(dumps(out) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# verify


class _Checker:
    def __init__(self):
        self.failures = 0

    def check(self, ok: bool, name: str, detail: str):
        tag = "PASS" if ok else "FAIL"
        if not ok:
            self.failures += 1
        print(f"{tag} {name}: {detail}")


def _verify_counts(c: _Checker, cfg: dict):
    cover01 = build_cover_d1(0.1)
    want01 = [(1, 1), (2, 2), (3, 3), (4, 4), (5, 9), (10, None)]
    got01 = [(cell.lo, cell.hi) for cell in cover01.cells]
    c.check(got01 == want01, "counts.d1_cells_0.1", f"cells {got01}")
    cover025 = build_cover_d1(0.25)
    want025 = [(1, 1), (2, 2), (3, 3), (4, None)]
    got025 = [(cell.lo, cell.hi) for cell in cover025.cells]
    c.check(got025 == want025, "counts.d1_cells_0.25", f"cells {got025}")
    for delta, target in ((1e-2, 0.95), (1e-4, 1.005), (1e-6, 0.9995)):
        K = build_cover_d1(delta).count
        val = K * math.sqrt(delta) / 2.0
        c.check(abs(val - target) <= 1e-3, f"counts.d1_ratio_{delta:g}",
                f"K={K}, K*sqrt(delta)/2={val:.6f}, target {target}")
    for delta, want in ((1e-2, 5), (1e-3, 7), (1e-4, 10)):
        K = build_cover_d2(delta, 1.0).count
        c.check(K == want, f"counts.d2_{delta:g}", f"K={K}, want {want}")
    cov2 = build_cover_d2(1e-2, 0.2)
    blocks = [cell for cell in cov2.cells if cell.hi is not None and cell.hi > cell.lo]
    first_width = (blocks[-1].hi - blocks[-1].lo + 1) if blocks else 0
    c.check(first_width == 3, "counts.d2_block_width",
            f"first block width {first_width} at alpha=0.2, delta=0.01")
    gcount = greedy_min_cover(0.1, MetricParams("d1")).count
    c.check(gcount == 5 and cover01.count == 6, "counts.greedy_0.1",
            f"greedy {gcount} vs constructed {cover01.count}")
    for delta in (0.1, 0.05, 1e-2, 1e-3, 1e-4):
        g = greedy_min_cover(delta, MetricParams("d1")).count
        p = build_cover_d1(delta).count
        ok = g <= p and (delta != 1e-4 or g / p >= 0.95)
        c.check(ok, f"counts.greedy_{delta:g}", f"greedy {g} vs constructed {p}, ratio {g/p:.4f}")


def _verify_kac(c: _Checker, cfg: dict, seed: int, trials: int):
    params = MetricParams("d1")
    model = measures.parse_model("geometric")
    cover = build_product_cover(0.25, params)
    for label, cell in (("all_tail", dynamics.worst_cell(cover, model)),
                        ("cell_000", cover.pack((0, 0, 0)))):
        est = dynamics.kac_return_mc(cell, cover, model, max(trials, 100), seed)
        target = 1.0 / measures.product_cell_measure(cell, cover, model)
        ok = abs(est.mean - target) <= 3.0 * est.stderr
        c.check(ok, f"kac.{label}",
                f"mean {est.mean:.3f} vs 1/mass {target:.3f} (se {est.stderr:.3f})")
    rng = StreamRng(seed, 99)
    for i in range(10):
        cell = rng.randint(0, cover.cell_count - 1)
        est = dynamics.kac_return_mc(cell, cover, model, max(trials // 4, 100), seed + i)
        target = 1.0 / measures.product_cell_measure(cell, cover, model)
        rel = est.stderr / target
        ok = abs(est.mean / target - 1.0) <= 3.0 * rel
        c.check(ok, f"kac.random_{cover.cell_tuple_str(cell)}",
                f"mean/target {est.mean / target:.4f} (3 rel SE {3 * rel:.4f})")


def _verify_psi(c: _Checker, cfg: dict, seed: int, trials: int, model):
    for j in (0, 1, 5):
        rep = measures.psi_mixing_gap(2, j, 2, model, trials, seed)
        c.check(rep.consistent_with_independence(3.0), f"psi.{model.name}_gap{j}",
                f"max |psi|/se = {rep.max_abs_z():.2f} over {len(rep.pairs)} pairs")
    ctrl = measures.psi_mixing_gap(2, 0, 2, model, trials, seed,
                                   perturb_repeat=0.35)
    c.check(not ctrl.consistent_with_independence(3.0), "psi.negative_control",
            f"corrupted stream max |psi|/se = {ctrl.max_abs_z():.1f} (must exceed 3)")


def _verify_sandwich_cmd(c: _Checker, cfg: dict, seed: int):
    model = measures.parse_model("geometric")
    for params, delta in ((MetricParams("d1"), 0.25), (MetricParams("d1"), 0.1),
                          (MetricParams("d2", 0.5, 1.0), 0.01)):
        cover = build_product_cover(delta, params)
        rng = StreamRng(seed, 7)
        inner = outer = 0
        for i in range(20):
            prefix = tuple(measures.sample_coordinate(model, rng)
                           for _ in range(cover.k + 2))
            x = Point(prefix, measures.sample_coordinate(model, rng))
            rep = verify_sandwich(x, cover, 100, seed + i)
            inner += rep.inner_violations
            outer += rep.outer_violations
        c.check(inner == 0 and outer == 0,
                f"sandwich.{params.kind}_{delta:g}",
                f"inner violations {inner}, outer violations {outer}")
        diam = product_cell_diameter(cover.k, delta, params)
        c.check(diam <= cover.T * delta + 1e-12,
                f"sandwich.diameter_{params.kind}_{delta:g}",
                f"cell diameter {diam:.6f} <= T*delta {cover.T * delta:.6f}")


def _verify_bounds(c: _Checker, cfg: dict, seed: int, trials: int):
    params = MetricParams("d1")
    model = measures.parse_model("geometric")
    cover = build_product_cover(0.25, params)
    worst = dynamics.expected_hitting_exact(dynamics.worst_cell(cover, model),
                                            cover, model)
    coupon = bounds_mod.coupon_envelope(cover, model)
    est = dynamics.expected_cover_mc(0.25, params, model, max(trials, 2), seed)
    ok = worst - 3 * est.stderr <= est.mean <= coupon + 3 * est.stderr
    c.check(ok, "bounds.coupon_0.25",
            f"E*max {worst:.1f} <= mean {est.mean:.1f} <= coupon {coupon:.1f}")
    env = bounds_mod.main_envelope_d1(0.25, params, model)
    slack = est.mean / env.lo
    c.check(env.lo <= est.mean, "bounds.main_lo_0.25",
            f"lo {env.lo:.3g} <= mean {est.mean:.1f}; slack vs lo {slack:.3g}, hi {env.hi:.3g}")
    rep = bounds_mod.bernoulli_example_bounds(0.25)
    band = (rep["band_product"], rep["band_collapsed"])
    c.check(all(0.5 <= b <= 2.0 for b in band), "bounds.dyadic_band",
            f"exponent/reference bands {band[0]:.3f}, {band[1]:.3f}")


def _verify_dim(c: _Checker, cfg: dict, grid, floor: float):
    params = MetricParams("d1")
    model = measures.parse_model("geometric")
    rows = bounds_mod.dim_diagnostic(grid, params, model)
    ratios = [r.ratio for r in rows]
    increasing = all(b > a for a, b in zip(ratios, ratios[1:]))
    c.check(increasing, "dim.increasing",
            "ratios " + ", ".join(f"{r:.3f}" for r in ratios))
    c.check(ratios[-1] >= floor, "dim.floor",
            f"finest ratio {ratios[-1]:.3f} >= floor {floor}")
    c.check(ratios[0] >= 1.0, "dim.coarsest", f"coarsest ratio {ratios[0]:.3f}")


def cmd_verify(args) -> int:
    cfg = _load_config(args.config)
    seed = _seed(args, cfg)
    trials = int(_effective(args, cfg, "trials", 20000))
    what = args.what
    c = _Checker()
    if what in ("all", "counts"):
        _verify_counts(c, cfg)
    if what in ("all", "kac"):
        _verify_kac(c, cfg, seed, trials)
    if what in ("all", "psi"):
        model = _model(args, cfg)
        _verify_psi(c, cfg, seed, max(trials, 100000), model)
    if what in ("all", "sandwich"):
        _verify_sandwich_cmd(c, cfg, seed)
    if what in ("all", "bounds"):
        _verify_bounds(c, cfg, seed, max(trials // 10, 2000))
    if what in ("all", "dim"):
        grid = _parse_grid(args.grid) if args.grid else [0.5, 0.25, 0.1, 0.05]
        _verify_dim(c, cfg, grid, float(_effective(args, cfg, "floor", 10.0)))
    print(f"{'FAIL' if c.failures else 'PASS'}: {c.failures} failing check(s)")
    return 1 if c.failures else 0


# ---------------------------------------------------------------------------
# report


def _report_row(delta: float, params: MetricParams, model, trials: int,
                seed: int, workers: int, step_budget: float,
                cell_budget: int, eps: float | None) -> str:
    base = build_cover(delta, params)
    k = depth_for_scale(delta, params)
    cells = base.count ** k
    bracket = measures.mmin_bracket(delta, params, model)
    ehit = dynamics.worst_hitting_exact(delta, params, model)
    coupon = (k + ehit) * bounds_mod.harmonic(cells)
    if params.kind == "d1":
        env = bounds_mod.main_envelope_d1(delta, params, model, eps)
    else:
        env = bounds_mod.main_envelope_d2(delta, params, model, eps)
    dim_ratio = bracket.log2_hi / math.log2(delta)

    ecov_mean = ecov_se = "n/a"
    try:
        est = dynamics.expected_cover_mc(delta, params, model, trials, seed,
                                         step_budget=step_budget,
                                         cell_budget=cell_budget,
                                         workers=workers)
        ecov_mean, ecov_se = est.mean, est.stderr
    except BudgetError as exc:
        print(f"warning: delta={delta:g} cover simulation refused: {exc}",
              file=sys.stderr)

    fields = [fmt_csv(delta), fmt_csv(base.count), fmt_csv(k), fmt_csv(cells),
              fmt_csv_log10(bracket.log2_hi * math.log10(2.0)),
              fmt_csv_log10(bracket.log2_lo * math.log10(2.0)),
              fmt_csv_log10(bracket.log2_hi * math.log10(2.0)),
              fmt_csv(ehit), fmt_csv(ecov_mean), fmt_csv(ecov_se),
              fmt_csv(coupon), fmt_csv_log10(env.log10_lo),
              fmt_csv_log10(env.log10_hi), fmt_csv(dim_ratio)]
    return ",".join(fields)


def cmd_report(args) -> int:
    cfg = _load_config(args.config)
    params = _params(args, cfg)
    model = _model(args, cfg)
    trials = int(_effective(args, cfg, "trials", 2000))
    seed = _seed(args, cfg)
    workers = int(_effective(args, cfg, "workers", 1))
    step_budget = float(_effective(args, cfg, "step_budget", dynamics.DEFAULT_STEP_BUDGET))
    cell_budget = int(_effective(args, cfg, "cell_budget", DEFAULT_CELL_BUDGET))
    eps = _effective(args, cfg, "eps", None)
    eps = float(eps) if eps is not None else None
    grid = _parse_grid(_effective(args, cfg, "grid", ""))
    echo = {"command": "report", "metric": params.kind, "theta": params.theta,
            "alpha": params.alpha, "model": model.name, "trials": trials,
            "seed": seed, "grid": grid, "step_budget": step_budget,
            "cell_budget": cell_budget,
            "eps": eps if eps is not None else 1.0 / (2.0 * params.sandwich_constant)}
    lines = ["# shiftlab-config: " + json.dumps(echo, sort_keys=True), CSV_HEADER]
    for delta in grid:
        lines.append(_report_row(delta, params, model, trials, seed, workers,
                                 step_budget, cell_budget, eps))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="shiftlab",
        description="Covers, measures, and orbit statistics on the countable "
                    "full shift.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, delta=True):
        sp.add_argument("--metric", choices=("d1", "d2"))
        sp.add_argument("--theta", type=float)
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--model")
        sp.add_argument("--config")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out")
        if delta:
            sp.add_argument("--delta", type=float)

    sp = sub.add_parser("cover", help="build covers and check the sandwich")
    common(sp)
    sp.add_argument("--verify-sandwich", type=int, metavar="N")
    sp.add_argument("--cell-budget", dest="cell_budget", type=int)
    sp.set_defaults(func=cmd_cover)

    sp = sub.add_parser("measure", help="measure queries")
    common(sp)
    sp.add_argument("--cell-word", dest="cell_word")
    sp.add_argument("--natcell")
    sp.add_argument("--min-cell", dest="min_cell", action="store_true")
    sp.add_argument("--mmin-bracket", dest="mmin_bracket", action="store_true")
    sp.add_argument("--gibbs-check", dest="gibbs_check", type=float)
    sp.set_defaults(func=cmd_measure)

    sp = sub.add_parser("simulate", help="Monte Carlo orbit statistics")
    sp.add_argument("what", choices=("hit", "cover", "kac", "tail"))
    common(sp)
    sp.add_argument("--cell", default="worst")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--n-grid", dest="n_grid", default="256,512,1024,2048")
    sp.add_argument("--jsonl")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="invariant suites")
    sp.add_argument("what", choices=("all", "counts", "kac", "psi",
                                     "sandwich", "bounds", "dim"))
    common(sp)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--grid")
    sp.add_argument("--floor", type=float)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("report", help="grid report CSV")
    common(sp, delta=False)
    sp.add_argument("--grid")
    sp.add_argument("--trials", type=int)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--step-budget", dest="step_budget", type=float)
    sp.add_argument("--cell-budget", dest="cell_budget", type=int)
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetError as exc:
        print(f"budget refusal: {exc}", file=sys.stderr)
        if exc.details:
            print(json.dumps(exc.details, default=str), file=sys.stderr)
        return 3
    except TrialOverflowError as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        if exc.details:
            print(json.dumps(exc.details, default=str), file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
