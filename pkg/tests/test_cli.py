"""End-to-end checks of the command-line interface: exit codes, the CSV
report contract, byte determinism, config precedence, and refusal paths."""

import json
import math
import os
import subprocess
import sys

import pytest

from shiftlab import dynamics, measures
from shiftlab.metrics import MetricParams
from shiftlab.productcover import build_product_cover

# Frozen interface contract: downstream consumers parse this exact header.
HEADER = ("delta,K,k,cells,min_mass,mmin_lo,mmin_hi,Ehit_exact,"
          "Ecov_mean,Ecov_se,coupon,main_lo,main_hi,dim_ratio")


def run_cli(*argv, env_extra=None, cwd=None):
    env = dict(os.environ)
    env.pop("SHIFTLAB_SEED", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "shiftlab", *argv],
                          capture_output=True, text=True, env=env, cwd=cwd,
                          timeout=600)


# ---------------------------------------------------------------------------
# exit codes


def test_cover_ok_exit0():
    r = run_cli("cover", "--delta", "0.25")
    assert r.returncode == 0
    out = json.loads(r.stdout)
    assert out["count"] == 4
    assert out["N"] == 4 and out["Ns"] == 2
    assert out["product"]["k"] == 3
    assert out["product"]["cell_count"] == 64
    assert out["product"]["T"] == 3.0
    assert out["config"]["metric"] == "d1"
    assert out["config"]["delta"] == 0.25


def test_validation_error_exit2():
    r = run_cli("cover", "--delta", "1.5")
    assert r.returncode == 2
    assert r.stderr.startswith("error:")
    assert r.stdout == ""


def test_budget_refusal_exit3_with_details():
    r = run_cli("cover", "--delta", "0.01")
    assert r.returncode == 3
    lines = r.stderr.strip().splitlines()
    assert lines[0].startswith("budget refusal:")
    details = json.loads(lines[1])
    assert details["cell_count"] == 19 ** 8
    assert details["k"] == 8


def test_runtime_abort_exit4(monkeypatch, capsys):
    # the overflow path needs ~1e9 steps to trigger for real; exercise the
    # dispatch by injecting the error at the library boundary
    from shiftlab import cli
    from shiftlab.errors import TrialOverflowError

    def boom(*a, **kw):
        raise TrialOverflowError("step cap exceeded", cap=1)

    monkeypatch.setattr(cli.dynamics, "hitting_times_mc", boom)
    rc = cli.main(["simulate", "hit", "--delta", "0.5", "--cell", "0",
                   "--trials", "100"])
    captured = capsys.readouterr()
    assert rc == 4
    assert "runtime abort: step cap exceeded" in captured.err
    assert json.loads(captured.err.strip().splitlines()[-1]) == {"cap": 1}


def test_verify_counts_exit1_honest():
    r = run_cli("verify", "counts")
    assert r.returncode == 1
    lines = r.stdout.strip().splitlines()
    assert lines[-1].startswith("FAIL: 2 failing check(s)")
    by_name = {}
    for ln in lines[:-1]:
        tag, rest = ln.split(" ", 1)
        by_name[rest.split(":")[0]] = tag
    assert by_name["counts.d1_cells_0.1"] == "PASS"
    assert by_name["counts.d1_cells_0.25"] == "PASS"
    assert by_name["counts.d1_ratio_0.01"] == "PASS"
    # the finest-scale count targets are not met by this construction
    assert by_name["counts.d1_ratio_0.0001"] == "FAIL"
    assert by_name["counts.d1_ratio_1e-06"] == "FAIL"
    assert by_name["counts.d2_0.001"] == "PASS"
    assert by_name["counts.greedy_0.1"] == "PASS"


def test_verify_sandwich_honest_inner_failure():
    # the one-sided inclusion fails for any multi-cell cover: perturbing the
    # last window coordinate moves the point less than delta yet crosses a
    # cell boundary; the diameter (outer) direction always holds
    r = run_cli("verify", "sandwich", "--seed", "3")
    assert r.returncode == 1
    lines = r.stdout.strip().splitlines()
    for ln in lines[:-1]:
        if ln.split(" ", 1)[1].startswith("sandwich.diameter"):
            assert ln.startswith("PASS ")
        else:
            assert ln.startswith("FAIL ")
            assert "outer violations 0" in ln


# ---------------------------------------------------------------------------
# measure


def test_measure_values():
    r = run_cli("measure", "--cell-word", "1,2", "--natcell", "5:9",
                "--min-cell", "--mmin-bracket", "--delta", "0.25")
    assert r.returncode == 0
    out = json.loads(r.stdout)
    assert out["cylinder_mass"] == 0.125
    assert out["natcell_mass"] == 2.0 ** -4 - 2.0 ** -9
    assert out["min_cell"]["packed"] == 63
    assert out["min_cell"]["cell"] == "(3,3,3)"
    assert out["min_cell"]["mass"] == 2.0 ** -9
    assert out["mmin_bracket"]["log2_lo"] == -55.0
    assert out["mmin_bracket"]["log2_hi"] == -9.0


def test_measure_gibbs_check():
    r = run_cli("measure", "--model", "powerlaw:2.5", "--gibbs-check", "2.0")
    assert r.returncode == 0
    out = json.loads(r.stdout)
    assert out["gibbs_check"]["ok"] is True
    r2 = run_cli("measure", "--model", "powerlaw:2.0", "--gibbs-check", "2.5")
    assert json.loads(r2.stdout)["gibbs_check"]["ok"] is False


def test_measure_nothing_exit2():
    r = run_cli("measure")
    assert r.returncode == 2
    assert "nothing to do" in r.stderr


# ---------------------------------------------------------------------------
# simulate


def test_simulate_hit_jsonl(tmp_path):
    path = tmp_path / "vals.jsonl"
    r = run_cli("simulate", "hit", "--delta", "0.5", "--cell", "0",
                "--trials", "400", "--seed", "77", "--jsonl", str(path))
    assert r.returncode == 0
    out = json.loads(r.stdout)
    est = out["estimate"]
    assert est["trials"] == 400 and est["master_seed"] == 77
    rows = [json.loads(ln) for ln in path.read_text().splitlines()]
    assert len(rows) == 400
    assert [row["trial"] for row in rows] == list(range(400))
    assert all(row["seed"] == 77 for row in rows)
    vals = [row["value"] for row in rows]
    assert est["mean"] == pytest.approx(sum(vals) / len(vals), rel=1e-12)
    # exact value comes from the same automaton the library exposes
    cover = build_product_cover(0.5, MetricParams("d1"))
    model = measures.parse_model("geometric")
    assert out["exact"] == dynamics.expected_hitting_exact(0, cover, model)
    assert abs(est["mean"] - out["exact"]) <= 5.0 * est["stderr"]


def test_simulate_cell_out_of_range_exit2():
    r = run_cli("simulate", "hit", "--delta", "0.5", "--cell", "99999",
                "--trials", "100")
    assert r.returncode == 2
    assert "out of range" in r.stderr


def test_simulate_trials_too_small_exit2():
    r = run_cli("simulate", "cover", "--delta", "0.5", "--trials", "1")
    assert r.returncode == 2


def test_simulate_cover_preflight_exit3():
    r = run_cli("simulate", "cover", "--delta", "0.125", "--trials", "10")
    assert r.returncode == 3
    details = json.loads(r.stderr.strip().splitlines()[-1])
    assert details["log2_min_mass"] == -28
    assert 0.125 < details["feasible_scale"] < 0.5


def test_simulate_tail_rows():
    r = run_cli("simulate", "tail", "--delta", "0.5", "--cell", "0,0",
                "--n-grid", "4,16", "--trials", "400", "--seed", "9")
    assert r.returncode == 0
    out = json.loads(r.stdout)
    assert out["config"]["cell"] == "(0,0)"
    assert out["config"]["n_grid"] == [4, 16]
    cover = build_product_cover(0.5, MetricParams("d1"))
    model = measures.parse_model("geometric")
    mass = measures.product_cell_measure(cover.pack((0, 0)), cover, model)
    rows = out["rows"]
    assert [row["n"] for row in rows] == [4, 16]
    for row in rows:
        assert row["law"] == pytest.approx(math.exp(-mass * row["n"]), rel=1e-12)
        assert 0.0 <= row["survival"] <= 1.0
    assert rows[1]["survival"] <= rows[0]["survival"]


def test_simulate_kac_reciprocal_mass():
    r = run_cli("simulate", "kac", "--delta", "0.5", "--cell", "0",
                "--trials", "2000", "--seed", "21")
    assert r.returncode == 0
    out = json.loads(r.stdout)
    assert out["kac_reciprocal_mass"] == pytest.approx(4.0, rel=1e-12)
    est = out["estimate"]
    assert abs(est["mean"] - 4.0) <= 4.0 * est["stderr"]


# ---------------------------------------------------------------------------
# config precedence


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"delta": 0.1, "model": "powerlaw:2",
                               "seed": 7}))
    r = run_cli("measure", "--mmin-bracket", "--config", str(cfg))
    out = json.loads(r.stdout)
    assert out["config"]["delta"] == 0.1
    assert out["config"]["model"] == "powerlaw:2"
    r2 = run_cli("measure", "--mmin-bracket", "--config", str(cfg),
                 "--delta", "0.25", "--model", "geometric")
    out2 = json.loads(r2.stdout)
    assert out2["config"]["delta"] == 0.25
    assert out2["config"]["model"] == "geometric"
    assert out2["mmin_bracket"]["log2_lo"] == -55.0


def test_seed_env_and_overrides(tmp_path):
    r = run_cli("simulate", "hit", "--delta", "0.5", "--cell", "0",
                "--trials", "100", env_extra={"SHIFTLAB_SEED": "4242"})
    assert json.loads(r.stdout)["estimate"]["master_seed"] == 4242
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 555}))
    r2 = run_cli("simulate", "hit", "--delta", "0.5", "--cell", "0",
                 "--trials", "100", "--config", str(cfg),
                 env_extra={"SHIFTLAB_SEED": "4242"})
    assert json.loads(r2.stdout)["estimate"]["master_seed"] == 555
    r3 = run_cli("simulate", "hit", "--delta", "0.5", "--cell", "0",
                 "--trials", "100", "--config", str(cfg), "--seed", "6",
                 env_extra={"SHIFTLAB_SEED": "4242"})
    assert json.loads(r3.stdout)["estimate"]["master_seed"] == 6


def test_config_must_be_object(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("[1, 2]")
    r = run_cli("cover", "--config", str(cfg))
    assert r.returncode == 2
    assert "JSON object" in r.stderr


# ---------------------------------------------------------------------------
# report


def test_report_contract_and_values(tmp_path):
    out_path = tmp_path / "r.csv"
    r = run_cli("report", "--grid", "0.5,0.25", "--trials", "200",
                "--seed", "5", "--out", str(out_path))
    assert r.returncode == 0
    lines = out_path.read_text().splitlines()
    assert lines[0].startswith("# shiftlab-config: ")
    echo = json.loads(lines[0][len("# shiftlab-config: "):])
    assert echo["grid"] == [0.5, 0.25]
    assert echo["trials"] == 200 and echo["seed"] == 5
    assert "workers" not in echo and "out" not in echo
    assert lines[1] == HEADER
    assert len(lines) == 4
    rows = [ln.split(",") for ln in lines[2:]]
    assert all(len(row) == 14 for row in rows)
    params = MetricParams("d1")
    model = measures.parse_model("geometric")
    for row, delta in zip(rows, (0.5, 0.25)):
        assert float(row[0]) == delta
        k = int(row[2])
        assert int(row[3]) == int(row[1]) ** k
        ehit = dynamics.worst_hitting_exact(delta, params, model)
        assert float(row[7]) == pytest.approx(ehit, rel=1e-10)
        mean, se = float(row[8]), float(row[9])
        assert se > 0.0 and mean > 0.0
        assert float(row[13]) > 0.0
    assert int(rows[0][1]) == 2 and int(rows[0][2]) == 2
    assert int(rows[1][1]) == 4 and int(rows[1][2]) == 3
    # min_mass column repeats the bracket's upper end in scientific form
    assert rows[1][4] == rows[1][6]


def test_report_byte_determinism(tmp_path):
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    args = ("report", "--grid", "0.5,0.25", "--trials", "150", "--seed", "88")
    assert run_cli(*args, "--out", str(a)).returncode == 0
    assert run_cli(*args, "--out", str(b)).returncode == 0
    assert run_cli(*args, "--workers", "8", "--out", str(c)).returncode == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() == c.read_bytes()


def test_report_refusal_row_is_na(tmp_path):
    out_path = tmp_path / "r.csv"
    r = run_cli("report", "--grid", "0.125", "--trials", "100",
                "--out", str(out_path))
    assert r.returncode == 0
    assert "cover simulation refused" in r.stderr
    row = out_path.read_text().splitlines()[2].split(",")
    assert row[8] == "n/a" and row[9] == "n/a"
    # analytic columns still fill in around the refusal
    assert float(row[7]) > 0.0
    assert float(row[0]) == 0.125


def test_report_stdout_when_no_out():
    r = run_cli("report", "--grid", "0.5", "--trials", "120", "--seed", "2")
    assert r.returncode == 0
    lines = r.stdout.splitlines()
    assert lines[1] == HEADER
    assert len(lines) == 3
