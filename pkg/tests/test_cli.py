"""End-to-end command tests on small batches in tmp dirs."""

import json
import math

import numpy as np
import pytest
from oracles import lemma3_bruteforce

from infotrade.cli import main

BASE_CONFIG = {
    "scenario": 6, "phi": 1.01, "psi_a": 1.005, "psi_b": 1.005,
    "p": 0.8, "n_steps": 100, "sessions": 400, "seed": 5,
}


def write_config(tmp_path, name="config.json", **overrides):
    cfg = dict(BASE_CONFIG)
    cfg.update(overrides)
    for key, value in list(cfg.items()):
        if value is None:
            del cfg[key]
    path = tmp_path / name
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return str(path)


def read_rows(path):
    header, *rows = path.read_text(encoding="utf-8").splitlines()
    return header.split(","), [r.split(",") for r in rows]


# ---------------------------------------------------------------- simulate

def test_simulate_writes_deterministic_outputs(tmp_path):
    cfg = write_config(tmp_path)
    outs = [tmp_path / d for d in ("a", "b", "c")]
    assert main(["simulate", "--config", cfg, "--out", str(outs[0])]) == 0
    assert main(["simulate", "--config", cfg, "--out", str(outs[1])]) == 0
    assert main(["simulate", "--config", cfg, "--out", str(outs[2]),
                 "--workers", "3"]) == 0
    for name in ("sessions.csv", "summary.json"):
        ref = (outs[0] / name).read_bytes()
        assert (outs[1] / name).read_bytes() == ref, name
        assert (outs[2] / name).read_bytes() == ref, name  # workers invisible


def test_simulate_seed_flag_overrides_config(tmp_path):
    cfg = write_config(tmp_path)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "b"),
                 "--seed", "6"]) == 0
    assert ((tmp_path / "a" / "sessions.csv").read_bytes()
            != (tmp_path / "b" / "sessions.csv").read_bytes())


def test_simulate_csv_rebuilds_summary(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    header, rows = read_rows(out / "sessions.csv")
    assert header == ["session", "realized_x", "n_trades", "h_a_T", "h_a_0",
                      "max_abs_q", "trades"]
    assert len(rows) == 400
    summary = json.loads((out / "summary.json").read_text())
    h = np.array([float(r[4]) for r in rows])
    assert float(np.mean(h)) == summary["mean_h_a_0"]  # 17g round-trips
    assert sum(int(r[2]) for r in rows) \
        == sum(summary["trade_time_histogram"]["counts"])
    assert summary["n_traded_sessions"] == sum(int(r[2]) > 0 for r in rows)
    assert summary["master_seed"] == 5
    # packed trade segments: count matches the n_trades column
    for r in rows:
        segments = [s for s in r[6].split(";") if s]
        assert len(segments) == int(r[2])
        for seg in segments:
            t, side, px, q = seg.split(":")
            assert 0.0 < float(t) < 1.0
            assert int(side) in (1, -1)
            assert float(px) > 0.0
            int(q)


def test_simulate_trace_session(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    assert main(["simulate", "--config", cfg, "--out", str(out),
                 "--trace-session", "3"]) == 0
    header, rows = read_rows(out / "trace_3.csv")
    assert header[:4] == ["time_index", "time", "s_a", "s_b"]
    assert len(rows) == 101  # one per grid instant
    _, srows = read_rows(out / "sessions.csv")
    n_trades = int(srows[3][2])
    assert sum(r[9] != "0" for r in rows) == n_trades
    assert main(["simulate", "--config", cfg, "--out", str(out),
                 "--trace-session", "400"]) == 2


def test_simulate_rejects_unknown_key(tmp_path, capsys):
    cfg = write_config(tmp_path, bogus=1)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "bogus" in capsys.readouterr().err


def test_simulate_rejects_psi_at_or_above_phi(tmp_path, capsys):
    cfg = write_config(tmp_path, psi_a=1.03, phi=1.02)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "psi" in err and "spread factor" in err


def test_simulate_requires_scenario_and_phi(tmp_path, capsys):
    cfg = write_config(tmp_path, phi=None)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "phi" in capsys.readouterr().err
    cfg = write_config(tmp_path, scenario=None)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "scenario" in capsys.readouterr().err


def test_simulate_rejects_fixed_time_on_crossing_scenario(tmp_path, capsys):
    cfg = write_config(tmp_path, scenario=3, psi_a=1.0, psi_b=1.0,
                       fixed_time=0.5)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "fixed" in capsys.readouterr().err


def test_simulate_atoms_spelling_matches_p(tmp_path):
    cfg_p = write_config(tmp_path, "p.json")
    cfg_atoms = write_config(tmp_path, "atoms.json", p=None,
                             atoms=[[1.0, 0.8], [0.0, 0.2]])
    assert main(["simulate", "--config", cfg_p, "--out", str(tmp_path / "a")]) == 0
    assert main(["simulate", "--config", cfg_atoms, "--out", str(tmp_path / "b")]) == 0
    assert ((tmp_path / "a" / "sessions.csv").read_bytes()
            == (tmp_path / "b" / "sessions.csv").read_bytes())
    cfg_both = write_config(tmp_path, "both.json", atoms=[[1.0, 0.8], [0.0, 0.2]])
    assert main(["simulate", "--config", cfg_both, "--out", str(tmp_path / "c")]) == 2


# -------------------------------------------------------------------- sweep

def test_sweep_range_and_list_specs(tmp_path):
    cfg = write_config(tmp_path, scenario=3, psi_a=1.0, psi_b=1.0,
                       phi=1.02, n_steps=60, sessions=150)
    out = tmp_path / "grid"
    assert main(["sweep", "--config", cfg, "--out", str(out),
                 "--phis", "1.02:1.06:3", "--sigma-bs", "0.8,1.2"]) == 0
    header, rows = read_rows(out / "surface.csv")
    assert header == ["phi", "sigma_b", "mean_per_trade", "se_per_trade",
                      "mean_per_session", "se_per_session", "n_traded"]
    assert len(rows) == 6  # 3 phis x 2 sigmas
    assert [float(r[0]) for r in rows] == [1.02, 1.02, 1.04, 1.04, 1.06, 1.06]
    assert [float(r[1]) for r in rows] == [0.8, 1.2] * 3


def test_sweep_single_cell_equals_simulate(tmp_path):
    cfg = write_config(tmp_path, scenario=3, psi_a=1.0, psi_b=1.0,
                       phi=1.02, n_steps=60, sessions=150)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "sim")]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "sw"),
                 "--phis", "1.02"]) == 0
    summary = json.loads((tmp_path / "sim" / "summary.json").read_text())
    _, rows = read_rows(tmp_path / "sw" / "surface.csv")
    assert len(rows) == 1
    assert float(rows[0][4]) == summary["mean_h_a_0"]
    assert float(rows[0][5]) == summary["se_h_a_0"]
    assert int(rows[0][6]) == summary["n_traded_sessions"]


def test_sweep_rejects_malformed_range(tmp_path, capsys):
    cfg = write_config(tmp_path, scenario=3, psi_a=1.0, psi_b=1.0)
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "o"),
                 "--phis", "1.0:2.0"]) == 2
    assert "start:stop:count" in capsys.readouterr().err


# -------------------------------------------------------------------- bound

def test_bound_prints_pinned_value(tmp_path, capsys):
    assert main(["bound", "--phi", "1.02", "--p", "0.8", "--sigma", "1",
                 "--t", "0.5", "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert "0.013549459243841662" in out  # scipy.integrate pin
    assert "sell trigger" in out and "buy trigger" in out
    payload = json.loads((tmp_path / "o" / "bound.json").read_text())
    assert payload["bound"] == 0.013549459243841662
    assert payload["seller_only"] is False


def test_bound_mc_check_agrees(capsys):
    assert main(["bound", "--phi", "1.02", "--p", "0.8", "--sigma", "1",
                 "--t", "0.5", "--check-mc", "50000"]) == 0
    out = capsys.readouterr().out
    assert "mc estimate" in out
    closed = float(out.split("bound: ")[1].splitlines()[0])
    mc = float(out.split("mc estimate: ")[1].split(" ")[0])
    se = float(out.split("(se ")[1].split(",")[0])
    assert abs(closed - mc) <= 3.0 * se


def test_bound_seller_only_note(capsys):
    assert main(["bound", "--phi", "1.2", "--p", "0.8", "--sigma", "1",
                 "--t", "0.5"]) == 0
    out = capsys.readouterr().out
    assert "Trader A can only be a seller" in out
    assert "xi >=" not in out  # no buy trigger line


def test_bound_rejects_bad_time(capsys):
    assert main(["bound", "--phi", "1.02", "--p", "0.8", "--sigma", "1",
                 "--t", "0"]) == 2
    assert "error" in capsys.readouterr().err


# ------------------------------------------------------------------- lemma3

def test_lemma3_csv_matches_bruteforce(tmp_path, capsys):
    out = tmp_path / "scan"
    assert main(["lemma3", "--max-len", "3", "--phi", "1.1",
                 "--out", str(out)]) == 0
    header, rows = read_rows(out / "lemma3.csv")
    assert header == ["n", "length", "sequence", "value"]
    assert len(rows) == 14
    assert [int(r[0]) for r in rows] == list(range(2, 16))
    mn, argmin, count = lemma3_bruteforce(3, 1.1, 1.0)
    assert count == 14
    for r in rows:
        eps = [1 if ch == "+" else -1 for ch in r[2]]
        assert len(eps) == int(r[1])
        q_prev, expect = 0, 0.0
        for e in eps:
            q = q_prev + e
            expect += e * (1.0 - 1.1 ** (-q) * 1.0 ** (-q_prev))
            q_prev = q
        assert math.isclose(float(r[3]), expect, rel_tol=1e-12)
    assert abs(min(float(r[3]) for r in rows) - mn) < 1e-14
    stdout = capsys.readouterr().out
    assert "minimum is positive" in stdout


def test_lemma3_depth_one_rows(tmp_path):
    out = tmp_path / "scan"
    assert main(["lemma3", "--max-len", "1", "--phi", "1.02",
                 "--out", str(out)]) == 0
    _, rows = read_rows(out / "lemma3.csv")
    assert sorted(r[2] for r in rows) == ["+", "-"]


def test_lemma3_refuses_oversized_scan(tmp_path, capsys):
    assert main(["lemma3", "--max-len", "26", "--phi", "1.02",
                 "--out", str(tmp_path / "o")]) == 2
    assert "max_len" in capsys.readouterr().err


# --------------------------------------------------------------------- hist

def test_hist_counts_match_summary(tmp_path):
    cfg = write_config(tmp_path)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "sim")]) == 0
    assert main(["hist", "--config", cfg, "--out", str(tmp_path / "h"),
                 "--bins", "20"]) == 0
    header, rows = read_rows(tmp_path / "h" / "hist.csv")
    assert header == ["bin_left", "bin_right", "count"]
    assert len(rows) == 20
    assert rows[0][0] == "0" and float(rows[-1][1]) == 1.0
    summary = json.loads((tmp_path / "sim" / "summary.json").read_text())
    assert (sum(int(r[2]) for r in rows)
            == sum(summary["trade_time_histogram"]["counts"]))


def test_hist_zero_trades_writes_header_only(tmp_path):
    cfg = write_config(tmp_path, scenario=3, psi_a=1.0, psi_b=1.0,
                       sigma_a=[1.0], sigma_b=[1.0], sessions=50)
    assert main(["hist", "--config", cfg, "--out", str(tmp_path / "h")]) == 0
    text = (tmp_path / "h" / "hist.csv").read_text()
    assert text == "bin_left,bin_right,count\n"
