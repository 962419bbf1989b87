"""Command-line front end: batch runs, sweeps, bounds, scans, histograms.

All file outputs are deterministic byte for byte given (config, seed): floats
print with 17 significant digits (lossless for doubles), rows follow session
order, and worker count never changes results, only wall time.

Config file (JSON), all keys optional except scenario and phi:

    scenario   1..6                      sessions   batch size (default 100000)
    phi        spread factor > 1         seed       master seed (default 0)
    psi_a/b    inventory aversion >= 1   n_steps    grid steps (default 5000)
    p          binary payoff weight      t_maturity horizon (default 1.0)
    atoms      [[x, w], ...] general law r          flat short rate (default 0)
    sigma_a/b  scalar effective rates, or explicit per-source lists
    max_trades scenario-6 cap            fixed_time scenario-1/2 trade time
    allow_last_interior_trade            true/false (default true)

Scalar sigma semantics: sigma_b > 0 builds B = [sigma_b] and
A = [sigma_b, sqrt(sigma_a^2 - sigma_b^2)]; sigma_b = 0 leaves B uninformed.
Unknown keys are rejected by name rather than silently ignored.

sessions.csv packs each session's executions into the trades column as
semicolon-joined time:side:price:Q tuples; sweep value lists accept either
'start:stop:count' (inclusive linear grid) or explicit comma lists.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict

import numpy as np

from .monte_carlo import (estimate_scenario2_bound_mc, histogram_from_result,
                          run_batch, sweep)
from .pricing import DiscountCurve, price_path, quote_from_mid
from .stochastic_core import (BridgePath, InformationPath, PayoffMeasure,
                              combine_source_values, effective_flow_rate,
                              make_information_path, make_time_grid,
                              sample_bridge_path, sample_payoff,
                              session_generator)
from .trading_engine import (ScenarioConfig, _lemma3_chunks, lemma3_scan,
                             run_session, scenario2_lower_bound,
                             scenario2_thresholds)

_CONFIG_KEYS = {
    "scenario", "phi", "psi_a", "psi_b", "p", "atoms", "r", "t_maturity",
    "n_steps", "sessions", "max_trades", "seed", "sigma_a", "sigma_b",
    "fixed_time", "allow_last_interior_trade",
}

_DEFAULTS = {
    "psi_a": 1.0, "psi_b": 1.0, "r": 0.0, "t_maturity": 1.0,
    "n_steps": 5000, "sessions": 100_000, "seed": 0,
    "sigma_a": math.sqrt(2.0), "sigma_b": 1.0,
    "allow_last_interior_trade": True,
}


def _f17(x) -> str:
    return format(float(x), ".17g")


def _require_int(raw, key: str, minimum: int):
    v = raw
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValueError(f"config key {key!r} must be an integer, got {v!r}")
    if v < minimum:
        raise ValueError(f"config key {key!r} must be >= {minimum}, got {v}")
    return v


def _build_measure(raw: dict) -> PayoffMeasure:
    if "atoms" in raw and "p" in raw:
        raise ValueError("config keys 'p' and 'atoms' are mutually exclusive")
    if "atoms" in raw:
        atoms = raw["atoms"]
        if (not isinstance(atoms, list) or not atoms
                or any(not isinstance(a, list) or len(a) != 2 for a in atoms)):
            raise ValueError("config key 'atoms' must be a list of [value, weight] pairs")
        return PayoffMeasure.discrete([(float(a[0]), float(a[1])) for a in atoms])
    return PayoffMeasure.binary(float(raw.get("p", 0.8)))


def _build_sources(raw: dict):
    sa = raw.get("sigma_a", _DEFAULTS["sigma_a"])
    sb = raw.get("sigma_b", _DEFAULTS["sigma_b"])
    if isinstance(sa, list) != isinstance(sb, list):
        raise ValueError("sigma_a and sigma_b must both be scalars or both be lists")
    if isinstance(sa, list):
        return tuple(float(v) for v in sa), tuple(float(v) for v in sb)
    sa = float(sa)
    sb = float(sb)
    if sb < 0 or sa <= 0:
        raise ValueError(f"need sigma_a > 0 and sigma_b >= 0, got "
                         f"sigma_a={sa}, sigma_b={sb}")
    if sb == 0.0:
        return (sa,), ()
    if sa < sb:
        raise ValueError(f"sigma_a={sa} must be >= sigma_b={sb}: trader A "
                         "sees everything B sees")
    return (sb, math.sqrt(sa * sa - sb * sb)), (sb,)


def load_run_config(path: str):
    """Parse a config file into (ScenarioConfig, sessions, seed, raw dict)."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError("config file must hold a JSON object")
    unknown = sorted(set(raw) - _CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config key(s): {', '.join(unknown)}")
    if "scenario" not in raw:
        raise ValueError("config key 'scenario' is required")
    if "phi" not in raw:
        raise ValueError("config key 'phi' is required")

    scenario = _require_int(raw["scenario"], "scenario", 1)
    n_steps = _require_int(raw.get("n_steps", _DEFAULTS["n_steps"]), "n_steps", 2)
    sessions = _require_int(raw.get("sessions", _DEFAULTS["sessions"]), "sessions", 1)
    seed = _require_int(raw.get("seed", _DEFAULTS["seed"]), "seed", 0)
    max_trades = raw.get("max_trades")
    if max_trades is not None:
        max_trades = _require_int(max_trades, "max_trades", 1)
    allow_last = raw.get("allow_last_interior_trade",
                         _DEFAULTS["allow_last_interior_trade"])
    if not isinstance(allow_last, bool):
        raise ValueError("config key 'allow_last_interior_trade' must be true or false")

    sources_a, sources_b = _build_sources(raw)
    grid = make_time_grid(float(raw.get("t_maturity", _DEFAULTS["t_maturity"])),
                          n_steps)
    config = ScenarioConfig(
        scenario_id=scenario,
        grid=grid,
        measure=_build_measure(raw),
        phi=float(raw["phi"]),
        psi_a=float(raw.get("psi_a", _DEFAULTS["psi_a"])),
        psi_b=float(raw.get("psi_b", _DEFAULTS["psi_b"])),
        sigma_sources_a=sources_a,
        sigma_sources_b=sources_b,
        curve=DiscountCurve(float(raw.get("r", _DEFAULTS["r"]))),
        max_trades=max_trades,
        fixed_trade_time=(float(raw["fixed_time"]) if "fixed_time" in raw else None),
        allow_last_interior_trade=allow_last,
    )
    return config, sessions, seed, raw


def _write_text(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_sessions_csv(path: str, result):
    times = result.config.grid.times
    lines = ["session,realized_x,n_trades,h_a_T,h_a_0,max_abs_q,trades"]
    for j in range(result.n_sessions):
        nt = int(result.n_trades[j])
        packed = ";".join(
            f"{_f17(times[result.trade_time_index[j, k]])}:"
            f"{int(result.trade_side[j, k])}:"
            f"{_f17(result.trade_price[j, k])}:{int(result.trade_inventory_after[j, k])}"
            for k in range(nt))
        lines.append(f"{j},{_f17(result.realized_x[j])},{nt},"
                     f"{_f17(result.h_a_T[j])},{_f17(result.h_a_0[j])},"
                     f"{int(result.max_abs_inventory[j])},{packed}")
    _write_text(path, "\n".join(lines) + "\n")


def _stats_dict(result) -> dict:
    d = asdict(result.stats)
    hist = d.pop("trade_time_histogram")
    d["trade_time_histogram"] = {
        "edges": [float(v) for v in hist["edges"]],
        "counts": [int(v) for v in hist["counts"]],
    }
    d["master_seed"] = result.master_seed
    return d


def _write_summary_json(path: str, result):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_stats_dict(result), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _trace_session(config: ScenarioConfig, master_seed: int, session_index: int):
    """Replay one session through the public ops and tabulate its book."""
    x = sample_payoff(config.measure, session_generator(master_seed, session_index, 0))
    bridges = [sample_bridge_path(config.grid,
                                  session_generator(master_seed, session_index, 1 + i))
               for i in range(config.n_bridge_sources)]
    paths = [make_information_path(x, s, b)
             for s, b in zip(config.sigma_sources_a, bridges)]

    def effective_path(k_sources: int, s_eff: float) -> InformationPath:
        if k_sources == 0:
            zero = BridgePath(config.grid, np.zeros(config.grid.n_instants))
            return make_information_path(x, 0.0, zero)
        if k_sources == 1:
            return InformationPath(config.grid, s_eff, paths[0].values)
        values = combine_source_values([p.values for p in paths[:k_sources]],
                                       config.sigma_sources_a[:k_sources], s_eff)
        return InformationPath(config.grid, s_eff, values)

    s_a = price_path(effective_path(config.n_bridge_sources, config.sigma_eff_a),
                     config.measure, config.curve)
    s_b = price_path(effective_path(len(config.sigma_sources_b), config.sigma_eff_b),
                     config.measure, config.curve)
    session = run_session(config, s_a, s_b, x)

    by_index = {tr.time_index: tr for tr in session.trades}
    lines = ["time_index,time,s_a,s_b,bid_a,offer_a,bid_b,offer_b,"
             "q_after,trade_side,trade_price"]
    q = 0
    for k in range(config.grid.n_instants):
        qa = quote_from_mid(float(s_a[k]), config.phi, config.psi_a, q)
        qb = quote_from_mid(float(s_b[k]), config.phi, config.psi_b, -q)
        tr = by_index.get(k)
        side = tr.side if tr else 0
        px = tr.exec_price if tr else 0.0
        if tr:
            q = tr.inventory_after
        lines.append(
            f"{k},{_f17(config.grid.times[k])},{_f17(s_a[k])},{_f17(s_b[k])},"
            f"{_f17(qa.bid)},{_f17(qa.offer)},{_f17(qb.bid)},{_f17(qb.offer)},"
            f"{q},{side},{_f17(px)}")
    return "\n".join(lines) + "\n", session


def _cmd_simulate(args) -> int:
    config, sessions, seed, _ = load_run_config(args.config)
    if args.seed is not None:
        seed = args.seed
    os.makedirs(args.out, exist_ok=True)
    result = run_batch(config, sessions, seed, workers=args.workers)
    _write_sessions_csv(os.path.join(args.out, "sessions.csv"), result)
    _write_summary_json(os.path.join(args.out, "summary.json"), result)
    if args.trace_session is not None:
        k = args.trace_session
        if not 0 <= k < sessions:
            raise ValueError(f"--trace-session {k} outside the batch [0, {sessions})")
        text, _ = _trace_session(config, seed, k)
        _write_text(os.path.join(args.out, f"trace_{k}.csv"), text)
    st = result.stats
    print(f"sessions: {st.n_sessions}  traded: {st.n_traded_sessions}  "
          f"mean_h_a_0: {st.mean_h_a_0:.6g} (se {st.se_h_a_0:.3g})  "
          f"mean trades/session: {st.mean_trade_count:.4g}")
    print(f"wrote {os.path.join(args.out, 'sessions.csv')} and summary.json")
    return 0


def _parse_value_spec(spec: str, name: str) -> list:
    """Parse 'start:stop:count' into a linspace, or a comma list into floats."""
    try:
        if ":" in spec:
            parts = spec.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError
            return [float(v) for v in np.linspace(start, stop, count)]
        values = [float(v) for v in spec.split(",") if v]
        if not values:
            raise ValueError
        return values
    except ValueError:
        raise ValueError(
            f"{name} must be 'start:stop:count' or a comma-separated list, "
            f"got {spec!r}") from None


def _cmd_sweep(args) -> int:
    config, sessions, seed, _ = load_run_config(args.config)
    if args.seed is not None:
        seed = args.seed
    if args.sessions is not None:
        sessions = args.sessions
    phis = _parse_value_spec(args.phis, "--phis")
    sbs = _parse_value_spec(args.sigma_bs, "--sigma-bs") if args.sigma_bs else None
    os.makedirs(args.out, exist_ok=True)
    res = sweep(config, phis, sbs, sigma_ratio=args.sigma_ratio,
                n_sessions=sessions, master_seed=seed, workers=args.workers)
    lines = ["phi,sigma_b,mean_per_trade,se_per_trade,"
             "mean_per_session,se_per_session,n_traded"]
    for row in res.rows:
        lines.append(f"{_f17(row.phi)},{_f17(row.sigma_b)},"
                     f"{_f17(row.mean_per_trade_profit)},{_f17(row.se_per_trade_profit)},"
                     f"{_f17(row.mean_h_a_0)},{_f17(row.se_h_a_0)},"
                     f"{row.n_traded_sessions}")
    path = os.path.join(args.out, "surface.csv")
    _write_text(path, "\n".join(lines) + "\n")
    print(f"wrote {path} ({len(res.rows)} cells, {sessions} sessions each)")
    return 0


def _cmd_bound(args) -> int:
    p_0T = math.exp(-args.r * args.t_maturity)
    bound = scenario2_lower_bound(args.phi, args.p, args.sigma, args.t,
                                  args.t_maturity, p_0T)
    th = scenario2_thresholds(args.phi, args.p, args.sigma, args.t,
                              args.t_maturity)
    seller_only = th.buy_at_or_above is None
    print(f"closed-form expected-profit bound: {_f17(bound)}")
    print(f"sell trigger: xi <= {_f17(th.sell_at_or_below)}")
    if seller_only:
        print(f"phi^2 p = {args.phi ** 2 * args.p:.6g} >= 1: the buy trigger is "
              "unreachable, Trader A can only be a seller")
    else:
        print(f"buy trigger:  xi >= {_f17(th.buy_at_or_above)}")
    payload = {"phi": args.phi, "p": args.p, "sigma": args.sigma, "t": args.t,
               "t_maturity": args.t_maturity, "r": args.r, "bound": bound,
               "seller_only": seller_only}
    if args.check_mc is not None:
        est, se = estimate_scenario2_bound_mc(
            args.phi, args.p, args.sigma, args.t, args.t_maturity,
            args.check_mc, args.mc_seed)
        est, se = p_0T * est, p_0T * se
        print(f"mc estimate: {_f17(est)} (se {se:.3g}, {args.check_mc} draws)")
        payload["mc_estimate"] = est
        payload["mc_se"] = se
        payload["mc_draws"] = args.check_mc
        payload["mc_seed"] = args.mc_seed
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "bound.json")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {path}")
    return 0


def _cmd_lemma3(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "lemma3.csv")
    # streamed: the full enumeration does not fit in memory near the cap
    chunks = _lemma3_chunks(args.max_len, args.phi, args.psi)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("n,length,sequence,value\n")
        for length, codes, eps, vals in chunks:
            base = 1 << length
            fh.writelines(
                f"{base + int(codes[row])},{length},"
                f"{''.join('+' if e > 0 else '-' for e in eps[row])},"
                f"{_f17(vals[row])}\n"
                for row in range(codes.shape[0]))
    scan = lemma3_scan(args.max_len, args.phi, args.psi)
    seq = "".join("+" if e > 0 else "-" for e in scan.argmin_epsilons)
    print(f"scanned {scan.n_sequences} sequences up to length {args.max_len}")
    print(f"minimum sum: {_f17(scan.min_value)} at sequence {seq}")
    print("minimum is positive: round-trip sequences cannot make the "
          "quoting trader lose" if scan.min_value > 0 else
          "minimum is NOT positive")
    print(f"wrote {path}")
    return 0


def _cmd_hist(args) -> int:
    config, sessions, seed, _ = load_run_config(args.config)
    if args.seed is not None:
        seed = args.seed
    os.makedirs(args.out, exist_ok=True)
    result = run_batch(config, sessions, seed, workers=args.workers)
    hist = histogram_from_result(result, args.bins)
    lines = ["bin_left,bin_right,count"]
    total = int(hist.counts.sum())
    if total > 0:
        for i in range(hist.counts.size):
            lines.append(f"{_f17(hist.edges[i])},{_f17(hist.edges[i + 1])},"
                         f"{int(hist.counts[i])}")
    path = os.path.join(args.out, "hist.csv")
    _write_text(path, "\n".join(lines) + "\n")
    print(f"wrote {path} ({total} trades in {args.bins} bins)")
    return 0


def _add_common(p: argparse.ArgumentParser, with_config: bool = True):
    if with_config:
        p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None,
                   help="override the config master seed")
    p.add_argument("--workers", type=int, default=1,
                   help="chunk worker threads (results identical for any count)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="infotrade",
        description="Simulator for information-based pricing and "
                    "asymmetric-information trading")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one batch of sessions")
    _add_common(p)
    p.add_argument("--trace-session", type=int, default=None, metavar="K",
                   help="also write trace_K.csv with session K's full book")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="profit surface over phi (and sigma_b)")
    _add_common(p)
    p.add_argument("--phis", required=True,
                   help="spread factors: 'start:stop:count' or comma list")
    p.add_argument("--sigma-bs", default=None,
                   help="B flow rates: 'start:stop:count' or comma list")
    p.add_argument("--sigma-ratio", type=float, default=math.sqrt(2.0),
                   help="A's effective rate as a multiple of B's (default sqrt 2)")
    p.add_argument("--sessions", type=int, default=None,
                   help="override the config session count")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("bound", help="fixed-time expected-profit bound")
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--t", type=float, required=True, help="trade time")
    p.add_argument("--t-maturity", type=float, default=1.0)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--check-mc", type=int, default=None, metavar="N",
                   help="also run a Monte Carlo check with N draws")
    p.add_argument("--mc-seed", type=int, default=0)
    p.add_argument("--out", default=None, help="directory for bound.json")
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("lemma3", help="scan round-trip sign sequences")
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--phi", type=float, required=True)
    p.add_argument("--psi", type=float, default=1.0)
    p.add_argument("--out", required=True, help="directory for lemma3.csv")
    p.set_defaults(func=_cmd_lemma3)

    p = sub.add_parser("hist", help="histogram of execution times")
    _add_common(p)
    p.add_argument("--bins", type=int, default=50)
    p.set_defaults(func=_cmd_hist)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
