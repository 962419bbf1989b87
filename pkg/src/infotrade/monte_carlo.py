"""Batched session simulation with named random streams and summary statistics.

Reproducibility contract: session i draws its payoff from stream
(master_seed, i*256 + 0) and the bridge of information source s from stream
(master_seed, i*256 + 1 + s), so any session can be replayed in isolation and
a batch is bit-identical for any worker count.  Sessions are processed in
fixed chunks of _CHUNK_SESSIONS; workers only parallelize over chunks, and
every chunk writes into its own slice of the preallocated result arrays, so
scheduling order cannot leak into the output.

The heavy lifting per chunk happens in one compiled kernel pass
(see _kernels); everything it computes matches the public single-session ops
to within one ulp on prices and exactly on trade decisions taken over the
price arrays it returns.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._kernels import run_sessions_kernel
from .pricing import discount_to_maturity, future_value_to_maturity
from .stochastic_core import (PayoffMeasure, bridge_step_coefficients,
                              sample_payoff, session_generator)
from .trading_engine import ScenarioConfig, scenario2_thresholds

__all__ = [
    "BatchStats",
    "BatchResult",
    "TradeTimeHistogram",
    "SweepRow",
    "SweepResult",
    "run_batch",
    "simulate_sessions",
    "sweep",
    "trade_time_histogram",
    "histogram_from_result",
    "estimate_scenario2_bound_mc",
]

_CHUNK_SESSIONS = 4096  # fixed: chunk boundaries are part of the output contract
_MAX_TRADE_CELLS = 50_000_000
_MAX_PATH_CELLS = 60_000_000
_HIST_BINS_DEFAULT = 50


@dataclass(frozen=True)
class TradeTimeHistogram:
    """Counts of executions falling into equal time bins over [0, T]."""

    edges: np.ndarray
    counts: np.ndarray


@dataclass(frozen=True)
class BatchStats:
    """Summary of one batch; all means are across sessions unless noted.

    mean_per_trade_profit averages the time-0 value of individual executions
    across every trade in the batch (0.0 when nothing traded), which weights
    busy sessions by their trade count; mean_h_a_0 is the per-session figure.
    Standard errors use the sample standard deviation with ddof=1.
    """

    n_sessions: int
    n_traded_sessions: int
    mean_h_a_0: float
    se_h_a_0: float
    mean_per_trade_profit: float
    se_per_trade_profit: float
    mean_trade_count: float
    mean_max_abs_inventory: float
    trade_time_histogram: TradeTimeHistogram


@dataclass(frozen=True)
class BatchResult:
    """Everything a batch produced; trade tables are -1/0 padded past n_trades."""

    config: ScenarioConfig
    master_seed: int
    n_sessions: int
    realized_x: np.ndarray
    n_trades: np.ndarray
    h_a_T: np.ndarray
    h_a_0: np.ndarray
    max_abs_inventory: np.ndarray
    trade_time_index: np.ndarray
    trade_side: np.ndarray
    trade_price: np.ndarray
    trade_inventory_after: np.ndarray
    stats: BatchStats = field(repr=False, default=None)
    price_path_a: np.ndarray = field(repr=False, default=None)
    price_path_b: np.ndarray = field(repr=False, default=None)

    def per_trade_profits(self) -> np.ndarray:
        """Time-0 value of every execution in the batch, in (session, k) order."""
        mask = self.trade_time_index >= 0
        if not mask.any():
            return np.empty(0, dtype=np.float64)
        fv_row = future_value_to_maturity(self.config.curve, self.config.grid)
        idx = self.trade_time_index[mask]
        side = self.trade_side[mask].astype(np.float64)
        px = self.trade_price[mask]
        x = np.broadcast_to(self.realized_x[:, None],
                            self.trade_time_index.shape)[mask]
        disc0 = math.exp(-self.config.curve.short_rate_r * self.config.grid.t_maturity)
        return disc0 * (side * (x - px * fv_row[idx]))

    def trade_times(self) -> np.ndarray:
        """Execution times of every trade in the batch, in (session, k) order."""
        mask = self.trade_time_index >= 0
        return self.config.grid.times[self.trade_time_index[mask]]


def _validate_batch_args(config: ScenarioConfig, n_sessions, master_seed,
                         workers, return_paths: bool):
    if not isinstance(n_sessions, (int, np.integer)) or isinstance(n_sessions, bool) \
            or n_sessions < 1:
        raise ValueError(f"n_sessions must be a positive integer, got {n_sessions!r}")
    if not isinstance(master_seed, (int, np.integer)) or isinstance(master_seed, bool) \
            or master_seed < 0:
        raise ValueError(f"master_seed must be a nonnegative integer, got {master_seed!r}")
    if not isinstance(workers, (int, np.integer)) or isinstance(workers, bool) \
            or workers < 1:
        raise ValueError(f"workers must be a positive integer, got {workers!r}")
    if config.n_bridge_sources > 255:
        raise ValueError("at most 255 information sources fit the stream packing")
    if n_sessions * config.max_trades > _MAX_TRADE_CELLS:
        raise ValueError(
            f"n_sessions={n_sessions} with max_trades={config.max_trades} needs "
            f"{n_sessions * config.max_trades} trade-table cells "
            f"(cap {_MAX_TRADE_CELLS}); lower one of them")
    if return_paths and n_sessions * config.grid.n_instants > _MAX_PATH_CELLS:
        raise ValueError(
            "return_paths would materialize "
            f"{n_sessions * config.grid.n_instants} price cells per trader "
            f"(cap {_MAX_PATH_CELLS}); lower n_sessions or the grid resolution")


def _kernel_tables(config: ScenarioConfig):
    """Precompute the per-batch constants the kernel consumes."""
    measure = config.measure
    s_eff_a = config.sigma_eff_a
    s_eff_b = config.sigma_eff_b

    parts = measure.binary_parts()
    use_binary = parts is not None and parts[0] == 1.0
    if use_binary:
        p = parts[1]
        lw_binary = float(np.log(p / (1.0 - p)))
        dummy = np.zeros(1, dtype=np.float64)
        coef = (dummy, dummy, dummy, dummy, dummy, dummy,
                np.zeros(1, dtype=np.bool_))
    else:
        lw_binary = 0.0
        vals = measure.values
        coef_lin_a = s_eff_a * vals
        coef_quad_a = (0.5 * s_eff_a * s_eff_a) * (vals * vals)
        coef_lin_b = s_eff_b * vals
        coef_quad_b = (0.5 * s_eff_b * s_eff_b) * (vals * vals)
        atom_pos = vals > 0
        atom_log_x = np.zeros(vals.size, dtype=np.float64)
        for i in range(vals.size):
            if atom_pos[i]:
                atom_log_x[i] = math.log(vals[i])
        coef = (coef_lin_a, coef_quad_a, coef_lin_b, coef_quad_b,
                atom_log_x, np.array(measure.log_weights, dtype=np.float64),
                atom_pos)

    mt = config.max_trades
    fact_a = np.empty(2 * mt + 1, dtype=np.float64)
    fact_b = np.empty(2 * mt + 1, dtype=np.float64)
    for qv in range(-mt, mt + 1):
        # same expressions quote_from_mid evaluates for inventories qv and -qv
        fact_a[qv + mt] = config.phi ** (-qv) * config.psi_a ** (-qv)
        fact_b[qv + mt] = config.phi ** (-(-qv)) * config.psi_b ** (-(-qv))
    return use_binary, lw_binary, coef, fact_a, fact_b


def simulate_sessions(config: ScenarioConfig, n_sessions: int, master_seed: int,
                      workers: int = 1, return_paths: bool = False) -> BatchResult:
    """Run n_sessions independent sessions; see run_batch for the public entry."""
    _validate_batch_args(config, n_sessions, master_seed, workers, return_paths)
    m = int(n_sessions)
    seed = int(master_seed)
    grid = config.grid
    n = grid.n_steps
    n_src = config.n_bridge_sources
    n_b = len(config.sigma_sources_b)
    sig_arr = np.array(config.sigma_sources_a, dtype=np.float64)
    c = bridge_step_coefficients(grid)
    disc_row = discount_to_maturity(config.curve, grid)
    fv_row = future_value_to_maturity(config.curve, grid)
    disc0 = math.exp(-config.curve.short_rate_r * grid.t_maturity)

    use_binary, lw_binary, coef, fact_a, fact_b = _kernel_tables(config)
    mt = config.max_trades
    fixed_idx = config.fixed_time_index if config.fixed_time_index is not None else -1
    geometric_exec = config.scenario_id == 1

    realized_x = np.empty(m, dtype=np.float64)
    n_trades = np.zeros(m, dtype=np.int32)
    h_T = np.zeros(m, dtype=np.float64)
    max_q = np.zeros(m, dtype=np.int32)
    trade_idx = np.full((m, mt), -1, dtype=np.int32)
    trade_side = np.zeros((m, mt), dtype=np.int32)
    trade_px = np.zeros((m, mt), dtype=np.float64)
    trade_q = np.zeros((m, mt), dtype=np.int32)
    if return_paths:
        s_a = np.zeros((m, n + 1), dtype=np.float64)
        s_b = np.zeros((m, n + 1), dtype=np.float64)

    def run_chunk(start: int, end: int):
        size = end - start
        z = np.empty((n_src, size, n - 1), dtype=np.float64)
        for local_j, sidx in enumerate(range(start, end)):
            realized_x[sidx] = sample_payoff(
                config.measure, session_generator(seed, sidx, 0))
            for i in range(n_src):
                z[i, local_j, :] = session_generator(
                    seed, sidx, 1 + i).standard_normal(n - 1)
        if return_paths:
            sa_slice, sb_slice = s_a[start:end], s_b[start:end]
        else:
            sa_slice = np.zeros((1, 1), dtype=np.float64)
            sb_slice = np.zeros((1, 1), dtype=np.float64)
        run_sessions_kernel(
            z, realized_x[start:end], grid.times, c, grid.t_maturity,
            sig_arr, n_b, config.sigma_eff_a, config.sigma_eff_b,
            use_binary, lw_binary, *coef,
            disc_row, fv_row, fact_a, fact_b, mt, config.phi,
            mt, config.last_trade_index, fixed_idx, geometric_exec,
            n_trades[start:end], h_T[start:end], max_q[start:end],
            trade_idx[start:end], trade_side[start:end],
            trade_px[start:end], trade_q[start:end],
            sa_slice, sb_slice, return_paths)

    bounds = [(s, min(s + _CHUNK_SESSIONS, m))
              for s in range(0, m, _CHUNK_SESSIONS)]
    if workers == 1 or len(bounds) == 1:
        for start, end in bounds:
            run_chunk(start, end)
    else:
        with ThreadPoolExecutor(max_workers=int(workers)) as pool:
            futures = [pool.submit(run_chunk, s, e) for s, e in bounds]
            for f in futures:
                f.result()

    result = BatchResult(
        config=config, master_seed=seed, n_sessions=m,
        realized_x=realized_x, n_trades=n_trades, h_a_T=h_T,
        h_a_0=disc0 * h_T, max_abs_inventory=max_q,
        trade_time_index=trade_idx, trade_side=trade_side,
        trade_price=trade_px, trade_inventory_after=trade_q,
        price_path_a=s_a if return_paths else None,
        price_path_b=s_b if return_paths else None)
    return replace(result, stats=_batch_stats(result))


def run_batch(config: ScenarioConfig, n_sessions: int, master_seed: int,
              workers: int = 1, return_paths: bool = False) -> BatchResult:
    """Simulate a batch of sessions and attach summary statistics."""
    return simulate_sessions(config, n_sessions, master_seed,
                             workers=workers, return_paths=return_paths)


def _se(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(values.size))


def _batch_stats(result: BatchResult) -> BatchStats:
    g = result.per_trade_profits()
    hist = histogram_from_result(result, _HIST_BINS_DEFAULT)
    return BatchStats(
        n_sessions=result.n_sessions,
        n_traded_sessions=int(np.count_nonzero(result.n_trades > 0)),
        mean_h_a_0=float(np.mean(result.h_a_0)),
        se_h_a_0=_se(result.h_a_0),
        mean_per_trade_profit=float(np.mean(g)) if g.size else 0.0,
        se_per_trade_profit=_se(g),
        mean_trade_count=float(np.mean(result.n_trades)),
        mean_max_abs_inventory=float(np.mean(result.max_abs_inventory)),
        trade_time_histogram=hist)


def histogram_from_result(result: BatchResult,
                          n_bins: int = _HIST_BINS_DEFAULT
                          ) -> TradeTimeHistogram:
    """Bin every execution time of an existing batch into equal bins over [0, T]."""
    if not isinstance(n_bins, (int, np.integer)) or isinstance(n_bins, bool) \
            or n_bins < 1:
        raise ValueError(f"n_bins must be a positive integer, got {n_bins!r}")
    t = result.trade_times()
    counts, edges = np.histogram(
        t, bins=int(n_bins), range=(0.0, result.config.grid.t_maturity))
    return TradeTimeHistogram(edges=edges, counts=counts)


def trade_time_histogram(config: ScenarioConfig, n_bins: int,
                         n_sessions: int, master_seed: int,
                         workers: int = 1) -> TradeTimeHistogram:
    """Run a batch and bin its execution times into n_bins equal bins over [0, T]."""
    if not isinstance(n_bins, (int, np.integer)) or isinstance(n_bins, bool) \
            or n_bins < 2:
        raise ValueError(f"n_bins must be an integer >= 2, got {n_bins!r}")
    result = simulate_sessions(config, n_sessions, master_seed, workers=workers)
    return histogram_from_result(result, n_bins)


@dataclass(frozen=True)
class SweepRow:
    phi: float
    sigma_b: float
    mean_per_trade_profit: float
    se_per_trade_profit: float
    mean_h_a_0: float
    se_h_a_0: float
    n_traded_sessions: int


@dataclass(frozen=True)
class SweepResult:
    phi_values: tuple
    sigma_b_values: tuple
    rows: tuple
    n_sessions: int
    master_seed: int


def sweep(base_config: ScenarioConfig, phi_values, sigma_b_values=None, *,
          sigma_ratio: float = math.sqrt(2.0), n_sessions: int,
          master_seed: int, workers: int = 1) -> SweepResult:
    """Profit surface over spread factors and B's information flow rate.

    Every cell reruns the same session streams (common random numbers), so
    differences between adjacent cells are paired.  When sigma_b_values is
    given, each cell rebuilds the source lists as B = [sigma_b] and
    A = [sigma_b, sigma_b * sqrt(sigma_ratio^2 - 1)], keeping A's effective
    rate at sigma_ratio times B's; otherwise the base config's sources are
    used as they are and only phi varies.
    """
    phis = tuple(float(v) for v in phi_values)
    if not phis:
        raise ValueError("phi_values must be nonempty")
    if sigma_b_values is None:
        sbs = (base_config.sigma_eff_b,)
        rebuild = False
    else:
        sbs = tuple(float(v) for v in sigma_b_values)
        if not sbs or any(not np.isfinite(v) or v <= 0 for v in sbs):
            raise ValueError("sigma_b_values must be positive reals")
        if not np.isfinite(sigma_ratio) or sigma_ratio <= 1.0:
            raise ValueError(f"sigma_ratio must exceed 1, got {sigma_ratio}")
        rebuild = True

    rows = []
    for phi in phis:
        for sb in sbs:
            cfg = replace(base_config, phi=phi)
            if rebuild:
                extra = sb * math.sqrt(sigma_ratio * sigma_ratio - 1.0)
                cfg = replace(cfg, sigma_sources_a=(sb, extra),
                              sigma_sources_b=(sb,))
            stats = run_batch(cfg, n_sessions, master_seed, workers=workers).stats
            rows.append(SweepRow(
                phi=phi, sigma_b=sb,
                mean_per_trade_profit=stats.mean_per_trade_profit,
                se_per_trade_profit=stats.se_per_trade_profit,
                mean_h_a_0=stats.mean_h_a_0,
                se_h_a_0=stats.se_h_a_0,
                n_traded_sessions=stats.n_traded_sessions))
    return SweepResult(phi_values=phis, sigma_b_values=sbs, rows=tuple(rows),
                       n_sessions=int(n_sessions), master_seed=int(master_seed))


def estimate_scenario2_bound_mc(phi: float, p: float, sigma: float, t: float,
                                t_maturity: float, n_draws: int,
                                master_seed: int):
    """Monte Carlo twin of scenario2_lower_bound: (estimate, standard error).

    Draws (X, xi_t) jointly from stream (master_seed, 0), first n_draws
    uniforms for the payoffs, then n_draws normals for the bridge marginal,
    and averages the conditional trade value
    (phi - 1) E[X|xi] 1{sell} + (1 - 1/phi) E[X|xi] 1{buy}.  Conditioning on
    xi instead of scoring the raw payoff strips the payoff noise, so the
    estimate converges to the closed form fast.  Undiscounted (P_0T = 1);
    scale by the discount factor for a carried rate.
    """
    th = scenario2_thresholds(phi, p, sigma, t, t_maturity)
    if not 0.0 < t:  # thresholds allow t=0, the bound needs t > 0
        raise ValueError(f"t must be positive, got {t}")
    if not isinstance(n_draws, (int, np.integer)) or isinstance(n_draws, bool) \
            or n_draws < 10_000:
        raise ValueError(f"n_draws must be an integer >= 10000, got {n_draws!r}")

    gen = session_generator(int(master_seed), 0, 0)
    u = gen.random(int(n_draws))
    znorm = gen.standard_normal(int(n_draws))
    x = np.where(u < p, 1.0, 0.0)
    beta = math.sqrt(t * (t_maturity - t) / t_maturity) * znorm
    xi = sigma * t * x + beta
    logit = (sigma * xi - (0.5 * sigma * sigma) * t) \
        * (t_maturity / (t_maturity - t)) + np.log(p / (1.0 - p))
    with np.errstate(over="ignore", under="ignore"):
        cond_mean = 1.0 / (1.0 + np.exp(-logit))
    vals = (phi - 1.0) * cond_mean * (xi <= th.sell_at_or_below)
    if th.buy_at_or_above is not None:
        vals = vals + (1.0 - 1.0 / phi) * cond_mean * (xi >= th.buy_at_or_above)
    return float(np.mean(vals)), _se(vals)
