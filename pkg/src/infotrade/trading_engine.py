"""Two-trader session mechanics: quotes, crossings, executions, profit accounting.

Trader A sees every information source; trader B sees a prefix of them
(possibly none, possibly all).  Both mark the claim at their own filtering price and show a
two-sided market around an inventory-adjusted mid,

    quoted mid = phi^{-Q} psi^{-Q} * S,   bid = mid / phi,   offer = mid * phi,

where Q is the trader's current inventory (A and B always hold opposite
inventories, so a single Q drives both books).  A buys one unit when A's bid
reaches B's offer and sells one when A's offer falls to B's bid; executions in
the crossing scenarios happen at A's crossed side, built with the pre-trade
inventory.  Accounting carries each cash flow to maturity at the short rate
and reports both the maturity value and its time-0 discounted value.

Scenario taxonomy (validated by ScenarioConfig):

    1  single trade at a fixed time, execution at the geometric mean of the
       two mids
    2  single trade at a fixed time against an uninformed counterparty,
       binary payoff, execution at A's side
    3  first crossing only
    4  first two crossings, no inventory aversion
    5  first two crossings with inventory aversion
    6  repeated crossings up to a configurable cap

The inventory-aversion factor must satisfy 1 <= psi < phi; at psi >= phi a
re-quoted book can cross itself and the round-trip profit bound fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .pricing import (DiscountCurve, Quote, future_value_to_maturity,
                      quote_from_mid)
from .stochastic_core import PayoffMeasure, TimeGrid, effective_flow_rate

__all__ = [
    "ScenarioConfig",
    "TradeEvent",
    "SessionResult",
    "Crossing",
    "Scenario2Thresholds",
    "Lemma3Scan",
    "detect_first_crossing",
    "run_scenario1",
    "run_session",
    "scenario2_thresholds",
    "scenario2_lower_bound",
    "lemma3_sum",
    "lemma3_scan",
]

BUY = 1
SELL = -1

_SQRT2 = math.sqrt(2.0)

_FIXED_TIME_SCENARIOS = (1, 2)
_UNIT_PSI_SCENARIOS = (1, 2, 3, 4)
_FORCED_MAX_TRADES = {1: 1, 2: 1, 3: 1, 4: 2, 5: 2}
_DEFAULT_SCENARIO6_CAP = 256
_MAX_TRADES_HARD_CAP = 1_000_000


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def _check_phi(phi: float):
    if not np.isfinite(phi) or phi <= 1.0:
        raise ValueError(f"spread factor phi must satisfy phi > 1, got {phi}")


def _check_psi(psi: float, phi: float, name: str = "psi"):
    if not np.isfinite(psi) or not 1.0 <= psi < phi:
        raise ValueError(
            f"{name}={psi} violates 1 <= psi < phi (phi={phi}): the inventory "
            "aversion factor must be strictly smaller than the spread factor"
        )


@dataclass(frozen=True)
class TradeEvent:
    """One execution, from A's perspective (side=+1 means A bought)."""

    k: int
    time_index: int
    side: int
    exec_price: float
    inventory_after: int


@dataclass(frozen=True)
class SessionResult:
    realized_x: float
    trades: tuple
    h_a_T: float
    h_a_0_contribution: float
    no_trade: bool


@dataclass(frozen=True)
class Crossing:
    """First index where one of A's sides crossed B's opposite side.

    ``tie`` marks the degenerate case where both sides crossed at once; the
    buy side wins.  With consistent quote ladders (phi > 1) a tie requires
    both books to have collapsed, which the positivity guard already blocks,
    so ties only arise from hand-built inputs.
    """

    index: int
    side: int
    tie: bool = False


@dataclass(frozen=True)
class Scenario2Thresholds:
    """Trigger levels on the information process at the fixed trade time.

    A sells iff xi <= sell_at_or_below.  A buys iff xi >= buy_at_or_above;
    that level is None when phi^2 p >= 1, where B's offer exceeds the
    largest value A's mid can reach and the session is sell-only.
    """

    sell_at_or_below: float
    buy_at_or_above: object


@dataclass(frozen=True)
class Lemma3Scan:
    """Minimum of the round-trip profit sum over all sign sequences scanned."""

    min_value: float
    argmin_epsilons: tuple
    n_sequences: int


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of a trading session; validates the scenario taxonomy."""

    scenario_id: int
    grid: TimeGrid
    measure: PayoffMeasure
    phi: float
    psi_a: float = 1.0
    psi_b: float = 1.0
    sigma_sources_a: tuple = (1.0, 1.0)
    sigma_sources_b: tuple = (1.0,)
    curve: DiscountCurve = field(default_factory=DiscountCurve)
    max_trades: object = None
    fixed_trade_time: object = None
    allow_last_interior_trade: bool = True
    # derived in __post_init__
    sigma_eff_a: float = field(init=False, repr=False, default=0.0)
    sigma_eff_b: float = field(init=False, repr=False, default=0.0)
    fixed_time_index: object = field(init=False, repr=False, default=None)
    last_trade_index: int = field(init=False, repr=False, default=0)

    def __post_init__(self):
        sid = self.scenario_id
        if sid not in (1, 2, 3, 4, 5, 6):
            raise ValueError(f"scenario_id must be 1..6, got {sid}")
        _check_phi(self.phi)
        _check_psi(self.psi_a, self.phi, "psi_a")
        _check_psi(self.psi_b, self.phi, "psi_b")
        if sid in _UNIT_PSI_SCENARIOS and not (self.psi_a == self.psi_b == 1.0):
            raise ValueError(
                f"scenario {sid} has no inventory aversion: psi_a and psi_b must be 1"
            )

        a = tuple(float(s) for s in self.sigma_sources_a)
        b = tuple(float(s) for s in self.sigma_sources_b)
        if not a:
            raise ValueError("trader A needs at least one information source")
        if any(not np.isfinite(s) or s < 0 for s in a + b):
            raise ValueError("source flow rates must be finite and nonnegative")
        if b != a[: len(b)]:
            raise ValueError(
                "sigma_sources_b must be a prefix of sigma_sources_a "
                f"(got a={a}, b={b}): B sees the leading subset of A's sources"
            )
        object.__setattr__(self, "sigma_sources_a", a)
        object.__setattr__(self, "sigma_sources_b", b)
        object.__setattr__(self, "sigma_eff_a", effective_flow_rate(a))
        object.__setattr__(self, "sigma_eff_b",
                           effective_flow_rate(b) if b else 0.0)

        if sid == 2:
            if b:
                raise ValueError("scenario 2 pits A against an uninformed trader: "
                                 "sigma_sources_b must be empty")
            if len(a) != 1:
                raise ValueError("scenario 2 uses a single information source for A")
            if self.measure.binary_parts() is None:
                raise ValueError("scenario 2 needs a binary payoff "
                                 "(one positive atom plus an atom at 0)")

        forced = _FORCED_MAX_TRADES.get(sid)
        if forced is not None:
            if self.max_trades not in (None, forced):
                raise ValueError(
                    f"scenario {sid} trades exactly up to {forced} time(s); "
                    f"max_trades={self.max_trades} is not configurable here"
                )
            mt = forced
        else:
            mt = _DEFAULT_SCENARIO6_CAP if self.max_trades is None else self.max_trades
            if not isinstance(mt, (int, np.integer)) or isinstance(mt, bool) or mt < 1:
                raise ValueError(f"max_trades must be a positive integer, got {mt!r}")
            if mt > _MAX_TRADES_HARD_CAP:
                raise ValueError(f"max_trades={mt} exceeds the hard cap "
                                 f"{_MAX_TRADES_HARD_CAP}")
        object.__setattr__(self, "max_trades", int(mt))

        n = self.grid.n_steps
        if sid in _FIXED_TIME_SCENARIOS:
            t_star = self.fixed_trade_time
            if t_star is None:
                t_star = 0.5 * self.grid.t_maturity
            t_star = float(t_star)
            if not np.isfinite(t_star) or not 0.0 <= t_star < self.grid.t_maturity:
                raise ValueError(
                    f"fixed_trade_time must lie in [0, T), got {t_star}")
            idx = int(round(t_star / self.grid.dt))
            if idx >= n:
                raise ValueError(
                    f"fixed_trade_time={t_star} rounds to the maturity instant; "
                    "move it at least half a step earlier")
            object.__setattr__(self, "fixed_trade_time", t_star)
            object.__setattr__(self, "fixed_time_index", idx)
        else:
            if self.fixed_trade_time is not None:
                raise ValueError(
                    f"scenario {sid} trades at crossings; fixed_trade_time does not apply")

        last = n - 1 if self.allow_last_interior_trade else n - 2
        if last < 0:
            raise ValueError("grid too coarse for the requested trade window")
        object.__setattr__(self, "last_trade_index", last)

    @property
    def n_bridge_sources(self) -> int:
        return len(self.sigma_sources_a)


def detect_first_crossing(quotes_a: Quote, quotes_b: Quote,
                          start_index: int = 0, stop_index: int = None):
    """First instant in [start_index, stop_index] where the books cross.

    Buy: A's bid has reached B's offer.  Sell: A's offer has fallen to B's
    bid.  A crossing counts only if at least one of the two compared quotes
    is strictly positive; once both books have collapsed to zero (deep
    out-of-the-money prices underflow near maturity) the comparison 0 >= 0
    is vacuous and must not trade.  Returns a Crossing or None.  When both
    sides cross at the same instant the buy side is reported, tie=True.
    """
    bid_a = np.asarray(quotes_a.bid)
    offer_a = np.asarray(quotes_a.offer)
    bid_b = np.asarray(quotes_b.bid)
    offer_b = np.asarray(quotes_b.offer)
    n = bid_a.shape[-1]
    if stop_index is None:
        stop_index = n - 1
    if not 0 <= start_index < n:
        raise ValueError(f"start_index {start_index} outside [0, {n - 1}]")
    if stop_index < start_index:
        return None
    stop_index = min(stop_index, n - 1)

    sl = slice(start_index, stop_index + 1)
    buy = (bid_a[sl] >= offer_b[sl]) & ((bid_a[sl] > 0.0) | (offer_b[sl] > 0.0))
    sell = (offer_a[sl] <= bid_b[sl]) & ((offer_a[sl] > 0.0) | (bid_b[sl] > 0.0))
    hits = np.flatnonzero(buy | sell)
    if hits.size == 0:
        return None
    i = int(hits[0])
    is_buy = bool(buy[i])
    return Crossing(index=start_index + i,
                    side=BUY if is_buy else SELL,
                    tie=is_buy and bool(sell[i]))


def run_scenario1(s_a_t: float, s_b_t: float, phi: float, x: float,
                  t: float, t_maturity: float, curve: DiscountCurve,
                  time_index: int = 0) -> SessionResult:
    """Single fixed-time round between two informed traders.

    A sells when A's offer phi*S^A is at or below B's bid S^B/phi, buys when
    A's bid S^A/phi is at or above B's offer phi*S^B; the execution price is
    the geometric mean of the two mids, and the proceeds are carried to
    maturity at the short rate.
    """
    _check_phi(phi)
    if not (np.isfinite(s_a_t) and np.isfinite(s_b_t)) or s_a_t < 0 or s_b_t < 0:
        raise ValueError("mid prices must be finite and nonnegative")
    if not np.isfinite(x) or x < 0:
        raise ValueError(f"realized payoff must be nonnegative, got {x}")
    if not 0.0 <= t < t_maturity:
        raise ValueError(f"trade time must lie in [0, T), got t={t}, T={t_maturity}")

    qa = quote_from_mid(s_a_t, phi, 1.0, 0)
    qb = quote_from_mid(s_b_t, phi, 1.0, 0)
    buy = qa.bid >= qb.offer and (qa.bid > 0.0 or qb.offer > 0.0)
    sell = qa.offer <= qb.bid and (qa.offer > 0.0 or qb.bid > 0.0)
    if not (buy or sell):
        return SessionResult(realized_x=x, trades=(), h_a_T=0.0,
                             h_a_0_contribution=0.0, no_trade=True)
    side = BUY if buy else SELL
    exec_price = math.sqrt(s_a_t * s_b_t)
    fv = math.exp(curve.short_rate_r * (t_maturity - t))
    h_T = side * (x - exec_price * fv)
    disc0 = math.exp(-curve.short_rate_r * t_maturity)
    trade = TradeEvent(k=1, time_index=time_index, side=side,
                       exec_price=exec_price, inventory_after=side)
    return SessionResult(realized_x=x, trades=(trade,), h_a_T=h_T,
                         h_a_0_contribution=disc0 * h_T, no_trade=False)


def scenario2_thresholds(phi: float, p: float, sigma: float,
                         t: float, t_maturity: float) -> Scenario2Thresholds:
    """Information levels that trigger a trade against the uninformed trader.

    B's mid is pinned at the prior P_{tT} p, so crossings reduce to the
    informed mid passing fixed multiples of it, which inverts to explicit
    levels of xi_t.  The buy side needs phi^2 p < 1; above that the prior is
    too close to the payoff for A's discounted bid ever to reach B's offer.
    """
    _check_phi(phi)
    if not 0 < p < 1:
        raise ValueError(f"p must lie strictly in (0, 1), got {p}")
    if not np.isfinite(sigma) or sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not 0.0 < t < t_maturity:
        raise ValueError(f"need 0 < t < T, got t={t}, T={t_maturity}")

    scale = (t_maturity - t) / (sigma * t_maturity)
    drift = 0.5 * sigma * t
    sell = scale * math.log((1.0 - p) / (phi * phi - p)) + drift
    if phi * phi * p < 1.0:
        buy = scale * math.log(phi * phi * (1.0 - p) / (1.0 - phi * phi * p)) + drift
    else:
        buy = None
    return Scenario2Thresholds(sell_at_or_below=sell, buy_at_or_above=buy)


def scenario2_lower_bound(phi: float, p: float, sigma: float,
                          t: float, t_maturity: float,
                          p_0T: float = 1.0) -> float:
    """Expected time-0 value of A's single fixed-time trade against B.

    Closed form: conditioning on the payoff makes xi_t Gaussian, and each
    trigger region integrates to a normal tail,

        p P_{0T} [ (phi - 1) N(d1) + (1 - 1/phi) N(d2) ],

    with the buy term dropped when phi^2 p >= 1.  p_0T is the time-0 discount
    factor to maturity and simply scales the expectation.  Strictly positive
    for all valid inputs: the informed trader profits on average whenever
    phi > 1.
    """
    _check_phi(phi)
    if not 0 < p < 1:
        raise ValueError(f"p must lie strictly in (0, 1), got {p}")
    if not np.isfinite(sigma) or sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not 0.0 < t < t_maturity:
        raise ValueError(f"need 0 < t < T, got t={t}, T={t_maturity}")
    if not np.isfinite(p_0T) or p_0T <= 0:
        raise ValueError(f"discount factor p_0T must be positive, got {p_0T}")

    a = math.sqrt((t_maturity - t) / (t * t_maturity))
    b = math.sqrt(t * t_maturity / (t_maturity - t))
    d1 = math.log((1.0 - p) / (phi * phi - p)) / sigma * a - 0.5 * sigma * b
    total = (phi - 1.0) * _norm_cdf(d1)
    if phi * phi * p < 1.0:
        d2 = math.log((1.0 - phi * phi * p) / (phi * phi * (1.0 - p))) / sigma * a \
            + 0.5 * sigma * b
        total += (1.0 - 1.0 / phi) * _norm_cdf(d2)
    return p * p_0T * total


def _fixed_time_session(config: ScenarioConfig, s_a, s_b, x: float,
                        fv_row, disc0: float) -> SessionResult:
    k = config.fixed_time_index
    sa = float(s_a[k])
    sb = float(s_b[k])
    if config.scenario_id == 1:
        result = run_scenario1(sa, sb, config.phi, x, float(config.grid.times[k]),
                               config.grid.t_maturity, config.curve, time_index=k)
        if result.no_trade:
            return result
        # redo the maturity carry with the grid row so batch runs match exactly
        trade = result.trades[0]
        h_T = trade.side * (x - trade.exec_price * fv_row[k])
        return SessionResult(realized_x=x, trades=result.trades, h_a_T=h_T,
                             h_a_0_contribution=disc0 * h_T, no_trade=False)

    phi = config.phi
    buy = (sa / phi >= sb * phi) and (sa / phi > 0.0 or sb * phi > 0.0)
    sell = (sa * phi <= sb / phi) and (sa * phi > 0.0 or sb / phi > 0.0)
    if not (buy or sell):
        return SessionResult(realized_x=x, trades=(), h_a_T=0.0,
                             h_a_0_contribution=0.0, no_trade=True)
    side = BUY if buy else SELL
    exec_price = sa / phi if side == BUY else sa * phi
    h_T = side * (x - exec_price * fv_row[k])
    trade = TradeEvent(k=1, time_index=k, side=side, exec_price=exec_price,
                       inventory_after=side)
    return SessionResult(realized_x=x, trades=(trade,), h_a_T=h_T,
                         h_a_0_contribution=disc0 * h_T, no_trade=False)


def run_session(config: ScenarioConfig, price_path_a, price_path_b,
                x: float) -> SessionResult:
    """Play one full session on precomputed price paths.

    ``price_path_a`` and ``price_path_b`` are the two traders' mid prices on
    the session grid (length n_steps + 1, maturity entry 0).  Crossing
    scenarios rebuild both quote ladders after every execution with the
    updated inventory and resume the scan strictly after the trade instant;
    at most one execution happens per grid instant.
    """
    n_inst = config.grid.n_instants
    s_a = np.asarray(price_path_a, dtype=np.float64)
    s_b = np.asarray(price_path_b, dtype=np.float64)
    if s_a.shape != (n_inst,) or s_b.shape != (n_inst,):
        raise ValueError(f"price paths must have shape ({n_inst},)")
    if not np.isfinite(x) or x < 0:
        raise ValueError(f"realized payoff must be nonnegative, got {x}")

    fv_row = future_value_to_maturity(config.curve, config.grid)
    disc0 = math.exp(-config.curve.short_rate_r * config.grid.t_maturity)

    if config.scenario_id in _FIXED_TIME_SCENARIOS:
        return _fixed_time_session(config, s_a, s_b, x, fv_row, disc0)

    trades = []
    q = 0
    h_T = 0.0
    start = 0
    while len(trades) < config.max_trades:
        quotes_a = quote_from_mid(s_a, config.phi, config.psi_a, q)
        quotes_b = quote_from_mid(s_b, config.phi, config.psi_b, -q)
        hit = detect_first_crossing(quotes_a, quotes_b, start,
                                    config.last_trade_index)
        if hit is None:
            break
        side = hit.side
        exec_price = float(quotes_a.bid[hit.index] if side == BUY
                           else quotes_a.offer[hit.index])
        h_T += side * (x - exec_price * fv_row[hit.index])
        q += side
        trades.append(TradeEvent(k=len(trades) + 1, time_index=hit.index,
                                 side=side, exec_price=exec_price,
                                 inventory_after=q))
        start = hit.index + 1
        if start > config.last_trade_index:
            break

    return SessionResult(realized_x=x, trades=tuple(trades), h_a_T=h_T,
                         h_a_0_contribution=disc0 * h_T,
                         no_trade=not trades)


def lemma3_sum(epsilons, phi: float, psi: float) -> float:
    """Round-trip profit coefficient sum for a sign sequence.

    For trades epsilon_k in {+1, -1} with running inventory Q_k, computes
    sum_k epsilon_k (1 - phi^{-Q_k} psi^{-Q_{k-1}}).  Under 1 <= psi < phi
    this is strictly positive for every nonempty sequence: every pattern of
    forced round trips leaves the aggressor with positive expected value.
    """
    _check_phi(phi)
    _check_psi(psi, phi)
    eps = tuple(int(e) for e in epsilons)
    if not eps or any(e not in (1, -1) for e in eps):
        raise ValueError("epsilons must be a nonempty sequence of +1/-1")
    total = 0.0
    q_prev = 0
    for e in eps:
        q = q_prev + e
        total += e * (1.0 - phi ** (-q) * psi ** (-q_prev))
        q_prev = q
    return total


def _check_scan_args(max_len, phi: float, psi: float):
    if not isinstance(max_len, (int, np.integer)) or isinstance(max_len, bool) \
            or max_len < 1:
        raise ValueError(f"max_len must be a positive integer, got {max_len!r}")
    if max_len > 25:
        raise ValueError(f"max_len={max_len} would enumerate more than 2^26 "
                         "sequences; the scan is capped at max_len=25")
    _check_phi(phi)
    _check_psi(psi, phi)


def _lemma3_chunks(max_len: int, phi: float, psi: float, chunk: int = 1 << 18):
    """Yield (length, start_codes, eps_matrix, values) over all sequences.

    Sequences are enumerated by the integer n = 2^length + b: n's binary
    digits after the leading 1 map to the signs via epsilon = 2 bit - 1.
    Values accumulate term by term in sequence order, matching lemma3_sum
    exactly.
    """
    _check_scan_args(max_len, phi, psi)
    return _lemma3_chunks_unchecked(max_len, phi, psi, chunk)


def _lemma3_chunks_unchecked(max_len: int, phi: float, psi: float, chunk: int):
    for length in range(1, max_len + 1):
        pow_phi = np.array([phi ** (-qq) for qq in range(-length, length + 1)])
        pow_psi = np.array([psi ** (-qq) for qq in range(-length, length + 1)])
        shifts = np.arange(length - 1, -1, -1, dtype=np.int64)
        total = 1 << length
        for b0 in range(0, total, chunk):
            b = np.arange(b0, min(b0 + chunk, total), dtype=np.int64)
            eps = ((b[:, None] >> shifts) & 1) * 2 - 1
            q_run = np.cumsum(eps, axis=1)
            q_prev = q_run - eps
            vals = np.zeros(b.shape[0], dtype=np.float64)
            for k in range(length):
                vals = vals + eps[:, k] * (
                    1.0 - pow_phi[q_run[:, k] + length] * pow_psi[q_prev[:, k] + length])
            yield length, b, eps, vals


def lemma3_scan(max_len: int, phi: float, psi: float) -> Lemma3Scan:
    """Minimize lemma3_sum over every sign sequence of length 1..max_len.

    Exhaustive enumeration, 2^(max_len+1) - 2 sequences; max_len is capped
    at 25 to keep the scan affordable.  Ties keep the earliest sequence in
    enumeration order.
    """
    best = math.inf
    best_eps = ()
    count = 0
    for _length, _b, eps, vals in _lemma3_chunks(max_len, phi, psi):
        count += vals.shape[0]
        i = int(np.argmin(vals))
        if vals[i] < best:
            best = float(vals[i])
            best_eps = tuple(int(e) for e in eps[i])
    return Lemma3Scan(min_value=best, argmin_epsilons=best_eps, n_sequences=count)
