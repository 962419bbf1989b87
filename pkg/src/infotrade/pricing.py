"""Filtering prices, discounting, and two-sided quotes.

The price of the single-dividend claim at time t < T is the discounted
conditional mean of the payoff given the information process,

    S_t = P_{tT} * sum_x x w(x) exp(l(x)) / sum_x w(x) exp(l(x)),
    l(x) = (sigma x xi_t - 0.5 sigma^2 x^2 t) * T / (T - t),

evaluated in the log domain with a max-shifted sum so that nothing overflows
as t -> T (the exponent scale grows like T/(T-t)).  At and after maturity the
convention is price 0: the dividend has been paid.

Two independent evaluation routes exist on purpose: ``information_price`` and
``price_path`` run the general log-sum-exp route for any atomic measure, while
``binary_bond_mid`` is the one-logistic closed form available when the payoff
is {1, 0}.  Tests pin their agreement to 1e-12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .stochastic_core import InformationPath, PayoffMeasure, TimeGrid

__all__ = [
    "DiscountCurve",
    "Quote",
    "TraderSpec",
    "discount_factor",
    "information_price",
    "binary_bond_mid",
    "quote_from_mid",
    "price_path",
]


@dataclass(frozen=True)
class DiscountCurve:
    """Flat continuously-compounded short rate; P(t1,t2) = exp(-r (t2-t1))."""

    short_rate_r: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.short_rate_r):
            raise ValueError(f"short rate must be finite, got {self.short_rate_r}")


def discount_factor(curve: DiscountCurve, t1: float, t2: float) -> float:
    if not (np.isfinite(t1) and np.isfinite(t2)) or t1 < 0 or t2 < t1:
        raise ValueError(f"need 0 <= t1 <= t2, got t1={t1}, t2={t2}")
    return math.exp(-curve.short_rate_r * (t2 - t1))


def discount_to_maturity(curve: DiscountCurve, grid: TimeGrid) -> np.ndarray:
    """P(t_k, T) over the grid."""
    return np.exp(-curve.short_rate_r * (grid.t_maturity - grid.times))


def future_value_to_maturity(curve: DiscountCurve, grid: TimeGrid) -> np.ndarray:
    """1 / P(t_k, T) over the grid: carries a time-t cash amount to maturity."""
    return np.exp(curve.short_rate_r * (grid.t_maturity - grid.times))


@dataclass(frozen=True)
class TraderSpec:
    """A trader's information sources and inventory-aversion factor."""

    sigmas: tuple
    psi: float = 1.0
    label: str = ""

    def __post_init__(self):
        s = np.asarray(self.sigmas, dtype=np.float64)
        if s.ndim != 1:
            raise ValueError("sigmas must be a 1-D sequence; an empty one means no sources")
        if s.size and (np.any(s < 0) or not np.all(np.isfinite(s))):
            raise ValueError("flow rates must be finite and nonnegative")
        if not np.isfinite(self.psi) or self.psi < 1:
            raise ValueError(f"psi must satisfy psi >= 1, got {self.psi}")
        object.__setattr__(self, "sigmas", tuple(float(x) for x in s))


@dataclass(frozen=True)
class Quote:
    """Two-sided quote around an inventory-adjusted mid.

    Fields may be scalars or aligned arrays (a whole quote ladder over a
    grid).  Invariants: quoted_mid = info_mid * phi^{-Q} psi^{-Q},
    bid = quoted_mid / phi, offer = quoted_mid * phi.
    """

    info_mid: object
    quoted_mid: object
    bid: object
    offer: object


def quote_from_mid(info_mid, phi: float, psi: float, inventory_q: int) -> Quote:
    """Build the two-sided quote of a trader holding inventory Q.

    The spread factor phi > 1 sets bid/offer at quoted_mid / phi and
    quoted_mid * phi.  The inventory-aversion factor must satisfy
    1 <= psi < phi, otherwise re-quoted books could cross themselves and the
    round-trip profit bound fails; violations raise ValueError.
    """
    if not np.isfinite(phi) or phi <= 1.0:
        raise ValueError(f"spread factor phi must satisfy phi > 1, got {phi}")
    if not np.isfinite(psi) or not 1.0 <= psi < phi:
        raise ValueError(
            f"inventory aversion psi={psi} violates 1 <= psi < phi (phi={phi}): "
            "psi must be strictly smaller than the spread factor"
        )
    if not isinstance(inventory_q, (int, np.integer)):
        raise ValueError(f"inventory_q must be an integer, got {inventory_q!r}")
    mid_arr = np.asarray(info_mid, dtype=np.float64)
    if not np.all(np.isfinite(mid_arr)) or np.any(mid_arr < 0):
        raise ValueError("info_mid must be finite and nonnegative")
    q = int(inventory_q)
    factor = phi ** (-q) * psi ** (-q)
    quoted_mid = info_mid * factor
    return Quote(info_mid=info_mid, quoted_mid=quoted_mid,
                 bid=quoted_mid / phi, offer=quoted_mid * phi)


def _check_price_args(t: float, sigma: float, t_maturity: float):
    if not np.isfinite(t_maturity) or t_maturity <= 0:
        raise ValueError(f"t_maturity must be positive, got {t_maturity}")
    if not np.isfinite(t) or t < 0:
        raise ValueError(f"t must be a nonnegative real, got {t}")
    if not np.isfinite(sigma) or sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")


def log_conditional_mean(xi, t, sigma: float, t_maturity: float, measure: PayoffMeasure):
    """log E[X | xi_t = xi] for t < T, broadcast over xi/t arrays.

    Accumulates the numerator and denominator with np.logaddexp in the
    measure's atom order; atoms at x = 0 contribute only to the denominator.
    Returns -inf where the conditional mean is 0.
    """
    xi = np.asarray(xi, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    ratio = t_maturity / (t_maturity - t)
    half_sig2 = 0.5 * sigma * sigma
    num = None
    den = None
    for x, lw in zip(measure.values, measure.log_weights):
        ell = (sigma * x * xi - half_sig2 * (x * x) * t) * ratio + lw
        den = ell if den is None else np.logaddexp(den, ell)
        if x > 0:
            contrib = math.log(x) + ell
            num = contrib if num is None else np.logaddexp(num, contrib)
    if num is None:  # all mass at 0
        return np.full_like(den, -np.inf)
    return num - den


def information_price(xi_t: float, t: float, sigma: float, t_maturity: float,
                      measure: PayoffMeasure, curve: DiscountCurve) -> float:
    """Filtering price of the claim at one instant; 0 at and after maturity."""
    _check_price_args(t, sigma, t_maturity)
    if not np.isfinite(xi_t):
        raise ValueError(f"xi_t must be finite, got {xi_t}")
    if t >= t_maturity:
        return 0.0
    log_mean = log_conditional_mean(xi_t, t, sigma, t_maturity, measure)
    disc = math.exp(-curve.short_rate_r * (t_maturity - t))
    with np.errstate(under="ignore"):
        return float(disc * np.exp(log_mean))


def binary_bond_mid(xi_t, t: float, sigma: float, t_maturity: float,
                    p: float, curve: DiscountCurve):
    """Closed-form price of the {1, 0} claim, stable for any xi.

    S = P_{tT} / (1 + exp(-u)), u = (sigma xi - 0.5 sigma^2 t) T/(T-t) + logit(p).
    Monotone increasing in xi; equals P_{tT} * p at the no-news point
    xi = sigma t / 2.  Accepts a scalar or an array of xi values.
    """
    _check_price_args(t, sigma, t_maturity)
    if not 0 < p < 1:
        raise ValueError(f"p must lie strictly in (0, 1), got {p}")
    xi = np.asarray(xi_t, dtype=np.float64)
    if not np.all(np.isfinite(xi)):
        raise ValueError("xi_t must be finite")
    if t >= t_maturity:
        return 0.0 if xi.ndim == 0 else np.zeros_like(xi)
    u = (sigma * xi - (0.5 * sigma * sigma) * t) * (t_maturity / (t_maturity - t)) \
        + np.log(p / (1.0 - p))
    disc = math.exp(-curve.short_rate_r * (t_maturity - t))
    with np.errstate(over="ignore", under="ignore"):
        out = disc / (1.0 + np.exp(-u))
    return float(out) if out.ndim == 0 else out


def price_path(information: InformationPath, measure: PayoffMeasure,
               curve: DiscountCurve) -> np.ndarray:
    """Price at every grid instant; the maturity entry is exactly 0 by convention."""
    grid = information.grid
    n = grid.n_steps
    t_int = grid.times[:n]
    log_mean = log_conditional_mean(information.values[:n], t_int,
                                    information.flow_rate_sigma, grid.t_maturity, measure)
    disc = np.exp(-curve.short_rate_r * (grid.t_maturity - t_int))
    out = np.zeros(n + 1, dtype=np.float64)
    with np.errstate(under="ignore"):
        out[:n] = disc * np.exp(log_mean)
    return out
