"""Time grids, Brownian bridges, information processes, payoff measures, RNG streams.

The noise that hides the payoff from market participants is a Brownian bridge
pinned to zero at both ends of the trading horizon, so the signal-to-noise
ratio of the information process rises as maturity approaches.  Everything
here is exact: bridges are sampled through the exact forward conditional
recursion (no Euler error), and every random draw comes from a named stream so
that batch runs are reproducible bit for bit.

Stream derivation
-----------------
A stream is identified by ``(master_seed, stream_index)`` and realized as
``PCG64(SeedSequence((master_seed, stream_index)))``.  SeedSequence's entropy
hashing is the integer-mixing function; it is documented and stable across
numpy versions.  Batch code packs per-session streams as::

    stream_index = session_index * 256 + source_slot

where slot 0 is the payoff draw and slot 1 + i is the bridge of information
source i.  A session therefore owns up to 256 independent sources, and no two
(session, slot) pairs collide.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TimeGrid",
    "SeededRng",
    "BridgePath",
    "InformationPath",
    "PayoffMeasure",
    "make_time_grid",
    "session_generator",
    "sample_bridge_path",
    "sample_payoff",
    "make_information_path",
    "effective_information",
    "effective_flow_rate",
]

_SOURCE_SLOTS = 256  # slots per session in the stream packing


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [0, t_maturity] with n_steps + 1 instants."""

    t_maturity: float
    n_steps: int
    dt: float
    times: np.ndarray

    @property
    def n_instants(self) -> int:
        return self.n_steps + 1


def make_time_grid(t_maturity: float, n_steps: int) -> TimeGrid:
    """Build a uniform TimeGrid; endpoints are exact (times[0]=0, times[-1]=T)."""
    if not np.isfinite(t_maturity) or t_maturity <= 0:
        raise ValueError(f"t_maturity must be a positive real, got {t_maturity}")
    if not isinstance(n_steps, (int, np.integer)) or n_steps < 2:
        raise ValueError(f"n_steps must be an integer >= 2, got {n_steps}")
    times = np.linspace(0.0, float(t_maturity), int(n_steps) + 1)
    return TimeGrid(
        t_maturity=float(t_maturity),
        n_steps=int(n_steps),
        dt=float(t_maturity) / int(n_steps),
        times=_readonly(times),
    )


@dataclass(frozen=True)
class SeededRng:
    """A named random stream: (master_seed, stream_index).

    ``generator()`` returns a fresh numpy Generator positioned at the start of
    the stream, so equal SeededRng values always reproduce the same draws.
    Pass the same Generator instance onward to draw successive objects from
    one stream.
    """

    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence((int(self.master_seed), int(self.stream_index)))
        return np.random.Generator(np.random.PCG64(ss))


def session_generator(master_seed: int, session_index: int, source_slot: int) -> np.random.Generator:
    """Generator for one session's slot (0 = payoff, 1 + i = bridge source i)."""
    if not 0 <= source_slot < _SOURCE_SLOTS:
        raise ValueError(f"source_slot must be in [0, {_SOURCE_SLOTS}), got {source_slot}")
    return SeededRng(master_seed, session_index * _SOURCE_SLOTS + source_slot).generator()


@dataclass(frozen=True)
class BridgePath:
    """One sampled Brownian-bridge path on a grid, pinned to 0 at both ends."""

    grid: TimeGrid
    values: np.ndarray


@dataclass(frozen=True)
class InformationPath:
    """xi_t = sigma * t * x + bridge_t on a grid."""

    grid: TimeGrid
    flow_rate_sigma: float
    values: np.ndarray


def bridge_step_coefficients(grid: TimeGrid) -> np.ndarray:
    """c_i = sqrt(dt / ((T - t_i)(T - t_{i+1}))) for the n_steps - 1 interior steps.

    The exact forward conditional recursion
    ``B_{t+dt} | B_t ~ N(B_t (T-t-dt)/(T-t), dt (T-t-dt)/(T-t))`` unrolls to
    ``B_{t_k} = (T - t_k) * sum_{i<k} c_i Z_i`` with iid standard normals Z_i;
    the final step into t = T is deterministic (the bridge is pinned), so only
    n_steps - 1 normals are consumed per path.
    """
    t = grid.times
    T = grid.t_maturity
    n = grid.n_steps
    return np.sqrt(grid.dt / ((T - t[: n - 1]) * (T - t[1:n])))


def bridge_values_from_normals(z: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """Map standard normals of shape (..., n_steps - 1) to bridge values (..., n_steps + 1)."""
    z = np.asarray(z, dtype=np.float64)
    n = grid.n_steps
    if z.shape[-1] != n - 1:
        raise ValueError(f"expected {n - 1} normals per path, got {z.shape[-1]}")
    c = bridge_step_coefficients(grid)
    out = np.zeros(z.shape[:-1] + (n + 1,), dtype=np.float64)
    out[..., 1:n] = (grid.t_maturity - grid.times[1:n]) * np.cumsum(c * z, axis=-1)
    # endpoints stay exactly 0: the bridge is pinned at t=0 and t=T
    return out


def sample_bridge_path(grid: TimeGrid, rng) -> BridgePath:
    """Draw one bridge path. ``rng`` is a numpy Generator or a SeededRng."""
    gen = rng.generator() if isinstance(rng, SeededRng) else rng
    z = gen.standard_normal(grid.n_steps - 1)
    return BridgePath(grid=grid, values=_readonly(bridge_values_from_normals(z, grid)))


@dataclass(frozen=True)
class PayoffMeasure:
    """A purely atomic law for the nonnegative payoff X.

    ``kind`` is "discrete" (arbitrary atoms) or "gridded" (atoms on an
    increasing node set, e.g. a discretized density).  Weights are strict
    probabilities: positive, summing to 1 within 1e-12.
    """

    values: np.ndarray
    weights: np.ndarray
    kind: str = "discrete"
    log_weights: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        v = _readonly(self.values)
        w = _readonly(self.weights)
        if v.ndim != 1 or w.ndim != 1 or v.size != w.size or v.size == 0:
            raise ValueError("values and weights must be equal-length nonempty 1-D arrays")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("payoff atoms must be finite and nonnegative")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be strictly positive and finite")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 within 1e-12, got {w.sum()!r}")
        if self.kind == "gridded" and not np.all(np.diff(v) > 0):
            raise ValueError("gridded nodes must be strictly increasing")
        if self.kind not in ("discrete", "gridded"):
            raise ValueError(f"unknown measure kind {self.kind!r}")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "log_weights", _readonly(np.log(w)))

    @classmethod
    def discrete(cls, atoms) -> "PayoffMeasure":
        """From [(value, weight), ...] in the given order (order is part of the identity)."""
        a = np.asarray(atoms, dtype=np.float64)
        if a.ndim != 2 or a.shape[1] != 2:
            raise ValueError("atoms must be a sequence of (value, weight) pairs")
        return cls(values=a[:, 0], weights=a[:, 1], kind="discrete")

    @classmethod
    def binary(cls, p: float, payoff: float = 1.0) -> "PayoffMeasure":
        """Defaultable unit claim: pays ``payoff`` w.p. p, else 0."""
        if not 0 < p < 1:
            raise ValueError(f"p must lie strictly in (0, 1), got {p}")
        if payoff <= 0:
            raise ValueError("payoff must be positive")
        return cls.discrete([(payoff, p), (0.0, 1.0 - p)])

    @classmethod
    def gridded(cls, nodes, weights) -> "PayoffMeasure":
        return cls(values=np.asarray(nodes, dtype=np.float64),
                   weights=np.asarray(weights, dtype=np.float64), kind="gridded")

    @classmethod
    def from_density(cls, nodes, density) -> "PayoffMeasure":
        """Discretize a density on a node set with trapezoid weights, renormalized."""
        x = np.asarray(nodes, dtype=np.float64)
        f = np.asarray(density, dtype=np.float64)
        if x.size < 2 or x.shape != f.shape:
            raise ValueError("need >= 2 nodes and matching density values")
        if np.any(f < 0):
            raise ValueError("density values must be nonnegative")
        dx = np.diff(x)
        w = np.zeros_like(x)
        w[:-1] += 0.5 * dx * f[:-1]
        w[1:] += 0.5 * dx * f[1:]
        total = w.sum()
        if total <= 0:
            raise ValueError("density integrates to zero on the given nodes")
        return cls(values=x, weights=w / total, kind="gridded")

    def mean(self) -> float:
        return float(self.values @ self.weights)

    def x_min(self) -> float:
        return float(self.values.min())

    def x_max(self) -> float:
        return float(self.values.max())

    def binary_parts(self):
        """(payoff, weight) of the nonzero atom if this is a two-atom {v, 0} law, else None.

        Such measures admit a one-logistic price evaluation; everything else
        goes through the general log-sum-exp route.
        """
        if self.values.size != 2:
            return None
        if self.values[0] != 0.0 and self.values[1] == 0.0:
            return float(self.values[0]), float(self.weights[0])
        if self.values[0] == 0.0 and self.values[1] != 0.0:
            return float(self.values[1]), float(self.weights[1])
        return None


def sample_payoff(measure: PayoffMeasure, rng) -> float:
    """Draw one payoff atom by inverse CDF in the measure's stored atom order."""
    gen = rng.generator() if isinstance(rng, SeededRng) else rng
    cum = np.cumsum(measure.weights)
    idx = int(np.searchsorted(cum, gen.random(), side="right"))
    return float(measure.values[min(idx, measure.values.size - 1)])


def make_information_path(x: float, sigma: float, bridge: BridgePath) -> InformationPath:
    """xi_t = sigma * t * x + B_t; exact at the endpoints (xi_0 = 0, xi_T = sigma T x)."""
    if not np.isfinite(x) or x < 0:
        raise ValueError(f"payoff x must be a finite nonnegative real, got {x}")
    if not np.isfinite(sigma) or sigma < 0:
        raise ValueError(f"flow rate sigma must be a finite nonnegative real, got {sigma}")
    values = sigma * bridge.grid.times * x + bridge.values
    return InformationPath(grid=bridge.grid, flow_rate_sigma=float(sigma), values=_readonly(values))


def effective_flow_rate(sigmas) -> float:
    """Pythagorean combination sqrt(sum sigma_i^2) of per-source flow rates."""
    s = np.asarray(sigmas, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("sigmas must be a nonempty 1-D sequence")
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise ValueError("flow rates must be finite and nonnegative")
    if not np.any(s > 0):
        raise ValueError("at least one flow rate must be positive")
    return float(np.sqrt(np.sum(s * s)))


def effective_information(paths, sigmas) -> InformationPath:
    """Collapse several information sources into one effective path.

    The sum sum_i sigma_i xi^i_t, rescaled by the effective flow rate, carries
    the same conditional law of X as the joint observation, so a tier-n
    observer prices like a tier-1 observer with this path.  A single source is
    returned unchanged (values identical, not rescaled twice).
    """
    if len(paths) == 0 or len(paths) != len(sigmas):
        raise ValueError("need equally many paths and flow rates, at least one of each")
    grid = paths[0].grid
    for p in paths:
        if p.grid is not grid and not np.array_equal(p.grid.times, grid.times):
            raise ValueError("all information paths must share one time grid")
    s_eff = effective_flow_rate(sigmas)
    if len(paths) == 1:
        return InformationPath(grid=grid, flow_rate_sigma=s_eff, values=paths[0].values)
    num = combine_source_values([p.values for p in paths], sigmas, s_eff)
    return InformationPath(grid=grid, flow_rate_sigma=s_eff, values=_readonly(num))


def combine_source_values(value_arrays, sigmas, s_eff: float) -> np.ndarray:
    """(sum_i sigma_i v_i) / s_eff with a fixed left-to-right accumulation order."""
    acc = sigmas[0] * np.asarray(value_arrays[0], dtype=np.float64)
    for s, v in zip(sigmas[1:], value_arrays[1:]):
        acc = acc + s * np.asarray(v, dtype=np.float64)
    return acc / s_eff
