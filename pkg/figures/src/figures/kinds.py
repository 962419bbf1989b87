"""The six figure kinds.

Every renderer takes loaded tables plus an output path, draws with a fixed
figure size on the Agg backend, and returns the (table, columns) pairs whose
values were plotted, for the --dump-points echo.
"""

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .tables import SchemaError, Table

_DPI = 120


def _single(tables: list, kind: str) -> Table:
    if len(tables) != 1:
        raise SchemaError(f"{kind} takes exactly one input file, "
                          f"got {len(tables)}")
    return tables[0]


def _finish(fig, out_path: str):
    fig.savefig(out_path, dpi=_DPI)
    plt.close(fig)


def render_hist(tables, out_path, title=None):
    """Bar panels of trade-time histograms, one panel per input file."""
    for t in tables:
        t.require("bin_left", "bin_right", "count")
    n = len(tables)
    ncols = 1 if n == 1 else 2
    nrows = math.ceil(n / ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=(5.0 * ncols, 3.2 * nrows),
                             squeeze=False)
    for ax in axes.flat[n:]:
        ax.set_visible(False)
    for t, ax in zip(tables, axes.flat):
        left = t.floats("bin_left")
        right = t.floats("bin_right")
        ax.bar(left, t.floats("count"), width=right - left, align="edge",
               color="tab:blue", edgecolor="white", linewidth=0.3)
        name = os.path.basename(os.path.dirname(t.path)) or "trade times"
        ax.set_title(name, fontsize=9)
        ax.set_xlabel("trade time")
        ax.set_ylabel("sessions")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    _finish(fig, out_path)
    return [(t, ["bin_left", "bin_right", "count"]) for t in tables]


def _pivot(t: Table):
    """surface.csv rows -> (phis, sigmas, Z[sigma, phi]) grid."""
    t.require("phi", "sigma_b", "mean_per_session")
    phi = t.floats("phi")
    sigma = t.floats("sigma_b")
    z = t.floats("mean_per_session")
    phis = np.unique(phi)
    sigmas = np.unique(sigma)
    grid = np.full((sigmas.size, phis.size), np.nan)
    grid[np.searchsorted(sigmas, sigma), np.searchsorted(phis, phi)] = z
    return phis, sigmas, grid


def render_heatmap(tables, out_path, title=None):
    t = _single(tables, "heatmap")
    phis, sigmas, grid = _pivot(t)
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    mesh = ax.pcolormesh(phis, sigmas, grid, shading="nearest",
                         cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="mean profit per session")
    ax.set_xlabel("spread factor phi")
    ax.set_ylabel("sigma_B")
    ax.set_title(title or "average profit")
    fig.tight_layout()
    _finish(fig, out_path)
    return [(t, ["phi", "sigma_b", "mean_per_session"])]


def render_scatter(tables, out_path, title=None):
    t = _single(tables, "scatter")
    t.require("n", "value")
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.scatter(t.ints("n"), t.floats("value"), s=6, color="tab:blue")
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel("sequence index n")
    ax.set_ylabel("round-trip value")
    ax.set_title(title or "sign-sequence scan")
    fig.tight_layout()
    _finish(fig, out_path)
    return [(t, ["n", "value"])]


_TRACE_COLUMNS = ("time", "s_a", "s_b", "bid_a", "offer_a", "bid_b",
                  "offer_b", "q_after", "trade_side", "trade_price")


def render_session_panels(tables, out_path, title=None):
    """Four panels: mids, books with trade arrows, inventory, mid-ratio."""
    t = _single(tables, "session_panels")
    t.require(*_TRACE_COLUMNS)
    time = t.floats("time")
    s_a, s_b = t.floats("s_a"), t.floats("s_b")
    bid_a, offer_a = t.floats("bid_a"), t.floats("offer_a")
    bid_b, offer_b = t.floats("bid_b"), t.floats("offer_b")
    side = t.ints("trade_side")
    px = t.floats("trade_price")
    buys, sells = side > 0, side < 0

    fig, axes = plt.subplots(2, 2, figsize=(10.0, 7.0))
    ax = axes[0, 0]
    ax.plot(time, s_a, label="S_A", color="tab:blue")
    ax.plot(time, s_b, label="S_B", color="tab:orange")
    ax.set_title("information prices")
    ax.legend(fontsize=8)

    ax = axes[0, 1]
    ax.fill_between(time, bid_a, offer_a, alpha=0.35, color="tab:blue",
                    label="A book")
    ax.fill_between(time, bid_b, offer_b, alpha=0.35, color="tab:orange",
                    label="B book")
    ax.scatter(time[buys], px[buys], marker="^", color="tab:green", zorder=3,
               label="A buys")
    ax.scatter(time[sells], px[sells], marker="v", color="tab:red", zorder=3,
               label="A sells")
    ax.set_title("quoted books and executions")
    ax.legend(fontsize=8)

    ax = axes[1, 0]
    ax.step(time, t.ints("q_after"), where="post", color="tab:purple")
    ax.set_title("inventory Q_A")
    ax.set_xlabel("time")

    ax = axes[1, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.sqrt((bid_a * offer_a) / (bid_b * offer_b))
    ratio[(bid_a <= 0) | (bid_b <= 0)] = np.nan
    ax.plot(time, ratio, color="tab:blue")
    valid = bid_a > 0
    if valid.any():
        # offer/bid is the squared spread factor at every quoted instant
        phi2 = float(offer_a[valid][0] / bid_a[valid][0])
        ax.axhline(phi2, color="black", linewidth=0.8, linestyle="--")
        ax.axhline(1.0 / phi2, color="black", linewidth=0.8, linestyle="--")
    for tt in time[side != 0]:
        ax.axvline(tt, color="gray", linewidth=0.5, alpha=0.6)
    ax.set_title("quoted-mid ratio and trade band")
    ax.set_xlabel("time")

    if title:
        fig.suptitle(title)
    fig.tight_layout()
    _finish(fig, out_path)
    return [(t, list(_TRACE_COLUMNS))]


def render_line(tables, out_path, title=None):
    """Profit-vs-spread curve (sweep slice) or inventory-vs-psi line."""
    t = _single(tables, "line")
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    if t.has("phi", "mean_per_session", "se_per_session"):
        x = t.floats("phi")
        y = t.floats("mean_per_session")
        se = t.floats("se_per_session")
        ax.plot(x, y, marker="o", color="tab:blue", label="per session")
        ax.fill_between(x, y - 2 * se, y + 2 * se, alpha=0.25,
                        color="tab:blue")
        used = ["phi", "mean_per_session", "se_per_session"]
        if t.has("mean_per_trade", "se_per_trade"):
            ax2 = ax.twinx()
            y2 = t.floats("mean_per_trade")
            se2 = t.floats("se_per_trade")
            ax2.plot(x, y2, marker="s", color="tab:orange", label="per trade")
            ax2.fill_between(x, y2 - 2 * se2, y2 + 2 * se2, alpha=0.25,
                             color="tab:orange")
            ax2.set_ylabel("mean profit per trade")
            used += ["mean_per_trade", "se_per_trade"]
        ax.set_xlabel("spread factor phi")
        ax.set_ylabel("mean profit per session")
    elif t.has("psi", "mean_max_abs_inventory"):
        ax.plot(t.floats("psi"), t.floats("mean_max_abs_inventory"),
                marker="o", color="tab:purple")
        ax.set_xlabel("inventory aversion psi")
        ax.set_ylabel("mean max |Q|")
        used = ["psi", "mean_max_abs_inventory"]
    else:
        raise SchemaError(f"line input {t.path} has neither a 'phi' sweep "
                          f"schema nor a 'psi' ladder schema")
    ax.set_title(title or "")
    fig.tight_layout()
    _finish(fig, out_path)
    return [(t, used)]


def render_surface(tables, out_path, title=None):
    t = _single(tables, "surface")
    phis, sigmas, grid = _pivot(t)
    fig = plt.figure(figsize=(7.0, 5.2))
    ax = fig.add_subplot(projection="3d")
    if phis.size >= 2 and sigmas.size >= 2:
        px, sx = np.meshgrid(phis, sigmas)
        ax.plot_surface(px, sx, grid, cmap="viridis")
    else:
        # degenerate sweep: too thin for a mesh, show the cells as points
        px, sx = np.meshgrid(phis, sigmas)
        ax.scatter(px.ravel(), sx.ravel(), grid.ravel(), color="tab:blue")
    ax.set_xlabel("phi")
    ax.set_ylabel("sigma_B")
    ax.set_zlabel("mean profit per session")
    ax.set_title(title or "profitability surface")
    _finish(fig, out_path)
    return [(t, ["phi", "sigma_b", "mean_per_session"])]


KINDS = {
    "hist": render_hist,
    "heatmap": render_heatmap,
    "scatter": render_scatter,
    "session_panels": render_session_panels,
    "line": render_line,
    "surface": render_surface,
}
