"""Fused per-session batch kernel: bridge, information, prices, crossings.

One compiled pass per session replaces the chain of public ops
(bridge_values_from_normals -> make_information_path -> effective_information
-> price_path -> quote_from_mid -> detect_first_crossing -> accounting).  The
arithmetic mirrors those ops expression for expression, in the same order, so
results match them to the last unit in the last place; the only looseness is
that exp/log come from the compiler's libm rather than numpy's, which can
differ by one ulp.  Trade decisions therefore get their exactness tests
against the price arrays this kernel itself returns, while prices carry a
1e-13 relative tolerance against the public route.

Everything here is private to the package; monte_carlo is the only caller.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

__all__ = ["run_sessions_kernel"]


@njit(cache=True, nogil=True)
def _logaddexp(a: float, b: float) -> float:
    # overflow-safe: the exp argument is always <= 0
    if a == -np.inf:
        return b
    if b == -np.inf:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


@njit(cache=True, nogil=True)
def _price_general(xi: float, t_k: float, ratio: float, disc_k: float,
                   coef_lin, coef_quad, atom_log_x, atom_log_w, atom_pos) -> float:
    # mirrors pricing.log_conditional_mean: ell accumulated in atom order
    num = -np.inf
    den = -np.inf
    for c in range(coef_lin.shape[0]):
        ell = (coef_lin[c] * xi - coef_quad[c] * t_k) * ratio + atom_log_w[c]
        den = _logaddexp(den, ell)
        if atom_pos[c]:
            num = _logaddexp(num, atom_log_x[c] + ell)
    if num == -np.inf:
        return 0.0
    return disc_k * math.exp(num - den)


@njit(cache=True, nogil=True)
def run_sessions_kernel(z, x, times, c, t_maturity,
                        sigmas, n_sources_b, s_eff_a, s_eff_b,
                        use_binary, lw_binary,
                        coef_lin_a, coef_quad_a, coef_lin_b, coef_quad_b,
                        atom_log_x, atom_log_w, atom_pos,
                        disc_row, fv_row,
                        fact_a, fact_b, q_offset, phi,
                        max_trades, last_idx, fixed_idx, geometric_exec,
                        n_trades, h_T, max_abs_q,
                        trade_idx, trade_side, trade_px, trade_q,
                        s_a_out, s_b_out, store_paths):
    """Run every session in the chunk; outputs land in the preallocated arrays.

    z has shape (n_sources, m, n_steps - 1); x is the (m,) payoff draws.
    fixed_idx >= 0 restricts detection to that single instant (fixed-time
    scenarios); geometric_exec switches the execution price to the geometric
    mean of the two mids instead of A's crossed side.  With store_paths both
    traders' full price paths are written to s_a_out/s_b_out (maturity column
    stays 0) and sessions run to the end instead of stopping at the last
    possible trade.
    """
    n_src, m, n_z = z.shape
    n = n_z + 1
    half_a = 0.5 * s_eff_a * s_eff_a
    half_b = 0.5 * s_eff_b * s_eff_b
    xi_buf = np.empty(n_src, dtype=np.float64)
    acc = np.empty(n_src, dtype=np.float64)

    for j in range(m):
        xj = x[j]
        for i in range(n_src):
            acc[i] = 0.0
        q = 0
        fa = fact_a[q_offset]
        fb = fact_b[q_offset]
        nt = 0
        h = 0.0
        mq = 0

        for k in range(n):
            if k > 0:
                ck = c[k - 1]
                for i in range(n_src):
                    acc[i] = acc[i] + ck * z[i, j, k - 1]
            t_k = times[k]
            rem = t_maturity - t_k
            ratio = t_maturity / rem

            # per-source information, then the effective combination;
            # a single source is used as-is (no rescaling round trip)
            for i in range(n_src):
                xi_buf[i] = sigmas[i] * t_k * xj + rem * acc[i]
            if n_src == 1:
                xi_a = xi_buf[0]
            else:
                s_num = sigmas[0] * xi_buf[0]
                for i in range(1, n_src):
                    s_num = s_num + sigmas[i] * xi_buf[i]
                xi_a = s_num / s_eff_a
            if n_sources_b == 0:
                xi_b = 0.0
            elif n_sources_b == 1:
                xi_b = xi_buf[0]
            else:
                s_num = sigmas[0] * xi_buf[0]
                for i in range(1, n_sources_b):
                    s_num = s_num + sigmas[i] * xi_buf[i]
                xi_b = s_num / s_eff_b

            disc_k = disc_row[k]
            if use_binary:
                u_a = (s_eff_a * xi_a - half_a * t_k) * ratio + lw_binary
                s_a = disc_k / (1.0 + math.exp(-u_a))
                u_b = (s_eff_b * xi_b - half_b * t_k) * ratio + lw_binary
                s_b = disc_k / (1.0 + math.exp(-u_b))
            else:
                s_a = _price_general(xi_a, t_k, ratio, disc_k, coef_lin_a,
                                     coef_quad_a, atom_log_x, atom_log_w, atom_pos)
                s_b = _price_general(xi_b, t_k, ratio, disc_k, coef_lin_b,
                                     coef_quad_b, atom_log_x, atom_log_w, atom_pos)

            if store_paths:
                s_a_out[j, k] = s_a
                s_b_out[j, k] = s_b

            can_trade = nt < max_trades and (
                k == fixed_idx if fixed_idx >= 0 else k <= last_idx)
            if can_trade:
                qa = s_a * fa
                qb = s_b * fb
                bid_a = qa / phi
                offer_b = qb * phi
                side = 0
                px = 0.0
                if bid_a >= offer_b and (bid_a > 0.0 or offer_b > 0.0):
                    side = 1
                    px = bid_a
                else:
                    offer_a = qa * phi
                    bid_b = qb / phi
                    if offer_a <= bid_b and (offer_a > 0.0 or bid_b > 0.0):
                        side = -1
                        px = offer_a
                if side != 0:
                    if geometric_exec:
                        px = math.sqrt(s_a * s_b)
                    h = h + side * (xj - px * fv_row[k])
                    q = q + side
                    aq = -q if q < 0 else q
                    if aq > mq:
                        mq = aq
                    trade_idx[j, nt] = k
                    trade_side[j, nt] = side
                    trade_px[j, nt] = px
                    trade_q[j, nt] = q
                    nt += 1
                    fa = fact_a[q + q_offset]
                    fb = fact_b[q + q_offset]

            if not store_paths:
                if fixed_idx >= 0:
                    if k >= fixed_idx:
                        break
                elif nt >= max_trades or k >= last_idx:
                    break

        n_trades[j] = nt
        h_T[j] = h
        max_abs_q[j] = mq
