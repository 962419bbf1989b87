"""Crossings, fixed-time rounds, thresholds, session mechanics, sign scans."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import bound_by_quadrature, lemma3_bruteforce

from infotrade import (
    DiscountCurve,
    PayoffMeasure,
    Quote,
    ScenarioConfig,
    SeededRng,
    binary_bond_mid,
    detect_first_crossing,
    effective_information,
    lemma3_scan,
    lemma3_sum,
    make_information_path,
    make_time_grid,
    price_path,
    quote_from_mid,
    run_scenario1,
    run_session,
    sample_bridge_path,
    sample_payoff,
    scenario2_lower_bound,
    scenario2_thresholds,
    session_generator,
)

FLAT = DiscountCurve()
BINARY = PayoffMeasure.binary(0.8)
PHI = 1.02


def quotes(mids, phi=PHI, psi=1.0, q=0):
    return quote_from_mid(np.asarray(mids, dtype=float), phi, psi, q)


# ---------------------------------------------------------------- crossings

def test_equal_mids_never_cross():
    mids = np.full(8, 0.8)
    assert detect_first_crossing(quotes(mids), quotes(mids)) is None


def test_first_buy_crossing_index():
    s_b = np.full(6, 1.0)
    s_a = np.array([1.0, 1.0, 1.03, 1.2, 1.0, 1.0])
    # phi^2 = 1.0404: only index 3 lifts A's bid to B's offer
    hit = detect_first_crossing(quotes(s_a), quotes(s_b))
    assert (hit.index, hit.side, hit.tie) == (3, 1, False)


def test_first_sell_crossing_index():
    s_b = np.full(6, 1.0)
    s_a = np.array([1.0, 0.97, 0.9, 1.0, 1.0, 1.0])
    hit = detect_first_crossing(quotes(s_a), quotes(s_b))
    assert (hit.index, hit.side) == (2, -1)


def test_crossing_window_bounds():
    s_b = np.full(6, 1.0)
    s_a = np.array([1.2, 1.0, 1.0, 1.0, 1.0, 1.2])
    assert detect_first_crossing(quotes(s_a), quotes(s_b), 1, 4) is None
    assert detect_first_crossing(quotes(s_a), quotes(s_b), 1, 5).index == 5
    assert detect_first_crossing(quotes(s_a), quotes(s_b), 1).index == 5
    with pytest.raises(ValueError):
        detect_first_crossing(quotes(s_a), quotes(s_b), 6)


def test_collapsed_books_never_trade():
    zeros = quotes(np.zeros(5))
    assert detect_first_crossing(zeros, zeros) is None


def test_one_sided_collapse_trades():
    s_a = np.array([0.0, 0.0])
    s_b = np.array([1.0, 1.0])
    hit = detect_first_crossing(quotes(s_a), quotes(s_b))
    assert (hit.index, hit.side) == (0, -1)
    hit = detect_first_crossing(quotes(s_b), quotes(s_a))
    assert (hit.index, hit.side) == (0, 1)


def test_simultaneous_crossing_prefers_buy_and_flags():
    # coherent books cannot cross both ways at once; hand-built ones can
    qa = Quote(info_mid=np.array([1.0]), quoted_mid=np.array([1.0]),
               bid=np.array([1.0]), offer=np.array([0.5]))
    qb = Quote(info_mid=np.array([1.0]), quoted_mid=np.array([1.0]),
               bid=np.array([2.0]), offer=np.array([0.9]))
    hit = detect_first_crossing(qa, qb)
    assert (hit.side, hit.tie) == (1, True)


# ------------------------------------------------------- fixed-time round 1

def test_scenario1_no_trade_on_equal_mids():
    res = run_scenario1(0.8, 0.8, PHI, 1.0, 0.5, 1.0, FLAT)
    assert res.no_trade and res.h_a_T == 0.0 and res.trades == ()


def test_scenario1_buy_at_geometric_mean():
    # A's bid reaches B's offer exactly when S^A = phi^2 S^B; A buys
    s_b = 0.5
    s_a = PHI * PHI * s_b
    res = run_scenario1(s_a, s_b, PHI, 0.0, 0.5, 1.0, FLAT)
    trade = res.trades[0]
    assert trade.side == 1
    assert math.isclose(trade.exec_price, math.sqrt(s_a * s_b), rel_tol=1e-15)
    assert math.isclose(trade.exec_price, PHI * s_b, rel_tol=1e-14)
    assert math.isclose(res.h_a_T, -(PHI * s_b), rel_tol=1e-14)


def test_scenario1_sell_at_geometric_mean():
    s_a = 0.5
    s_b = PHI * PHI * s_a
    res = run_scenario1(s_a, s_b, PHI, 1.0, 0.5, 1.0, FLAT)
    trade = res.trades[0]
    assert trade.side == -1
    assert math.isclose(trade.exec_price, PHI * s_a, rel_tol=1e-14)
    assert math.isclose(res.h_a_T, PHI * s_a - 1.0, rel_tol=1e-14)


def test_scenario1_carries_payment_to_maturity():
    c = DiscountCurve(0.1)
    s_a, s_b = 0.55, 0.5
    res = run_scenario1(PHI * PHI * s_b, s_b, PHI, 1.0, 0.5, 1.0, c)
    exec_price = res.trades[0].exec_price
    expect = 1.0 - exec_price * math.exp(0.1 * 0.5)
    assert math.isclose(res.h_a_T, expect, rel_tol=1e-14)
    assert math.isclose(res.h_a_0_contribution, math.exp(-0.1) * res.h_a_T,
                        rel_tol=1e-15)


def test_scenario1_rejects_bad_inputs():
    with pytest.raises(ValueError):
        run_scenario1(0.5, 0.5, 1.0, 1.0, 0.5, 1.0, FLAT)
    with pytest.raises(ValueError):
        run_scenario1(-0.5, 0.5, PHI, 1.0, 0.5, 1.0, FLAT)
    with pytest.raises(ValueError):
        run_scenario1(0.5, 0.5, PHI, 1.0, 1.0, 1.0, FLAT)


# ------------------------------------------------- fixed-time thresholds

def test_thresholds_worked_values():
    th = scenario2_thresholds(1.02, 0.8, 1.0, 0.5, 1.0)
    sell = 0.5 * math.log((1 - 0.8) / (1.02 ** 2 - 0.8)) + 0.25
    buy = 0.5 * math.log(1.02 ** 2 * (1 - 0.8) / (1 - 1.02 ** 2 * 0.8)) + 0.25
    assert math.isclose(th.sell_at_or_below, sell, rel_tol=1e-12)
    assert math.isclose(th.buy_at_or_above, buy, rel_tol=1e-12)


def test_thresholds_seller_only_regime():
    assert scenario2_thresholds(1.2, 0.8, 1.0, 0.5, 1.0).buy_at_or_above is None
    # phi = 1.25 has exact square 1.5625: the buy side exists just below
    # p = 0.64 and collapses just above
    assert scenario2_thresholds(1.25, 0.63, 1.0, 0.5, 1.0).buy_at_or_above is not None
    assert scenario2_thresholds(1.25, 0.65, 1.0, 0.5, 1.0).buy_at_or_above is None


def test_thresholds_domain():
    for bad in ((1.02, 0.8, 0.0, 0.5, 1.0), (1.02, 0.8, 1.0, 0.0, 1.0),
                (1.02, 0.8, 1.0, 1.0, 1.0), (1.02, 1.0, 1.0, 0.5, 1.0)):
        with pytest.raises(ValueError):
            scenario2_thresholds(*bad)


def test_thresholds_gate_the_session_mechanics():
    # prices computed at signals just across each threshold must trade, and
    # strictly between them must not
    grid = make_time_grid(1.0, 10)
    config = ScenarioConfig(scenario_id=2, grid=grid, measure=BINARY, phi=PHI,
                            sigma_sources_a=(1.0,), sigma_sources_b=(),
                            fixed_trade_time=0.5)
    k = config.fixed_time_index
    th = scenario2_thresholds(PHI, 0.8, 1.0, 0.5, 1.0)
    s_b = np.full(grid.n_instants, 0.8)
    s_b[-1] = 0.0
    for xi, side in ((th.sell_at_or_below - 0.05, -1),
                     (th.sell_at_or_below + 0.05, 0),
                     (th.buy_at_or_above - 0.05, 0),
                     (th.buy_at_or_above + 0.05, 1)):
        s_a = np.full(grid.n_instants, 0.5)
        s_a[k] = binary_bond_mid(xi, 0.5, 1.0, 1.0, 0.8, FLAT)
        s_a[-1] = 0.0
        res = run_session(config, s_a, s_b, 1.0)
        if side == 0:
            assert res.no_trade
        else:
            assert res.trades[0].side == side
            assert res.trades[0].time_index == k


def test_scenario2_executes_at_a_side():
    grid = make_time_grid(1.0, 10)
    config = ScenarioConfig(scenario_id=2, grid=grid, measure=BINARY, phi=PHI,
                            sigma_sources_a=(1.0,), sigma_sources_b=(),
                            fixed_trade_time=0.5)
    k = config.fixed_time_index
    s_b = np.full(grid.n_instants, 0.8)
    s_b[-1] = 0.0
    s_a = np.full(grid.n_instants, 0.75)
    s_a[-1] = 0.0
    res = run_session(config, s_a, s_b, 0.0)  # deep sell: 0.75 * phi < 0.8 / phi
    trade = res.trades[0]
    assert trade.side == -1
    assert math.isclose(trade.exec_price, 0.75 * PHI, rel_tol=1e-15)
    assert math.isclose(res.h_a_T, 0.75 * PHI, rel_tol=1e-15)


# ------------------------------------------------------- fixed-time bound

def test_bound_matches_quadrature_oracle():
    got = scenario2_lower_bound(1.02, 0.8, 1.0, 0.5, 1.0, 1.0)
    assert abs(got - 0.013549459243841662) < 1e-10  # scipy.integrate pin


def test_bound_seller_only_matches_quadrature_oracle():
    got = scenario2_lower_bound(1.2, 0.8, 1.0, 0.5, 1.0, 1.0)
    assert abs(got - 0.0077025801044164326) < 1e-10  # scipy.integrate pin


def test_bound_discounting_factorizes():
    flat = scenario2_lower_bound(1.02, 0.8, 1.0, 0.5, 1.0)
    carried = scenario2_lower_bound(1.02, 0.8, 1.0, 0.5, 1.0, math.exp(-0.1))
    assert math.isclose(carried, math.exp(-0.1) * flat, rel_tol=1e-14)


@pytest.mark.parametrize("phi", [1.005, 1.05, 1.2, 1.5])
@pytest.mark.parametrize("p", [0.3, 0.8, 0.95])
def test_bound_strictly_positive(phi, p):
    assert scenario2_lower_bound(phi, p, 1.0, 0.5, 1.0) > 0.0


def test_bound_quadrature_spot_checks():
    for phi, p, sigma, t in ((1.05, 0.6, 0.7, 0.3), (1.3, 0.9, 2.0, 0.8)):
        got = scenario2_lower_bound(phi, p, sigma, t, 1.0)
        assert abs(got - bound_by_quadrature(phi, p, sigma, t, 1.0)) < 1e-10


def test_bound_domain():
    for bad_t in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            scenario2_lower_bound(1.02, 0.8, 1.0, bad_t, 1.0)
    with pytest.raises(ValueError, match="p_0T"):
        scenario2_lower_bound(1.02, 0.8, 1.0, 0.5, 1.0, 0.0)


# ------------------------------------------------------------ full sessions

def grid_and_paths(n_steps, s_a_vals, s_b_vals):
    grid = make_time_grid(1.0, n_steps)
    s_a = np.asarray(s_a_vals, dtype=float)
    s_b = np.asarray(s_b_vals, dtype=float)
    assert s_a.size == grid.n_instants
    return grid, s_a, s_b


def test_session_single_crossing_accounting():
    grid, s_a, s_b = grid_and_paths(
        6, [1.0, 1.0, 1.03, 1.2, 1.0, 1.0, 0.0], [1.0] * 6 + [0.0])
    config = ScenarioConfig(scenario_id=3, grid=grid, measure=BINARY, phi=PHI,
                            sigma_sources_a=(1.0, 1.0), sigma_sources_b=(1.0,))
    res = run_session(config, s_a, s_b, 1.0)
    assert len(res.trades) == 1 and not res.no_trade
    trade = res.trades[0]
    assert (trade.time_index, trade.side, trade.inventory_after) == (3, 1, 1)
    assert trade.exec_price == 1.2 / PHI
    assert res.h_a_T == 1.0 - 1.2 / PHI
    assert res.h_a_0_contribution == res.h_a_T  # r = 0


def test_session_equal_paths_no_trade():
    grid, s_a, s_b = grid_and_paths(4, [0.8] * 4 + [0.0], [0.8] * 4 + [0.0])
    config = ScenarioConfig(scenario_id=3, grid=grid, measure=BINARY, phi=PHI,
                            sigma_sources_a=(1.0, 1.0), sigma_sources_b=(1.0,))
    res = run_session(config, s_a, s_b, 1.0)
    assert res.no_trade and res.h_a_T == 0.0


def test_session_two_trade_round_trip():
    # index 2 sits in the held-inventory no-trade band (1, phi^4); index 3
    # falls back to s_b and the shifted books cross on the sell side
    grid, s_a, s_b = grid_and_paths(
        6, [1.0, 1.2, 1.05, 0.8, 2.0, 1.0, 0.0], [1.0] * 6 + [0.0])
    config = ScenarioConfig(scenario_id=4, grid=grid, measure=BINARY, phi=PHI,
                            sigma_sources_a=(1.0, 1.0), sigma_sources_b=(1.0,))
    res = run_session(config, s_a, s_b, 1.0)
    # buy at index 1; sell at index 3; the cap of two trades ignores the
    # index-4 spike
    assert [(t.time_index, t.side) for t in res.trades] == [(1, 1), (3, -1)]
    assert res.trades[0].exec_price == 1.2 / PHI
    # with psi = 1 the inventory factor cancels out of A's offer
    assert math.isclose(res.trades[1].exec_price, 0.8, rel_tol=1e-15)
    assert math.isclose(res.h_a_T, 0.8 - 1.2 / PHI, rel_tol=1e-14)
    assert [t.inventory_after for t in res.trades] == [1, 0]


def test_session_respects_last_interior_flag():
    vals_a = [1.0, 1.0, 1.0, 1.0, 1.0, 1.2, 0.0]
    grid, s_a, s_b = grid_and_paths(6, vals_a, [1.0] * 6 + [0.0])
    base = dict(scenario_id=3, grid=grid, measure=BINARY, phi=PHI,
                sigma_sources_a=(1.0, 1.0), sigma_sources_b=(1.0,))
    allowed = run_session(ScenarioConfig(**base), s_a, s_b, 1.0)
    assert allowed.trades[0].time_index == 5
    blocked = run_session(
        ScenarioConfig(**base, allow_last_interior_trade=False), s_a, s_b, 1.0)
    assert blocked.no_trade


def test_session_trade_indices_strictly_increase():
    grid = make_time_grid(1.0, 400)
    config = ScenarioConfig(scenario_id=6, grid=grid, measure=BINARY, phi=1.01,
                            psi_a=1.005, psi_b=1.005,
                            sigma_sources_a=(1.0, 1.0), sigma_sources_b=(1.0,),
                            max_trades=64)
    found = 0
    for j in range(8):
        x = sample_payoff(BINARY, session_generator(31, j, 0))
        b1 = sample_bridge_path(grid, session_generator(31, j, 1))
        b2 = sample_bridge_path(grid, session_generator(31, j, 2))
        p1 = make_information_path(x, 1.0, b1)
        p2 = make_information_path(x, 1.0, b2)
        s_a = price_path(effective_information([p1, p2], [1.0, 1.0]), BINARY, FLAT)
        s_b = price_path(p1, BINARY, FLAT)
        res = run_session(config, s_a, s_b, x)
        idx = [t.time_index for t in res.trades]
        assert idx == sorted(set(idx))
        found += len(idx)
    assert found > 0


def test_session_requote_invariants():
    # after each execution the aggressor's new quoted mid sits psi away from
    # the price it just traded at, on the side that discourages repeating
    grid = make_time_grid(1.0, 300)
    config = ScenarioConfig(scenario_id=5, grid=grid, measure=BINARY, phi=1.03,
                            psi_a=1.01, psi_b=1.01,
                            sigma_sources_a=(1.0, 1.0), sigma_sources_b=(1.0,))
    checked = 0
    for j in range(30):
        x = sample_payoff(BINARY, session_generator(77, j, 0))
        b1 = sample_bridge_path(grid, session_generator(77, j, 1))
        b2 = sample_bridge_path(grid, session_generator(77, j, 2))
        p1 = make_information_path(x, 1.0, b1)
        p2 = make_information_path(x, 1.0, b2)
        s_a = price_path(effective_information([p1, p2], [1.0, 1.0]), BINARY, FLAT)
        s_b = price_path(p1, BINARY, FLAT)
        res = run_session(config, s_a, s_b, x)
        for trade in res.trades:
            q_before = trade.inventory_after - trade.side
            qa = quote_from_mid(float(s_a[trade.time_index]), 1.03, 1.01, q_before)
            qb = quote_from_mid(float(s_b[trade.time_index]), 1.03, 1.01, -q_before)
            crossed = qa.bid if trade.side == 1 else qa.offer
            assert trade.exec_price == crossed
            if trade.side == 1:
                assert qa.bid >= qb.offer
            else:
                assert qa.offer <= qb.bid
            qa_after = quote_from_mid(float(s_a[trade.time_index]), 1.03, 1.01,
                                      trade.inventory_after)
            assert math.isclose(qa_after.quoted_mid,
                                trade.exec_price * 1.01 ** (-trade.side),
                                rel_tol=1e-12)
            checked += 1
    assert checked >= 10


# ------------------------------------------------------ scenario validation

def test_config_taxonomy_rules():
    grid = make_time_grid(1.0, 10)
    ok = dict(grid=grid, measure=BINARY, phi=PHI,
              sigma_sources_a=(1.0, 1.0), sigma_sources_b=(1.0,))
    with pytest.raises(ValueError):
        ScenarioConfig(scenario_id=7, **ok)
    with pytest.raises(ValueError, match="inventory aversion"):
        ScenarioConfig(scenario_id=3, psi_a=1.01, psi_b=1.01, **ok)
    with pytest.raises(ValueError, match="psi"):
        ScenarioConfig(scenario_id=5, psi_a=1.03, psi_b=1.03, **ok)
    with pytest.raises(ValueError, match="prefix"):
        ScenarioConfig(scenario_id=3, grid=grid, measure=BINARY, phi=PHI,
                       sigma_sources_a=(1.0, 2.0), sigma_sources_b=(2.0,))
    with pytest.raises(ValueError, match="fixed_trade_time"):
        ScenarioConfig(scenario_id=3, fixed_trade_time=0.5, **ok)
    with pytest.raises(ValueError):
        ScenarioConfig(scenario_id=3, max_trades=5, **ok)  # forced single trade


def test_config_identical_sources_allowed():
    grid = make_time_grid(1.0, 10)
    cfg = ScenarioConfig(scenario_id=3, grid=grid, measure=BINARY, phi=PHI,
                         sigma_sources_a=(1.0,), sigma_sources_b=(1.0,))
    assert cfg.sigma_eff_a == cfg.sigma_eff_b == 1.0


def test_config_scenario2_shape():
    grid = make_time_grid(1.0, 10)
    cfg = ScenarioConfig(scenario_id=2, grid=grid, measure=BINARY, phi=PHI,
                         sigma_sources_a=(1.0,), sigma_sources_b=())
    assert cfg.sigma_eff_b == 0.0
    assert cfg.fixed_time_index == 5  # defaults to T/2
    with pytest.raises(ValueError, match="uninformed"):
        ScenarioConfig(scenario_id=2, grid=grid, measure=BINARY, phi=PHI,
                       sigma_sources_a=(1.0, 1.0), sigma_sources_b=(1.0,))
    three_atoms = PayoffMeasure.discrete([(0.0, 0.3), (1.0, 0.4), (2.0, 0.3)])
    with pytest.raises(ValueError, match="binary"):
        ScenarioConfig(scenario_id=2, grid=grid, measure=three_atoms, phi=PHI,
                       sigma_sources_a=(1.0,), sigma_sources_b=())


def test_config_fixed_time_rounding_guard():
    grid = make_time_grid(1.0, 10)
    with pytest.raises(ValueError, match="maturity"):
        ScenarioConfig(scenario_id=1, grid=grid, measure=BINARY, phi=PHI,
                       sigma_sources_a=(1.0, 1.0), sigma_sources_b=(1.0,),
                       fixed_trade_time=0.99)


def test_config_max_trades_caps():
    grid = make_time_grid(1.0, 10)
    base = dict(scenario_id=6, grid=grid, measure=BINARY, phi=PHI,
                sigma_sources_a=(1.0, 1.0), sigma_sources_b=(1.0,))
    assert ScenarioConfig(**base).max_trades == 256
    assert ScenarioConfig(**base, max_trades=10).max_trades == 10
    with pytest.raises(ValueError):
        ScenarioConfig(**base, max_trades=2_000_000)
    with pytest.raises(ValueError):
        ScenarioConfig(**base, max_trades=0)


# ------------------------------------------------------------- sign scans

def test_lemma3_sum_single_buy():
    assert math.isclose(lemma3_sum((1,), 1.02, 1.0), 1.0 - 1.0 / 1.02,
                        rel_tol=1e-15)


def test_lemma3_sum_round_trip():
    # (+1, -1): first term 1 - 1/phi, second -(1 - 1/psi); hand algebra
    for phi, psi in ((1.02, 1.01), (1.1, 1.0), (1.5, 1.2)):
        got = lemma3_sum((1, -1), phi, psi)
        assert math.isclose(got, 1.0 / psi - 1.0 / phi, rel_tol=1e-12)
        assert got > 0.0


def test_lemma3_sum_rejects_bad_sequences():
    for bad in ((), (0,), (2,), (1, 0, -1)):
        with pytest.raises(ValueError):
            lemma3_sum(bad, 1.02, 1.0)
    with pytest.raises(ValueError):
        lemma3_sum((1,), 1.02, 1.05)  # psi above phi


@given(st.lists(st.sampled_from([1, -1]), min_size=1, max_size=8),
       st.floats(1.001, 1.4), st.floats(0.0, 0.9))
def test_lemma3_sum_matches_bruteforce_and_positive(eps, phi, frac):
    psi = 1.0 + frac * (phi - 1.0) * 0.999
    got = lemma3_sum(eps, phi, psi)
    q_prev, expect = 0, 0.0
    for e in eps:
        q = q_prev + e
        expect += e * (1.0 - math.pow(phi, -q) * math.pow(psi, -q_prev))
        q_prev = q
    assert math.isclose(got, expect, rel_tol=1e-12, abs_tol=1e-15)
    assert got > 0.0


def test_lemma3_scan_depth_one():
    scan = lemma3_scan(1, 1.02, 1.0)
    assert scan.n_sequences == 2
    assert scan.argmin_epsilons == (1,)
    assert math.isclose(scan.min_value, 1.0 - 1.0 / 1.02, rel_tol=1e-15)


def test_lemma3_scan_matches_bruteforce():
    scan = lemma3_scan(3, 1.1, 1.0)
    assert scan.n_sequences == 14
    assert abs(scan.min_value - 0.090909090909090939) < 1e-14  # brute-force pin
    mn, argmin, count = lemma3_bruteforce(3, 1.1, 1.0)
    assert count == 14
    assert math.isclose(scan.min_value, mn, rel_tol=1e-13)
    assert scan.argmin_epsilons == argmin


def test_lemma3_scan_fig_parameters():
    scan = lemma3_scan(10, 1.02, 1.01)
    assert scan.n_sequences == 2046
    assert abs(scan.min_value - 0.0097068530382450335) < 1e-14  # brute-force pin
    assert scan.argmin_epsilons == (1, -1)
    assert scan.min_value > 0.0


def test_lemma3_scan_guards():
    with pytest.raises(ValueError):
        lemma3_scan(26, 1.02, 1.0)
    with pytest.raises(ValueError):
        lemma3_scan(0, 1.02, 1.0)
