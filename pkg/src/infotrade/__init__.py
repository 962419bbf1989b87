"""Information-based asset pricing and asymmetric-information trading.

A single cash flow X pays at maturity T.  Market participants never see X
directly; each watches one or more information processes that mix a signal
proportional to t*X with Brownian-bridge noise pinned to vanish at T, and
prices the claim at its discounted conditional expectation.  Two traders with
nested information sets quote two-sided markets around those prices and trade
whenever the books cross; the better-informed trader profits on average, and
the package quantifies how that edge varies with the spread factor, the
information advantage, and inventory aversion.

The public surface is re-exported here; see the module docstrings for the
conventions (stream derivation, quote construction, scenario taxonomy).
"""

from .monte_carlo import (BatchResult, BatchStats, SweepResult, SweepRow,
                          TradeTimeHistogram, estimate_scenario2_bound_mc,
                          run_batch, simulate_sessions, sweep,
                          trade_time_histogram, histogram_from_result)
from .pricing import (DiscountCurve, Quote, TraderSpec, binary_bond_mid,
                      discount_factor, discount_to_maturity,
                      future_value_to_maturity, information_price,
                      log_conditional_mean, price_path, quote_from_mid)
from .stochastic_core import (BridgePath, InformationPath, PayoffMeasure,
                              SeededRng, TimeGrid, bridge_step_coefficients,
                              bridge_values_from_normals,
                              combine_source_values, effective_flow_rate,
                              effective_information, make_information_path,
                              make_time_grid, sample_bridge_path,
                              sample_payoff, session_generator)
from .trading_engine import (Crossing, Lemma3Scan, Scenario2Thresholds,
                             ScenarioConfig, SessionResult, TradeEvent,
                             detect_first_crossing, lemma3_scan, lemma3_sum,
                             run_scenario1, run_session, scenario2_lower_bound,
                             scenario2_thresholds)

__version__ = "0.1.0"

__all__ = [
    "BatchResult", "BatchStats", "BridgePath", "Crossing", "DiscountCurve",
    "InformationPath", "Lemma3Scan", "PayoffMeasure", "Quote",
    "Scenario2Thresholds", "ScenarioConfig", "SeededRng", "SessionResult",
    "SweepResult", "SweepRow", "TimeGrid", "TradeEvent", "TraderSpec",
    "TradeTimeHistogram", "binary_bond_mid", "bridge_step_coefficients",
    "bridge_values_from_normals", "combine_source_values",
    "detect_first_crossing", "discount_factor", "discount_to_maturity",
    "effective_flow_rate", "effective_information",
    "estimate_scenario2_bound_mc", "future_value_to_maturity",
    "information_price", "lemma3_scan", "lemma3_sum", "log_conditional_mean",
    "make_information_path", "make_time_grid", "price_path", "quote_from_mid",
    "run_batch", "run_scenario1", "run_session", "sample_bridge_path",
    "sample_payoff", "scenario2_lower_bound", "scenario2_thresholds",
    "session_generator", "simulate_sessions", "sweep", "trade_time_histogram",
    "histogram_from_result", "__version__",
]
