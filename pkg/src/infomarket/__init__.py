"""Information incorporation in betting markets.

Price transforms and log scores, a coin-flip market simulator, calibration
statistics for price series, event detection on log-likelihood changes, and
entropy-loss ranking of news features around detected events.
"""

__version__ = "0.1.0"

from .core import (
    DELTA,
    CandidateSeries,
    Market,
    Outcome,
    PricePoint,
    from_log_likelihood,
    log_score,
    normalize_prices,
    to_likelihood,
    to_log_likelihood,
)
from .simulator import SimConfig, event_probability, simulate_ensemble, simulate_market

__all__ = [
    "DELTA",
    "CandidateSeries",
    "Market",
    "Outcome",
    "PricePoint",
    "SimConfig",
    "event_probability",
    "from_log_likelihood",
    "log_score",
    "normalize_prices",
    "simulate_ensemble",
    "simulate_market",
    "to_likelihood",
    "to_log_likelihood",
]
