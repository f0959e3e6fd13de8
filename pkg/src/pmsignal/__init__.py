"""Signal-credibility diagnostics, event studies, cross-platform checks and a
reflexive coordination simulator for prediction-market trade logs."""

from .crossplatform import (
    PlatformQuote,
    WeightSchedule,
    common_knowledge_signal,
    consistency_scan,
    divergence_spread,
    internal_consistency,
)
from .diagnostics import (
    DiagnosticsConfig,
    DiagnosticsReport,
    SignalClass,
    SignalLabel,
    classify_signal,
    concentration_hhi,
    diagnose,
    kyle_lambda,
    signal_credibility,
    two_sidedness,
    variance_ratio,
)
from .events import EventReport, EventSpec, load_maturation_grid, maturation_profile, run_event_study
from .sim import (
    AudienceSpec,
    Regime,
    SimConfig,
    SimTrajectory,
    coordination_check,
    estimate_outcome_sensitivity,
    regime_classify,
    simulate,
)
from .trades import ReturnSeries, Side, Trade, TradeWindow, bin_prices, parse_trade_log, slice_window

__version__ = "0.1.0"
