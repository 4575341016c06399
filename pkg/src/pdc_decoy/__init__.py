"""Decoy-state key rates for heralded parametric down-conversion sources."""
from .core_model import GYS, IntensitySet, SystemParams
from .channel import ObservableSet, forecast_observables
from .decoy import DecoyEstimates, estimate, mu_from_coupling
from .key_rate import KeyRateResult, SchemeSpec, evaluate_scheme, rate_ideal
from .optimizer import SearchSettings, find_inflexion, max_distance, optimize_signal_intensity, sweep_distance

__all__ = [
    "GYS",
    "IntensitySet",
    "SystemParams",
    "ObservableSet",
    "forecast_observables",
    "DecoyEstimates",
    "estimate",
    "mu_from_coupling",
    "KeyRateResult",
    "SchemeSpec",
    "evaluate_scheme",
    "rate_ideal",
    "SearchSettings",
    "find_inflexion",
    "max_distance",
    "optimize_signal_intensity",
    "sweep_distance",
]
