"""Secure key rates for the compared schemes.

Rates are computed per signal pulse and include the BB84 sifting factor 1/2.
Negative values are kept as computed so the optimizer sees a smooth
objective; :meth:`KeyRateResult.reported` clamps them for output.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .channel import DEFAULT_CONVENTION, ObservableSet, error_n, forecast_observables, yield_n
from .core_model import IntensitySet, SystemParams, binary_entropy
from .decoy import (
    DecoyEstimates,
    InvalidIntensityError,
    estimate,
    estimate_triggered_only,
    mu_from_coupling,
    single_photon_gains,
)

SCHEME_KINDS = ("ideal", "new_triggered", "new_both", "previous_fixed_mu")
VACUUM_TERMS = ("signal", "observable")
PREVIOUS_DEFAULT_MU = 0.1


@dataclass(frozen=True)
class SchemeSpec:
    """Which rate formula to use and how the decoy intensity is chosen.

    ``mu_policy`` is ``"coupled"`` (``mu`` from the coupling rule with
    ``a_policy``) or ``"fixed"`` (``mu = mu_value``).  ``a_policy=None`` means
    "inherit": the library falls back to ``strict`` and a run configuration may
    substitute its own policy.
    """

    kind: str
    mu_policy: str = "coupled"
    a_policy: Optional[str] = None
    mu_value: Optional[float] = None
    label: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}; use one of {SCHEME_KINDS}")
        if self.kind == "previous_fixed_mu" and self.mu_policy == "coupled" and self.mu_value is None:
            object.__setattr__(self, "mu_policy", "fixed")
        if self.mu_policy == "fixed" and self.mu_value is None:
            object.__setattr__(self, "mu_value", PREVIOUS_DEFAULT_MU)
        if self.mu_policy not in ("coupled", "fixed"):
            raise ValueError(f"mu_policy must be 'coupled' or 'fixed', got {self.mu_policy!r}")
        if self.a_policy not in (None, "strict", "limit"):
            raise ValueError(f"a_policy must be 'strict' or 'limit', got {self.a_policy!r}")
        if self.mu_policy == "fixed" and not self.mu_value > 0:
            raise ValueError(f"fixed mu must be > 0, got {self.mu_value!r}")

    @classmethod
    def coupled(cls, kind: str, a_policy: Optional[str] = None, label: Optional[str] = None) -> "SchemeSpec":
        return cls(kind, "coupled", a_policy, None, label)

    @classmethod
    def fixed(cls, kind: str, mu: float, label: Optional[str] = None) -> "SchemeSpec":
        return cls(kind, "fixed", None, mu, label)

    @property
    def name(self) -> str:
        return self.label or self.kind

    @property
    def effective_a_policy(self) -> str:
        return self.a_policy or "strict"

    def with_a_policy(self, a_policy: str) -> "SchemeSpec":
        return SchemeSpec(self.kind, self.mu_policy, a_policy, self.mu_value, self.label)

    def resolve_mu(self, mu_prime: float, eta_A: float) -> float:
        if self.mu_policy == "fixed":
            return float(self.mu_value)
        return mu_from_coupling(mu_prime, eta_A, self.effective_a_policy)

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.mu_policy == "fixed":
            out["mu_policy"] = {"fixed": self.mu_value}
        elif self.a_policy is not None:
            out["mu_policy"] = {"coupled": self.a_policy}
        if self.label is not None:
            out["label"] = self.label
        return out


@dataclass(frozen=True)
class KeyRateResult:
    """Rates at one (distance, signal intensity) point.

    ``R_both`` is ``None`` for schemes that cannot use nontriggered events;
    ``R_final`` is then ``R_t``, otherwise ``max(R_t, R_both)``.
    """

    R_t: float
    R_both: Optional[float]
    R_final: float
    scheme: str
    intensities: IntensitySet
    estimates: Optional[DecoyEstimates] = None
    observables: Optional[ObservableSet] = None

    @property
    def nontriggered_active(self) -> bool:
        return self.R_both is not None and self.R_both > self.R_t

    def reported(self) -> dict[str, Optional[float]]:
        return {
            "R_t": max(0.0, self.R_t),
            "R_both": None if self.R_both is None else max(0.0, self.R_both),
            "R_final": max(0.0, self.R_final),
        }


def _vacuum_gains(obs: ObservableSet, Y0: float, params: SystemParams, mu_prime: float, vacuum_term: str) -> tuple[float, float]:
    if vacuum_term == "signal":
        return Y0 * params.d_A / (1.0 + mu_prime), Y0 * (1.0 - params.d_A) / (1.0 + mu_prime)
    if vacuum_term == "observable":
        return obs.vacuum.Q_t, obs.vacuum.Q_ut
    raise ValueError(f"vacuum_term must be one of {VACUUM_TERMS}, got {vacuum_term!r}")


def _rates(
    obs: ObservableSet,
    Y0: float,
    Q1_t: float,
    Q1_ut: float,
    e1: float,
    params: SystemParams,
    mu_prime: float,
    vacuum_term: str,
) -> tuple[float, float]:
    sig = obs.signal
    q0_t, q0_ut = _vacuum_gains(obs, Y0, params, mu_prime, vacuum_term)
    ec_t = sig.Q_t * params.f_ec * binary_entropy(sig.E_t)
    ec_ut = sig.Q_ut * params.f_ec * binary_entropy(sig.E_ut)
    privacy = 1.0 - binary_entropy(e1)
    r_t = 0.5 * (-ec_t + q0_t + Q1_t * privacy)
    r_both = 0.5 * (-ec_t - ec_ut + q0_t + q0_ut + (Q1_t + Q1_ut) * privacy)
    return r_t, r_both


def rate_triggered(
    obs: ObservableSet, est: DecoyEstimates, params: SystemParams, mu_prime: float, vacuum_term: str = "signal"
) -> float:
    """Key rate distilled from triggered signal pulses only."""
    return _rates(obs, est.Y0, est.Q1_t, est.Q1_ut, est.e1_upper, params, mu_prime, vacuum_term)[0]


def rate_both(
    obs: ObservableSet, est: DecoyEstimates, params: SystemParams, mu_prime: float, vacuum_term: str = "signal"
) -> float:
    """Key rate distilled from triggered and nontriggered signal pulses."""
    return _rates(obs, est.Y0, est.Q1_t, est.Q1_ut, est.e1_upper, params, mu_prime, vacuum_term)[1]


def _ideal_rates(
    params: SystemParams, obs: ObservableSet, mu_prime: float, vacuum_term: str
) -> tuple[float, float]:
    y1 = yield_n(obs.eta, params.d_B, 1)
    e1 = error_n(obs.eta, params.d_B, params.e_d, 1)
    q1_t, q1_ut = single_photon_gains(y1, params.eta_A, mu_prime)
    return _rates(obs, params.d_B, q1_t, q1_ut, e1, params, mu_prime, vacuum_term)


def rate_ideal(
    params: SystemParams,
    L: float,
    mu_prime: float,
    convention: str = DEFAULT_CONVENTION,
    vacuum_term: str = "signal",
) -> float:
    """Rate with the single-photon yield and error known exactly; best of both variants."""
    # the decoy setting does not enter the ideal rate
    obs = forecast_observables(params, L, IntensitySet(mu_prime / 2.0, mu_prime), convention)
    return max(_ideal_rates(params, obs, mu_prime, vacuum_term))


def evaluate_scheme(
    spec: SchemeSpec,
    params: SystemParams,
    L: float,
    mu_prime: float,
    convention: str = DEFAULT_CONVENTION,
    e1_at: str = "decoy",
    vacuum_term: str = "signal",
) -> KeyRateResult:
    """Forecast, estimate and compute the rates of ``spec`` at one point."""
    mu = spec.resolve_mu(mu_prime, params.eta_A)
    if not mu < mu_prime:
        raise InvalidIntensityError(f"decoy mu={mu!r} must be below signal mu_prime={mu_prime!r}")
    intensities = IntensitySet(mu, mu_prime)
    obs = forecast_observables(params, L, intensities, convention)

    if spec.kind == "ideal":
        r_t, r_both = _ideal_rates(params, obs, mu_prime, vacuum_term)
        return KeyRateResult(r_t, r_both, max(r_t, r_both), spec.name, intensities, None, obs)

    if spec.kind == "previous_fixed_mu":
        est = estimate_triggered_only(obs, params, intensities)
        r_t = rate_triggered(obs, est, params, mu_prime, vacuum_term)
        return KeyRateResult(r_t, None, r_t, spec.name, intensities, est, obs)

    policy = "fixed" if spec.mu_policy == "fixed" else spec.effective_a_policy
    est = estimate(obs, params, intensities, policy, e1_at)
    r_t, r_both = _rates(obs, est.Y0, est.Q1_t, est.Q1_ut, est.e1_upper, params, mu_prime, vacuum_term)
    if spec.kind == "new_triggered":
        return KeyRateResult(r_t, None, r_t, spec.name, intensities, est, obs)
    return KeyRateResult(r_t, r_both, max(r_t, r_both), spec.name, intensities, est, obs)
