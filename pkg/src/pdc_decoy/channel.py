"""Eve-free forecast of the triggered/nontriggered gains and QBERs.

All sums over photon number are evaluated in closed form; the truncated
series in :mod:`pdc_decoy.series` is kept as an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core_model import (
    IntensitySet,
    SystemParams,
    geometric_gain_sum,
    loss_weighted_sum,
    transmittance,
)

E0 = 0.5

CONVENTIONS = ("verbatim", "consistent")
DEFAULT_CONVENTION = "consistent"


def _check_convention(convention: str) -> None:
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown nontriggered yield convention {convention!r}; use one of {CONVENTIONS}")


def yield_n(eta: float, d_B: float, n: int) -> float:
    """Yield ``d_B + 1 - (1 - eta)**n`` of an ``n``-photon state, capped at 1."""
    if n < 0:
        raise ValueError(f"photon number must be >= 0, got {n!r}")
    if n == 0:
        return d_B
    return min(1.0, d_B - math.expm1(n * math.log1p(-eta)) if eta < 1.0 else d_B + 1.0)


def error_n(eta: float, d_B: float, e_d: float, n: int) -> float:
    """QBER of an ``n``-photon state; dark counts are random (``e_0 = 1/2``)."""
    if n < 0:
        raise ValueError(f"photon number must be >= 0, got {n!r}")
    if n == 0:
        if d_B <= 0:
            raise ValueError("vacuum error rate undefined without dark counts (d_B = 0)")
        return E0
    arrival = -math.expm1(n * math.log1p(-eta)) if eta < 1.0 else 1.0
    return (E0 * d_B + e_d * arrival) / (d_B + arrival)


def gain_triggered(params: SystemParams, eta: float, x: float) -> float:
    """Triggered gain ``Q_x^(t)``."""
    if x < 0:
        raise ValueError(f"intensity must be >= 0, got {x!r}")
    s = 1.0 - params.eta_A
    dark = params.d_A * params.d_B / (1.0 + x)
    # sum q_n P_n and sum (1-(1-eta)^n) q_n P_n with q_n = 1 - s^n
    heralded = geometric_gain_sum(x, 1.0) - geometric_gain_sum(x, s)
    arrived = loss_weighted_sum(x, 1.0, eta) - loss_weighted_sum(x, s, eta)
    return dark + params.d_B * heralded + arrived


def gain_nontriggered(
    params: SystemParams, eta: float, x: float, convention: str = DEFAULT_CONVENTION
) -> float:
    """Nontriggered gain ``Q_x^(ut)``.

    ``convention="verbatim"`` uses the bracket ``d_B + (1 - eta)**n`` exactly as
    printed; ``"consistent"`` uses the yield ``d_B + 1 - (1 - eta)**n``.
    """
    if x < 0:
        raise ValueError(f"intensity must be >= 0, got {x!r}")
    _check_convention(convention)
    s = 1.0 - params.eta_A
    dark = (1.0 - params.d_A) * params.d_B / (1.0 + x)
    if convention == "verbatim":
        return dark + params.d_B * geometric_gain_sum(x, s) + geometric_gain_sum(x, s * (1.0 - eta))
    return dark + params.d_B * geometric_gain_sum(x, s) + loss_weighted_sum(x, s, eta)


def _error_weighted_triggered(params: SystemParams, eta: float, x: float) -> float:
    # sum_n e_n Q_n^(t)(x), using e_n Y_n = e0 d_B + e_d (1 - (1-eta)^n)
    s = 1.0 - params.eta_A
    heralded = geometric_gain_sum(x, 1.0) - geometric_gain_sum(x, s)
    arrived = loss_weighted_sum(x, 1.0, eta) - loss_weighted_sum(x, s, eta)
    return E0 * params.d_B * (params.d_A / (1.0 + x) + heralded) + params.e_d * arrived


def _error_weighted_nontriggered(params: SystemParams, eta: float, x: float) -> float:
    s = 1.0 - params.eta_A
    return (
        E0 * params.d_B * ((1.0 - params.d_A) / (1.0 + x) + geometric_gain_sum(x, s))
        + params.e_d * loss_weighted_sum(x, s, eta)
    )


def qber_triggered(params: SystemParams, eta: float, x: float) -> float:
    """Triggered QBER ``E_x^(t)``."""
    if x < 0:
        raise ValueError(f"intensity must be >= 0, got {x!r}")
    gain = gain_triggered(params, eta, x)
    # no clicks at all (toy parameters without dark counts): report a random error
    return _error_weighted_triggered(params, eta, x) / gain if gain > 0 else E0


def qber_nontriggered(params: SystemParams, eta: float, x: float) -> float:
    """Nontriggered QBER ``E_x^(ut)``, weighted by the photon-number yields."""
    if x < 0:
        raise ValueError(f"intensity must be >= 0, got {x!r}")
    gain = gain_nontriggered(params, eta, x, convention="consistent")
    return _error_weighted_nontriggered(params, eta, x) / gain if gain > 0 else E0


@dataclass(frozen=True)
class IntensityObservables:
    """Gains and QBERs observed at one source intensity."""

    x: float
    Q_t: float
    Q_ut: float
    E_t: float
    E_ut: float


@dataclass(frozen=True)
class ObservableSet:
    """Forecast observables for the vacuum, decoy and signal settings."""

    vacuum: IntensityObservables
    decoy: IntensityObservables
    signal: IntensityObservables
    eta: float
    convention: str = DEFAULT_CONVENTION

    def rows(self) -> tuple[IntensityObservables, IntensityObservables, IntensityObservables]:
        return self.vacuum, self.decoy, self.signal

    def to_dict(self) -> dict:
        out: dict = {"eta": self.eta, "convention": self.convention}
        for label, row in zip(("vacuum", "decoy", "signal"), self.rows()):
            out[label] = {"x": row.x, "Q_t": row.Q_t, "Q_ut": row.Q_ut, "E_t": row.E_t, "E_ut": row.E_ut}
        return out


def observe(params: SystemParams, eta: float, x: float, convention: str = DEFAULT_CONVENTION) -> IntensityObservables:
    return IntensityObservables(
        x=x,
        Q_t=gain_triggered(params, eta, x),
        Q_ut=gain_nontriggered(params, eta, x, convention),
        E_t=qber_triggered(params, eta, x),
        E_ut=qber_nontriggered(params, eta, x),
    )


def forecast_observables(
    params: SystemParams,
    L: float,
    intensities: IntensitySet,
    convention: str = DEFAULT_CONVENTION,
) -> ObservableSet:
    """All twelve observables at distance ``L`` km."""
    _check_convention(convention)
    eta = transmittance(params.alpha, L, params.eta_B)
    return ObservableSet(
        vacuum=observe(params, eta, 0.0, convention),
        decoy=observe(params, eta, intensities.mu, convention),
        signal=observe(params, eta, intensities.mu_prime, convention),
        eta=eta,
        convention=convention,
    )
