"""Truncated photon-number series for the forecast observables.

These evaluate the defining sums term by term (``N = 200`` terms) and share
no algebra with the closed forms in :mod:`pdc_decoy.channel`.  For ``x <= 2``
the neglected tail is below ``(2/3)**200 < 1e-35`` of the total.
"""
from __future__ import annotations

import math

from .channel import E0, error_n, yield_n
from .core_model import SystemParams, photon_prob, trigger_prob

N_TERMS = 200


def geometric_gain_series(x: float, r: float, n_terms: int = N_TERMS) -> float:
    return math.fsum(r**n * photon_prob(x, n) for n in range(1, n_terms + 1))


def total_gain_series(params: SystemParams, eta: float, x: float, n_terms: int = N_TERMS) -> float:
    """``sum_n Y_n P_n(x)``; the triggered and nontriggered gains must add up to this."""
    return math.fsum(yield_n(eta, params.d_B, n) * photon_prob(x, n) for n in range(n_terms + 1))


def photon_gains_triggered(params: SystemParams, eta: float, x: float, n_terms: int = N_TERMS) -> list[float]:
    """Per-photon-number triggered gains ``Q_n^(t)(x)`` for ``n = 0..n_terms``."""
    out = [yield_n(eta, params.d_B, 0) * params.d_A / (1.0 + x)]
    for n in range(1, n_terms + 1):
        out.append(yield_n(eta, params.d_B, n) * trigger_prob(params.eta_A, n) * photon_prob(x, n))
    return out


def photon_gains_nontriggered(
    params: SystemParams,
    eta: float,
    x: float,
    convention: str = "consistent",
    n_terms: int = N_TERMS,
) -> list[float]:
    """Per-photon-number nontriggered gains ``Q_n^(ut)(x)``.

    ``convention="verbatim"`` replaces the yield by the printed bracket
    ``d_B + (1 - eta)**n`` for ``n >= 1``.
    """
    out = [yield_n(eta, params.d_B, 0) * (1.0 - params.d_A) / (1.0 + x)]
    for n in range(1, n_terms + 1):
        if convention == "verbatim":
            weight = params.d_B + (1.0 - eta) ** n
        else:
            weight = yield_n(eta, params.d_B, n)
        out.append(weight * (1.0 - params.eta_A) ** n * photon_prob(x, n))
    return out


def _qber(params: SystemParams, eta: float, gains: list[float]) -> float:
    total = math.fsum(gains)
    if total <= 0:
        return E0
    errors = [E0 * gains[0]] + [
        error_n(eta, params.d_B, params.e_d, n) * q for n, q in enumerate(gains) if n >= 1
    ]
    return math.fsum(errors) / total


def observables_series(
    params: SystemParams,
    eta: float,
    x: float,
    convention: str = "consistent",
    n_terms: int = N_TERMS,
) -> dict[str, float]:
    """``Q_t, Q_ut, E_t, E_ut`` at intensity ``x`` by direct summation."""
    g_t = photon_gains_triggered(params, eta, x, n_terms)
    g_ut = photon_gains_nontriggered(params, eta, x, convention, n_terms)
    g_ut_yield = g_ut if convention == "consistent" else photon_gains_nontriggered(params, eta, x, "consistent", n_terms)
    return {
        "Q_t": math.fsum(g_t),
        "Q_ut": math.fsum(g_ut),
        "E_t": _qber(params, eta, g_t),
        "E_ut": _qber(params, eta, g_ut_yield),
    }
