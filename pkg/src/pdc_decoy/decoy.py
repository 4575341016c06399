"""Single-photon yield and error bounds from three-intensity heralded statistics.

The decoy setting ``mu`` is tied to the signal setting ``mu_prime`` through a
coefficient ``a``::

    mu = a * mu_prime / (1 + mu_prime - a * mu_prime)

Two ways of picking ``a`` are offered:

``strict``
    the smallest ``a_n`` over ``n >= 3`` (attained at ``n = 3``), which makes
    every multi-photon coefficient of the combined gain equation non-positive;
``limit``
    ``a = 1 - eta_A``, the ``n -> inf`` limit of ``a_n``.

With the GYS constants ``limit`` gives ``mu = 0.113`` at ``mu_prime = 0.255``.
Note that the single-photon coefficient of the combined equation is negative
for both choices; under ``strict`` the resulting ``Y1`` value therefore sits
slightly *above* the true yield, while under ``limit`` it is a lower bound.
See :func:`coefficient_sign_check`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Optional

from .channel import IntensityObservables, ObservableSet
from .core_model import IntensitySet, SystemParams

POLICIES = ("strict", "limit")
STRICT_N_MAX = 200
_REL_TOL = 1e-12


class InvalidIntensityError(ValueError):
    """The intensity pair makes the bound degenerate."""


class VacuousBoundError(ValueError):
    """A bound cannot be formed because the single-photon yield estimate is zero."""


class CouplingWarning(UserWarning):
    """The decoy intensity exceeds the strict coupling bound."""


def _check_policy(policy: str) -> None:
    if policy not in POLICIES:
        raise ValueError(f"unknown coupling policy {policy!r}; use one of {POLICIES}")


def a_coefficient(eta_A: float, n: int) -> float:
    """``a_n = (((1-eta_A)**(n-2) - (1-eta_A)**n) / (1 - (1-eta_A)**n)) ** (1/(n-2))``."""
    if n < 3 or int(n) != n:
        raise ValueError(f"a_coefficient needs an integer n >= 3, got {n!r}")
    if not 0.0 < eta_A < 1.0:
        raise ValueError(f"eta_A must lie strictly inside (0, 1), got {eta_A!r}")
    s = 1.0 - eta_A
    # log form: a_n = s * ((1 - s^2) / (1 - s^n))^(1/(n-2))
    return s * math.exp((math.log1p(-s * s) - math.log1p(-(s**n))) / (n - 2))


def a_policy_value(eta_A: float, policy: str) -> float:
    _check_policy(policy)
    if policy == "limit":
        if not 0.0 < eta_A < 1.0:
            raise ValueError(f"eta_A must lie strictly inside (0, 1), got {eta_A!r}")
        return 1.0 - eta_A
    return _strict_a(eta_A)


@lru_cache(maxsize=64)
def _strict_a(eta_A: float) -> float:
    return min(a_coefficient(eta_A, n) for n in range(3, STRICT_N_MAX + 1))


def mu_from_coupling(mu_prime: float, eta_A: float, policy: str = "strict") -> float:
    """Decoy intensity tied to ``mu_prime`` by the coupling rule."""
    if mu_prime <= 0:
        raise ValueError(f"mu_prime must be > 0, got {mu_prime!r}")
    a = a_policy_value(eta_A, policy)
    return a * mu_prime / (1.0 + mu_prime - a * mu_prime)


def _coefficient_terms(mu: float, mu_prime: float, eta_A: float, n: int) -> tuple[float, float]:
    s = 1.0 - eta_A
    u = mu / (1.0 + mu)
    v = mu_prime / (1.0 + mu_prime)
    first = (1.0 - s**n) / (1.0 - s * s) * u**n * v * v
    second = s ** (n - 2) * v**n * u * u
    return first, second


def multiphoton_coefficient(mu: float, mu_prime: float, eta_A: float, n: int) -> float:
    """Coefficient of ``Y_n`` (``n >= 3``) in the combined triggered/nontriggered equation."""
    first, second = _coefficient_terms(mu, mu_prime, eta_A, n)
    return first - second


@dataclass(frozen=True)
class CoefficientReport:
    all_nonpositive: bool
    first_violation: Optional[int]
    n_max: int


def coefficient_sign_check(mu: float, mu_prime: float, eta_A: float, n_max: int = STRICT_N_MAX) -> CoefficientReport:
    """Check that every multi-photon coefficient for ``3 <= n <= n_max`` is <= 0.

    At the strict coupling value the ``n = 3`` coefficient is exactly zero, so a
    coefficient counts as positive only beyond a relative rounding margin of
    ``1e-12`` of its two terms.
    """
    if not 0.0 < mu < mu_prime:
        raise ValueError(f"need 0 < mu < mu_prime, got mu={mu!r}, mu_prime={mu_prime!r}")
    for n in range(3, n_max + 1):
        first, second = _coefficient_terms(mu, mu_prime, eta_A, n)
        if first - second > _REL_TOL * max(first, second):
            return CoefficientReport(False, n, n_max)
    return CoefficientReport(True, None, n_max)


def y0_estimate(obs: ObservableSet) -> float:
    """Vacuum yield from the two vacuum-setting channels, ``Q_t[0] + Q_ut[0]``."""
    return obs.vacuum.Q_t + obs.vacuum.Q_ut


def _y1_denominator(mu: float, mu_prime: float, eta_A: float) -> tuple[float, float, float]:
    s = 1.0 - eta_A
    q2 = 1.0 - s * s
    u = mu / (1.0 + mu)
    v = mu_prime / (1.0 + mu_prime)
    pos = eta_A / q2 * u * v * v
    neg = v * u * u / s
    return pos - neg, pos, neg


def y1_lower_bound(
    obs: ObservableSet,
    params: SystemParams,
    intensities: IntensitySet,
    y0: Optional[float] = None,
    warn: bool = True,
) -> float:
    """Single-photon yield estimate from ``Q_mu^(t)`` and ``Q_mu'^(ut)``, clamped to [0, 1].

    The algebraic form is kept as is: numerator and denominator are both
    negative for the usual intensity choices.
    """
    mu, mu_prime = intensities.mu, intensities.mu_prime
    eta_A, d_A = params.eta_A, params.d_A
    denominator, pos, neg = _y1_denominator(mu, mu_prime, eta_A)
    if abs(denominator) <= _REL_TOL * (pos + neg):
        raise InvalidIntensityError(
            f"degenerate intensity pair mu={mu!r}, mu_prime={mu_prime!r}: single-photon coefficient vanishes"
        )
    if warn and mu > mu_from_coupling(mu_prime, eta_A, "strict") * (1.0 + _REL_TOL):
        warnings.warn(
            f"mu={mu:.6g} exceeds the strict coupling bound for mu_prime={mu_prime:.6g}",
            CouplingWarning,
            stacklevel=2,
        )
    if y0 is None:
        y0 = y0_estimate(obs)
    s = 1.0 - eta_A
    q2 = 1.0 - s * s
    u = mu / (1.0 + mu)
    v = mu_prime / (1.0 + mu_prime)
    numerator = (
        (1.0 + mu) * v * v * obs.decoy.Q_t / q2
        - (1.0 + mu_prime) * u * u * obs.signal.Q_ut / (s * s)
        - y0 * (v * v * d_A / q2 - u * u * (1.0 - d_A) / (s * s))
    )
    return min(1.0, max(0.0, numerator / denominator))


def y1_lower_bound_triggered(obs: ObservableSet, params: SystemParams, intensities: IntensitySet, y0: float) -> float:
    """Two-intensity bound from triggered gains only, dropping all ``n >= 3`` terms.

    This is the estimator of the earlier heralded-source decoy scheme, where
    Bob records only heralded pulses.  It is a valid lower bound for any
    ``0 < mu < mu_prime``.
    """
    mu, mu_prime = intensities.mu, intensities.mu_prime
    u = mu / (1.0 + mu)
    v = mu_prime / (1.0 + mu_prime)
    numerator = (
        v * v * (1.0 + mu) * obs.decoy.Q_t
        - u * u * (1.0 + mu_prime) * obs.signal.Q_t
        - (v * v - u * u) * y0 * params.d_A
    )
    return min(1.0, max(0.0, numerator / (params.eta_A * u * v * (v - u))))


def single_photon_gains(Y1: float, eta_A: float, x: float) -> tuple[float, float]:
    """Triggered and nontriggered single-photon gains at intensity ``x``."""
    if x < 0:
        raise ValueError(f"intensity must be >= 0, got {x!r}")
    w = Y1 * x / (1.0 + x) ** 2
    return eta_A * w, (1.0 - eta_A) * w


def _row_at(obs: ObservableSet, x: Optional[float]) -> IntensityObservables:
    if x is None or x == obs.decoy.x:
        return obs.decoy
    if x == obs.signal.x:
        return obs.signal
    raise ValueError(f"no observables recorded at intensity {x!r}")


def e1_candidates(
    obs: ObservableSet, Y1_lower: float, Y0: float, params: SystemParams, x: Optional[float] = None
) -> tuple[float, float]:
    """Unclamped triggered (``e_a``) and nontriggered (``e_b``) error bounds at ``x``."""
    if Y1_lower <= 0:
        raise VacuousBoundError("single-photon yield estimate is zero; no error bound")
    row = _row_at(obs, x)
    x = row.x
    e_a = ((1.0 + x) ** 2 * row.E_t * row.Q_t - (1.0 + x) * Y0 * params.d_A / 2.0) / (Y1_lower * params.eta_A * x)
    e_b = ((1.0 + x) ** 2 * row.E_ut * row.Q_ut - (1.0 + x) * Y0 * (1.0 - params.d_A) / 2.0) / (
        Y1_lower * (1.0 - params.eta_A) * x
    )
    return e_a, e_b


def _clamp_error(e: float) -> float:
    return min(0.5, max(0.0, e))


def e1_upper_bound(
    obs: ObservableSet, Y1_lower: float, Y0: float, params: SystemParams, x: Optional[float] = None
) -> float:
    """``min(e_a, e_b)`` clamped to [0, 0.5]; ``x`` defaults to the decoy intensity."""
    return _clamp_error(min(e1_candidates(obs, Y1_lower, Y0, params, x)))


@dataclass(frozen=True)
class DecoyEstimates:
    Y0: float
    Y1_lower: float
    Q1_t: float
    Q1_ut: float
    e1_upper: float
    a_used: float
    policy: str
    e_a: Optional[float] = None
    e_b: Optional[float] = None
    method: str = "three_intensity"

    def to_dict(self) -> dict:
        return asdict(self)


def estimate(
    obs: ObservableSet,
    params: SystemParams,
    intensities: IntensitySet,
    policy: str = "strict",
    e1_at: str = "decoy",
) -> DecoyEstimates:
    """Run the full estimation: ``Y0``, ``Y1``, single-photon gains at ``mu'``, ``e1``.

    ``policy`` is ``strict``/``limit`` when ``mu`` came from the coupling rule and
    ``fixed`` otherwise; it is recorded, and ``strict`` also enables the
    coupling-bound warning.  A zero ``Y1`` estimate yields the vacuous
    ``e1 = 0.5``.
    """
    if policy != "fixed":
        _check_policy(policy)
    mu, mu_prime = intensities.mu, intensities.mu_prime
    y0 = y0_estimate(obs)
    y1 = y1_lower_bound(obs, params, intensities, y0=y0, warn=policy == "strict")
    q1_t, q1_ut = single_photon_gains(y1, params.eta_A, mu_prime)
    x = mu if e1_at == "decoy" else mu_prime
    if y1 > 0:
        e_a, e_b = e1_candidates(obs, y1, y0, params, x)
        e1 = _clamp_error(min(e_a, e_b))
    else:
        e_a = e_b = None
        e1 = 0.5
    if policy == "fixed":
        a_used = (mu / (1.0 + mu)) / (mu_prime / (1.0 + mu_prime))
    else:
        a_used = a_policy_value(params.eta_A, policy)
    return DecoyEstimates(y0, y1, q1_t, q1_ut, e1, a_used, policy, e_a, e_b)


def estimate_triggered_only(obs: ObservableSet, params: SystemParams, intensities: IntensitySet) -> DecoyEstimates:
    """Estimation of the earlier triggered-only scheme.

    Only heralded clicks are available, so ``Y0 = Q_t[0] / d_A``, ``Y1`` comes
    from :func:`y1_lower_bound_triggered` and ``e1`` from the triggered bound
    at the decoy intensity.
    """
    mu, mu_prime = intensities.mu, intensities.mu_prime
    y0 = obs.vacuum.Q_t / params.d_A if params.d_A > 0 else 0.0
    y1 = y1_lower_bound_triggered(obs, params, intensities, y0)
    q1_t, q1_ut = single_photon_gains(y1, params.eta_A, mu_prime)
    if y1 > 0:
        e_a, _ = e1_candidates(obs, y1, y0, params, mu)
        e1 = _clamp_error(e_a)
    else:
        e_a = None
        e1 = 0.5
    a_used = (mu / (1.0 + mu)) / (mu_prime / (1.0 + mu_prime))
    return DecoyEstimates(y0, y1, q1_t, q1_ut, e1, a_used, "fixed", e_a, None, method="two_intensity_triggered")
