"""Source statistics, detector/channel constants and small numeric helpers.

The heralded source emits ``n`` pairs with the thermal distribution
``P_n(x) = x**n / (1 + x)**(n + 1)`` where ``x`` is the mean photon number of
one mode.  Alice detects the trigger mode with efficiency ``eta_A``; the
signal mode travels to Bob through ``alpha * L`` dB of fiber.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from scipy.special import entr

_LN2 = math.log(2.0)


def _check_probability(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class SystemParams:
    """Detector and channel constants.

    Attributes
    ----------
    d_A, eta_A : float
        Dark count probability and efficiency of Alice's trigger detector.
    d_B, eta_B : float
        Dark count probability and Bob-side transmittance (detector included).
    alpha : float
        Fiber attenuation in dB/km.
    e_d : float
        Probability that a photon reaching Bob hits the wrong detector.
    f_ec : float
        Error-correction inefficiency (>= 1).
    """

    d_A: float = 1e-6
    eta_A: float = 0.5
    d_B: float = 1.7e-6
    eta_B: float = 0.045
    alpha: float = 0.21
    e_d: float = 0.033
    f_ec: float = 1.22

    def __post_init__(self) -> None:
        for name in ("d_A", "eta_A", "d_B", "eta_B", "e_d"):
            _check_probability(name, getattr(self, name))
        if not 0.0 < self.eta_A < 1.0:
            raise ValueError(f"eta_A must lie strictly inside (0, 1), got {self.eta_A!r}")
        if not self.alpha >= 0.0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha!r}")
        if not self.f_ec >= 1.0:
            raise ValueError(f"f_ec must be >= 1, got {self.f_ec!r}")

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


#: Gobby-Yuan-Shields constants used for every benchmark.
GYS = SystemParams()


@dataclass(frozen=True)
class IntensitySet:
    """Decoy intensity ``mu`` and signal intensity ``mu_prime`` (vacuum is implicit)."""

    mu: float
    mu_prime: float

    def __post_init__(self) -> None:
        if not 0.0 < self.mu < self.mu_prime:
            raise ValueError(
                f"intensities must satisfy 0 < mu < mu_prime, got mu={self.mu!r}, "
                f"mu_prime={self.mu_prime!r}"
            )


def photon_prob(x: float, n: int) -> float:
    """Thermal pair-number probability ``x**n / (1 + x)**(n + 1)``."""
    if x < 0:
        raise ValueError(f"mean photon number must be >= 0, got {x!r}")
    if n < 0 or int(n) != n:
        raise ValueError(f"photon number must be a non-negative integer, got {n!r}")
    if x == 0:
        return 1.0 if n == 0 else 0.0
    return (x / (1.0 + x)) ** n / (1.0 + x)


def trigger_prob(eta_A: float, n: int) -> float:
    """Probability that Alice's detector clicks on an ``n``-photon trigger mode.

    Only defined for ``n >= 1``; the vacuum trigger probability is the dark
    count ``d_A`` and is handled by the callers.
    """
    if n < 1 or int(n) != n:
        raise ValueError(f"trigger_prob needs n >= 1 (use d_A for vacuum), got {n!r}")
    _check_probability("eta_A", eta_A)
    return -math.expm1(n * math.log1p(-eta_A)) if eta_A < 1.0 else 1.0


def binary_entropy(p: float) -> float:
    """Binary Shannon entropy in bits, with ``H2(0) = H2(1) = 0``."""
    _check_probability("p", p)
    return float((entr(p) + entr(1.0 - p)) / _LN2)


def geometric_gain_sum(x: float, r: float) -> float:
    """Closed form of ``sum_{n>=1} r**n * P_n(x)``.

    Equals ``r*x / ((1 + x) * (1 + x*(1 - r)))``.
    """
    if x < 0:
        raise ValueError(f"mean photon number must be >= 0, got {x!r}")
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"damping factor must lie in [0, 1], got {r!r}")
    return r * x / ((1.0 + x) * (1.0 + x * (1.0 - r)))


def loss_weighted_sum(x: float, r: float, eta: float) -> float:
    """Closed form of ``sum_{n>=1} [1 - (1 - eta)**n] * r**n * P_n(x)``.

    Written without the difference of two geometric sums so that it stays
    accurate when ``eta`` is tiny.
    """
    return r * eta * x / ((1.0 + x * (1.0 - r)) * (1.0 + x * ((1.0 - r) + r * eta)))


def transmittance(alpha: float, L: float, eta_B: float) -> float:
    """End-to-end transmittance ``eta_B * 10**(-alpha * L / 10)``."""
    if L < 0:
        raise ValueError(f"distance must be >= 0, got {L!r}")
    return eta_B * 10.0 ** (-alpha * L / 10.0)
