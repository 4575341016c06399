"""Per-distance optimisation of the signal intensity and distance sweeps."""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .channel import DEFAULT_CONVENTION
from .core_model import SystemParams
from .decoy import InvalidIntensityError
from .key_rate import KeyRateResult, SchemeSpec, evaluate_scheme


@dataclass(frozen=True)
class SearchSettings:
    lo: float = 0.01
    hi: float = 2.0
    coarse_step: float = 0.01
    tol: float = 1e-4

    def __post_init__(self) -> None:
        if not 0.0 < self.lo < self.hi:
            raise ValueError(f"search needs 0 < lo < hi, got lo={self.lo!r}, hi={self.hi!r}")
        if not 0.0 < self.coarse_step <= self.hi - self.lo:
            raise ValueError(f"coarse_step must lie in (0, hi - lo], got {self.coarse_step!r}")
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol!r}")

    def grid(self) -> np.ndarray:
        n = int(math.floor((self.hi - self.lo) / self.coarse_step + 1e-9)) + 1
        return self.lo + self.coarse_step * np.arange(n)

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


class Optimum(NamedTuple):
    mu_prime: float
    rate: float
    positive: bool
    result: Optional[KeyRateResult]


def _objective(spec: SchemeSpec, params: SystemParams, L: float, convention: str):
    def rate(mu_prime: float) -> tuple[float, Optional[KeyRateResult]]:
        try:
            res = evaluate_scheme(spec, params, L, float(mu_prime), convention)
        except InvalidIntensityError:
            return -math.inf, None
        return res.R_final, res

    return rate


def optimize_signal_intensity(
    spec: SchemeSpec,
    params: SystemParams,
    L: float,
    search: SearchSettings = SearchSettings(),
    convention: str = DEFAULT_CONVENTION,
) -> Optimum:
    """Signal intensity maximising the final rate at distance ``L``.

    A coarse scan picks the best grid cell (ties go to the smaller intensity),
    then a bounded Brent search refines inside the neighbouring cells.  The
    refined point is kept only if it beats the grid point.  When no grid point
    gives a positive rate the result is ``(lo, 0, positive=False)``, with ``lo``
    raised above ``mu`` for fixed-decoy schemes.
    """
    rate = _objective(spec, params, L, convention)
    grid = search.grid()
    if spec.mu_policy == "fixed":
        grid = grid[grid > spec.mu_value * (1.0 + 1e-9)]
    if grid.size == 0:
        raise InvalidIntensityError(f"no signal intensity in the search range exceeds mu={spec.mu_value!r}")
    values = [rate(m) for m in grid]
    scores = np.array([v for v, _ in values])
    i = int(np.argmax(scores))
    best_mu, (best_rate, best_res) = float(grid[i]), values[i]

    if not best_rate > 0:
        return Optimum(float(grid[0]), 0.0, False, None)

    lo = float(grid[i - 1]) if i > 0 else float(grid[0])
    if i == 0 and spec.mu_policy == "fixed":
        # the feasible region starts just above mu, not at the first grid point
        lo = max(search.lo, spec.mu_value * (1.0 + 1e-6))
    hi = float(grid[min(i + 1, grid.size - 1)])
    if hi > lo:
        refined = minimize_scalar(
            lambda m: -rate(m)[0], bounds=(lo, hi), method="bounded", options={"xatol": search.tol / 4}
        )
        m = float(refined.x)
        r, res = rate(m)
        if r > best_rate:
            best_mu, best_rate, best_res = m, r, res
    return Optimum(best_mu, best_rate, True, best_res)


@dataclass(frozen=True)
class SweepRow:
    L_km: float
    scheme: str
    mu_prime_opt: float
    mu: float
    R_t: float
    R_both: Optional[float]
    R_final: float
    nontriggered_active: bool
    positive: bool = True


def _row(spec: SchemeSpec, params: SystemParams, L: float, opt: Optimum, convention: str) -> SweepRow:
    res = opt.result
    if res is None or res.intensities.mu_prime != opt.mu_prime:
        res = evaluate_scheme(spec, params, L, opt.mu_prime, convention)
    return SweepRow(
        L_km=float(L),
        scheme=spec.name,
        mu_prime_opt=opt.mu_prime,
        mu=res.intensities.mu,
        R_t=res.R_t,
        R_both=res.R_both,
        R_final=res.R_final,
        nontriggered_active=res.nontriggered_active,
        positive=opt.positive,
    )


def sweep_distance(
    specs: Sequence[SchemeSpec],
    params: SystemParams,
    L_grid: Iterable[float],
    search: SearchSettings = SearchSettings(),
    convention: str = DEFAULT_CONVENTION,
) -> list[SweepRow]:
    """Optimised rows for every scheme and distance, ordered by (scheme, L)."""
    L_values = [float(L) for L in L_grid]
    if any(L < 0 for L in L_values):
        raise ValueError("distances must be >= 0")
    if any(b < a for a, b in zip(L_values, L_values[1:])):
        raise ValueError("distance grid must be ascending")
    rows = []
    for spec in specs:
        for L in L_values:
            opt = optimize_signal_intensity(spec, params, L, search, convention)
            rows.append(_row(spec, params, L, opt, convention))
    return rows


def distance_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive grid ``start, start + step, ..., stop``."""
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + k * step for k in range(max(n, 0))]


def find_inflexion(rows: Sequence[SweepRow], scheme: Optional[str] = None) -> Optional[float]:
    """Distance where nontriggered events stop adding to the rate.

    Takes the first active -> inactive transition and interpolates the zero of
    ``R_both - R_t`` linearly between the two grid points.  Returns ``None``
    when the sweep contains no such transition.
    """
    if scheme is not None:
        rows = [r for r in rows if r.scheme == scheme]
    if len({r.scheme for r in rows}) > 1:
        raise ValueError("rows from several schemes; pass scheme=")
    rows = sorted(rows, key=lambda r: r.L_km)
    for prev, cur in zip(rows, rows[1:]):
        if prev.nontriggered_active and not cur.nontriggered_active:
            if cur.R_both is None:
                return cur.L_km
            d0 = prev.R_both - prev.R_t
            d1 = cur.R_both - cur.R_t
            if d0 == d1:
                return cur.L_km
            return prev.L_km + (cur.L_km - prev.L_km) * d0 / (d0 - d1)
    return None


def max_distance(
    spec: SchemeSpec,
    params: SystemParams,
    precision: float = 0.5,
    search: SearchSettings = SearchSettings(),
    convention: str = DEFAULT_CONVENTION,
    L_limit: float = 5000.0,
) -> float:
    """Largest distance with a positive optimised rate, to within ``precision`` km."""
    if not precision > 0:
        raise ValueError(f"precision must be > 0, got {precision!r}")

    def positive(L: float) -> bool:
        return optimize_signal_intensity(spec, params, L, search, convention).positive

    if not positive(0.0):
        raise ValueError(f"no positive rate anywhere for scheme {spec.name!r}")
    lo, hi = 0.0, 100.0
    while positive(hi):
        lo, hi = hi, 2.0 * hi
        if hi > L_limit:
            raise ValueError(f"rate still positive beyond {L_limit} km")
    while hi - lo > precision:
        mid = 0.5 * (lo + hi)
        if positive(mid):
            lo = mid
        else:
            hi = mid
    return lo
