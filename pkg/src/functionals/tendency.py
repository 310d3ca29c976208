"""
Phase tendency of the Wright-Fisher model.

A phase i moves forward more often than backward while lambda_i(x) > mu_i(x).
The two rates balance at the threshold
    x0(i) = (N - i)(i + beta - k) / ((i - 1)(N - i + k)),   i = 2..N-1.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

import numpy as np
from numpy.typing import ArrayLike

from src.core.polynomials import FloatArray
from src.models.wright_fisher import WrightFisherParams

logger: logging.Logger = logging.getLogger(__name__)

ABSORBING_RATE_TOL: float = 1e-12


class Regime(str, Enum):
    MAX_FORWARD = "max-forward"
    MAX_BACKWARD = "max-backward"
    MIXED = "mixed"


@dataclass(frozen=True)
class TendencyReport:
    k: float
    # per phase 1..N; None for phases 1 and N
    thresholds: tuple[float | None, ...]
    regime: Regime
    k_breakpoints: tuple[float, ...]
    always_forward: tuple[int, ...] = field(default=())

    def threshold(self, phase: int) -> float | None:
        return self.thresholds[phase - 1]

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "regime": self.regime.value,
            "thresholds": {
                str(phase): value for phase, value in enumerate(self.thresholds, start=1)
            },
            "always_forward": list(self.always_forward),
            "k_breakpoints": list(self.k_breakpoints),
        }


def _regime(p: WrightFisherParams) -> Regime:
    if p.n_phases < 2:
        return Regime.MAX_FORWARD
    span: float = (p.beta + 1.0) / (p.n_phases - 1)
    if p.k < span:
        return Regime.MAX_FORWARD
    if p.k > span * (p.n_phases - 2):
        return Regime.MAX_BACKWARD
    return Regime.MIXED


def tendency_analysis(p: WrightFisherParams) -> TendencyReport:
    n: int = p.n_phases
    thresholds: list[float | None] = [None] * n
    always_forward: list[int] = []
    for i in range(2, n):
        x0: float = (n - i) * (i + p.beta - p.k) / ((i - 1) * (n - i + p.k))
        thresholds[i - 1] = x0
        if x0 > 1.0:
            always_forward.append(i)

    breakpoints: tuple[float, ...] = (
        tuple((p.beta + 1.0) * m / (n - 1) for m in range(1, n - 1)) if n > 2 else ()
    )
    report: TendencyReport = TendencyReport(
        k=p.k,
        thresholds=tuple(thresholds),
        regime=_regime(p),
        k_breakpoints=breakpoints,
        always_forward=tuple(always_forward),
    )
    logger.debug("Tendency %s", report.to_dict())
    return report


def threshold_table(p: WrightFisherParams, ks: Sequence[float]) -> list[TendencyReport]:
    """One report per k, other parameters fixed."""
    return [
        tendency_analysis(WrightFisherParams(p.alpha, p.beta, k, p.n_phases)) for k in ks
    ]


@dataclass(frozen=True, eq=False)
class WaitingTimeProfile:
    xs: FloatArray
    rates: FloatArray
    mean_holding: FloatArray
    absorbing_phases: tuple[int, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "x": self.xs.tolist(),
            "rates": self.rates.tolist(),
            "mean_holding": [
                [None if not np.isfinite(v) else float(v) for v in row] for row in self.mean_holding
            ],
            "absorbing_phases": list(self.absorbing_phases),
        }


def waiting_time_profile(p: WrightFisherParams, xs: ArrayLike) -> WaitingTimeProfile:
    """
    Total jump rate -Q_ii(x) and mean holding time per phase.

    A phase whose rate stays below ABSORBING_RATE_TOL at every x is reported
    as absorbing for the phase component.
    """
    grid: FloatArray = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    rates: FloatArray = p.forward_rates(grid) + p.backward_rates(grid)
    with np.errstate(divide="ignore"):
        holding: FloatArray = np.where(rates > 0.0, 1.0 / np.where(rates > 0.0, rates, 1.0), np.inf)
    stuck: FloatArray = np.all(rates < ABSORBING_RATE_TOL, axis=0)
    return WaitingTimeProfile(
        xs=grid,
        rates=rates,
        mean_holding=holding,
        absorbing_phases=tuple(int(i) + 1 for i in np.flatnonzero(stuck)),
    )


def jump_direction_probabilities(p: WrightFisherParams, x: ArrayLike) -> tuple[FloatArray, FloatArray]:
    """
    (forward, backward) probabilities lambda/(lambda+mu) and mu/(lambda+mu) at a jump.

    NaN where the phase cannot jump at all.
    """
    lam: FloatArray = p.forward_rates(x)
    mu: FloatArray = p.backward_rates(x)
    total: FloatArray = lam + mu
    safe: FloatArray = np.where(total > 0.0, total, 1.0)
    forward: FloatArray = np.where(total > 0.0, lam / safe, np.nan)
    backward: FloatArray = np.where(total > 0.0, mu / safe, np.nan)
    return forward, backward
