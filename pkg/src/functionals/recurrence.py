"""
Recurrence classification by an explicit schedule of boundary margins.

For each margin eps the hitting matrix toward an interior target y is solved on
(a + eps, y) and on (y, b - eps), together with the exit-time matrix for
G = e e^T on the same domains. Both are read at one start point on each side.
The process is recurrent when the hitting probabilities tend to one as eps
shrinks, and positive recurrent when the exit times stay bounded.

The deficit 1 - R e decays like eps at a regular boundary but only like
1 / ln(1/eps) at a critical one (alpha = 0), so the limit is extrapolated in
that variable. The linear-in-eps extrapolation is reported next to it.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from src.core.errors import ParameterError
from src.core.polynomials import FloatArray
from src.functionals.bvp import BvpSolution, solve_exit_time, solve_hitting
from src.models.base import SwitchingDiffusionModel

logger: logging.Logger = logging.getLogger(__name__)

DEFAULT_SCHEDULE: tuple[float, ...] = (0.04, 0.02, 0.01, 0.005)
DEFAULT_GRID: int = 800
MIN_SCHEDULE: int = 3
# relative change of the largest exit time between the last two margins
BOUNDED_TREND_TOL: float = 0.1


@dataclass(frozen=True)
class RecurrenceRow:
    epsilon: float
    min_hit: float
    max_exit: float

    def to_dict(self) -> dict[str, float]:
        return {"epsilon": self.epsilon, "min_hit": self.min_hit, "max_exit": self.max_exit}


@dataclass(frozen=True)
class RecurrenceReport:
    target: float
    starts: tuple[float, float]
    n_grid: int
    rows: tuple[RecurrenceRow, ...]
    extrapolated_hit: float
    extrapolated_hit_linear: float
    recurrent: bool
    positive_recurrent: bool

    @property
    def verdict(self) -> str:
        if not self.recurrent:
            return "transient (numerical)"
        return "positive recurrent" if self.positive_recurrent else "recurrent"

    @property
    def epsilons(self) -> list[float]:
        return [row.epsilon for row in self.rows]

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict,
            "recurrent": self.recurrent,
            "positive_recurrent": self.positive_recurrent,
            "target": self.target,
            "starts": list(self.starts),
            "n_grid": self.n_grid,
            "extrapolated_hit": self.extrapolated_hit,
            "extrapolated_hit_linear": self.extrapolated_hit_linear,
            "rule": "min(R e) extrapolated in 1/ln(1/eps) must reach 1 - 10*eps_last",
            "table": [row.to_dict() for row in self.rows],
        }


def _check_schedule(schedule: Sequence[float], room: float) -> None:
    if len(schedule) < MIN_SCHEDULE:
        raise ParameterError(
            "epsilon_schedule", f"needs at least {MIN_SCHEDULE} values, got {len(schedule)}"
        )
    for prev, cur in zip(schedule, schedule[1:]):
        if not cur < prev:
            raise ParameterError("epsilon_schedule", f"must be strictly decreasing ({prev}, {cur})")
    if not 0.0 < schedule[-1] or not schedule[0] < room:
        raise ParameterError(
            "epsilon_schedule", f"margins must lie in (0, {room}), got {list(schedule)}"
        )


def _row(
    m: SwitchingDiffusionModel, eps: float, target: float, starts: tuple[float, float], n_grid: int
) -> RecurrenceRow:
    lo, hi = m.state_interval
    ones: FloatArray = np.ones(m.n_phases)
    lower_hit: BvpSolution = solve_hitting(m, lo + eps, target, n_grid, towards_upper=True)
    upper_hit: BvpSolution = solve_hitting(m, target, hi - eps, n_grid, towards_upper=False)
    lower_exit: BvpSolution = solve_exit_time(m, lo + eps, target, None, n_grid)
    upper_exit: BvpSolution = solve_exit_time(m, target, hi - eps, None, n_grid)

    hits: FloatArray = np.concatenate(
        [lower_hit.value_at(starts[0]) @ ones, upper_hit.value_at(starts[1]) @ ones]
    )
    exits: FloatArray = np.concatenate(
        [lower_exit.value_at(starts[0]).ravel(), upper_exit.value_at(starts[1]).ravel()]
    )
    row: RecurrenceRow = RecurrenceRow(
        epsilon=eps, min_hit=float(np.min(hits)), max_exit=float(np.max(exits))
    )
    logger.debug("Recurrence row %s", row.to_dict())
    return row


def _extrapolate(xs: tuple[float, float], ys: tuple[float, float]) -> float:
    """Value at 0 of the line through (xs[0], ys[0]) and (xs[1], ys[1])."""
    slope: float = (ys[1] - ys[0]) / (xs[1] - xs[0])
    return ys[1] - slope * xs[1]


def classify_recurrence(
    m: SwitchingDiffusionModel,
    epsilon_schedule: Sequence[float] = DEFAULT_SCHEDULE,
    target: float | None = None,
    n_grid: int = DEFAULT_GRID,
    threads: int = 1,
) -> RecurrenceReport:
    lo, hi = m.state_interval
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ParameterError("model", f"recurrence needs a bounded state interval, got ({lo}, {hi})")
    y: float = 0.5 * (lo + hi) if target is None else target
    if not lo < y < hi:
        raise ParameterError("target", f"must lie in ({lo}, {hi}), got {y}")
    starts: tuple[float, float] = (lo + 0.25 * (y - lo), hi - 0.25 * (hi - y))
    _check_schedule(epsilon_schedule, min(starts[0] - lo, hi - starts[1]))

    start: float = time.perf_counter()
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows: list[RecurrenceRow] = list(
            pool.map(lambda eps: _row(m, eps, y, starts, n_grid), epsilon_schedule)
        )

    last, prev = rows[-1], rows[-2]
    # With alpha = 0 the hitting deficit shrinks like 1/ln(1/eps), which a line in eps
    # reads as a positive limit; the line in 1/ln(1/eps) catches it, the line in eps
    # covers deficits that vanish polynomially. Either reaching one marks recurrence.
    log_vars: tuple[float, float] = (
        1.0 / math.log(1.0 / prev.epsilon),
        1.0 / math.log(1.0 / last.epsilon),
    )
    extrapolated: float = _extrapolate(log_vars, (prev.min_hit, last.min_hit))
    extrapolated_linear: float = _extrapolate(
        (prev.epsilon, last.epsilon), (prev.min_hit, last.min_hit)
    )
    recurrent: bool = max(extrapolated, extrapolated_linear) >= 1.0 - 10.0 * last.epsilon
    bounded: bool = bool(
        np.isfinite(last.max_exit)
        and abs(last.max_exit - prev.max_exit) <= BOUNDED_TREND_TOL * abs(last.max_exit)
    )

    report: RecurrenceReport = RecurrenceReport(
        target=y,
        starts=starts,
        n_grid=n_grid,
        rows=tuple(rows),
        extrapolated_hit=extrapolated,
        extrapolated_hit_linear=extrapolated_linear,
        recurrent=recurrent,
        positive_recurrent=recurrent and bounded,
    )
    duration_ms: float = (time.perf_counter() - start) * 1000
    logger.info(
        "Recurrence of %s over %d margins: %s - %.2fms",
        m.name, len(rows), report.verdict, duration_ms,
    )
    return report
