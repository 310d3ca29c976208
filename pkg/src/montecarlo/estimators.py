"""Monte Carlo estimators that cross-check the spectral and closed-form results."""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from src.core.errors import ParameterError
from src.core.polynomials import FloatArray
from src.models.base import SwitchingDiffusionModel
from src.montecarlo.engine import (
    BatchState,
    BoundaryPolicy,
    SimConfig,
    iterate_batch,
    path_batches,
    warn_step_size,
)

logger: logging.Logger = logging.getLogger(__name__)

MIN_PATHS: int = 100


@dataclass(frozen=True, eq=False)
class TransitionEstimate:
    matrix: FloatArray
    standard_errors: FloatArray
    complement: FloatArray
    t: float
    interval: tuple[float, float]
    n_paths: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "interval": list(self.interval),
            "n_paths": self.n_paths,
            "matrix": self.matrix.tolist(),
            "standard_errors": self.standard_errors.tolist(),
            "complement": self.complement.tolist(),
        }


def _terminal_counts(
    m: SwitchingDiffusionModel,
    x0: float,
    phase0: int,
    cfg: SimConfig,
    indices: list[int],
    interval: tuple[float, float],
) -> FloatArray:
    lo, hi = interval
    counts: FloatArray = np.zeros(m.n_phases)
    state: BatchState | None = None
    for _, state in iterate_batch(m, x0, phase0, cfg, indices):
        pass
    if state is None:
        return counts
    warn_step_size(state, cfg)
    inside = (state.x >= lo) & (state.x <= hi)
    counts += np.bincount(state.phase[inside], minlength=m.n_phases)
    return counts


def estimate_transition_probability(
    m: SwitchingDiffusionModel,
    x0: float,
    t: float,
    interval: tuple[float, float],
    cfg: SimConfig,
    threads: int = 1,
) -> TransitionEstimate:
    """
    Frequencies of (X_t in [lo, hi], Y_t = j) per starting phase, with binomial errors.

    Starting phase i uses path indices (i-1)*n_paths .. i*n_paths - 1.
    """
    if cfg.n_paths < MIN_PATHS:
        raise ParameterError("n_paths", f"must be >= {MIN_PATHS} for an estimate, got {cfg.n_paths}")
    if not t > 0.0:
        raise ParameterError("t", f"must be > 0, got {t}")
    lo, hi = interval
    if not lo < hi:
        raise ParameterError("interval", f"empty interval ({lo}, {hi})")
    run_cfg: SimConfig = replace(cfg, horizon=t, step=min(cfg.step, t))

    start: float = time.perf_counter()
    n: int = m.n_phases
    matrix: FloatArray = np.zeros((n, n))
    tasks: list[tuple[int, list[int]]] = [
        (i, ids) for i in range(n) for ids in path_batches(i * cfg.n_paths, cfg.n_paths)
    ]

    def run(task: tuple[int, list[int]]) -> FloatArray:
        return _terminal_counts(m, x0, task[0] + 1, run_cfg, task[1], interval)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for (i, _), counts in zip(tasks, pool.map(run, tasks)):
            matrix[i] += counts
    matrix /= cfg.n_paths

    errors: FloatArray = np.sqrt(matrix * (1.0 - matrix) / cfg.n_paths)
    duration_ms: float = (time.perf_counter() - start) * 1000
    logger.info(
        "Estimated transition probabilities from %d x %d paths - %.2fms",
        n, cfg.n_paths, duration_ms,
    )
    return TransitionEstimate(
        matrix=matrix,
        standard_errors=errors,
        complement=1.0 - matrix.sum(axis=1),
        t=t,
        interval=(lo, hi),
        n_paths=cfg.n_paths,
    )


@dataclass(frozen=True, eq=False)
class InvariantHistogram:
    edges: FloatArray
    # (bins, N), total mass one
    mass: FloatArray
    n_samples: int

    def phase_masses(self) -> FloatArray:
        return self.mass.sum(axis=0)

    def to_dict(self) -> dict[str, Any]:
        return {
            "edges": self.edges.tolist(),
            "mass": self.mass.tolist(),
            "n_samples": self.n_samples,
        }


def _occupancy(
    m: SwitchingDiffusionModel,
    x0: float,
    phase0: int,
    cfg: SimConfig,
    indices: list[int],
    burn_steps: int,
    edges: FloatArray,
) -> FloatArray:
    bins: int = len(edges) - 1
    n: int = m.n_phases
    counts: FloatArray = np.zeros(bins * n)
    state: BatchState | None = None
    for step, state in iterate_batch(m, x0, phase0, cfg, indices):
        if step <= burn_steps:
            continue
        alive = state.alive
        cell = np.clip(np.searchsorted(edges, state.x[alive], side="right") - 1, 0, bins - 1)
        counts += np.bincount(cell * n + state.phase[alive], minlength=bins * n)
    if state is not None:
        warn_step_size(state, cfg)
    return counts.reshape(bins, n)


def estimate_invariant_histogram(
    m: SwitchingDiffusionModel,
    cfg: SimConfig,
    burn_in: float,
    bins: int,
    x0: float | None = None,
    phase0: int = 1,
    threads: int = 1,
) -> InvariantHistogram:
    """Time average of the joint (position bin, phase) occupancy after burn_in, pooled over paths."""
    if not cfg.horizon > burn_in:
        raise ParameterError("burn_in", f"horizon {cfg.horizon} must exceed burn_in {burn_in}")
    if bins < 1:
        raise ParameterError("bins", f"must be >= 1, got {bins}")
    lo, hi = m.state_interval
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ParameterError("model", "histogram needs a bounded state interval")
    start_x: float = 0.5 * (lo + hi) if x0 is None else x0
    edges: FloatArray = np.linspace(lo, hi, bins + 1)
    burn_steps: int = int(round(burn_in / cfg.dt))

    start: float = time.perf_counter()
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        parts = list(
            pool.map(
                lambda ids: _occupancy(m, start_x, phase0, cfg, ids, burn_steps, edges),
                path_batches(0, cfg.n_paths),
            )
        )
    counts: FloatArray = np.sum(parts, axis=0)
    total: float = float(counts.sum())
    if total == 0.0:
        raise ParameterError("burn_in", "no path survived past burn_in")
    duration_ms: float = (time.perf_counter() - start) * 1000
    logger.info("Occupancy histogram from %d samples - %.2fms", int(total), duration_ms)
    return InvariantHistogram(edges=edges, mass=counts / total, n_samples=int(total))


def total_variation(p: FloatArray, q: FloatArray) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))


@dataclass(frozen=True, eq=False)
class ExitTimeEstimate:
    mean: float
    standard_error: float
    n_paths: int
    # paths still inside at the horizon, counted with the horizon
    censored: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "mean": self.mean,
            "standard_error": self.standard_error,
            "n_paths": self.n_paths,
            "censored": self.censored,
        }


def _exit_steps(
    m: SwitchingDiffusionModel, x0: float, phase0: int, cfg: SimConfig, indices: list[int]
) -> np.ndarray[Any, np.dtype[np.int64]]:
    """Absorption step per path, -1 for paths alive at the horizon."""
    state: BatchState | None = None
    for _, state in iterate_batch(m, x0, phase0, cfg, indices):
        if not state.alive.any():
            break
    if state is None:
        return np.zeros(0, dtype=np.int64)
    warn_step_size(state, cfg)
    return state.absorbed_step.copy()


def estimate_mean_exit_time(
    m: SwitchingDiffusionModel,
    x0: float,
    phase0: int,
    cfg: SimConfig,
    threads: int = 1,
) -> ExitTimeEstimate:
    """Mean time to leave the state interval, absorbing at both ends whatever cfg says."""
    if cfg.n_paths < MIN_PATHS:
        raise ParameterError("n_paths", f"must be >= {MIN_PATHS} for an estimate, got {cfg.n_paths}")
    lo, hi = m.state_interval
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ParameterError("model", "exit time needs a bounded state interval")
    run_cfg: SimConfig = replace(cfg, boundary_policy=BoundaryPolicy.ABSORB)

    start: float = time.perf_counter()
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        parts = list(
            pool.map(
                lambda ids: _exit_steps(m, x0, phase0, run_cfg, ids),
                path_batches(0, cfg.n_paths),
            )
        )
    steps = np.concatenate(parts)
    alive = steps < 0
    exits: FloatArray = np.where(alive, run_cfg.n_steps, steps) * run_cfg.dt
    censored: int = int(np.count_nonzero(alive))
    if censored:
        logger.warning("%d of %d paths still inside at horizon %g", censored, len(steps), cfg.horizon)
    duration_ms: float = (time.perf_counter() - start) * 1000
    logger.info("Mean exit time from %d paths - %.2fms", len(steps), duration_ms)
    return ExitTimeEstimate(
        mean=float(np.mean(exits)),
        standard_error=float(np.std(exits, ddof=1)) / math.sqrt(len(exits)),
        n_paths=len(steps),
        censored=censored,
    )
