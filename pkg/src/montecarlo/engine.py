"""
Euler-Maruyama path engine for switching diffusions.

Per step and path:
    x <- x + tau_i(x) h + sigma_i(x) sqrt(h) xi
and the phase jumps with probability 1 - exp(Q_ii(x) h) to j != i with
probability -Q_ij(x) / Q_ii(x). At an absorbing edge a Brownian-bridge test also
catches crossings between grid points. Paths are advanced in vectorized batches;
each path reads only its own random stream.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterator

import numpy as np
from numpy.typing import ArrayLike

from src.core.errors import ParameterError
from src.core.polynomials import FloatArray
from src.models.base import BoundaryKind, SwitchingDiffusionModel
from src.montecarlo.rng import CHUNK_STEPS, BatchStreams, box_muller, path_seed

logger: logging.Logger = logging.getLogger(__name__)

BATCH_SIZE: int = 1024
CLAMP_EPS: float = 1e-9
MAX_RATE_STEP: float = 0.1
# horizon/step within this of an integer counts as that integer
STEP_SLACK: float = 1e-9


class BoundaryPolicy(str, Enum):
    REFLECT = "reflect"
    ABSORB = "absorb"
    CLAMP = "clamp"
    # reflect or absorb per phase as the model classifies its boundaries
    AUTO = "auto"


@dataclass(frozen=True)
class SimConfig:
    step: float
    horizon: float
    n_paths: int = 1
    seed: int = 0
    boundary_policy: BoundaryPolicy = BoundaryPolicy.AUTO

    def __post_init__(self) -> None:
        if not self.step > 0.0:
            raise ParameterError("step", f"must be > 0, got {self.step}")
        if not self.horizon > 0.0:
            raise ParameterError("horizon", f"must be > 0, got {self.horizon}")
        if self.step > self.horizon:
            raise ParameterError("step", f"step {self.step} exceeds horizon {self.horizon}")
        if self.n_paths < 1:
            raise ParameterError("n_paths", f"must be >= 1, got {self.n_paths}")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed", f"must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def n_steps(self) -> int:
        """Fewest equal steps no longer than `step` that end exactly at the horizon."""
        return max(1, math.ceil(self.horizon / self.step - STEP_SLACK))

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    def times(self) -> FloatArray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)


@dataclass(frozen=True, eq=False)
class PathSample:
    times: FloatArray
    positions: FloatArray
    # 1-based
    phases: np.ndarray[Any, np.dtype[np.int64]]
    jump_times: FloatArray
    seed: int
    absorbed_at: float | None = None
    absorbing_boundary: str | None = None

    def transitions(self) -> list[tuple[int, float, float]]:
        """(phase, position, time) at the end of every sojourn."""
        jumps = np.flatnonzero(np.diff(self.phases) != 0)
        return [
            (int(self.phases[j]), float(self.positions[j + 1]), float(self.times[j + 1]))
            for j in jumps
        ]

    def occupation_fractions(self, n_phases: int) -> FloatArray:
        counts = np.bincount(self.phases - 1, minlength=n_phases)
        return counts / counts.sum()


@dataclass
class BatchState:
    x: FloatArray
    phase: np.ndarray[Any, np.dtype[np.int64]]
    alive: np.ndarray[Any, np.dtype[np.bool_]]
    absorbed_step: np.ndarray[Any, np.dtype[np.int64]]
    # -1 lower, +1 upper, 0 not absorbed
    absorbed_side: np.ndarray[Any, np.dtype[np.int64]]
    max_rate_step: float = 0.0


def jump_probabilities(q: ArrayLike, phase: ArrayLike) -> FloatArray:
    """
    -Q_ij / Q_ii over j != i for zero-based phases; a row of zeros where Q_ii = 0.

    q has shape (..., N, N) and phase the leading shape of q.
    """
    qs: FloatArray = np.asarray(q, dtype=np.float64)
    ph = np.asarray(phase, dtype=np.int64)[..., np.newaxis]
    rows: FloatArray = np.take_along_axis(qs, ph[..., np.newaxis], axis=-2)[..., 0, :].copy()
    rate: FloatArray = -np.take_along_axis(rows, ph, axis=-1)
    np.put_along_axis(rows, ph, 0.0, axis=-1)
    out: FloatArray = np.zeros_like(rows)
    np.divide(rows, rate, out=out, where=rate > 0.0)
    return out


def _absorbing_masks(
    m: SwitchingDiffusionModel, policy: BoundaryPolicy
) -> tuple[np.ndarray[Any, np.dtype[np.bool_]], np.ndarray[Any, np.dtype[np.bool_]]]:
    n: int = m.n_phases
    if policy is BoundaryPolicy.ABSORB:
        return np.ones(n, dtype=bool), np.ones(n, dtype=bool)
    if policy is BoundaryPolicy.AUTO and m.boundaries is not None:
        lower = np.array([b.lower is BoundaryKind.ABSORBING for b in m.boundaries.phases])
        upper = np.array([b.upper is BoundaryKind.ABSORBING for b in m.boundaries.phases])
        return lower, upper
    return np.zeros(n, dtype=bool), np.zeros(n, dtype=bool)


def _check_start(m: SwitchingDiffusionModel, x0: float, phase0: int) -> None:
    if not m.contains(x0):
        raise ParameterError("x0", f"must lie inside {m.state_interval}, got {x0}")
    if not 1 <= phase0 <= m.n_phases:
        raise ParameterError("phase0", f"must be in 1..{m.n_phases}, got {phase0}")


def _bridge_probability(x: FloatArray, x_new: FloatArray, edge: float, variance: FloatArray) -> FloatArray:
    """Chance that a Brownian bridge from x to x_new with the given variance touches `edge`."""
    exponent: FloatArray = np.full_like(x, np.inf)
    np.divide(2.0 * (x - edge) * (x_new - edge), variance, out=exponent, where=variance > 0.0)
    return np.exp(-np.maximum(exponent, 0.0))


def _apply_boundaries(
    m: SwitchingDiffusionModel,
    state: BatchState,
    idx: np.ndarray[Any, np.dtype[np.int64]],
    x: FloatArray,
    x_new: FloatArray,
    variance: FloatArray,
    u_bridge: FloatArray,
    driving: np.ndarray[Any, np.dtype[np.int64]],
    policy: BoundaryPolicy,
    masks: tuple[np.ndarray[Any, np.dtype[np.bool_]], np.ndarray[Any, np.dtype[np.bool_]]],
    step: int,
) -> FloatArray:
    lo, hi = m.state_interval
    if policy is BoundaryPolicy.CLAMP:
        if math.isfinite(lo):
            x_new = np.maximum(x_new, lo + CLAMP_EPS)
        if math.isfinite(hi):
            x_new = np.minimum(x_new, hi - CLAMP_EPS)
        return x_new

    below = x_new <= lo
    above = x_new >= hi
    absorb_lower = below & masks[0][driving]
    absorb_upper = above & masks[1][driving]
    # an absorbing edge also catches paths that crossed and came back within the step
    inside = ~(below | above)
    p_lower: FloatArray = _bridge_probability(x, x_new, lo, variance) if math.isfinite(lo) else np.zeros_like(x)
    p_upper: FloatArray = _bridge_probability(x, x_new, hi, variance) if math.isfinite(hi) else np.zeros_like(x)
    absorb_lower = absorb_lower | (inside & masks[0][driving] & (u_bridge < p_lower))
    absorb_upper = absorb_upper | (
        inside & masks[1][driving] & (u_bridge >= p_lower) & (u_bridge < p_lower + p_upper)
    )
    if absorb_lower.any() or absorb_upper.any():
        hit = absorb_lower | absorb_upper
        state.alive[idx[hit]] = False
        state.absorbed_step[idx[hit]] = step
        state.absorbed_side[idx[absorb_lower]] = -1
        state.absorbed_side[idx[absorb_upper]] = 1
        x_new = np.where(absorb_lower, lo, np.where(absorb_upper, hi, x_new))

    # fold the remaining crossings back inside
    if math.isfinite(lo):
        x_new = np.where(below & ~absorb_lower, 2.0 * lo - x_new, x_new)
    if math.isfinite(hi):
        x_new = np.where(above & ~absorb_upper, 2.0 * hi - x_new, x_new)
    if math.isfinite(lo) and math.isfinite(hi):
        x_new = np.clip(x_new, lo, hi)
    return x_new


def _advance(
    m: SwitchingDiffusionModel,
    state: BatchState,
    noise: FloatArray,
    h: float,
    policy: BoundaryPolicy,
    masks: tuple[np.ndarray[Any, np.dtype[np.bool_]], np.ndarray[Any, np.dtype[np.bool_]]],
    step: int,
) -> None:
    idx = np.flatnonzero(state.alive)
    if len(idx) == 0:
        return
    lo, hi = m.state_interval
    x: FloatArray = state.x[idx]
    phase = state.phase[idx]
    rows = np.arange(len(idx))

    x_q: FloatArray = np.clip(x, lo, hi - CLAMP_EPS) if math.isfinite(hi) else x
    q: FloatArray = m.intensity(x_q)
    a: FloatArray = m.diffusion(x)[rows, phase, phase]
    b: FloatArray = m.drift(x)[rows, phase, phase]
    xi: FloatArray = box_muller(noise[idx, 0], noise[idx, 1])
    variance: FloatArray = np.maximum(a, 0.0) * h
    x_new: FloatArray = x + b * h + np.sqrt(variance) * xi

    q_ii: FloatArray = q[rows, phase, phase]
    state.max_rate_step = max(state.max_rate_step, float(np.max(-q_ii)) * h)
    fire = noise[idx, 2] < -np.expm1(q_ii * h)
    new_phase = phase.copy()
    if fire.any():
        fired = np.flatnonzero(fire)
        cumulative: FloatArray = np.cumsum(jump_probabilities(q[fired], phase[fired]), axis=-1)
        threshold: FloatArray = noise[idx[fired], 3] * cumulative[:, -1]
        new_phase[fired] = np.argmax(cumulative > threshold[:, np.newaxis], axis=-1)

    state.x[idx] = _apply_boundaries(
        m, state, idx, x, x_new, variance, noise[idx, 4], phase, policy, masks, step
    )
    state.phase[idx] = new_phase


def iterate_batch(
    m: SwitchingDiffusionModel,
    x0: float,
    phase0: int,
    cfg: SimConfig,
    indices: list[int],
    n_steps: int | None = None,
) -> Iterator[tuple[int, BatchState]]:
    """
    Advance the paths with the given global indices, yielding after each step.

    The yielded state is live and mutated by the next step.
    """
    _check_start(m, x0, phase0)
    steps: int = cfg.n_steps if n_steps is None else n_steps
    policy: BoundaryPolicy = cfg.boundary_policy
    masks = _absorbing_masks(m, policy)
    streams: BatchStreams = BatchStreams(cfg.seed, indices)
    count: int = len(indices)
    state: BatchState = BatchState(
        x=np.full(count, float(x0)),
        phase=np.full(count, phase0 - 1, dtype=np.int64),
        alive=np.ones(count, dtype=bool),
        absorbed_step=np.full(count, -1, dtype=np.int64),
        absorbed_side=np.zeros(count, dtype=np.int64),
    )
    chunk: FloatArray = np.empty((0, 0, 0))
    for step in range(1, steps + 1):
        offset: int = (step - 1) % CHUNK_STEPS
        if offset == 0:
            chunk = streams.next_chunk()
        _advance(m, state, chunk[:, offset, :], cfg.dt, policy, masks, step)
        yield step, state


def warn_step_size(state: BatchState, cfg: SimConfig) -> None:
    if state.max_rate_step > MAX_RATE_STEP:
        logger.warning(
            "max |Q_ii| h = %.3g exceeds %.1f with h=%g; jump times are biased",
            state.max_rate_step, MAX_RATE_STEP, cfg.dt,
        )


def _simulate_batch(
    m: SwitchingDiffusionModel, x0: float, phase0: int, cfg: SimConfig, indices: list[int]
) -> list[PathSample]:
    n_steps: int = cfg.n_steps
    positions: FloatArray = np.empty((len(indices), n_steps + 1))
    phases = np.empty((len(indices), n_steps + 1), dtype=np.int64)
    positions[:, 0] = x0
    phases[:, 0] = phase0
    last: BatchState | None = None
    for step, state in iterate_batch(m, x0, phase0, cfg, indices):
        positions[:, step] = state.x
        phases[:, step] = state.phase + 1
        last = state
    if last is None:
        return []
    warn_step_size(last, cfg)

    times: FloatArray = cfg.times()
    samples: list[PathSample] = []
    for row, index in enumerate(indices):
        end: int = n_steps + 1
        absorbed_at: float | None = None
        boundary: str | None = None
        if last.absorbed_step[row] >= 0:
            end = int(last.absorbed_step[row]) + 1
            absorbed_at = float(times[end - 1])
            boundary = "lower" if last.absorbed_side[row] < 0 else "upper"
            logger.debug("Path %d absorbed at the %s boundary", index, boundary)
        path_phases = phases[row, :end]
        jumps = np.flatnonzero(np.diff(path_phases) != 0) + 1
        samples.append(
            PathSample(
                times=times[:end],
                positions=positions[row, :end].copy(),
                phases=path_phases.copy(),
                jump_times=times[jumps],
                seed=path_seed(cfg.seed, index),
                absorbed_at=absorbed_at,
                absorbing_boundary=boundary,
            )
        )
    return samples


def path_batches(first: int, count: int) -> list[list[int]]:
    return [
        list(range(start, min(start + BATCH_SIZE, first + count)))
        for start in range(first, first + count, BATCH_SIZE)
    ]


def simulate_paths(
    m: SwitchingDiffusionModel, x0: float, phase0: int, cfg: SimConfig, threads: int = 1
) -> list[PathSample]:
    _check_start(m, x0, phase0)
    start: float = time.perf_counter()
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        batches: list[list[PathSample]] = list(
            pool.map(lambda ids: _simulate_batch(m, x0, phase0, cfg, ids), path_batches(0, cfg.n_paths))
        )
    samples: list[PathSample] = [s for batch in batches for s in batch]
    duration_ms: float = (time.perf_counter() - start) * 1000
    logger.info(
        "Simulated %d paths of %d steps (%s) - %.2fms",
        len(samples), cfg.n_steps, cfg.boundary_policy.value, duration_ms,
    )
    return samples


def simulate_path(m: SwitchingDiffusionModel, x0: float, phase0: int, cfg: SimConfig) -> PathSample:
    """The path with index 0 under cfg.seed."""
    return _simulate_batch(m, x0, phase0, cfg, [0])[0]
