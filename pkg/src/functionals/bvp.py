"""
Boundary-value problems  A U''/2 + B U' + Q U + G = 0  on (c, d).

Hitting probabilities use U(c) = 0, U(d) = I, G = 0; mean exit times use
V(c) = V(d) = 0 with a forcing G. Centred second-order differences on a
uniform grid give a block-tridiagonal system (block size N) that is solved
densely; every column of U is solved at once as a right-hand side.
"""

import logging
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import lu_factor, lu_solve
from scipy.linalg.lapack import dgecon

from src.core.errors import ParameterError, SingularSystemError
from src.core.polynomials import FloatArray, PhaseMatrix
from src.models.base import SwitchingDiffusionModel

logger: logging.Logger = logging.getLogger(__name__)

MIN_GRID: int = 16
RCOND_FLOOR: float = 1e-14

Forcing = PhaseMatrix | Callable[[ArrayLike], FloatArray]


class BvpKind(str, Enum):
    HITTING = "hitting"
    EXIT_TIME = "exit-time"


@dataclass(frozen=True, eq=False)
class BvpSolution:
    grid: FloatArray
    values: FloatArray
    c: float
    d: float
    kind: BvpKind
    condition: float

    @property
    def n_phases(self) -> int:
        return int(self.values.shape[1])

    def value_at(self, x: float) -> PhaseMatrix:
        """Linear interpolation between grid points."""
        if not self.c <= x <= self.d:
            raise ParameterError("x", f"{x} outside [{self.c}, {self.d}]")
        idx: int = int(np.clip(np.searchsorted(self.grid, x) - 1, 0, len(self.grid) - 2))
        x0: float = float(self.grid[idx])
        x1: float = float(self.grid[idx + 1])
        theta: float = (x - x0) / (x1 - x0)
        return (1.0 - theta) * self.values[idx] + theta * self.values[idx + 1]

    def rows(self) -> FloatArray:
        """x followed by the N*N entries row-major, one row per grid point."""
        flat: FloatArray = self.values.reshape(len(self.grid), -1)
        return np.column_stack([self.grid, flat])


def _check_domain(m: SwitchingDiffusionModel, c: float, d: float, n_grid: int) -> None:
    lo, hi = m.state_interval
    if not lo < c < d < hi:
        raise ParameterError("c, d", f"need {lo} < c < d < {hi}, got c={c}, d={d}")
    if n_grid < MIN_GRID:
        raise ParameterError("n_grid", f"must be >= {MIN_GRID}, got {n_grid}")


def _forcing_values(forcing: Forcing | None, xs: FloatArray, n: int) -> FloatArray:
    if forcing is None:
        return np.zeros((len(xs), n, n))
    if callable(forcing):
        return np.asarray(forcing(xs), dtype=np.float64)
    return np.broadcast_to(np.asarray(forcing, dtype=np.float64), (len(xs), n, n))


def solve_bvp(
    m: SwitchingDiffusionModel,
    c: float,
    d: float,
    n_grid: int,
    lower: PhaseMatrix,
    upper: PhaseMatrix,
    forcing: Forcing | None,
    kind: BvpKind,
) -> BvpSolution:
    """Solve A/2 U'' + B U' + Q U = -F on (c, d) with U(c) = lower, U(d) = upper."""
    _check_domain(m, c, d, n_grid)
    start: float = time.perf_counter()
    n: int = m.n_phases
    grid: FloatArray = np.linspace(c, d, n_grid + 1)
    h: float = (d - c) / n_grid
    inner: FloatArray = grid[1:-1]
    n_inner: int = len(inner)

    a: FloatArray = m.diffusion(inner)
    b: FloatArray = m.drift(inner)
    q: FloatArray = m.intensity(inner)
    below: FloatArray = 0.5 * a / h**2 - 0.5 * b / h
    centre: FloatArray = -a / h**2 + q
    above: FloatArray = 0.5 * a / h**2 + 0.5 * b / h

    size: int = n_inner * n
    system: FloatArray = np.zeros((size, size))
    rhs: FloatArray = -_forcing_values(forcing, inner, n).reshape(size, n).copy()
    for k in range(n_inner):
        rows: slice = slice(k * n, (k + 1) * n)
        system[rows, rows] = centre[k]
        if k > 0:
            system[rows, (k - 1) * n : k * n] = below[k]
        else:
            rhs[rows] -= below[k] @ lower
        if k < n_inner - 1:
            system[rows, (k + 1) * n : (k + 2) * n] = above[k]
        else:
            rhs[rows] -= above[k] @ upper

    anorm: float = float(np.linalg.norm(system, 1))
    lu, piv = lu_factor(system, check_finite=True)
    rcond, _ = dgecon(lu, anorm, norm="1")
    if not rcond > RCOND_FLOOR:
        raise SingularSystemError(condition=float(np.inf) if rcond == 0.0 else 1.0 / float(rcond))
    solution: FloatArray = lu_solve((lu, piv), rhs)

    values: FloatArray = np.empty((n_grid + 1, n, n))
    values[0] = lower
    values[-1] = upper
    values[1:-1] = solution.reshape(n_inner, n, n)

    duration_ms: float = (time.perf_counter() - start) * 1000
    logger.info(
        "%s BVP on (%g, %g): %d unknowns, condition %.3e - %.2fms",
        kind.value, c, d, size * n, 1.0 / float(rcond), duration_ms,
    )
    return BvpSolution(
        grid=grid, values=values, c=c, d=d, kind=kind, condition=1.0 / float(rcond)
    )


def solve_hitting(
    m: SwitchingDiffusionModel, c: float, d: float, n_grid: int, towards_upper: bool = True
) -> BvpSolution:
    """Probability of reaching d before c (or c before d when towards_upper is False)."""
    zero: PhaseMatrix = np.zeros((m.n_phases, m.n_phases))
    eye: PhaseMatrix = np.eye(m.n_phases)
    lower, upper = (zero, eye) if towards_upper else (eye, zero)
    return solve_bvp(m, c, d, n_grid, lower, upper, None, BvpKind.HITTING)


def solve_exit_time(
    m: SwitchingDiffusionModel, c: float, d: float, G: Forcing | None, n_grid: int
) -> BvpSolution:
    """Exit-time matrix; G defaults to e e^T with e the all-ones vector."""
    zero: PhaseMatrix = np.zeros((m.n_phases, m.n_phases))
    forcing: Forcing = np.ones((m.n_phases, m.n_phases)) if G is None else G
    return solve_bvp(m, c, d, n_grid, zero, zero, forcing, BvpKind.EXIT_TIME)


def richardson_ratio(solve: Callable[[int], BvpSolution], n_grid: int) -> float:
    """
    Ratio of successive refinement changes on the coarse grid.

    About 4 for a second-order scheme.
    """
    coarse: BvpSolution = solve(n_grid)
    mid: BvpSolution = solve(2 * n_grid)
    fine: BvpSolution = solve(4 * n_grid)
    first: float = float(np.max(np.abs(coarse.values - mid.values[::2])))
    second: float = float(np.max(np.abs(mid.values[::2] - fine.values[::4])))
    if second == 0.0:
        raise ParameterError("n_grid", "refinement changed nothing; ratio undefined")
    return first / second
