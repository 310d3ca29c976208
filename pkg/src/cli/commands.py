"""
Command implementations.

Each command reads the resolved RunConfig, writes its files into out_dir and
registers them with the manifest. Library errors propagate to main.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterator

import numpy as np

from src.cli.manifest import RunManifest
from src.cli.output import matrix_header, to_json, write_csv, write_json
from src.config.schema import (
    BvpConfig,
    DensityConfig,
    RecurrenceConfig,
    RunConfig,
    SimulationConfig,
    build_model,
    wright_fisher_params,
)
from src.config.settings import Settings
from src.core.polynomials import FloatArray
from src.functionals.bvp import BvpSolution, richardson_ratio, solve_exit_time, solve_hitting
from src.functionals.recurrence import RecurrenceReport, classify_recurrence
from src.functionals.tendency import TendencyReport, tendency_analysis, threshold_table
from src.models.base import SwitchingDiffusionModel, ValidationReport, validate_model
from src.models.wright_fisher import WrightFisherParams
from src.montecarlo.engine import PathSample, simulate_paths
from src.spectral.basis import SpectralBasis, build_spectral_basis
from src.spectral.density import IntervalProbability, density_rows, interval_probability
from src.spectral.invariant import InvariantDistribution, invariant_distribution
from src.spectral.symmetry import SymmetryReport, verify_symmetry_equations

logger: logging.Logger = logging.getLogger(__name__)

VALIDATION_POINTS: int = 30


@dataclass(frozen=True)
class CommandContext:
    cfg: RunConfig
    settings: Settings
    out_dir: Path
    manifest: RunManifest

    @property
    def truncation(self) -> int:
        return self.settings.truncation if self.cfg.truncation is None else self.cfg.truncation

    @property
    def grid(self) -> int:
        return self.settings.grid if self.cfg.bvp.grid is None else self.cfg.bvp.grid

    def emit(self, path: Path) -> None:
        self.manifest.add_output(path)


def _interior_grid(points: int) -> FloatArray:
    return (np.arange(points) + 0.5) / points


def cmd_simulate(ctx: CommandContext) -> None:
    """Simulate sample paths and write them with the run manifest."""
    sim: SimulationConfig = ctx.cfg.simulation
    model: SwitchingDiffusionModel = build_model(ctx.cfg)
    ctx.manifest.seed = sim.seed
    paths: list[PathSample] = simulate_paths(
        model, sim.x0, sim.phase0, sim.sim_config(), threads=ctx.settings.threads
    )

    def path_rows() -> Iterator[tuple[int, float, float, int]]:
        for index, path in enumerate(paths):
            for t, x, phase in zip(path.times, path.positions, path.phases):
                yield (index, float(t), float(x), int(phase))

    def transition_rows() -> Iterator[tuple[int, int, float, float]]:
        for index, path in enumerate(paths):
            for phase, x, t in path.transitions():
                yield (index, phase, x, t)

    ctx.emit(write_csv(ctx.out_dir / "paths.csv", ["path", "time", "position", "phase"], path_rows()))
    ctx.emit(
        write_csv(
            ctx.out_dir / "transitions.csv", ["path", "phase", "position", "time"], transition_rows()
        )
    )
    absorbed: list[dict[str, Any]] = [
        {"path": i, "seed": p.seed, "absorbed_at": p.absorbed_at, "boundary": p.absorbing_boundary}
        for i, p in enumerate(paths)
        if p.absorbed_at is not None
    ]
    if absorbed:
        ctx.emit(write_json(ctx.out_dir / "absorption.json", absorbed))


def _basis(ctx: CommandContext, command: str) -> SpectralBasis:
    params: WrightFisherParams = wright_fisher_params(ctx.cfg, command)
    return build_spectral_basis(build_model(ctx.cfg), params, ctx.truncation)


def cmd_density(ctx: CommandContext) -> None:
    """Build the spectral basis, then write density grids and interval probabilities."""
    dens: DensityConfig = ctx.cfg.density
    basis: SpectralBasis = _basis(ctx, "density")
    ctx.emit(write_json(ctx.out_dir / "basis.json", basis.to_dict()))
    if dens.interval is not None:
        result: IntervalProbability = interval_probability(
            basis, dens.t, dens.x, dens.interval, ctx.settings.quadrature_nodes
        )
        ctx.emit(
            write_json(
                ctx.out_dir / "prob.json",
                {
                    "t": dens.t,
                    "x": dens.x,
                    "interval": list(dens.interval),
                    "matrix": result.matrix.tolist(),
                    "truncation": result.truncation,
                    "tail": result.tail,
                    "quadrature_nodes": result.n_nodes,
                },
            )
        )
        return

    ys: FloatArray = _interior_grid(dens.grid)
    rows: FloatArray = density_rows(basis, dens.t, dens.x, ys)
    n: int = basis.n_phases
    table: FloatArray = np.column_stack([ys, rows.reshape(len(ys), n * n)])
    ctx.emit(write_csv(ctx.out_dir / "density.csv", ["y", *matrix_header("p", n)], table.tolist()))


def _write_bvp(ctx: CommandContext, solve: Callable[[int], BvpSolution]) -> None:
    grid: int = ctx.grid
    if ctx.cfg.bvp.refine:
        ratio: float = richardson_ratio(solve, grid)
        logger.info("Richardson ratio %.4f from grids %d/%d/%d", ratio, grid, 2 * grid, 4 * grid)
        ctx.emit(
            write_json(
                ctx.out_dir / "refinement.json",
                {"grids": [grid, 2 * grid, 4 * grid], "richardson_ratio": ratio},
            )
        )
        grid *= 2
    solution: BvpSolution = solve(grid)
    header: list[str] = ["x", *matrix_header("u", solution.n_phases)]
    ctx.emit(write_csv(ctx.out_dir / "bvp.csv", header, solution.rows().tolist()))


def cmd_hitprob(ctx: CommandContext) -> None:
    """Probability of reaching d before c, on the BVP grid."""
    model: SwitchingDiffusionModel = build_model(ctx.cfg)
    bvp: BvpConfig = ctx.cfg.bvp
    _write_bvp(ctx, lambda n: solve_hitting(model, bvp.c, bvp.d, n))


def cmd_exittime(ctx: CommandContext) -> None:
    """Mean exit times from (c, d) on the BVP grid."""
    model: SwitchingDiffusionModel = build_model(ctx.cfg)
    bvp: BvpConfig = ctx.cfg.bvp
    _write_bvp(ctx, lambda n: solve_exit_time(model, bvp.c, bvp.d, None, n))


def cmd_invariant(ctx: CommandContext) -> None:
    """Invariant density on a grid plus its phase masses."""
    params: WrightFisherParams = wright_fisher_params(ctx.cfg, "invariant")
    dist: InvariantDistribution = invariant_distribution(params)
    ys: FloatArray = np.linspace(0.0, 1.0, ctx.cfg.invariant.grid)
    if params.alpha < 0.0 or params.beta < 0.0:
        # densities are unbounded at the endpoints
        ys = ys[1:-1]
    values: FloatArray = dist.components(ys)
    header: list[str] = ["y", *[f"psi{j}" for j in range(1, params.n_phases + 1)]]
    ctx.emit(
        write_csv(ctx.out_dir / "invariant.csv", header, np.column_stack([ys, values]).tolist())
    )
    ctx.emit(write_json(ctx.out_dir / "invariant.json", dist.to_dict()))


def thresholds_payload(ctx: CommandContext) -> list[dict[str, Any]]:
    params: WrightFisherParams = wright_fisher_params(ctx.cfg, "thresholds")
    ks: list[float] = ctx.cfg.thresholds.k_values
    reports: list[TendencyReport] = (
        threshold_table(params, ks) if ks else [tendency_analysis(params)]
    )
    return [r.to_dict() for r in reports]


def cmd_thresholds(ctx: CommandContext) -> None:
    """Print and write the Feller boundary thresholds."""
    payload: list[dict[str, Any]] = thresholds_payload(ctx)
    print(to_json(payload), end="")
    ctx.emit(write_json(ctx.out_dir / "thresholds.json", payload))


def cmd_recurrence(ctx: CommandContext) -> None:
    """Classify recurrence from the shrinking-target schedule."""
    rec: RecurrenceConfig = ctx.cfg.recurrence
    report: RecurrenceReport = classify_recurrence(
        build_model(ctx.cfg),
        rec.epsilons,
        target=rec.target,
        n_grid=rec.grid,
        threads=ctx.settings.threads,
    )
    ctx.emit(write_json(ctx.out_dir / "recurrence.json", report.to_dict()))


def cmd_validate(ctx: CommandContext) -> None:
    """Check the model coefficients and, when a weight is attached, the symmetry equations."""
    model: SwitchingDiffusionModel = build_model(ctx.cfg)
    lo, hi = model.state_interval
    if np.isfinite(lo) and np.isfinite(hi):
        points: FloatArray = np.linspace(lo, hi, VALIDATION_POINTS + 2)[1:-1]
    else:
        points = np.linspace(-5.0, 5.0, VALIDATION_POINTS)
    report: ValidationReport = validate_model(model, points.tolist())
    payload: dict[str, Any] = {"model": model.name, "validation": report.to_dict()}
    if model.weight is not None:
        symmetry: SymmetryReport = verify_symmetry_equations(model, points.tolist())
        payload["symmetry"] = symmetry.to_dict()
    if model.boundaries is not None:
        payload["boundaries"] = model.boundaries.to_dict()
    print(to_json(payload), end="")
    ctx.emit(write_json(ctx.out_dir / "validation.json", payload))


COMMANDS: dict[str, Callable[[CommandContext], None]] = {
    "simulate": cmd_simulate,
    "density": cmd_density,
    "hitprob": cmd_hitprob,
    "exittime": cmd_exittime,
    "invariant": cmd_invariant,
    "thresholds": cmd_thresholds,
    "recurrence": cmd_recurrence,
    "validate": cmd_validate,
}
