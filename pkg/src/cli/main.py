"""
switchdiff command-line entry point.

    switchdiff <command> --config run.json [--out DIR] [overrides]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from pydantic import ValidationError

from src.cli.commands import COMMANDS, CommandContext
from src.cli.manifest import RunManifest
from src.config.schema import RunConfig, load_run_config
from src.config.settings import Settings, get_settings
from src.core.errors import NumericalError, SwitchDiffError

logger: logging.Logger = logging.getLogger(__name__)

EXIT_OK: int = 0
EXIT_CONFIG: int = 2
EXIT_NUMERIC: int = 3


def build_parser() -> argparse.ArgumentParser:
    common: argparse.ArgumentParser = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--config", required=True, type=Path, help="run config or manifest JSON")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--truncation", type=int, help="number of eigenvalue levels M")
    common.add_argument("--grid", type=int, help="finite-difference intervals")
    common.add_argument("--paths", type=int)
    common.add_argument("--step", type=float)
    common.add_argument("--horizon", type=float)
    common.add_argument("--log-level")

    parser: argparse.ArgumentParser = argparse.ArgumentParser(
        prog="switchdiff",
        description="Switching diffusions with finitely many phases",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="simulate sample paths")
    density = sub.add_parser("density", parents=[common], help="spectral transition density")
    density.add_argument("--t", type=float)
    density.add_argument("--x", type=float)
    density.add_argument("--interval", type=float, nargs=2, metavar=("LO", "HI"))
    for name, text in (("hitprob", "hitting probabilities"), ("exittime", "mean exit times")):
        bvp = sub.add_parser(name, parents=[common], help=text)
        bvp.add_argument("--c", type=float)
        bvp.add_argument("--d", type=float)
        bvp.add_argument("--refine", action="store_true", help="report the Richardson ratio")
    sub.add_parser("invariant", parents=[common], help="tabulate the invariant distribution")
    thresholds = sub.add_parser("thresholds", parents=[common], help="phase tendency thresholds")
    thresholds.add_argument("--k", type=float, nargs="+", help="one report per k")
    sub.add_parser("recurrence", parents=[common], help="recurrence classification")
    sub.add_parser("validate", parents=[common], help="model and symmetry checks")
    return parser


def _set(data: dict[str, Any], section: str, key: str, value: Any) -> None:
    if value is not None:
        data.setdefault(section, {})[key] = value


def apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    """Command-line flags win over the config file."""
    data: dict[str, Any] = cfg.model_dump(mode="json")
    if args.truncation is not None:
        data["truncation"] = args.truncation
    _set(data, "simulation", "seed", args.seed)
    _set(data, "simulation", "paths", args.paths)
    _set(data, "simulation", "step", args.step)
    _set(data, "simulation", "horizon", args.horizon)
    _set(data, "bvp", "grid", args.grid)
    _set(data, "density", "t", getattr(args, "t", None))
    _set(data, "density", "x", getattr(args, "x", None))
    _set(data, "density", "interval", getattr(args, "interval", None))
    _set(data, "bvp", "c", getattr(args, "c", None))
    _set(data, "bvp", "d", getattr(args, "d", None))
    if getattr(args, "refine", False):
        data["bvp"]["refine"] = True
    _set(data, "thresholds", "k_values", getattr(args, "k", None))
    return RunConfig.model_validate(data)


def _describe(error: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(part) for part in item['loc']) or 'config'}: {item['msg']}"
        for item in error.errors()
    )


def run(args: argparse.Namespace, settings: Settings) -> int:
    out_dir: Path = args.out if args.out is not None else Path(settings.out_dir)
    try:
        cfg: RunConfig = apply_overrides(load_run_config(args.config), args)
    except ValidationError as e:
        logger.error("Invalid config %s: %s", args.config, _describe(e))
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError) as e:
        logger.error("Cannot read config %s: %s", args.config, e)
        return EXIT_CONFIG

    manifest: RunManifest = RunManifest(command=args.command, config=cfg.model_dump(mode="json"))
    ctx: CommandContext = CommandContext(cfg=cfg, settings=settings, out_dir=out_dir, manifest=manifest)
    try:
        COMMANDS[args.command](ctx)
        manifest.finish(out_dir)
    except NumericalError as e:
        logger.error("%s failed: %s", args.command, e)
        return EXIT_NUMERIC
    except SwitchDiffError as e:
        logger.error("%s rejected: %s", args.command, e)
        return EXIT_CONFIG
    logger.info("%s finished in %.2fs", args.command, manifest.duration_s)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args: argparse.Namespace = build_parser().parse_args(argv)
    settings: Settings = get_settings()
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )
    return run(args, settings)


if __name__ == "__main__":
    sys.exit(main())
