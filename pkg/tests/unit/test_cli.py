"""
Tests for the switchdiff command line.

Runs src/cli/main.py end to end on small configs and checks the files each
command writes.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Callable

import numpy as np
import pytest

from src.cli import commands
from src.cli.commands import CommandContext
from src.cli.main import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from src.core.errors import NumericalError

FOUR_PHASES: dict[str, Any] = {
    "model": {"model": "wright_fisher", "alpha": 0.0, "beta": 0.0, "k": 0.5, "phases": 4},
}
SCALAR: dict[str, Any] = {
    "model": {"model": "wright_fisher", "alpha": 0.0, "beta": 0.0, "k": 0.5, "phases": 1},
}


def _read_csv(path: Path) -> list[dict[str, str]]:
    with path.open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


def _read_json(path: Path) -> Any:
    return json.loads(path.read_text(encoding="utf-8"))


class TestSimulateCommand:
    """Tests for switchdiff simulate."""

    def test_writes_paths(self, write_config: Callable[..., Path], tmp_path: Path) -> None:
        config = write_config(
            {**FOUR_PHASES, "simulation": {"step": 0.001, "horizon": 0.1, "paths": 3, "seed": 7}}
        )
        out = tmp_path / "sim"

        code = main(["simulate", "--config", str(config), "--out", str(out)])

        assert code == EXIT_OK
        rows = _read_csv(out / "paths.csv")
        assert len(rows) == 3 * 101
        for path in ("0", "1", "2"):
            times = [float(r["time"]) for r in rows if r["path"] == path]
            assert all(b > a for a, b in zip(times, times[1:]))
        assert {r["phase"] for r in rows} <= {"1", "2", "3", "4"}
        assert (out / "transitions.csv").is_file()

    def test_same_seed_same_bytes(self, write_config: Callable[..., Path], tmp_path: Path) -> None:
        config = write_config({**FOUR_PHASES, "simulation": {"step": 0.001, "horizon": 0.2, "paths": 2}})

        main(["simulate", "--config", str(config), "--out", str(tmp_path / "a"), "--seed", "99"])
        main(["simulate", "--config", str(config), "--out", str(tmp_path / "b"), "--seed", "99"])

        first = (tmp_path / "a" / "paths.csv").read_bytes()
        assert first == (tmp_path / "b" / "paths.csv").read_bytes()

    def test_manifest(self, write_config: Callable[..., Path], tmp_path: Path) -> None:
        config = write_config({**FOUR_PHASES, "simulation": {"step": 0.01, "horizon": 0.1}})
        out = tmp_path / "sim"

        main(["simulate", "--config", str(config), "--out", str(out), "--seed", "5"])
        manifest = _read_json(out / "manifest.json")

        assert manifest["command"] == "simulate"
        assert manifest["seed"] == 5
        assert manifest["outputs"] == ["paths.csv", "transitions.csv"]
        assert manifest["config"]["simulation"]["seed"] == 5
        assert manifest["duration_s"] >= 0.0

    def test_rerun_from_manifest(self, write_config: Callable[..., Path], tmp_path: Path) -> None:
        config = write_config({**FOUR_PHASES, "simulation": {"step": 0.001, "horizon": 0.1, "seed": 4}})
        main(["simulate", "--config", str(config), "--out", str(tmp_path / "a")])

        code = main(["simulate", "--config", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "b")])

        assert code == EXIT_OK
        assert (tmp_path / "a" / "paths.csv").read_bytes() == (tmp_path / "b" / "paths.csv").read_bytes()


class TestDensityCommand:
    """Tests for switchdiff density."""

    def test_interval_probability(
        self, write_config: Callable[..., Path], tmp_path: Path, reference_matrix: list[list[float]]
    ) -> None:
        config = write_config(FOUR_PHASES)
        out = tmp_path / "density"

        code = main(
            [
                "density", "--config", str(config), "--out", str(out), "--truncation", "12",
                "--t", "1.0", "--x", "0.5", "--interval", "0.75", "1.0",
            ]
        )

        assert code == EXIT_OK
        prob = _read_json(out / "prob.json")
        np.testing.assert_allclose(prob["matrix"], reference_matrix, atol=1e-3)
        assert prob["truncation"] == 12
        assert prob["tail"] < 1e-10
        assert (out / "basis.json").is_file()

    def test_density_table(self, write_config: Callable[..., Path], tmp_path: Path) -> None:
        config = write_config({**FOUR_PHASES, "density": {"t": 0.5, "grid": 10}})
        out = tmp_path / "density"

        main(["density", "--config", str(config), "--out", str(out), "--truncation", "6"])

        rows = _read_csv(out / "density.csv")
        assert len(rows) == 10
        assert list(rows[0])[:3] == ["y", "p11", "p12"]
        assert list(rows[0])[-1] == "p44"

    def test_needs_wright_fisher(self, write_config: Callable[..., Path], tmp_path: Path) -> None:
        config = write_config({"model": {"model": "ornstein_uhlenbeck"}})

        code = main(["density", "--config", str(config), "--out", str(tmp_path)])

        assert code == EXIT_CONFIG


class TestBvpCommands:
    """Tests for switchdiff hitprob and exittime."""

    def test_hitprob_midpoint(self, write_config: Callable[..., Path], tmp_path: Path) -> None:
        config = write_config({**SCALAR, "bvp": {"c": 0.25, "d": 0.75}})
        out = tmp_path / "hit"

        code = main(["hitprob", "--config", str(config), "--out", str(out), "--grid", "400"])

        assert code == EXIT_OK
        rows = _read_csv(out / "bvp.csv")
        middle = min(rows, key=lambda r: abs(float(r["x"]) - 0.5))
        assert float(middle["u11"]) == pytest.approx(0.5, abs=1e-4)
        assert float(rows[0]["u11"]) == 0.0
        assert float(rows[-1]["u11"]) == 1.0

    def test_refinement_report(self, write_config: Callable[..., Path], tmp_path: Path) -> None:
        config = write_config(SCALAR)
        out = tmp_path / "hit"

        main(["hitprob", "--config", str(config), "--out", str(out), "--grid", "32", "--refine"])

        refinement = _read_json(out / "refinement.json")
        assert refinement["grids"] == [32, 64, 128]
        assert 3.5 <= refinement["richardson_ratio"] <= 4.5
        assert len(_read_csv(out / "bvp.csv")) == 65

    def test_exittime_zero_at_ends(self, write_config: Callable[..., Path], tmp_path: Path) -> None:
        config = write_config({**FOUR_PHASES, "bvp": {"c": 0.2, "d": 0.8, "grid": 40}})
        out = tmp_path / "exit"

        code = main(["exittime", "--config", str(config), "--out", str(out)])

        assert code == EXIT_OK
        rows = _read_csv(out / "bvp.csv")
        assert len(rows) == 41
        assert all(float(v) == 0.0 for k, v in rows[0].items() if k != "x")
        assert float(rows[20]["u11"]) > 0.0

    def test_domain_outside_interval(self, write_config: Callable[..., Path], tmp_path: Path) -> None:
        config = write_config(SCALAR)

        code = main(["hitprob", "--config", str(config), "--out", str(tmp_path), "--c", "0.5", "--d", "1.5"])

        assert code == EXIT_CONFIG


class TestOtherCommands:
    """Tests for invariant, thresholds and validate."""

    def test_invariant_uniform(self, write_config: Callable[..., Path], tmp_path: Path) -> None:
        config = write_config({**SCALAR, "invariant": {"grid": 11}})
        out = tmp_path / "inv"

        code = main(["invariant", "--config", str(config), "--out", str(out)])

        assert code == EXIT_OK
        rows = _read_csv(out / "invariant.csv")
        assert len(rows) == 11
        assert all(float(r["psi1"]) == pytest.approx(1.0) for r in rows)
        assert _read_json(out / "invariant.json")["normalization"] == pytest.approx(1.0)

    def test_thresholds_printed(
        self, write_config: Callable[..., Path], tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        config = write_config(
            {"model": {"model": "wright_fisher", "alpha": 0.0, "beta": 1.0, "k": 1.25, "phases": 5}}
        )

        code = main(["thresholds", "--config", str(config), "--out", str(tmp_path), "--k", "0.25", "1.75"])

        assert code == EXIT_OK
        printed = json.loads(capsys.readouterr().out)
        assert [r["regime"] for r in printed] == ["max-forward", "max-backward"]
        assert printed == _read_json(tmp_path / "thresholds.json")

    def test_validate(
        self, write_config: Callable[..., Path], tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        config = write_config(FOUR_PHASES)

        code = main(["validate", "--config", str(config), "--out", str(tmp_path)])

        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["validation"]["passed"]
        assert "symmetry" in payload
        assert "boundaries" in payload


class TestExitCodes:
    """Tests for error reporting and exit codes."""

    def test_k_violation_named(
        self, write_config: Callable[..., Path], tmp_path: Path, caplog: pytest.LogCaptureFixture
    ) -> None:
        config = write_config(
            {"model": {"model": "wright_fisher", "alpha": 0.0, "beta": 0.0, "k": 2.0, "phases": 3}}
        )

        with caplog.at_level(logging.ERROR):
            code = main(["simulate", "--config", str(config), "--out", str(tmp_path)])

        assert code == EXIT_CONFIG
        assert "k: constraint 0 < k < beta + 1 violated" in caplog.text
        assert not (tmp_path / "manifest.json").exists()

    def test_missing_config(self, tmp_path: Path) -> None:
        code = main(["simulate", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path)])

        assert code == EXIT_CONFIG

    def test_numerical_failure(
        self, write_config: Callable[..., Path], tmp_path: Path, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        def failing(ctx: CommandContext) -> None:
            raise NumericalError("no convergence")

        monkeypatch.setitem(commands.COMMANDS, "validate", failing)
        config = write_config(FOUR_PHASES)

        code = main(["validate", "--config", str(config), "--out", str(tmp_path)])

        assert code == EXIT_NUMERIC

    def test_config_flag_required(self) -> None:
        with pytest.raises(SystemExit) as excinfo:
            main(["simulate"])

        assert excinfo.value.code == 2
