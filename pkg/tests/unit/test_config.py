"""
Unit tests for run configs and process settings.

Tests src/config/schema.py and src/config/settings.py.
"""

import json
from pathlib import Path
from typing import Any, Callable

import pytest
from pydantic import ValidationError

from src.config.schema import (
    OrnsteinUhlenbeckConfig,
    RunConfig,
    WrightFisherConfig,
    build_model,
    load_run_config,
    wright_fisher_params,
)
from src.config.settings import Settings, get_settings
from src.core.errors import ParameterError
from src.montecarlo.engine import BoundaryPolicy

WRIGHT_FISHER: dict[str, Any] = {
    "model": "wright_fisher",
    "alpha": 0.0,
    "beta": 0.0,
    "k": 0.5,
    "phases": 4,
}


class TestRunConfig:
    """Tests for RunConfig validation."""

    def test_minimal_config_defaults(self) -> None:
        cfg = RunConfig.model_validate({"model": WRIGHT_FISHER})

        assert isinstance(cfg.model, WrightFisherConfig)
        assert cfg.simulation.paths == 1
        assert cfg.simulation.boundary_policy is BoundaryPolicy.AUTO
        assert cfg.recurrence.epsilons == [0.04, 0.02, 0.01, 0.005]
        assert cfg.truncation is None

    def test_model_selected_by_name(self) -> None:
        cfg = RunConfig.model_validate({"model": {"model": "ornstein_uhlenbeck"}})

        assert isinstance(cfg.model, OrnsteinUhlenbeckConfig)
        assert build_model(cfg).name == "ornstein_uhlenbeck"

    def test_k_constraint_names_field(self) -> None:
        data = {"model": {**WRIGHT_FISHER, "beta": 0.0, "k": 2.0}}

        with pytest.raises(ValidationError) as excinfo:
            RunConfig.model_validate(data)

        assert "k: constraint 0 < k < beta + 1 violated" in str(excinfo.value)

    def test_alpha_bound(self) -> None:
        with pytest.raises(ValidationError) as excinfo:
            RunConfig.model_validate({"model": {**WRIGHT_FISHER, "alpha": -1.0}})

        assert "alpha" in str(excinfo.value)

    def test_unknown_field_rejected(self) -> None:
        with pytest.raises(ValidationError):
            RunConfig.model_validate({"model": WRIGHT_FISHER, "simulation": {"stepsize": 0.1}})

    def test_unknown_model_rejected(self) -> None:
        with pytest.raises(ValidationError):
            RunConfig.model_validate({"model": {"model": "heston"}})

    def test_bvp_domain_order(self) -> None:
        with pytest.raises(ValidationError):
            RunConfig.model_validate({"model": WRIGHT_FISHER, "bvp": {"c": 0.8, "d": 0.2}})

    def test_short_epsilon_schedule(self) -> None:
        with pytest.raises(ValidationError):
            RunConfig.model_validate({"model": WRIGHT_FISHER, "recurrence": {"epsilons": [0.1, 0.05]}})

    def test_sim_config(self) -> None:
        cfg = RunConfig.model_validate(
            {
                "model": WRIGHT_FISHER,
                "simulation": {"step": 0.01, "horizon": 2.0, "paths": 5, "seed": 9, "boundary_policy": "clamp"},
            }
        )

        sim = cfg.simulation.sim_config()

        assert sim.n_steps == 200
        assert sim.n_paths == 5
        assert sim.boundary_policy is BoundaryPolicy.CLAMP

    def test_build_wright_fisher(self) -> None:
        cfg = RunConfig.model_validate({"model": WRIGHT_FISHER})

        model = build_model(cfg)

        assert model.n_phases == 4
        assert model.state_interval == (0.0, 1.0)
        assert wright_fisher_params(cfg, "density").k == 0.5

    def test_wright_fisher_only_command(self) -> None:
        cfg = RunConfig.model_validate({"model": {"model": "ornstein_uhlenbeck"}})

        with pytest.raises(ParameterError) as excinfo:
            wright_fisher_params(cfg, "density")

        assert excinfo.value.field == "model"


class TestLoadRunConfig:
    """Tests for load_run_config()."""

    def test_reads_file(self, write_config: Callable[..., Path]) -> None:
        path = write_config({"model": WRIGHT_FISHER, "density": {"t": 0.5}})

        cfg = load_run_config(path)

        assert cfg.density.t == 0.5

    def test_reads_manifest(self, write_config: Callable[..., Path]) -> None:
        manifest = {
            "command": "simulate",
            "seed": 3,
            "config": {"model": WRIGHT_FISHER, "simulation": {"seed": 3}},
        }
        path = write_config(manifest, name="manifest.json")

        cfg = load_run_config(path)

        assert cfg.simulation.seed == 3

    def test_invalid_json(self, tmp_path: Path) -> None:
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")

        with pytest.raises(json.JSONDecodeError):
            load_run_config(path)

    def test_missing_file(self, tmp_path: Path) -> None:
        with pytest.raises(OSError):
            load_run_config(tmp_path / "absent.json")


class TestSettings:
    """Tests for Settings and get_settings()."""

    def test_defaults(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.delenv("SWITCHDIFF_THREADS", raising=False)
        monkeypatch.delenv("SWITCHDIFF_TRUNCATION", raising=False)

        settings = Settings(_env_file=None)

        assert settings.threads == 1
        assert settings.truncation == 12

    def test_environment_prefix(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("SWITCHDIFF_THREADS", "4")
        monkeypatch.setenv("SWITCHDIFF_GRID", "800")
        get_settings.cache_clear()

        settings = get_settings()

        assert settings.threads == 4
        assert settings.grid == 800
        get_settings.cache_clear()

    def test_invalid_value(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("SWITCHDIFF_THREADS", "0")

        with pytest.raises(ValidationError):
            Settings(_env_file=None)
