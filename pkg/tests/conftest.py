"""
Pytest configuration and shared fixtures.

Fixtures defined here are available to all test files automatically.
"""

import json
from pathlib import Path
from typing import Any, Callable

import pytest

from src.models.base import SwitchingDiffusionModel
from src.models.wright_fisher import WrightFisherParams, wright_fisher_model
from src.spectral.basis import SpectralBasis, build_spectral_basis


@pytest.fixture(scope="session")
def four_phase_params() -> WrightFisherParams:
    """N=4, alpha=beta=0, k=1/2: the reference transition matrix case."""
    return WrightFisherParams(alpha=0.0, beta=0.0, k=0.5, n_phases=4)


@pytest.fixture(scope="session")
def four_phase_model(four_phase_params: WrightFisherParams) -> SwitchingDiffusionModel:
    return wright_fisher_model(four_phase_params)


@pytest.fixture(scope="session")
def four_phase_basis(
    four_phase_params: WrightFisherParams, four_phase_model: SwitchingDiffusionModel
) -> SpectralBasis:
    """Truncation 12 basis for the four-phase model."""
    return build_spectral_basis(four_phase_model, four_phase_params, 12)


@pytest.fixture(scope="session")
def two_phase_params() -> WrightFisherParams:
    """N=2, alpha=beta=1, k=1/2."""
    return WrightFisherParams(alpha=1.0, beta=1.0, k=0.5, n_phases=2)


@pytest.fixture(scope="session")
def two_phase_model(two_phase_params: WrightFisherParams) -> SwitchingDiffusionModel:
    return wright_fisher_model(two_phase_params)


@pytest.fixture(scope="session")
def scalar_params() -> WrightFisherParams:
    """N=1, alpha=beta=0: the scalar Jacobi diffusion with uniform invariant law."""
    return WrightFisherParams(alpha=0.0, beta=0.0, k=0.5, n_phases=1)


@pytest.fixture(scope="session")
def scalar_model(scalar_params: WrightFisherParams) -> SwitchingDiffusionModel:
    return wright_fisher_model(scalar_params)


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[..., Path]:
    """Write a run config dict to tmp_path and return its path."""

    def _write(data: dict[str, Any], name: str = "run.json") -> Path:
        path: Path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _write


@pytest.fixture(scope="session")
def reference_matrix() -> list[list[float]]:
    """Pr{X_1 in (3/4, 1), Y_1 = j | X_0 = 1/2, Y_0 = i} for the four-phase model."""
    return [
        [0.12410905, 0.08138740, 0.08920446, 0.1633878],
        [0.11006872, 0.07334748, 0.08181737, 0.1527569],
        [0.09668381, 0.06555764, 0.07453306, 0.1420720],
        [0.08394494, 0.05801744, 0.06735379, 0.1313385],
    ]
