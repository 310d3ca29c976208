"""Three Ornstein-Uhlenbeck phases on the real line with position-dependent switching."""

import numpy as np
from numpy.typing import ArrayLike

from src.core.polynomials import FloatArray
from src.models.base import SwitchingDiffusionModel

N_PHASES: int = 3


def _column(x: ArrayLike) -> FloatArray:
    return np.asarray(x, dtype=np.float64)[..., np.newaxis]


def _diffusion(x: ArrayLike) -> FloatArray:
    # sigma_i^2 = i^2
    xs: FloatArray = np.asarray(x, dtype=np.float64)
    return np.broadcast_to(np.diag([1.0, 4.0, 9.0]), xs.shape + (N_PHASES, N_PHASES)).copy()


def _drift(x: ArrayLike) -> FloatArray:
    # tau_i(x) = -i x
    rates: FloatArray = -_column(x) * np.array([1.0, 2.0, 3.0])
    out: FloatArray = np.zeros(rates.shape + (N_PHASES,))
    idx = np.arange(N_PHASES)
    out[..., idx, idx] = rates
    return out


def _intensity(x: ArrayLike) -> FloatArray:
    x2: FloatArray = np.asarray(x, dtype=np.float64) ** 2
    one_plus: FloatArray = 1.0 + x2
    decay: FloatArray = np.exp(-x2)
    rows: list[list[FloatArray]] = [
        [
            -(2.0 + x2) / one_plus,
            (5.0 + 3.0 * x2) / (6.0 * one_plus),
            (7.0 + 3.0 * x2) / (6.0 * one_plus),
        ],
        [1.0 + x2 / 400.0, -2.0 - x2 / 100.0, 1.0 + 3.0 * x2 / 400.0],
        [0.5 + 0.5 * decay, 0.5 + 0.5 * decay, -1.0 - decay],
    ]
    return np.stack([np.stack(row, axis=-1) for row in rows], axis=-2)


def ornstein_uhlenbeck_model() -> SwitchingDiffusionModel:
    return SwitchingDiffusionModel(
        name="ornstein_uhlenbeck",
        n_phases=N_PHASES,
        state_interval=(-np.inf, np.inf),
        diffusion=_diffusion,
        drift=_drift,
        intensity=_intensity,
    )
