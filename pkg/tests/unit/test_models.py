"""
Unit tests for switching diffusion models.

Tests validate_model() and the Wright-Fisher family from src/models/.
"""

import numpy as np
import pytest
from numpy.typing import ArrayLike

from src.core.errors import ParameterError
from src.core.polynomials import FloatArray
from src.models.base import BoundaryKind, SwitchingDiffusionModel, validate_model
from src.models.ornstein_uhlenbeck import ornstein_uhlenbeck_model
from src.models.wright_fisher import (
    WrightFisherParams,
    classify_boundaries,
    intensity_matrix,
    polynomial_form,
    wright_fisher_model,
)

INTERIOR: list[float] = np.linspace(0.05, 0.95, 50).tolist()


def _constant_model(
    a: list[list[float]], q: list[list[float]], name: str = "constructed"
) -> SwitchingDiffusionModel:
    a_mat = np.array(a)
    q_mat = np.array(q)
    n = a_mat.shape[0]

    def diffusion(x: ArrayLike) -> FloatArray:
        return np.broadcast_to(a_mat, np.shape(x) + (n, n)).copy()

    def drift(x: ArrayLike) -> FloatArray:
        return np.zeros(np.shape(x) + (n, n))

    def intensity(x: ArrayLike) -> FloatArray:
        return np.broadcast_to(q_mat, np.shape(x) + (n, n)).copy()

    return SwitchingDiffusionModel(
        name=name,
        n_phases=n,
        state_interval=(0.0, 1.0),
        diffusion=diffusion,
        drift=drift,
        intensity=intensity,
    )


class TestValidateModel:
    """Tests for validate_model()."""

    @pytest.mark.parametrize(
        ("alpha", "beta", "k", "n"),
        [(0.0, 0.0, 0.5, 4), (1.0, 1.0, 1.25, 3), (-0.5, -0.5, 0.25, 3), (2.0, 0.5, 1.0, 6)],
    )
    def test_wright_fisher_passes(self, alpha: float, beta: float, k: float, n: int) -> None:
        model = wright_fisher_model(WrightFisherParams(alpha, beta, k, n))

        report = validate_model(model, INTERIOR)

        assert report.passed
        assert report.max_row_sum < 1e-12

    def test_row_sum_violation(self) -> None:
        model = _constant_model(np.eye(2).tolist(), [[-1.0, 2.0], [1.0, -1.0]])

        report = validate_model(model, INTERIOR)

        assert not report.passed
        assert not report.check("Q row sums").passed
        assert report.check("A diagonal").passed

    def test_off_diagonal_diffusion(self) -> None:
        model = _constant_model([[1.0, 0.1], [0.1, 1.0]], [[-1.0, 1.0], [1.0, -1.0]])

        report = validate_model(model, INTERIOR)

        assert not report.check("A diagonal").passed
        assert report.check("Q row sums").passed

    def test_negative_off_diagonal_rate(self) -> None:
        model = _constant_model(np.eye(2).tolist(), [[1.0, -1.0], [1.0, -1.0]])

        report = validate_model(model, INTERIOR)

        assert not report.check("Q sign pattern").passed

    def test_points_outside_interval_rejected(self) -> None:
        model = wright_fisher_model(WrightFisherParams(0.0, 0.0, 0.5, 2))

        with pytest.raises(ParameterError):
            validate_model(model, [0.5, 1.0])

    def test_empty_sample_rejected(self) -> None:
        model = wright_fisher_model(WrightFisherParams(0.0, 0.0, 0.5, 2))

        with pytest.raises(ParameterError):
            validate_model(model, [])

    def test_ornstein_uhlenbeck_passes(self) -> None:
        report = validate_model(ornstein_uhlenbeck_model(), np.linspace(-3.0, 3.0, 25).tolist())

        assert report.passed
        assert report.max_row_sum < 1e-12


class TestWrightFisherParams:
    """Tests for parameter constraints and the Hahn weights."""

    def test_k_above_beta_plus_one(self) -> None:
        with pytest.raises(ParameterError) as excinfo:
            WrightFisherParams(alpha=0.0, beta=0.0, k=2.0, n_phases=3)

        assert excinfo.value.field == "k"
        assert "0 < k < beta + 1" in str(excinfo.value)

    def test_k_zero(self) -> None:
        with pytest.raises(ParameterError):
            WrightFisherParams(alpha=0.0, beta=0.0, k=0.0, n_phases=3)

    def test_alpha_at_minus_one(self) -> None:
        with pytest.raises(ParameterError) as excinfo:
            WrightFisherParams(alpha=-1.0, beta=0.0, k=0.5, n_phases=3)

        assert excinfo.value.field == "alpha"

    def test_no_phases(self) -> None:
        with pytest.raises(ParameterError):
            WrightFisherParams(alpha=0.0, beta=0.0, k=0.5, n_phases=0)

    def test_hahn_weights(self, four_phase_params: WrightFisherParams) -> None:
        np.testing.assert_allclose(
            four_phase_params.hahn_weights(), [0.3125, 0.1875, 0.1875, 0.3125], atol=1e-15
        )

    def test_hahn_weights_positive(self) -> None:
        p = WrightFisherParams(alpha=-0.5, beta=-0.5, k=0.1, n_phases=6)

        assert np.all(p.hahn_weights() > 0.0)


class TestWrightFisherCoefficients:
    """Tests for A, B, Q and W of the Wright-Fisher model."""

    def test_single_phase_has_no_switching(self) -> None:
        model = wright_fisher_model(WrightFisherParams(0.3, 1.2, 0.7, 1))

        np.testing.assert_array_equal(model.intensity(0.4), [[0.0]])

    def test_single_phase_jacobi_drift(self) -> None:
        alpha, beta = 0.3, 1.2
        model = wright_fisher_model(WrightFisherParams(alpha, beta, 0.7, 1))

        assert model.drift(0.4)[0, 0] == pytest.approx(alpha + 1 - 0.4 * (alpha + beta + 2))

    def test_last_phase_drift_is_jacobi(self, four_phase_model: SwitchingDiffusionModel) -> None:
        xs = np.linspace(0.05, 0.95, 7)

        np.testing.assert_allclose(four_phase_model.drift(xs)[:, -1, -1], 1.0 - 2.0 * xs)

    def test_row_sums_vanish(self) -> None:
        q = intensity_matrix(WrightFisherParams(0.5, 0.5, 0.75, 3), 0.3)

        np.testing.assert_allclose(q.sum(axis=1), 0.0, atol=1e-14)

    def test_rates_positive(self) -> None:
        p = WrightFisherParams(0.0, 1.0, 1.5, 5)
        xs = np.linspace(0.01, 0.99, 20)

        assert np.all(p.forward_rates(xs)[:, :-1] > 0.0)
        assert np.all(p.backward_rates(xs)[:, 1:] > 0.0)
        np.testing.assert_array_equal(p.forward_rates(xs)[:, -1], 0.0)
        np.testing.assert_array_equal(p.backward_rates(xs)[:, 0], 0.0)

    def test_intensity_clamped_at_upper_boundary(self, four_phase_model: SwitchingDiffusionModel) -> None:
        assert np.all(np.isfinite(four_phase_model.intensity(1.0)))

    def test_weight_diagonal_positive(self, four_phase_model: SwitchingDiffusionModel) -> None:
        assert four_phase_model.weight is not None
        w = four_phase_model.weight(np.linspace(0.05, 0.95, 10))

        np.testing.assert_array_equal(w - np.transpose(w, (0, 2, 1)), 0.0)
        assert np.all(np.diagonal(w, axis1=1, axis2=2) > 0.0)

    def test_polynomial_form_matches_closures(self, four_phase_params: WrightFisherParams) -> None:
        model = wright_fisher_model(four_phase_params)
        form = polynomial_form(four_phase_params)
        xs = np.linspace(0.05, 0.95, 9)

        np.testing.assert_allclose(form.diffusion(xs), model.diffusion(xs), atol=1e-13)
        np.testing.assert_allclose(form.drift(xs), model.drift(xs), atol=1e-13)
        np.testing.assert_allclose(
            form.intensity_numerator(xs) / (1.0 - xs)[:, np.newaxis, np.newaxis],
            model.intensity(xs),
            atol=1e-12,
        )
        assert model.weight is not None
        np.testing.assert_allclose(form.weight(xs), model.weight(xs), atol=1e-13)


class TestClassifyBoundaries:
    """Tests for classify_boundaries()."""

    def test_nonnegative_exponents_reflect(self) -> None:
        report = classify_boundaries(WrightFisherParams(0.5, 0.5, 0.5, 3))

        assert report.lower_absorbing_phases == []
        assert report.upper_absorbing_phases == []

    def test_negative_alpha_absorbs_last_phase_only(self) -> None:
        report = classify_boundaries(WrightFisherParams(-0.5, 0.5, 0.5, 3))

        assert report.lower_absorbing_phases == [3]
        assert report.upper_absorbing_phases == []
        assert report.for_phase(1).lower is BoundaryKind.REFLECTING

    def test_both_negative(self) -> None:
        report = classify_boundaries(WrightFisherParams(-0.5, -0.5, 0.25, 3))

        assert report.lower_absorbing_phases == [3]
        assert report.upper_absorbing_phases == [1, 2, 3]

    def test_report_serializes(self) -> None:
        data = classify_boundaries(WrightFisherParams(-0.5, 0.5, 0.5, 2)).to_dict()

        assert data["phases"][1] == {"phase": 2, "lower": "absorbing", "upper": "reflecting"}
