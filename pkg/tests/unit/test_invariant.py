"""
Unit tests for the invariant distribution.

Tests src/spectral/invariant.py.
"""

import numpy as np
import pytest
from scipy.integrate import trapezoid

from src.models.wright_fisher import WrightFisherParams
from src.spectral.invariant import closed_form_normalization, invariant_distribution

INTERIOR: list[float] = np.linspace(0.02, 0.98, 30).tolist()


class TestClosedFormNormalization:
    """Tests for closed_form_normalization()."""

    def test_scalar_uniform(self) -> None:
        assert closed_form_normalization(WrightFisherParams(0.0, 0.0, 0.5, 1)) == pytest.approx(1.0)

    def test_two_phases(self) -> None:
        c = closed_form_normalization(WrightFisherParams(1.0, 1.0, 1.25, 2))

        assert c == pytest.approx(12.0 / 2.75)

    def test_three_phases(self) -> None:
        c = closed_form_normalization(WrightFisherParams(0.0, 0.0, 0.5, 3))

        assert c == pytest.approx(1.6)


class TestInvariantDistribution:
    """Tests for invariant_distribution()."""

    def test_scalar_is_uniform(self) -> None:
        dist = invariant_distribution(WrightFisherParams(0.0, 0.0, 0.5, 1))

        np.testing.assert_allclose(dist.components(np.linspace(0.0, 1.0, 11))[:, 0], 1.0)

    def test_two_phase_components(self) -> None:
        dist = invariant_distribution(WrightFisherParams(1.0, 1.0, 1.25, 2))

        psi = dist.components([0.5])[0]

        np.testing.assert_allclose(psi, [15.0 / 2.75 * 0.125, 9.0 / 2.75 * 0.25], rtol=1e-14)

    @pytest.mark.parametrize(("alpha", "beta", "k", "n"), [(0.0, 0.0, 0.5, 4), (1.0, 1.0, 1.25, 5), (2.5, 0.0, 0.3, 6)])
    def test_components_equal_scaled_hahn_weights(self, alpha: float, beta: float, k: float, n: int) -> None:
        params = WrightFisherParams(alpha, beta, k, n)
        ys = np.asarray(INTERIOR)[:, np.newaxis]

        expected = (
            closed_form_normalization(params)
            * params.hahn_weights()
            * ys ** (alpha + params.j_diag)
            * (1.0 - ys) ** beta
        )

        np.testing.assert_allclose(invariant_distribution(params).components(INTERIOR), expected, rtol=1e-12)

    @pytest.mark.parametrize(
        ("alpha", "beta", "k", "n"),
        [(0.0, 0.0, 0.5, 4), (1.0, 1.0, 1.25, 3), (1.0, 1.0, 1.25, 5), (-0.5, 0.5, 0.5, 3), (2.5, 0.0, 0.3, 6)],
    )
    def test_total_mass_one(self, alpha: float, beta: float, k: float, n: int) -> None:
        dist = invariant_distribution(WrightFisherParams(alpha, beta, k, n))

        assert dist.total_mass() == pytest.approx(1.0, abs=1e-10)

    def test_routes_agree(self) -> None:
        dist = invariant_distribution(WrightFisherParams(1.0, 1.0, 1.25, 3))

        assert dist.route_difference(INTERIOR) < 1e-10
        assert dist.normalization == pytest.approx(dist.generic_normalization, rel=1e-12)

    def test_stationary(self) -> None:
        dist = invariant_distribution(WrightFisherParams(1.0, 1.0, 1.25, 3))

        assert dist.stationarity_residual(INTERIOR) < 1e-8

    def test_nonnegative(self) -> None:
        dist = invariant_distribution(WrightFisherParams(1.0, 1.0, 1.25, 5))

        assert np.all(dist.components(INTERIOR) >= 0.0)
        assert np.all(dist.phase_masses() > 0.0)

    def test_trapezoid_mass(self) -> None:
        dist = invariant_distribution(WrightFisherParams(1.0, 1.0, 1.25, 3))
        ys = np.linspace(0.0, 1.0, 4001)

        mass = float(np.sum(trapezoid(dist.components(ys), ys, axis=0)))

        assert mass == pytest.approx(1.0, abs=1e-6)

    def test_bin_masses_partition_phase_masses(self) -> None:
        dist = invariant_distribution(WrightFisherParams(0.0, 0.0, 0.5, 4))

        bins = dist.bin_masses(np.linspace(0.0, 1.0, 21))

        assert bins.shape == (20, 4)
        np.testing.assert_allclose(bins.sum(axis=0), dist.phase_masses(), atol=1e-14)

    def test_negative_exponents_flagged(self) -> None:
        dist = invariant_distribution(WrightFisherParams(-0.5, 0.5, 0.5, 3))

        assert dist.boundary_atoms_unrepresented
        assert dist.to_dict()["boundary_atoms_unrepresented"] is True

    def test_nonnegative_exponents_not_flagged(self) -> None:
        assert not invariant_distribution(WrightFisherParams(1.0, 0.0, 0.5, 2)).boundary_atoms_unrepresented
