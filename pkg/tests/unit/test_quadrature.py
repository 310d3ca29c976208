"""
Unit tests for Gauss quadrature and the matrix-valued inner product.

Tests src/quadrature/gauss.py and src/quadrature/inner_product.py.
"""

import numpy as np
import pytest
from scipy.special import beta as beta_fn

from src.core.errors import DimensionError, ParameterError
from src.core.polynomials import UNIT_INTERVAL, MatrixPolynomial
from src.models.wright_fisher import WrightFisherParams, polynomial_form
from src.quadrature.gauss import default_node_count, gauss_jacobi_rule, gauss_legendre_rule
from src.quadrature.inner_product import matrix_inner_product, scalar_product


class TestGaussJacobiRule:
    """Tests for gauss_jacobi_rule()."""

    def test_single_node_midpoint(self) -> None:
        rule = gauss_jacobi_rule(0.0, 0.0, 1)

        assert rule.nodes[0] == pytest.approx(0.5)
        assert rule.weights[0] == pytest.approx(1.0)

    def test_exact_through_degree_nine(self) -> None:
        rule = gauss_jacobi_rule(0.0, 0.0, 5)

        assert rule.integrate(rule.nodes**9) == pytest.approx(0.1, abs=1e-14)

    def test_weight_sum_is_beta_function(self) -> None:
        rule = gauss_jacobi_rule(1.0, 2.0, 2)

        assert float(np.sum(rule.weights)) == pytest.approx(1.0 / 12.0, rel=1e-13)

    @pytest.mark.parametrize(("alpha", "beta"), [(0.5, -0.5), (-0.7, 1.3), (2.0, 0.0)])
    def test_jacobi_moments(self, alpha: float, beta: float) -> None:
        rule = gauss_jacobi_rule(alpha, beta, 6)

        for m in range(2 * rule.n_nodes):
            expected = beta_fn(alpha + m + 1.0, beta + 1.0)
            assert rule.integrate(rule.nodes**m) == pytest.approx(expected, rel=1e-12)

    def test_nodes_increasing_and_interior(self) -> None:
        rule = gauss_jacobi_rule(-0.5, -0.5, 12)

        assert np.all(np.diff(rule.nodes) > 0.0)
        assert rule.nodes[0] > 0.0
        assert rule.nodes[-1] < 1.0
        assert np.all(rule.weights > 0.0)

    def test_exponent_out_of_range(self) -> None:
        with pytest.raises(ParameterError):
            gauss_jacobi_rule(-1.0, 0.0, 3)

    def test_no_nodes(self) -> None:
        with pytest.raises(ParameterError):
            gauss_jacobi_rule(0.0, 0.0, 0)


class TestGaussLegendreRule:
    """Tests for gauss_legendre_rule()."""

    def test_subinterval_cubic(self) -> None:
        rule = gauss_legendre_rule(0.75, 1.0, 2)

        assert rule.integrate(rule.nodes**3) == pytest.approx((1.0 - 0.75**4) / 4.0)

    def test_empty_interval(self) -> None:
        with pytest.raises(ParameterError):
            gauss_legendre_rule(0.5, 0.5, 4)


class TestDefaultNodeCount:
    """Tests for default_node_count()."""

    def test_rounded_up_to_even(self) -> None:
        assert default_node_count(3, 2) == 8
        assert default_node_count(4, 2) == 8


class TestMatrixInnerProduct:
    """Tests for matrix_inner_product() and scalar_product()."""

    def test_unit_mass(self) -> None:
        form = polynomial_form(WrightFisherParams(0.0, 0.0, 0.5, 1))
        one = MatrixPolynomial.identity(1, UNIT_INTERVAL)

        result = matrix_inner_product(one, one, form.weight, gauss_jacobi_rule(0.0, 0.0, 4))

        assert result[0, 0] == pytest.approx(1.0)

    def test_first_moment(self) -> None:
        form = polynomial_form(WrightFisherParams(0.0, 0.0, 0.5, 1))
        one = MatrixPolynomial.identity(1, UNIT_INTERVAL)
        x = MatrixPolynomial.variable(1, UNIT_INTERVAL)

        result = matrix_inner_product(one, x, form.weight, gauss_jacobi_rule(0.0, 0.0, 4))

        assert result[0, 0] == pytest.approx(0.5)

    def test_identity_gives_total_mass(self) -> None:
        p = WrightFisherParams(1.0, 1.0, 0.5, 2)
        form = polynomial_form(p)
        one = MatrixPolynomial.identity(2, UNIT_INTERVAL)
        # omega_1 B(alpha+2, beta+1) + omega_2 B(alpha+1, beta+1)
        omega = p.hahn_weights()
        expected = omega[0] * beta_fn(3.0, 2.0) + omega[1] * beta_fn(2.0, 2.0)

        result = scalar_product(one, one, form.weight, gauss_jacobi_rule(1.0, 1.0, 6))

        assert result == pytest.approx(expected, rel=1e-13)

    def test_zero_function(self) -> None:
        form = polynomial_form(WrightFisherParams(0.0, 0.0, 0.5, 3))
        zero = MatrixPolynomial.zero(3, UNIT_INTERVAL)

        assert scalar_product(zero, zero, form.weight, gauss_jacobi_rule(0.0, 0.0, 6)) == 0.0

    def test_conjugate_symmetry_and_positivity(self) -> None:
        rng = np.random.default_rng(11)
        form = polynomial_form(WrightFisherParams(0.5, 1.5, 0.75, 3))
        rule = gauss_jacobi_rule(0.5, 1.5, 10)
        f = MatrixPolynomial(rng.normal(size=(4, 3, 3)), UNIT_INTERVAL)
        g = MatrixPolynomial(rng.normal(size=(3, 3, 3)), UNIT_INTERVAL)

        fg = matrix_inner_product(f, g, form.weight, rule)
        gf = matrix_inner_product(g, f, form.weight, rule)

        np.testing.assert_allclose(fg, gf.T, atol=1e-12)
        assert scalar_product(f, f, form.weight, rule) > 0.0

    def test_right_module_linearity(self) -> None:
        rng = np.random.default_rng(5)
        form = polynomial_form(WrightFisherParams(0.0, 0.0, 0.5, 2))
        rule = gauss_jacobi_rule(0.0, 0.0, 8)
        f = MatrixPolynomial(rng.normal(size=(3, 2, 2)), UNIT_INTERVAL)
        g = MatrixPolynomial(rng.normal(size=(2, 2, 2)), UNIT_INTERVAL)
        c = rng.normal(size=(2, 2))

        left = matrix_inner_product(f.right_multiply(c), g, form.weight, rule)
        right = matrix_inner_product(f, g, form.weight, rule) @ c

        np.testing.assert_allclose(left, right, atol=1e-12)

    def test_refinement_stable(self) -> None:
        rng = np.random.default_rng(9)
        form = polynomial_form(WrightFisherParams(1.0, 0.5, 1.0, 3))
        f = MatrixPolynomial(rng.normal(size=(3, 3, 3)), UNIT_INTERVAL)

        coarse = matrix_inner_product(f, f, form.weight, gauss_jacobi_rule(1.0, 0.5, 6))
        fine = matrix_inner_product(f, f, form.weight, gauss_jacobi_rule(1.0, 0.5, 12))

        np.testing.assert_allclose(coarse, fine, atol=1e-12)

    def test_dimension_mismatch(self) -> None:
        form = polynomial_form(WrightFisherParams(0.0, 0.0, 0.5, 2))

        with pytest.raises(DimensionError):
            matrix_inner_product(
                MatrixPolynomial.identity(2, UNIT_INTERVAL),
                MatrixPolynomial.identity(3, UNIT_INTERVAL),
                form.weight,
                gauss_jacobi_rule(0.0, 0.0, 4),
            )
