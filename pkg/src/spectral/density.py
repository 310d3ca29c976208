"""
Spectral transition density P(t; x, y) = sum_n Phi_n(x) exp(t Gamma_n) Phi_n(y)^T W(y).

The sum runs over every mode of the basis, so degenerate eigenspaces always
enter whole. Residuals of the backward and forward equations use exact
polynomial derivatives and exact time derivatives of the exponentials.
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.core.errors import ParameterError
from src.core.polynomials import FloatArray, JacobiWeighted, MatrixPolynomial, PhaseMatrix
from src.models.base import PolynomialForm, SwitchingDiffusionModel
from src.quadrature.gauss import QuadratureRule, gauss_jacobi_rule, gauss_legendre_rule
from src.spectral.basis import SpectralBasis

logger: logging.Logger = logging.getLogger(__name__)

DEFAULT_INTERVAL_NODES: int = 64
TAIL_WARNING: float = 1e-6


def _check_time(t: float) -> None:
    if not t > 0.0:
        raise ParameterError("t", f"must be > 0, got {t}")


def _check_interior(name: str, x: float) -> None:
    if not 0.0 < x < 1.0:
        raise ParameterError(name, f"must lie in (0, 1), got {x}")


def transition_density(basis: SpectralBasis, t: float, x: float, y: float) -> PhaseMatrix:
    """P(t; x, y) as an N x N matrix, row i the start phase and column j the end phase."""
    _check_time(t)
    _check_interior("x", x)
    _check_interior("y", y)
    return density_rows(basis, t, x, np.array([y]))[0]


def density_rows(basis: SpectralBasis, t: float, x: float, ys: FloatArray) -> FloatArray:
    """P(t; x, y) for each y in ys, shape (len(ys), N, N)."""
    return _rows(basis, t, x, ys, basis.weight(ys))


def _rows(basis: SpectralBasis, t: float, x: float, ys: FloatArray, w_y: FloatArray) -> FloatArray:
    phi_x: FloatArray = basis.mode_values(x)
    phi_y: FloatArray = basis.mode_values(ys)
    decay: FloatArray = np.exp(t * basis.gammas)
    return np.einsum("ia,a,kja,kjl->kil", phi_x, decay, phi_y, w_y, optimize=True)


def truncation_tail(basis: SpectralBasis, t: float) -> float:
    """exp(t * max_j Gamma_M(j)), the largest weight of any dropped mode."""
    _check_time(t)
    dropped: FloatArray = basis.params.eigenvalue_diagonal(basis.truncation)
    return float(np.exp(t * np.max(dropped)))


@dataclass(frozen=True, eq=False)
class IntervalProbability:
    matrix: PhaseMatrix
    tail: float
    truncation: int
    n_nodes: int


def transition_probability(
    basis: SpectralBasis,
    t: float,
    x: float,
    interval: tuple[float, float],
    n_nodes: int = DEFAULT_INTERVAL_NODES,
) -> PhaseMatrix:
    return interval_probability(basis, t, x, interval, n_nodes).matrix


def _interval_rule(weight: JacobiWeighted, lo: float, hi: float, n_nodes: int) -> QuadratureRule:
    """Rule on (lo, hi) carrying the weight exponent of each end that touches 0 or 1."""
    a: float = weight.a if lo == 0.0 else 0.0
    b: float = weight.b if hi == 1.0 else 0.0
    if a == 0.0 and b == 0.0:
        return gauss_legendre_rule(lo, hi, n_nodes)
    unit: QuadratureRule = gauss_jacobi_rule(a, b, n_nodes)
    width: float = hi - lo
    return QuadratureRule(
        nodes=lo + width * unit.nodes,
        weights=width ** (1.0 + a + b) * unit.weights,
        alpha=a,
        beta=b,
        interval=(lo, hi),
    )


def interval_probability(
    basis: SpectralBasis,
    t: float,
    x: float,
    interval: tuple[float, float],
    n_nodes: int = DEFAULT_INTERVAL_NODES,
) -> IntervalProbability:
    """
    Integral of P(t; x, y) over the interval, with the tail estimate.

    Gauss-Legendre inside (0, 1); an end at 0 or 1 switches to Gauss-Jacobi so the
    power of the weight at that end is integrated exactly.
    """
    _check_time(t)
    _check_interior("x", x)
    lo, hi = interval
    if not lo < hi:
        raise ParameterError("interval", f"empty interval ({lo}, {hi})")
    if lo < 0.0 or hi > 1.0:
        raise ParameterError("interval", f"({lo}, {hi}) is not inside (0, 1)")

    rule: QuadratureRule = _interval_rule(basis.weight, lo, hi, n_nodes)
    reduced: JacobiWeighted = JacobiWeighted(
        basis.weight.a - rule.alpha, basis.weight.b - rule.beta, basis.weight.poly
    )
    rows: FloatArray = _rows(basis, t, x, rule.nodes, reduced(rule.nodes))
    tail: float = truncation_tail(basis, t)
    if tail > TAIL_WARNING:
        logger.warning(
            "Truncation tail %.3e at t=%s with %d eigenfunctions", tail, t, basis.truncation
        )
    return IntervalProbability(
        matrix=rule.integrate(rows), tail=tail, truncation=basis.truncation, n_nodes=n_nodes
    )


def long_time_limit(basis: SpectralBasis, x: float, y: FloatArray) -> FloatArray:
    """Phi_0(x) E_11 Phi_0(y)^T W(y): the zero-eigenvalue term alone, shape (len(y), N, N)."""
    zero: list[int] = [i for i, m in enumerate(basis.modes) if m.n == 0 and m.phase == 0]
    ys: FloatArray = np.asarray(y, dtype=np.float64)
    phi_y: FloatArray = basis.mode_values(ys)[..., zero[0]]
    phi_x: FloatArray = basis.mode_values(x)[..., zero[0]]
    w_y: FloatArray = basis.weight(ys)
    return np.einsum("i,kj,kjl->kil", phi_x, phi_y, w_y)


def _form(basis: SpectralBasis) -> PolynomialForm:
    form: PolynomialForm | None = basis.model.polynomial_form
    if form is None:
        raise ParameterError("model", "residuals need a polynomial form")
    return form


def backward_equation_residual(basis: SpectralBasis, t: float, x: float, y: float) -> float:
    """Max-norm of dP/dt - (A/2 P_xx + B P_x + Q P) at (t, x, y)."""
    _check_time(t)
    _check_interior("x", x)
    _check_interior("y", y)
    model: SwitchingDiffusionModel = basis.model
    a_x: PhaseMatrix = model.diffusion(x)
    b_x: PhaseMatrix = model.drift(x)
    q_x: PhaseMatrix = model.intensity(x)
    w_y: PhaseMatrix = basis.weight(y)

    residual: FloatArray = np.zeros((basis.n_phases, basis.n_phases))
    for mode in basis.modes:
        e: MatrixPolynomial = mode.as_matrix_polynomial()
        de: MatrixPolynomial = e.derivative()
        left: PhaseMatrix = 0.5 * a_x @ de.derivative()(x) + b_x @ de(x) + q_x @ e(x)
        right: PhaseMatrix = e(y).T @ w_y
        decay: float = float(np.exp(t * mode.gamma))
        residual += decay * (mode.gamma * e(x) - left) @ right
    return float(np.max(np.abs(residual)))


def forward_equation_residual(basis: SpectralBasis, t: float, x: float, y: float) -> float:
    """Max-norm of dP/dt - ((P A)_yy / 2 - (P B)_y + P Q) at (t, x, y)."""
    _check_time(t)
    _check_interior("x", x)
    _check_interior("y", y)
    form: PolynomialForm = _form(basis)
    weight: JacobiWeighted = basis.weight
    q_y: PhaseMatrix = basis.model.intensity(y)

    residual: FloatArray = np.zeros((basis.n_phases, basis.n_phases))
    for mode in basis.modes:
        e: MatrixPolynomial = mode.as_matrix_polynomial()
        row: JacobiWeighted = JacobiWeighted(weight.a, weight.b, e.transpose() @ weight.poly)
        row_a: JacobiWeighted = row.times(form.diffusion)
        row_b: JacobiWeighted = row.times(form.drift)
        right: PhaseMatrix = (
            0.5 * row_a.derivative().derivative()(y) - row_b.derivative()(y) + row(y) @ q_y
        )
        decay: float = float(np.exp(t * mode.gamma))
        residual += decay * e(x) @ (mode.gamma * row(y) - right)
    return float(np.max(np.abs(residual)))
