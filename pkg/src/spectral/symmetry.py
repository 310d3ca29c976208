"""
Symmetric-pair checks for a weight W and the operator A f''/2 + B f' + Q f.

The pair is symmetric when
    A^T W = W A
    B^T W = (W A)' - W B
    Q^T W = (W A)''/2 - (W B)' + W Q
on the interior of the state interval; the operator is then self-adjoint in
the W inner product.
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike

from src.core.errors import ParameterError
from src.core.polynomials import UNIT_INTERVAL, FloatArray, JacobiWeighted, MatrixPolynomial
from src.models.base import CoefficientFn, PolynomialForm, SwitchingDiffusionModel
from src.quadrature.inner_product import weight_at_nodes
from src.spectral.basis import SpectralBasis

logger: logging.Logger = logging.getLogger(__name__)

FD_STEP: float = 1e-6


@dataclass(frozen=True)
class SymmetryReport:
    commutation: float
    first_order: float
    zeroth_order: float
    worst_x: float
    method: str

    @property
    def max_residual(self) -> float:
        return max(self.commutation, self.first_order, self.zeroth_order)

    def to_dict(self) -> dict[str, Any]:
        return {
            "commutation": self.commutation,
            "first_order": self.first_order,
            "zeroth_order": self.zeroth_order,
            "worst_x": self.worst_x,
            "method": self.method,
        }


def _product(f: CoefficientFn, g: CoefficientFn) -> Callable[[ArrayLike], FloatArray]:
    def h(x: ArrayLike) -> FloatArray:
        return f(x) @ g(x)

    return h


def _fd_first(f: Callable[[ArrayLike], FloatArray], x: FloatArray) -> FloatArray:
    return (f(x + FD_STEP) - f(x - FD_STEP)) / (2.0 * FD_STEP)


def _fd_second(f: Callable[[ArrayLike], FloatArray], x: FloatArray) -> FloatArray:
    return (f(x + FD_STEP) - 2.0 * f(x) + f(x - FD_STEP)) / FD_STEP**2


def _derivatives(
    m: SwitchingDiffusionModel, weight: CoefficientFn, xs: FloatArray
) -> tuple[FloatArray, FloatArray, FloatArray, str]:
    """(W A)', (W A)'', (W B)' at xs, analytically when the model has a polynomial form."""
    form: PolynomialForm | None = m.polynomial_form
    if form is not None:
        wa: JacobiWeighted = form.weight.times(form.diffusion)
        wb: JacobiWeighted = form.weight.times(form.drift)
        d_wa: JacobiWeighted = wa.derivative()
        return d_wa(xs), d_wa.derivative()(xs), wb.derivative()(xs), "analytic"

    wa_fn: Callable[[ArrayLike], FloatArray] = _product(weight, m.diffusion)
    wb_fn: Callable[[ArrayLike], FloatArray] = _product(weight, m.drift)
    return _fd_first(wa_fn, xs), _fd_second(wa_fn, xs), _fd_first(wb_fn, xs), "finite-difference"


def verify_symmetry_equations(
    m: SwitchingDiffusionModel, sample_points: Sequence[float]
) -> SymmetryReport:
    if m.weight is None:
        raise ParameterError("weight", f"model {m.name} does not supply W")
    if len(sample_points) == 0:
        raise ParameterError("sample_points", "must not be empty")
    xs: FloatArray = np.asarray(sample_points, dtype=np.float64)

    w: FloatArray = m.weight(xs)
    a: FloatArray = m.diffusion(xs)
    b: FloatArray = m.drift(xs)
    q: FloatArray = m.intensity(xs)
    d_wa, dd_wa, d_wb, method = _derivatives(m, m.weight, xs)

    def t(arr: FloatArray) -> FloatArray:
        return np.swapaxes(arr, -1, -2)

    first: FloatArray = t(a) @ w - w @ a
    second: FloatArray = t(b) @ w - d_wa + w @ b
    third: FloatArray = t(q) @ w - 0.5 * dd_wa + d_wb - w @ q

    per_point: FloatArray = np.max(np.abs(np.stack([first, second, third])), axis=(2, 3))
    worst: int = int(np.argmax(np.max(per_point, axis=0)))
    report: SymmetryReport = SymmetryReport(
        commutation=float(np.max(per_point[0])),
        first_order=float(np.max(per_point[1])),
        zeroth_order=float(np.max(per_point[2])),
        worst_x=float(xs[worst]),
        method=method,
    )
    logger.debug("Symmetry residuals %s", report.to_dict())
    return report


def _applied_at_nodes(basis: SpectralBasis, nodes: FloatArray) -> FloatArray:
    """(A f''/2 + B f' + Q f) for every mode via the cleared form, shape (nodes, N, K)."""
    form: PolynomialForm | None = basis.model.polynomial_form
    if form is None:
        raise ParameterError("model", "self-adjointness check needs a polynomial form")
    dim: int = basis.n_phases
    x: MatrixPolynomial = MatrixPolynomial.variable(dim, UNIT_INTERVAL)
    one_minus_x: MatrixPolynomial = MatrixPolynomial.identity(dim, UNIT_INTERVAL) - x
    second: MatrixPolynomial = (one_minus_x @ form.diffusion).scaled(0.5)
    first: MatrixPolynomial = one_minus_x @ form.drift

    columns: list[FloatArray] = []
    for mode in basis.modes:
        e: MatrixPolynomial = mode.as_matrix_polynomial()
        de: MatrixPolynomial = e.derivative()
        cleared: MatrixPolynomial = second @ de.derivative() + first @ de + form.intensity_numerator @ e
        columns.append(cleared(nodes)[:, :, mode.phase] / (1.0 - nodes)[:, np.newaxis])
    return np.stack(columns, axis=-1)


def self_adjointness_residual(basis: SpectralBasis, n_max: int | None = None) -> float:
    """max |<A phi_a, phi_b>_W - <phi_a, A phi_b>_W| over modes with n < n_max."""
    limit: int = basis.truncation if n_max is None else n_max
    keep: list[int] = [i for i, mode in enumerate(basis.modes) if mode.n < limit]
    nodes: FloatArray = basis.rule.nodes
    values: FloatArray = basis.mode_values(nodes)[..., keep]
    applied: FloatArray = _applied_at_nodes(basis, nodes)[..., keep]
    w_vals: FloatArray = weight_at_nodes(basis.weight, basis.rule)
    mixed: FloatArray = np.einsum(
        "k,kjb,kjl,kla->ab", basis.rule.weights, values, w_vals, applied, optimize=True
    )
    return float(np.max(np.abs(mixed - mixed.T)))
