"""Matrix-valued inner product <F, G>_W = integral of G(x)^T W(x) F(x) dx."""

from typing import Callable

import numpy as np
from numpy.typing import ArrayLike

from src.core.errors import DimensionError
from src.core.polynomials import FloatArray, JacobiWeighted, MatrixPolynomial, PhaseMatrix
from src.quadrature.gauss import QuadratureRule

WeightLike = JacobiWeighted | Callable[[ArrayLike], FloatArray]


def weight_at_nodes(w: WeightLike, rule: QuadratureRule) -> FloatArray:
    """W at the rule's nodes with the rule's own Jacobi factor divided out."""
    x: FloatArray = rule.nodes
    if isinstance(w, JacobiWeighted):
        da: float = w.a - rule.alpha
        db: float = w.b - rule.beta
        values: FloatArray = w.poly(x)
        if da != 0.0 or db != 0.0:
            values = (x**da * (1.0 - x) ** db)[:, np.newaxis, np.newaxis] * values
        return values
    absorbed: FloatArray = x**rule.alpha * (1.0 - x) ** rule.beta
    return np.asarray(w(x)) / absorbed[:, np.newaxis, np.newaxis]


def gram_from_values(
    f_vals: FloatArray, g_vals: FloatArray, w_vals: FloatArray, weights: FloatArray
) -> FloatArray:
    """
    Sum_k weights_k G_k^T W_k F_k.

    f_vals (K, N, p), g_vals (K, N, q), w_vals (K, N, N) -> (q, p).
    """
    if f_vals.shape[1] != w_vals.shape[1] or g_vals.shape[1] != w_vals.shape[1]:
        raise DimensionError(
            f"phase counts differ: F {f_vals.shape[1]}, G {g_vals.shape[1]}, W {w_vals.shape[1]}"
        )
    return np.einsum("k,kji,kjl,klm->im", weights, g_vals, w_vals, f_vals, optimize=True)


def matrix_inner_product(
    F: MatrixPolynomial, G: MatrixPolynomial, W: WeightLike, rule: QuadratureRule
) -> PhaseMatrix:
    """(F, G)_W = integral of G(x)^* W(x) F(x) dx by the given rule."""
    if F.dim != G.dim:
        raise DimensionError(f"phase counts differ: {F.dim} vs {G.dim}")
    w_vals: FloatArray = weight_at_nodes(W, rule)
    if w_vals.shape[1:] != (F.dim, F.dim):
        raise DimensionError(f"weight has shape {w_vals.shape[1:]}, expected {(F.dim, F.dim)}")
    return gram_from_values(F(rule.nodes), G(rule.nodes), w_vals, rule.weights)


def scalar_product(
    F: MatrixPolynomial, G: MatrixPolynomial, W: WeightLike, rule: QuadratureRule
) -> float:
    return float(np.trace(matrix_inner_product(F, G, W, rule)))
