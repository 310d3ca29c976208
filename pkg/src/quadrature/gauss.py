"""
Gauss quadrature rules on bounded intervals.

Gauss-Jacobi rules for the weight x^alpha (1-x)^beta on (0, 1) come from the
Golub-Welsch algorithm: the nodes are the eigenvalues of the symmetric Jacobi
matrix of the monic three-term recurrence, the weights are mu_0 times the
squared first eigenvector components.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import eigh_tridiagonal
from scipy.special import betaln

from src.core.errors import ParameterError
from src.core.polynomials import UNIT_INTERVAL, Domain, FloatArray

logger: logging.Logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: FloatArray
    weights: FloatArray
    alpha: float = 0.0
    beta: float = 0.0
    interval: Domain = UNIT_INTERVAL

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def exactness_degree(self) -> int:
        return 2 * self.n_nodes - 1

    def integrate(self, values: ArrayLike) -> FloatArray:
        """Weighted sum over the leading (node) axis."""
        return np.tensordot(self.weights, np.asarray(values, dtype=np.float64), axes=(0, 0))


def _jacobi_recurrence(a: float, b: float, n: int) -> tuple[FloatArray, FloatArray]:
    """
    Monic recurrence for the weight (1-t)^a (1+t)^b on (-1, 1).

    Returns the diagonal (n,) and the off-diagonal (n-1,) of the Jacobi matrix.
    """
    ab: float = a + b
    i: FloatArray = np.arange(n, dtype=np.float64)
    diag: FloatArray = np.empty(n)
    diag[0] = (b - a) / (ab + 2.0)
    if n > 1:
        s: FloatArray = 2.0 * i[1:] + ab
        diag[1:] = (b * b - a * a) / (s * (s + 2.0))

    off_sq: FloatArray = np.empty(max(n - 1, 0))
    if n > 1:
        off_sq[0] = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) ** 2 * (3.0 + ab))
    if n > 2:
        j: FloatArray = np.arange(2, n, dtype=np.float64)
        s2: FloatArray = 2.0 * j + ab
        off_sq[1:] = 4.0 * j * (j + a) * (j + b) * (j + ab) / (s2**2 * (s2 + 1.0) * (s2 - 1.0))
    return diag, np.sqrt(off_sq)


def gauss_jacobi_rule(alpha: float, beta: float, n_nodes: int) -> QuadratureRule:
    """Rule for x^alpha (1-x)^beta on (0, 1), exact through degree 2 n_nodes - 1."""
    if not alpha > -1.0:
        raise ParameterError("alpha", f"must be > -1, got {alpha}")
    if not beta > -1.0:
        raise ParameterError("beta", f"must be > -1, got {beta}")
    if n_nodes < 1:
        raise ParameterError("n_nodes", f"must be >= 1, got {n_nodes}")

    # x = (1 + t)/2 turns x^alpha (1-x)^beta into (1-t)^beta (1+t)^alpha up to a constant
    diag, off = _jacobi_recurrence(beta, alpha, n_nodes)
    mu0: float = float(np.exp(betaln(alpha + 1.0, beta + 1.0)))
    if n_nodes == 1:
        t: FloatArray = diag.copy()
        first: FloatArray = np.ones(1)
    else:
        t, vecs = eigh_tridiagonal(diag, off)
        first = vecs[0, :]

    nodes: FloatArray = 0.5 * (1.0 + t)
    weights: FloatArray = mu0 * first**2
    return QuadratureRule(nodes=nodes, weights=weights, alpha=alpha, beta=beta)


def gauss_legendre_rule(lo: float, hi: float, n_nodes: int) -> QuadratureRule:
    """Unweighted rule on (lo, hi)."""
    if not lo < hi:
        raise ParameterError("interval", f"empty interval ({lo}, {hi})")
    if n_nodes < 1:
        raise ParameterError("n_nodes", f"must be >= 1, got {n_nodes}")
    t, w = np.polynomial.legendre.leggauss(n_nodes)
    half: float = 0.5 * (hi - lo)
    return QuadratureRule(
        nodes=lo + half * (t + 1.0),
        weights=half * w,
        interval=(lo, hi),
    )


def default_node_count(max_degree: int, n_phases: int) -> int:
    """max_degree + N + 2, rounded up to an even number."""
    count: int = max_degree + n_phases + 2
    return count + (count % 2)
