"""
Matrix-valued polynomials.

A MatrixPolynomial stores N x N coefficient matrices C_k of powers of the
mapped variable u = (2x - lo - hi) / (hi - lo), following the domain/window
convention of numpy.polynomial. With the default domain (-1, 1) u equals x,
so coefficients are plain powers of x. Spectral objects live on (0, 1), where
centring keeps high-degree eigenfunctions well conditioned.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.core.errors import DimensionError

FloatArray = NDArray[np.float64]
PhaseMatrix = NDArray[np.float64]
Domain = tuple[float, float]

DEFAULT_DOMAIN: Domain = (-1.0, 1.0)
UNIT_INTERVAL: Domain = (0.0, 1.0)


def as_phase_matrix(values: ArrayLike) -> PhaseMatrix:
    """Validate a square, finite matrix and return it as float64."""
    matrix: FloatArray = np.array(values, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
        raise DimensionError(f"phase matrix must be square N x N, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise DimensionError("phase matrix has non-finite entries")
    return matrix


@dataclass(frozen=True, eq=False)
class MatrixPolynomial:
    coeffs: FloatArray
    domain: Domain = DEFAULT_DOMAIN
    dim: int = field(init=False)

    def __post_init__(self) -> None:
        coeffs: FloatArray = np.array(self.coeffs, dtype=np.float64)
        if coeffs.ndim != 3 or coeffs.shape[0] < 1 or coeffs.shape[1] != coeffs.shape[2]:
            raise DimensionError(
                f"coefficients must have shape (degree+1, N, N), got {coeffs.shape}"
            )
        if coeffs.shape[1] < 1:
            raise DimensionError("phase count N must be >= 1")
        if self.domain[1] <= self.domain[0]:
            raise DimensionError(f"empty domain {self.domain}")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "dim", int(coeffs.shape[1]))

    @classmethod
    def from_matrices(
        cls, matrices: Sequence[ArrayLike], domain: Domain = DEFAULT_DOMAIN
    ) -> "MatrixPolynomial":
        return cls(np.array([np.atleast_2d(np.asarray(m, dtype=np.float64)) for m in matrices]), domain)

    @classmethod
    def zero(cls, dim: int, domain: Domain = DEFAULT_DOMAIN) -> "MatrixPolynomial":
        return cls(np.zeros((1, dim, dim)), domain)

    @classmethod
    def constant(cls, matrix: ArrayLike, domain: Domain = DEFAULT_DOMAIN) -> "MatrixPolynomial":
        return cls(as_phase_matrix(matrix)[np.newaxis, :, :], domain)

    @classmethod
    def identity(cls, dim: int, domain: Domain = DEFAULT_DOMAIN) -> "MatrixPolynomial":
        return cls.constant(np.eye(dim), domain)

    @classmethod
    def variable(cls, dim: int, domain: Domain = DEFAULT_DOMAIN) -> "MatrixPolynomial":
        """The polynomial x * I expressed in the mapped variable of `domain`."""
        lo, hi = domain
        eye: FloatArray = np.eye(dim)
        return cls(np.array([0.5 * (lo + hi) * eye, 0.5 * (hi - lo) * eye]), domain)

    @property
    def degree(self) -> int:
        return int(self.coeffs.shape[0]) - 1

    @property
    def scale(self) -> float:
        """du/dx for the domain map."""
        return 2.0 / (self.domain[1] - self.domain[0])

    def to_window(self, x: ArrayLike) -> FloatArray:
        lo, hi = self.domain
        return (2.0 * np.asarray(x, dtype=np.float64) - lo - hi) / (hi - lo)

    def __call__(self, x: ArrayLike) -> FloatArray:
        """Horner evaluation; x of shape S gives shape S + (N, N)."""
        u: FloatArray = np.asarray(self.to_window(x))
        u_b: FloatArray = u[..., np.newaxis, np.newaxis]
        result: FloatArray = np.broadcast_to(self.coeffs[-1], u.shape + (self.dim, self.dim)).copy()
        for c in self.coeffs[-2::-1]:
            result = result * u_b + c
        return result

    def normalize(self, tol: float = 0.0) -> "MatrixPolynomial":
        """Strip trailing coefficient matrices whose entries are all <= tol in magnitude."""
        last: int = self.degree
        while last > 0 and np.max(np.abs(self.coeffs[last])) <= tol:
            last -= 1
        return MatrixPolynomial(self.coeffs[: last + 1], self.domain)

    def _check_compatible(self, other: "MatrixPolynomial") -> None:
        if other.dim != self.dim:
            raise DimensionError(f"phase counts differ: {self.dim} vs {other.dim}")
        if not np.allclose(other.domain, self.domain, rtol=0.0, atol=1e-15):
            raise DimensionError(f"domains differ: {self.domain} vs {other.domain}")

    def _padded(self, degree: int) -> FloatArray:
        out: FloatArray = np.zeros((degree + 1, self.dim, self.dim))
        out[: self.degree + 1] = self.coeffs
        return out

    def __add__(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        self._check_compatible(other)
        degree: int = max(self.degree, other.degree)
        return MatrixPolynomial(self._padded(degree) + other._padded(degree), self.domain)

    def __neg__(self) -> "MatrixPolynomial":
        return MatrixPolynomial(-self.coeffs, self.domain)

    def __sub__(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        return self + (-other)

    def scaled(self, factor: float) -> "MatrixPolynomial":
        return MatrixPolynomial(factor * self.coeffs, self.domain)

    def left_multiply(self, matrix: ArrayLike) -> "MatrixPolynomial":
        """C * P(x) for a constant matrix C."""
        c: PhaseMatrix = as_phase_matrix(matrix)
        return MatrixPolynomial(np.einsum("ij,kjl->kil", c, self.coeffs), self.domain)

    def right_multiply(self, matrix: ArrayLike) -> "MatrixPolynomial":
        """P(x) * C for a constant matrix C."""
        c: PhaseMatrix = as_phase_matrix(matrix)
        return MatrixPolynomial(np.einsum("kij,jl->kil", self.coeffs, c), self.domain)

    def __matmul__(self, other: "MatrixPolynomial") -> "MatrixPolynomial":
        self._check_compatible(other)
        out: FloatArray = np.zeros((self.degree + other.degree + 1, self.dim, self.dim))
        for i, a in enumerate(self.coeffs):
            out[i : i + other.degree + 1] += np.einsum("ij,kjl->kil", a, other.coeffs)
        return MatrixPolynomial(out, self.domain)

    def derivative(self) -> "MatrixPolynomial":
        """d/dx, including the chain-rule factor of the domain map."""
        if self.degree == 0:
            return MatrixPolynomial.zero(self.dim, self.domain)
        powers: FloatArray = np.arange(1, self.degree + 1, dtype=np.float64)
        return MatrixPolynomial(
            self.scale * powers[:, np.newaxis, np.newaxis] * self.coeffs[1:], self.domain
        )

    def transpose(self) -> "MatrixPolynomial":
        return MatrixPolynomial(np.transpose(self.coeffs, (0, 2, 1)), self.domain)


def eval_matrix_polynomial(p: MatrixPolynomial, x: float) -> PhaseMatrix:
    return p(x)


@dataclass(frozen=True, eq=False)
class JacobiWeighted:
    """x^a (1-x)^b P(x) on (0, 1), with exact differentiation."""

    a: float
    b: float
    poly: MatrixPolynomial

    def __call__(self, x: ArrayLike) -> FloatArray:
        xs: FloatArray = np.asarray(x, dtype=np.float64)
        factor: FloatArray = np.asarray(xs**self.a * (1.0 - xs) ** self.b)
        return factor[..., np.newaxis, np.newaxis] * self.poly(xs)

    def times(self, other: MatrixPolynomial) -> "JacobiWeighted":
        return JacobiWeighted(self.a, self.b, self.poly @ other)

    def derivative(self) -> "JacobiWeighted":
        # d/dx x^a (1-x)^b P = x^(a-1) (1-x)^(b-1) [a(1-x)P - b x P + x(1-x) P']
        dim: int = self.poly.dim
        x: MatrixPolynomial = MatrixPolynomial.variable(dim, self.poly.domain)
        one_minus_x: MatrixPolynomial = MatrixPolynomial.identity(dim, self.poly.domain) - x
        numerator: MatrixPolynomial = (
            (one_minus_x @ self.poly).scaled(self.a)
            - (x @ self.poly).scaled(self.b)
            + x @ one_minus_x @ self.poly.derivative()
        )
        return JacobiWeighted(self.a - 1.0, self.b - 1.0, numerator)
