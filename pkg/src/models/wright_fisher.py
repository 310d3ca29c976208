"""
Wright-Fisher diffusion with mutation and a finite phase component.

Phases i = 1..N. The diffusion part is the Jacobi diffusion on (0, 1) with a
phase-dependent drift; phases move up at rate lambda_i(x) and down at rate
mu_i(x), both blowing up like 1/(1-x) near the upper boundary.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from src.core.errors import ParameterError
from src.core.polynomials import (
    UNIT_INTERVAL,
    FloatArray,
    JacobiWeighted,
    MatrixPolynomial,
    PhaseMatrix,
)
from src.core.special import generalized_binomial
from src.models.base import (
    BoundaryKind,
    BoundaryReport,
    PhaseBoundaries,
    PolynomialForm,
    SwitchingDiffusionModel,
)

logger: logging.Logger = logging.getLogger(__name__)

# Q(x) is evaluated at min(x, 1 - UPPER_CLAMP)
UPPER_CLAMP: float = 1e-12


@dataclass(frozen=True)
class WrightFisherParams:
    alpha: float
    beta: float
    k: float
    n_phases: int

    def __post_init__(self) -> None:
        if not self.alpha > -1.0:
            raise ParameterError("alpha", f"constraint alpha > -1 violated (alpha={self.alpha})")
        if not self.beta > -1.0:
            raise ParameterError("beta", f"constraint beta > -1 violated (beta={self.beta})")
        if not 0.0 < self.k < self.beta + 1.0:
            raise ParameterError(
                "k", f"constraint 0 < k < beta + 1 violated (k={self.k}, beta={self.beta})"
            )
        if self.n_phases < 1:
            raise ParameterError("n_phases", f"must be >= 1, got {self.n_phases}")

    @property
    def phase_index(self) -> FloatArray:
        """Zero-based phase index r = i - 1, as floats."""
        return np.arange(self.n_phases, dtype=np.float64)

    @property
    def j_diag(self) -> FloatArray:
        """Diagonal of J: N - i."""
        return self.n_phases - 1.0 - self.phase_index

    @property
    def j_breve_diag(self) -> FloatArray:
        """Diagonal of J-breve: i - 1."""
        return self.phase_index

    def hahn_weights(self) -> FloatArray:
        n: int = self.n_phases
        return np.array(
            [
                generalized_binomial(self.beta - self.k + i, i)
                * generalized_binomial(n + self.k - i - 2.0, n - i - 1)
                for i in range(n)
            ]
        )

    def eigenvalue_diagonal(self, n: int) -> FloatArray:
        """Diagonal of the n-th eigenvalue matrix."""
        if n < 0:
            raise ParameterError("n", f"must be >= 0, got {n}")
        jm1: FloatArray = self.j_breve_diag
        a_b: float = self.alpha + self.beta
        return -(n**2) - n * (a_b + self.n_phases + jm1) - jm1 * (a_b - self.k + jm1 + 1.0)

    def forward_rates(self, x: ArrayLike) -> FloatArray:
        """lambda_i(x) for every phase, shape S + (N,); zero for the last phase."""
        xs: FloatArray = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0 - UPPER_CLAMP)
        r: FloatArray = self.phase_index
        numer: FloatArray = self.j_diag * (r + 1.0 + self.beta - self.k)
        return numer / np.asarray(1.0 - xs)[..., np.newaxis]

    def backward_rates(self, x: ArrayLike) -> FloatArray:
        """mu_i(x) for every phase, shape S + (N,); zero for the first phase."""
        xs: FloatArray = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0 - UPPER_CLAMP)
        r: FloatArray = self.phase_index
        numer: FloatArray = r * (self.j_diag + self.k)
        return numer * np.asarray(xs / (1.0 - xs))[..., np.newaxis]

    def descriptor(self) -> dict[str, float | int | str]:
        return {
            "model": "wright_fisher",
            "alpha": self.alpha,
            "beta": self.beta,
            "k": self.k,
            "phases": self.n_phases,
        }


def _diag_embed(entries: FloatArray) -> FloatArray:
    n: int = entries.shape[-1]
    out: FloatArray = np.zeros(entries.shape + (n,))
    idx = np.arange(n)
    out[..., idx, idx] = entries
    return out


def intensity_matrix(p: WrightFisherParams, x: ArrayLike) -> FloatArray:
    """Tridiagonal Q(x); x of shape S gives shape S + (N, N)."""
    lam: FloatArray = p.forward_rates(x)
    mu: FloatArray = p.backward_rates(x)
    n: int = p.n_phases
    q: FloatArray = _diag_embed(-(lam + mu))
    if n > 1:
        idx = np.arange(n - 1)
        q[..., idx, idx + 1] = lam[..., :-1]
        q[..., idx + 1, idx] = mu[..., 1:]
    return q


def polynomial_form(p: WrightFisherParams) -> PolynomialForm:
    n: int = p.n_phases
    eye: FloatArray = np.eye(n)
    j: FloatArray = np.diag(p.j_diag)
    j_breve: FloatArray = np.diag(p.j_breve_diag)
    shift: FloatArray = np.eye(n, k=1)

    x: MatrixPolynomial = MatrixPolynomial.variable(n, UNIT_INTERVAL)
    one: MatrixPolynomial = MatrixPolynomial.identity(n, UNIT_INTERVAL)

    diffusion: MatrixPolynomial = (x @ (one - x)).scaled(2.0)
    drift: MatrixPolynomial = MatrixPolynomial.constant(
        (p.alpha + 1.0) * eye + j, UNIT_INTERVAL
    ) - x.right_multiply((p.alpha + p.beta + 2.0) * eye + j)

    # (1 - x) Q(x) = J((beta-k+1)I + J-breve)(M - I) + x J-breve(kI + J)(M^T - I)
    forward: PhaseMatrix = j @ ((p.beta - p.k + 1.0) * eye + j_breve) @ (shift - eye)
    backward: PhaseMatrix = j_breve @ (p.k * eye + j) @ (shift.T - eye)
    numerator: MatrixPolynomial = MatrixPolynomial.constant(forward, UNIT_INTERVAL) + x.right_multiply(backward)

    # H x^J
    omega: FloatArray = p.hahn_weights()
    weight_poly: MatrixPolynomial = MatrixPolynomial.zero(n, UNIT_INTERVAL)
    for i in range(n):
        term: MatrixPolynomial = MatrixPolynomial.constant(omega[i] * np.diag(eye[i]), UNIT_INTERVAL)
        for _ in range(n - 1 - i):
            term = x @ term
        weight_poly = weight_poly + term

    return PolynomialForm(
        diffusion=diffusion,
        drift=drift,
        intensity_numerator=numerator,
        weight=JacobiWeighted(p.alpha, p.beta, weight_poly),
    )


def classify_boundaries(p: WrightFisherParams) -> BoundaryReport:
    upper: BoundaryKind = (
        BoundaryKind.ABSORBING if -1.0 < p.beta < 0.0 else BoundaryKind.REFLECTING
    )
    lower_absorbing: bool = -1.0 < p.alpha < 0.0
    rows: list[PhaseBoundaries] = []
    for phase in range(1, p.n_phases + 1):
        lower: BoundaryKind = (
            BoundaryKind.ABSORBING
            if lower_absorbing and phase == p.n_phases
            else BoundaryKind.REFLECTING
        )
        rows.append(PhaseBoundaries(phase=phase, lower=lower, upper=upper))
    return BoundaryReport(phases=tuple(rows))


def wright_fisher_model(p: WrightFisherParams) -> SwitchingDiffusionModel:
    """The N-phase Wright-Fisher switching diffusion on (0, 1) with its polynomial form attached."""
    n: int = p.n_phases
    eye: FloatArray = np.eye(n)
    omega: FloatArray = p.hahn_weights()
    drift_const: FloatArray = p.alpha + 1.0 + p.j_diag
    drift_slope: FloatArray = p.alpha + p.beta + 2.0 + p.j_diag

    def diffusion(x: ArrayLike) -> FloatArray:
        xs: FloatArray = np.asarray(x, dtype=np.float64)
        return np.asarray(2.0 * xs * (1.0 - xs))[..., np.newaxis, np.newaxis] * eye

    def drift(x: ArrayLike) -> FloatArray:
        xs: FloatArray = np.asarray(x, dtype=np.float64)
        return _diag_embed(drift_const - xs[..., np.newaxis] * drift_slope)

    def intensity(x: ArrayLike) -> FloatArray:
        return intensity_matrix(p, x)

    def weight(x: ArrayLike) -> FloatArray:
        xs: FloatArray = np.asarray(x, dtype=np.float64)[..., np.newaxis]
        return _diag_embed(omega * xs ** (p.alpha + p.j_diag) * (1.0 - xs) ** p.beta)

    def ladder(m: int) -> PhaseMatrix:
        return np.diag(p.eigenvalue_diagonal(m))

    logger.debug(
        "Wright-Fisher model alpha=%s beta=%s k=%s N=%d", p.alpha, p.beta, p.k, n
    )
    return SwitchingDiffusionModel(
        name="wright_fisher",
        n_phases=n,
        state_interval=UNIT_INTERVAL,
        diffusion=diffusion,
        drift=drift,
        intensity=intensity,
        weight=weight,
        polynomial_form=polynomial_form(p),
        eigenvalue_ladder=ladder,
        boundaries=classify_boundaries(p),
        parameters={"alpha": p.alpha, "beta": p.beta, "k": p.k, "phases": float(n)},
    )
