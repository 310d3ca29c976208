"""
Invariant distribution of the Wright-Fisher switching diffusion.

For a symmetric pair the invariant row vector is psi(y) = c e^T W(y). With the
Wright-Fisher weight the closed form is
    psi_j(y) = y^(alpha+N-j) (1-y)^beta binom(N-1, j-1) binom(alpha+beta+N, alpha)
               (beta+N) (k)_(N-j) (beta-k+1)_(j-1) / (alpha+beta-k+2)_(N-1),
which equals c omega_j y^(alpha+N-j) (1-y)^beta with
    c = (N-1)! binom(alpha+beta+N, alpha) (beta+N) / (alpha+beta-k+2)_(N-1).
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import betainc, betaln, binom

from src.core.polynomials import UNIT_INTERVAL, FloatArray, JacobiWeighted, MatrixPolynomial
from src.core.special import pochhammer
from src.models.base import PolynomialForm
from src.models.wright_fisher import WrightFisherParams, polynomial_form

logger: logging.Logger = logging.getLogger(__name__)


def closed_form_normalization(p: WrightFisherParams) -> float:
    n: int = p.n_phases
    return (
        math.factorial(n - 1)
        * float(binom(p.alpha + p.beta + n, p.alpha))
        * (p.beta + n)
        / pochhammer(p.alpha + p.beta - p.k + 2.0, n - 1)
    )


def _closed_form_coefficients(p: WrightFisherParams) -> FloatArray:
    """Constant factor of psi_j(y) in front of y^(alpha+N-j) (1-y)^beta, per phase."""
    n: int = p.n_phases
    common: float = (
        float(binom(p.alpha + p.beta + n, p.alpha))
        * (p.beta + n)
        / pochhammer(p.alpha + p.beta - p.k + 2.0, n - 1)
    )
    return common * np.array(
        [
            float(binom(n - 1, j - 1)) * pochhammer(p.k, n - j) * pochhammer(p.beta - p.k + 1.0, j - 1)
            for j in range(1, n + 1)
        ]
    )


def _component_integrals(p: WrightFisherParams) -> FloatArray:
    """Integral over (0, 1) of omega_j y^(alpha+N-j) (1-y)^beta, per phase."""
    exponents: FloatArray = p.alpha + p.j_diag
    return p.hahn_weights() * np.exp(betaln(exponents + 1.0, p.beta + 1.0))


@dataclass(frozen=True, eq=False)
class InvariantDistribution:
    params: WrightFisherParams
    normalization: float
    generic_normalization: float
    boundary_atoms_unrepresented: bool

    def components(self, y: ArrayLike) -> FloatArray:
        """psi_j(y) by the closed form, shape S + (N,)."""
        p: WrightFisherParams = self.params
        ys: FloatArray = np.asarray(y, dtype=np.float64)[..., np.newaxis]
        return (
            _closed_form_coefficients(p)
            * ys ** (p.alpha + p.j_diag)
            * (1.0 - ys) ** p.beta
        )

    def generic_components(self, y: ArrayLike) -> FloatArray:
        """c e^T W(y) with c fixed by total mass one."""
        w: FloatArray = polynomial_form(self.params).weight(y)
        return self.generic_normalization * np.sum(w, axis=-2)

    def route_difference(self, ys: Sequence[float]) -> float:
        return float(np.max(np.abs(self.components(ys) - self.generic_components(ys))))

    def phase_masses(self) -> FloatArray:
        p: WrightFisherParams = self.params
        exponents: FloatArray = p.alpha + p.j_diag
        return _closed_form_coefficients(p) * np.exp(betaln(exponents + 1.0, p.beta + 1.0))

    def total_mass(self) -> float:
        return float(np.sum(self.phase_masses()))

    def bin_masses(self, edges: ArrayLike) -> FloatArray:
        """Mass of psi_j on each bin [e_k, e_k+1], shape (bins, N)."""
        p: WrightFisherParams = self.params
        cuts: FloatArray = np.asarray(edges, dtype=np.float64)[:, np.newaxis]
        cdf: FloatArray = betainc(p.alpha + p.j_diag + 1.0, p.beta + 1.0, cuts)
        return self.phase_masses() * np.diff(cdf, axis=0)

    def stationarity_residual(self, ys: Sequence[float]) -> float:
        """Max of |(psi A)''/2 - (psi B)' + psi Q| using exact derivatives."""
        form: PolynomialForm = polynomial_form(self.params)
        n: int = self.params.n_phases
        ones_row: FloatArray = np.zeros((n, n))
        ones_row[0, :] = self.normalization
        psi: JacobiWeighted = JacobiWeighted(
            form.weight.a,
            form.weight.b,
            MatrixPolynomial.constant(ones_row, UNIT_INTERVAL) @ form.weight.poly,
        )
        xs: FloatArray = np.asarray(ys, dtype=np.float64)
        one_minus: FloatArray = (1.0 - xs)[:, np.newaxis, np.newaxis]
        psi_q: FloatArray = psi(xs) @ form.intensity_numerator(xs) / one_minus
        lhs: FloatArray = (
            0.5 * psi.times(form.diffusion).derivative().derivative()(xs)
            - psi.times(form.drift).derivative()(xs)
            + psi_q
        )
        return float(np.max(np.abs(lhs[:, 0, :])))

    def to_dict(self) -> dict[str, Any]:
        return {
            "normalization": self.normalization,
            "phase_masses": self.phase_masses().tolist(),
            "boundary_atoms_unrepresented": self.boundary_atoms_unrepresented,
        }


def invariant_distribution(p: WrightFisherParams) -> InvariantDistribution:
    negative: bool = p.alpha < 0.0 or p.beta < 0.0
    if negative:
        logger.warning(
            "alpha=%s beta=%s: boundary atoms of the invariant measure are not represented",
            p.alpha,
            p.beta,
        )
    c: float = closed_form_normalization(p)
    generic: float = 1.0 / float(np.sum(_component_integrals(p)))
    if abs(c - generic) > 1e-10 * max(1.0, abs(c)):
        logger.warning("closed-form normalization %.15g differs from quadrature %.15g", c, generic)
    return InvariantDistribution(
        params=p,
        normalization=c,
        generic_normalization=generic,
        boundary_atoms_unrepresented=negative,
    )
