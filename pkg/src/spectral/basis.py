"""
Orthonormal matrix-valued eigenfunctions of the Wright-Fisher operator.

Every scalar eigenvalue Gamma_n(j) is known in closed form, so each eigenvector
column is found by clearing the 1/(1-x) denominator of Q(x), matching the
polynomial coefficients of (1-x)(A f''/2 + B f' - gamma f) + (1-x)Q f = 0 and
extracting the nullspace. Coefficients are Legendre series in u = 2x - 1.
"""

import json
import logging
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any

import numpy as np
from numpy.polynomial import legendre as leg
from numpy.typing import ArrayLike
from scipy.linalg import null_space, qr
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from src.core.errors import (
    EmptyNullspaceError,
    NullspaceMismatchError,
    OrthonormalityError,
    ParameterError,
)
from src.core.polynomials import UNIT_INTERVAL, FloatArray, JacobiWeighted, MatrixPolynomial, PhaseMatrix
from src.models.base import PolynomialForm, SwitchingDiffusionModel
from src.models.wright_fisher import WrightFisherParams, wright_fisher_model
from src.quadrature.gauss import QuadratureRule, default_node_count, gauss_jacobi_rule
from src.quadrature.inner_product import weight_at_nodes
from src.spectral.eigenvalues import EigenvalueClass, eigenvalue_classes

logger: logging.Logger = logging.getLogger(__name__)

NULLSPACE_RCOND: float = 1e-10
DU_DX: float = 2.0
ORTHONORMALITY_TOL: float = 1e-8


@dataclass(frozen=True, eq=False)
class SpectralMode:
    """One eigenvector column: label (n, phase), eigenvalue and Legendre coefficients in u, shape (degree+1, N)."""

    n: int
    phase: int
    gamma: float
    coeffs: FloatArray
    supplementary: bool = False

    @property
    def degree(self) -> int:
        return int(self.coeffs.shape[0]) - 1

    def __call__(self, x: ArrayLike) -> FloatArray:
        u: FloatArray = 2.0 * np.asarray(x, dtype=np.float64) - 1.0
        return np.moveaxis(np.asarray(leg.legval(u, self.coeffs)), 0, -1)

    def as_matrix_polynomial(self) -> MatrixPolynomial:
        """The mode embedded as column `phase` of an otherwise zero N x N polynomial."""
        dim: int = int(self.coeffs.shape[1])
        out: FloatArray = np.zeros((self.degree + 1, dim, dim))
        for i in range(dim):
            powers: FloatArray = leg.leg2poly(self.coeffs[:, i])
            out[: powers.shape[0], i, self.phase] = powers
        return MatrixPolynomial(out, UNIT_INTERVAL)


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    params: WrightFisherParams
    model: SwitchingDiffusionModel
    modes: tuple[SpectralMode, ...]
    weight: JacobiWeighted
    rule: QuadratureRule
    truncation: int
    degenerate_classes: tuple[EigenvalueClass, ...] = field(default=())

    @property
    def n_phases(self) -> int:
        return self.params.n_phases

    @property
    def gammas(self) -> FloatArray:
        return np.array([m.gamma for m in self.modes])

    @cached_property
    def stacked_coeffs(self) -> FloatArray:
        """Mode coefficients padded to a common degree, shape (degree+1, N, K)."""
        degree: int = max(m.degree for m in self.modes)
        out: FloatArray = np.zeros((degree + 1, self.n_phases, len(self.modes)))
        for idx, mode in enumerate(self.modes):
            out[: mode.degree + 1, :, idx] = mode.coeffs
        return out

    def mode_values(self, x: ArrayLike) -> FloatArray:
        """All modes at x; shape S + (N, K)."""
        u: FloatArray = 2.0 * np.asarray(x, dtype=np.float64) - 1.0
        values: FloatArray = np.asarray(leg.legval(u, self.stacked_coeffs))
        return np.moveaxis(values, (0, 1), (-2, -1))

    def mode(self, n: int, phase: int) -> SpectralMode:
        for m in self.modes:
            if m.n == n and m.phase == phase:
                return m
        raise KeyError((n, phase))

    @property
    def eigenfunctions(self) -> list[MatrixPolynomial]:
        """Phi_n for n < truncation; column j is the eigenvector for (Gamma_n)_jj."""
        out: list[MatrixPolynomial] = []
        for n in range(self.truncation):
            phi: MatrixPolynomial = MatrixPolynomial.zero(self.n_phases, UNIT_INTERVAL)
            for j in range(self.n_phases):
                phi = phi + self.mode(n, j).as_matrix_polynomial()
            out.append(phi)
        return out

    @property
    def eigenvalues(self) -> list[PhaseMatrix]:
        return [np.diag(self.params.eigenvalue_diagonal(n)) for n in range(self.truncation)]

    @property
    def supplementary_modes(self) -> list[SpectralMode]:
        return [m for m in self.modes if m.supplementary]

    def gram(self) -> FloatArray:
        """<phi_a, phi_b>_W for all modes, shape (K, K)."""
        values: FloatArray = self.mode_values(self.rule.nodes)
        w_vals: FloatArray = weight_at_nodes(self.weight, self.rule)
        return np.einsum("k,kia,kij,kjb->ab", self.rule.weights, values, w_vals, values, optimize=True)

    def orthonormality_residual(self) -> float:
        return float(np.max(np.abs(self.gram() - np.eye(len(self.modes)))))

    def operator_residual(self) -> float:
        """Largest coefficient of the cleared eigen-equation over all modes."""
        form: PolynomialForm = _require_form(self.model)
        worst: float = 0.0
        for m in self.modes:
            system: FloatArray = cleared_operator_matrix(form, m.gamma, m.degree)
            worst = max(worst, float(np.max(np.abs(system @ m.coeffs.ravel()))))
        return worst

    def level_coeffs(self, n: int) -> FloatArray:
        """Legendre coefficients of Phi_n, shape (degree+1, N, N); column j is mode (n, j)."""
        columns: list[SpectralMode] = [self.mode(n, j) for j in range(self.n_phases)]
        degree: int = max(m.degree for m in columns)
        out: FloatArray = np.zeros((degree + 1, self.n_phases, self.n_phases))
        for j, m in enumerate(columns):
            out[: m.degree + 1, :, j] = m.coeffs
        return out

    def to_dict(self) -> dict[str, Any]:
        eigenfunctions: list[dict[str, Any]] = [
            {
                "n": n,
                "gamma_diag": np.diag(gamma).tolist(),
                "coeffs": self.level_coeffs(n).tolist(),
            }
            for n, gamma in enumerate(self.eigenvalues)
        ]
        supplementary: list[dict[str, Any]] = [
            {"n": m.n, "phase": m.phase, "gamma": m.gamma, "coeffs": m.coeffs.tolist()}
            for m in self.supplementary_modes
        ]
        return {
            "model": self.params.descriptor(),
            "truncation": self.truncation,
            "variable": "u = 2x - 1",
            "series": "legendre",
            "eigenfunctions": eigenfunctions,
            "supplementary": supplementary,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _require_form(model: SwitchingDiffusionModel) -> PolynomialForm:
    if model.polynomial_form is None:
        raise ParameterError("model", f"{model.name} has no polynomial form")
    return model.polynomial_form


def _legendre_entries(p: MatrixPolynomial) -> list[list[FloatArray]]:
    """Legendre series in u of every entry of a u-power matrix polynomial."""
    return [[leg.poly2leg(p.coeffs[:, r, c]) for c in range(p.dim)] for r in range(p.dim)]


def cleared_operator_matrix(form: PolynomialForm, gamma: float, degree: int) -> FloatArray:
    """
    Linear map from Legendre coefficients (in u) of a vector polynomial of the given
    degree to the Legendre coefficients of (1-x)(A f''/2 + B f' - gamma f) + (1-x)Q f.

    Unknown m*N + i is the P_m coefficient of phase i; rows are ordered the same way.
    """
    dim: int = form.diffusion.dim
    x: MatrixPolynomial = MatrixPolynomial.variable(dim, UNIT_INTERVAL)
    one_minus_x: MatrixPolynomial = MatrixPolynomial.identity(dim, UNIT_INTERVAL) - x
    second: MatrixPolynomial = (one_minus_x @ form.diffusion).scaled(0.5)
    first: MatrixPolynomial = one_minus_x @ form.drift
    zeroth: MatrixPolynomial = form.intensity_numerator - one_minus_x.scaled(gamma)
    # Coefficient polynomials paired with f, f' and f'' in that order
    factors: list[list[list[FloatArray]]] = [
        _legendre_entries(zeroth),
        _legendre_entries(first),
        _legendre_entries(second),
    ]

    rows: int = (degree + 2) * dim
    system: FloatArray = np.zeros((rows, (degree + 1) * dim))
    for m in range(degree + 1):
        unit: FloatArray = np.zeros(m + 1)
        unit[m] = 1.0
        derivatives: list[FloatArray] = [
            unit,
            DU_DX * leg.legder(unit),
            DU_DX**2 * leg.legder(unit, 2),
        ]
        for i in range(dim):
            for r in range(dim):
                image: FloatArray = np.zeros(1)
                for factor, series in zip(factors, derivatives):
                    image = leg.legadd(image, leg.legmul(factor[r][i], series))
                top: int = min(int(image.shape[0]), degree + 2)
                system[r : top * dim : dim, m * dim + i] = image[:top]
    return system


def _nullspace_vectors(form: PolynomialForm, gamma: float, degree: int) -> list[FloatArray]:
    """Nullspace of the cleared operator, ordered by increasing degree."""
    dim: int = form.diffusion.dim
    system: FloatArray = cleared_operator_matrix(form, gamma, degree)
    col_norm: FloatArray = np.linalg.norm(system, axis=0)
    col_norm[col_norm == 0.0] = 1.0
    basis: FloatArray = null_space(system / col_norm, rcond=NULLSPACE_RCOND) / col_norm[:, np.newaxis]
    if basis.shape[1] == 0:
        return []
    # Echelon form from the highest coefficient down: row r has its top r entries zero
    _, echelon = qr(basis[::-1, :].T)
    vectors: FloatArray = echelon[::-1, ::-1]
    return [v.reshape(degree + 1, dim) for v in vectors]


def _class_vectors(form: PolynomialForm, cls: EigenvalueClass, truncation: int, n_phases: int) -> list[FloatArray]:
    required: int = len(cls.in_truncation(truncation))
    base_degree: int = max(n for n, _ in cls.in_truncation(truncation)) + n_phases - 1
    vectors: list[FloatArray] = []
    for attempt in Retrying(
        stop=stop_after_attempt(2),
        retry=retry_if_exception_type(EmptyNullspaceError),
        reraise=True,
    ):
        with attempt:
            degree: int = base_degree + attempt.retry_state.attempt_number - 1
            vectors = _nullspace_vectors(form, cls.gamma, degree)
            logger.debug(
                "gamma=%.12g degree=%d nullspace=%d class=%s",
                cls.gamma, degree, len(vectors), cls.members,
            )
            if len(vectors) < required:
                raise EmptyNullspaceError(cls.gamma, degree)
    if len(vectors) > len(cls.members):
        raise NullspaceMismatchError(
            f"nullspace of dimension {len(vectors)} for eigenvalue {cls.gamma:.12g} "
            f"exceeds its class {cls.members}"
        )
    return vectors


def _w_inner(f: FloatArray, g: FloatArray, w_vals: FloatArray, weights: FloatArray) -> float:
    return float(np.einsum("k,ki,kij,kj->", weights, g, w_vals, f, optimize=True))


def _orthonormalize(
    coeffs: list[FloatArray], rule: QuadratureRule, w_vals: FloatArray
) -> list[FloatArray]:
    """W-orthogonal modified Gram-Schmidt, two passes."""
    degree: int = max(c.shape[0] for c in coeffs) - 1
    padded: list[FloatArray] = []
    for c in coeffs:
        p: FloatArray = np.zeros((degree + 1, c.shape[1]))
        p[: c.shape[0]] = c
        padded.append(p)
    u: FloatArray = 2.0 * rule.nodes - 1.0
    values: list[FloatArray] = [np.asarray(leg.legval(u, c)).T for c in padded]

    for _ in range(2):
        for a in range(len(padded)):
            for b in range(a):
                proj: float = _w_inner(values[a], values[b], w_vals, rule.weights)
                padded[a] = padded[a] - proj * padded[b]
                values[a] = values[a] - proj * values[b]
            norm_sq: float = _w_inner(values[a], values[a], w_vals, rule.weights)
            if not norm_sq > 0.0:
                raise OrthonormalityError(residual=abs(norm_sq), tolerance=ORTHONORMALITY_TOL)
            norm: float = float(np.sqrt(norm_sq))
            padded[a] = padded[a] / norm
            values[a] = values[a] / norm
    return padded


def _fix_sign(coeffs: FloatArray) -> FloatArray:
    """Make the largest entry of the highest nonzero coefficient positive."""
    scale: float = float(np.max(np.abs(coeffs)))
    top: int = coeffs.shape[0] - 1
    while top > 0 and np.max(np.abs(coeffs[top])) <= 1e-12 * scale:
        top -= 1
    lead: FloatArray = coeffs[top]
    if lead[int(np.argmax(np.abs(lead)))] < 0.0:
        return -coeffs
    return coeffs


def _trim(coeffs: FloatArray) -> FloatArray:
    scale: float = float(np.max(np.abs(coeffs)))
    top: int = coeffs.shape[0] - 1
    while top > 0 and np.max(np.abs(coeffs[top])) <= 1e-14 * scale:
        top -= 1
    return coeffs[: top + 1].copy()


def build_spectral_basis(
    m: SwitchingDiffusionModel, params: WrightFisherParams, truncation: int
) -> SpectralBasis:
    if truncation < 1:
        raise ParameterError("truncation", f"must be >= 1, got {truncation}")
    form: PolynomialForm = _require_form(m)
    if form.diffusion.dim != params.n_phases:
        raise ParameterError("params", "phase count does not match the model")

    start: float = time.perf_counter()
    n_phases: int = params.n_phases
    classes: list[EigenvalueClass] = eigenvalue_classes(params, truncation)
    raw: list[tuple[EigenvalueClass, list[FloatArray]]] = [
        (cls, _class_vectors(form, cls, truncation, n_phases)) for cls in classes
    ]

    max_degree: int = max(v.shape[0] - 1 for _, vectors in raw for v in vectors)
    rule: QuadratureRule = gauss_jacobi_rule(
        params.alpha, params.beta, default_node_count(max_degree, n_phases)
    )
    w_vals: FloatArray = weight_at_nodes(form.weight, rule)

    modes: list[SpectralMode] = []
    for cls, vectors in raw:
        orthonormal: list[FloatArray] = _orthonormalize(vectors, rule, w_vals)
        for (n, phase), coeffs in zip(cls.members, orthonormal):
            modes.append(
                SpectralMode(
                    n=n,
                    phase=phase,
                    gamma=cls.gamma,
                    coeffs=_trim(_fix_sign(coeffs)),
                    supplementary=n >= truncation,
                )
            )
    modes.sort(key=lambda mode: (mode.n, mode.phase))

    basis: SpectralBasis = SpectralBasis(
        params=params,
        model=m,
        modes=tuple(modes),
        weight=form.weight,
        rule=rule,
        truncation=truncation,
        degenerate_classes=tuple(cls for cls in classes if cls.is_degenerate),
    )
    residual: float = basis.orthonormality_residual()
    logger.debug("orthonormality residual %.3e", residual)
    if residual > ORTHONORMALITY_TOL:
        raise OrthonormalityError(residual=residual, tolerance=ORTHONORMALITY_TOL)

    duration_ms: float = (time.perf_counter() - start) * 1000
    logger.info(
        "Spectral basis built: truncation=%d modes=%d supplementary=%d degenerate=%d nodes=%d - %.2fms",
        truncation,
        len(modes),
        len(basis.supplementary_modes),
        len(basis.degenerate_classes),
        rule.n_nodes,
        duration_ms,
    )
    return basis


def basis_from_dict(data: dict[str, Any]) -> SpectralBasis:
    """Rebuild a basis exported with SpectralBasis.to_dict."""
    desc: dict[str, Any] = data["model"]
    params: WrightFisherParams = WrightFisherParams(
        alpha=float(desc["alpha"]),
        beta=float(desc["beta"]),
        k=float(desc["k"]),
        n_phases=int(desc["phases"]),
    )
    truncation: int = int(data["truncation"])
    modes: list[SpectralMode] = []
    for entry in data["eigenfunctions"]:
        coeffs: FloatArray = np.asarray(entry["coeffs"], dtype=np.float64)
        for j, gamma in enumerate(entry["gamma_diag"]):
            modes.append(
                SpectralMode(n=int(entry["n"]), phase=j, gamma=float(gamma), coeffs=_trim(coeffs[:, :, j]))
            )
    for entry in data.get("supplementary", []):
        modes.append(
            SpectralMode(
                n=int(entry["n"]),
                phase=int(entry["phase"]),
                gamma=float(entry["gamma"]),
                coeffs=np.asarray(entry["coeffs"], dtype=np.float64),
                supplementary=True,
            )
        )
    model: SwitchingDiffusionModel = wright_fisher_model(params)
    form: PolynomialForm = _require_form(model)
    max_degree: int = max(mode.degree for mode in modes)
    rule: QuadratureRule = gauss_jacobi_rule(
        params.alpha, params.beta, default_node_count(max_degree, params.n_phases)
    )
    return SpectralBasis(
        params=params,
        model=model,
        modes=tuple(modes),
        weight=form.weight,
        rule=rule,
        truncation=truncation,
    )


def basis_from_json(text: str) -> SpectralBasis:
    return basis_from_dict(json.loads(text))
