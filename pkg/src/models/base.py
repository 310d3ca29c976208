"""
Switching diffusion models.

A model is the triple of coefficient functions (A, B, Q) of the operator
1/2 A(x) f'' + B(x) f' + Q(x) f on a state interval with N phases, plus an
optional symmetrizing weight W. Coefficient functions accept a scalar or an
array of positions and return shape (..., N, N).
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike

from src.core.errors import ParameterError
from src.core.polynomials import FloatArray, JacobiWeighted, MatrixPolynomial, PhaseMatrix

CoefficientFn = Callable[[ArrayLike], FloatArray]

ZERO_TOL: float = 1e-12


class BoundaryKind(str, Enum):
    REFLECTING = "reflecting"
    ABSORBING = "absorbing"


@dataclass(frozen=True)
class PhaseBoundaries:
    phase: int
    lower: BoundaryKind
    upper: BoundaryKind


@dataclass(frozen=True)
class BoundaryReport:
    phases: tuple[PhaseBoundaries, ...]

    def for_phase(self, phase: int) -> PhaseBoundaries:
        return self.phases[phase - 1]

    @property
    def lower_absorbing_phases(self) -> list[int]:
        return [p.phase for p in self.phases if p.lower is BoundaryKind.ABSORBING]

    @property
    def upper_absorbing_phases(self) -> list[int]:
        return [p.phase for p in self.phases if p.upper is BoundaryKind.ABSORBING]

    def to_dict(self) -> dict[str, Any]:
        return {
            "phases": [
                {"phase": p.phase, "lower": p.lower.value, "upper": p.upper.value}
                for p in self.phases
            ]
        }


@dataclass(frozen=True, eq=False)
class PolynomialForm:
    """
    Exact polynomial description of a model on (0, 1).

    Q(x) = intensity_numerator(x) / (1 - x); W is x^a (1-x)^b times a polynomial.
    """

    diffusion: MatrixPolynomial
    drift: MatrixPolynomial
    intensity_numerator: MatrixPolynomial
    weight: JacobiWeighted


@dataclass(frozen=True, eq=False)
class SwitchingDiffusionModel:
    name: str
    n_phases: int
    state_interval: tuple[float, float]
    diffusion: CoefficientFn
    drift: CoefficientFn
    intensity: CoefficientFn
    weight: CoefficientFn | None = None
    polynomial_form: PolynomialForm | None = None
    eigenvalue_ladder: Callable[[int], PhaseMatrix] | None = None
    boundaries: BoundaryReport | None = None
    parameters: dict[str, float] = field(default_factory=lambda: {})

    def __post_init__(self) -> None:
        if self.n_phases < 1:
            raise ParameterError("n_phases", f"must be >= 1, got {self.n_phases}")
        lo, hi = self.state_interval
        if not lo < hi:
            raise ParameterError("state_interval", f"empty interval ({lo}, {hi})")

    def contains(self, x: float) -> bool:
        lo, hi = self.state_interval
        return lo < x < hi


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst_value: float
    worst_x: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst_value": self.worst_value,
            "worst_x": self.worst_x,
        }


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]
    max_row_sum: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "max_row_sum": self.max_row_sum,
            "checks": [c.to_dict() for c in self.checks],
        }


def _off_diagonal(values: FloatArray) -> FloatArray:
    n: int = values.shape[-1]
    return values * (1.0 - np.eye(n))


def _worst(name: str, per_point: FloatArray, xs: FloatArray, limit: float, larger_is_worse: bool = True) -> CheckResult:
    idx: int = int(np.argmax(per_point)) if larger_is_worse else int(np.argmin(per_point))
    value: float = float(per_point[idx])
    passed: bool = value <= limit if larger_is_worse else value >= limit
    return CheckResult(name=name, passed=passed, worst_value=value, worst_x=float(xs[idx]))


def validate_model(m: SwitchingDiffusionModel, sample_points: Sequence[float]) -> ValidationReport:
    """Check the structural assumptions on A, B, Q (and W) at interior sample points."""
    if len(sample_points) == 0:
        raise ParameterError("sample_points", "must not be empty")
    xs: FloatArray = np.asarray(sample_points, dtype=np.float64)
    outside: list[float] = [float(x) for x in xs if not m.contains(float(x))]
    if outside:
        raise ParameterError("sample_points", f"points outside the open state interval: {outside[:5]}")

    a_vals: FloatArray = m.diffusion(xs)
    b_vals: FloatArray = m.drift(xs)
    q_vals: FloatArray = m.intensity(xs)

    checks: list[CheckResult] = [
        _worst("A diagonal", np.max(np.abs(_off_diagonal(a_vals)), axis=(1, 2)), xs, ZERO_TOL),
        _worst("B diagonal", np.max(np.abs(_off_diagonal(b_vals)), axis=(1, 2)), xs, ZERO_TOL),
        _worst(
            "A nonnegative",
            np.min(np.diagonal(a_vals, axis1=1, axis2=2), axis=1),
            xs,
            -ZERO_TOL,
            larger_is_worse=False,
        ),
    ]

    q_diag: FloatArray = np.diagonal(q_vals, axis1=1, axis2=2)
    q_off: FloatArray = _off_diagonal(q_vals)
    sign_violation: FloatArray = np.maximum(
        np.max(q_diag, axis=1), np.max(-q_off, axis=(1, 2))
    )
    checks.append(_worst("Q sign pattern", np.maximum(sign_violation, 0.0), xs, ZERO_TOL))

    row_sums: FloatArray = np.max(np.abs(np.sum(q_vals, axis=2)), axis=1)
    q_scale: FloatArray = np.maximum(1.0, np.max(np.abs(q_vals), axis=(1, 2)))
    row_check: CheckResult = _worst("Q row sums", row_sums / q_scale, xs, ZERO_TOL)
    checks.append(row_check)

    if m.weight is not None:
        w_vals: FloatArray = m.weight(xs)
        asym: FloatArray = np.max(np.abs(w_vals - np.transpose(w_vals, (0, 2, 1))), axis=(1, 2))
        min_eig: FloatArray = np.linalg.eigvalsh(0.5 * (w_vals + np.transpose(w_vals, (0, 2, 1))))[:, 0]
        checks.append(_worst("W symmetric", asym, xs, ZERO_TOL))
        # eigvalsh sorts ascending; column 0 is the smallest eigenvalue
        checks.append(
            _worst("W positive definite", min_eig, xs, float(np.finfo(np.float64).tiny), larger_is_worse=False)
        )

    return ValidationReport(checks=tuple(checks), max_row_sum=float(np.max(row_sums)))
