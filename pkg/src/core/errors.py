"""
Exception hierarchy.

Library code raises these; only the CLI turns them into exit codes:
- ParameterError -> exit 2 (configuration problem)
- NumericalError -> exit 3 (the numbers did not work out)
"""


class SwitchDiffError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(SwitchDiffError, ValueError):
    """A parameter violates a documented constraint."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field: str = field


class DimensionError(SwitchDiffError, ValueError):
    """Matrix or polynomial shapes do not agree."""


class NumericalError(SwitchDiffError):
    """A numeric procedure failed to produce a trustworthy result."""


class EmptyNullspaceError(NumericalError):
    """The eigenfunction coefficient system has no nontrivial solution."""

    def __init__(self, eigenvalue: float, degree: int) -> None:
        super().__init__(
            f"no polynomial eigenfunction of degree <= {degree} "
            f"for eigenvalue {eigenvalue:.12g}"
        )
        self.eigenvalue: float = eigenvalue
        self.degree: int = degree


class NullspaceMismatchError(NumericalError):
    """The nullspace is larger than the eigenvalue class it should span."""


class OrthonormalityError(NumericalError):
    """Constructed eigenfunctions are not orthonormal within tolerance."""

    def __init__(self, residual: float, tolerance: float) -> None:
        super().__init__(
            f"orthonormality residual {residual:.3e} exceeds {tolerance:.1e}"
        )
        self.residual: float = residual
        self.tolerance: float = tolerance


class SingularSystemError(NumericalError):
    """A boundary-value linear system is singular to working precision."""

    def __init__(self, condition: float) -> None:
        super().__init__(f"linear system is singular (condition estimate {condition:.3e})")
        self.condition: float = condition
