"""Closed-form eigenvalue ladder and degenerate eigenvalue classes."""

import math
from dataclasses import dataclass

import numpy as np

from src.core.polynomials import PhaseMatrix
from src.models.wright_fisher import WrightFisherParams

DEGENERACY_TOL: float = 1e-10


def eigenvalue_ladder(p: WrightFisherParams, n: int) -> PhaseMatrix:
    """Diagonal matrix with entries -n^2 - n(a+b+N+j-1) - (j-1)(a+b-k+j)."""
    return np.diag(p.eigenvalue_diagonal(n))


def scalar_eigenvalue(p: WrightFisherParams, n: int, phase: int) -> float:
    """Entry (phase, phase) of the n-th eigenvalue matrix; phase is zero-based."""
    return float(p.eigenvalue_diagonal(n)[phase])


@dataclass(frozen=True)
class EigenvalueClass:
    """All (n, phase) pairs sharing one scalar eigenvalue, sorted by n then phase."""

    gamma: float
    members: tuple[tuple[int, int], ...]

    def in_truncation(self, truncation: int) -> tuple[tuple[int, int], ...]:
        return tuple(m for m in self.members if m[0] < truncation)

    @property
    def is_degenerate(self) -> bool:
        return len(self.members) > 1


def _solve_level(p: WrightFisherParams, phase: int, gamma: float, tol: float) -> int | None:
    """The n >= 0 with Gamma_n(phase) == gamma, if any; Gamma_n is decreasing in n."""
    a_b: float = p.alpha + p.beta
    c: float = a_b + p.n_phases + phase
    d: float = phase * (a_b - p.k + phase + 1.0)
    disc: float = c * c - 4.0 * (d + gamma)
    if disc < 0.0:
        return None
    root: float = 0.5 * (-c + math.sqrt(disc))
    for n in {math.floor(root), math.ceil(root)}:
        if n >= 0 and abs(scalar_eigenvalue(p, n, phase) - gamma) <= tol:
            return n
    return None


def eigenvalue_class(p: WrightFisherParams, n: int, phase: int) -> EigenvalueClass:
    gamma: float = scalar_eigenvalue(p, n, phase)
    tol: float = DEGENERACY_TOL * max(1.0, abs(gamma))
    members: list[tuple[int, int]] = []
    for j in range(p.n_phases):
        level: int | None = _solve_level(p, j, gamma, tol)
        if level is not None:
            members.append((level, j))
    members.sort()
    return EigenvalueClass(gamma=gamma, members=tuple(members))


def eigenvalue_classes(p: WrightFisherParams, truncation: int) -> list[EigenvalueClass]:
    """Distinct classes touching (n, j) for n < truncation, in order of first appearance."""
    seen: set[tuple[tuple[int, int], ...]] = set()
    classes: list[EigenvalueClass] = []
    for n in range(truncation):
        for j in range(p.n_phases):
            cls: EigenvalueClass = eigenvalue_class(p, n, j)
            if cls.members not in seen:
                seen.add(cls.members)
                classes.append(cls)
    return classes
