"""Generalized binomial coefficients and Pochhammer symbols by direct products."""

from src.core.errors import ParameterError


def generalized_binomial(a: float, m: int) -> float:
    """a(a-1)...(a-m+1)/m!, defined for every real a; equals 1 when m = 0."""
    if m < 0:
        raise ParameterError("m", f"must be >= 0, got {m}")

    result: float = 1.0
    for i in range(m):
        result *= (a - i) / (i + 1)
    return result


def pochhammer(a: float, n: int) -> float:
    """Rising factorial (a)_n = a(a+1)...(a+n-1); (a)_0 = 1."""
    if n < 0:
        raise ParameterError("n", f"must be >= 0, got {n}")

    result: float = 1.0
    for i in range(n):
        result *= a + i
    return result
