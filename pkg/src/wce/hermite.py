"""One-dimensional Hermite polynomials, normalized so the leading coefficient
of H_n is 1/n! (H_0 = 1, H_1 = x, H_2 = (x^2-1)/2, ...).

Under this normalization E[H_n(xi) H_m(xi)] = delta_{nm}/n! for a standard
Gaussian xi, so sqrt(n!) H_n is orthonormal; the generating function is
sum_n t^n H_n(x) = exp(t x - t^2/2).
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

DEFAULT_MAX_DEGREE = 30


class HermiteTable:
    """Coefficient table for H_0..H_max_degree.

    Coefficient lists are built once with exact rational arithmetic from the
    three-term recurrence (n+1) H_{n+1}(x) = x H_n(x) - H_{n-1}(x) and stored
    as floats.  Point evaluation uses the same recurrence directly in float,
    which is better conditioned than the expanded monomial form for large |x|.
    """

    def __init__(self, max_degree: int = DEFAULT_MAX_DEGREE):
        if max_degree < 0:
            raise ValueError("max_degree must be nonnegative")
        self.max_degree = max_degree
        exact = [[Fraction(1)], [Fraction(0), Fraction(1)]]
        for n in range(1, max_degree):
            prev, cur = exact[n - 1], exact[n]
            nxt = [Fraction(0)] * (n + 2)
            for j, c in enumerate(cur):       # x * H_n
                nxt[j + 1] += c
            for j, c in enumerate(prev):      # - H_{n-1}
                nxt[j] -= c
            exact.append([c / (n + 1) for c in nxt])
        self._exact = exact[: max_degree + 1]
        self._coeffs = [[float(c) for c in row] for row in self._exact]
        self._mono2herm: dict[int, np.ndarray] = {}

    def _check_degree(self, n: int) -> None:
        if not 0 <= n <= self.max_degree:
            raise ValueError(f"degree {n} outside [0, {self.max_degree}]")

    def monomial_coeffs(self, n: int) -> list[float]:
        """Coefficients [c_0, ..., c_n] of H_n(x) = sum_k c_k x^k."""
        self._check_degree(n)
        return list(self._coeffs[n])

    def eval(self, n: int, x: float) -> float:
        """H_n(x) by the three-term recurrence."""
        self._check_degree(n)
        if n == 0:
            return 1.0
        h_prev, h_cur = 1.0, float(x)
        for m in range(1, n):
            h_prev, h_cur = h_cur, (x * h_cur - h_prev) / (m + 1)
        return h_cur

    def generating_partial_sum(self, t: float, x: float, n_terms: int) -> float:
        """Partial sum sum_{n<=N} t^n H_n(x) of exp(t x - t^2/2)."""
        self._check_degree(n_terms)
        total, tn = 0.0, 1.0
        for n in range(n_terms + 1):
            total += tn * self.eval(n, x)
            tn *= t
        return total

    def monomial_in_hermite(self, k: int) -> np.ndarray:
        """Coefficients a_0..a_k with x^k = sum_n a_n H_n(x).

        Solved exactly (rational back-substitution against the triangular
        coefficient table) and cached; returned as floats.
        """
        self._check_degree(k)
        if k not in self._mono2herm:
            a = [Fraction(0)] * (k + 1)
            target = [Fraction(0)] * (k + 1)
            target[k] = Fraction(1)
            for n in range(k, -1, -1):
                residual = target[n]
                for m in range(n + 1, k + 1):
                    residual -= a[m] * self._exact[m][n]
                a[n] = residual / self._exact[n][n]
            self._mono2herm[k] = np.array([float(c) for c in a])
        return self._mono2herm[k].copy()


_DEFAULT = HermiteTable()


def hermite_eval(n: int, x: float) -> float:
    """Value of the degree-n Hermite polynomial at x (cap 30)."""
    return _DEFAULT.eval(n, x)


def hermite_monomial_coeffs(n: int) -> list[float]:
    """Monomial coefficient list of H_n, length n+1."""
    return _DEFAULT.monomial_coeffs(n)


def generating_partial_sum(t: float, x: float, n_terms: int) -> float:
    """sum_{n<=N} t^n H_n(x); converges to exp(t x - t^2/2)."""
    return _DEFAULT.generating_partial_sum(t, x, n_terms)


def monomial_in_hermite(k: int) -> np.ndarray:
    """Expansion of x^k over H_0..H_k."""
    return _DEFAULT.monomial_in_hermite(k)


def max_degree() -> int:
    return _DEFAULT.max_degree


def sqrt_factorial(n: int) -> float:
    return math.sqrt(math.factorial(n))
