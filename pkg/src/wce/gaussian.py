"""Finite-dimensional isonormal Gaussian space.

The Hilbert space is R^d with the canonical basis; W maps h to the degree-one
functional sum_i h_i xi_i, so E[W(h)W(k)] = <h, k>.  Joint moments of centered
Gaussian vectors are computed two independent ways: by enumerating pair
partitions and by the derivative recursion of the moment generating function.
"""
from __future__ import annotations

import math
from typing import Iterator, Sequence

import numpy as np

from .polynomials import MultiIndex, PolyFunctional

MAX_PARTITION_SIZE = 24  # (n-1)!! blows up combinatorially beyond this

Pairing = tuple[tuple[int, int], ...]


def iter_pair_partitions(n: int) -> Iterator[Pairing]:
    """Yield all partitions of {1..n} into disjoint pairs.

    The smallest unpaired element is paired with each remaining element in
    increasing order, so the output order is canonical and deterministic.
    Odd n yields nothing; n = 0 yields the single empty partition.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > MAX_PARTITION_SIZE:
        raise ValueError(f"n={n} exceeds pairing guard {MAX_PARTITION_SIZE}")
    if n % 2:
        return
    items = tuple(range(1, n + 1))

    def rec(remaining: tuple[int, ...]) -> Iterator[Pairing]:
        if not remaining:
            yield ()
            return
        first = remaining[0]
        for idx in range(1, len(remaining)):
            partner = remaining[idx]
            rest = remaining[1:idx] + remaining[idx + 1:]
            for tail in rec(rest):
                yield ((first, partner),) + tail

    yield from rec(items)


def pair_partitions(n: int) -> list[Pairing]:
    """All pair partitions of {1..n} as a list (empty for odd n)."""
    return list(iter_pair_partitions(n))


def double_factorial(n: int) -> int:
    """n!! for odd n >= -1 (used as the (2m-1)!! partition count)."""
    if n <= 0:
        return 1
    return math.prod(range(n, 0, -2))


def validate_covariance(cov: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Check symmetry and (tolerance) positive semi-definiteness."""
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError("covariance must be a square matrix")
    scale = max(1.0, float(np.abs(cov).max()))
    if np.abs(cov - cov.T).max() > tol * scale:
        raise ValueError("covariance must be symmetric")
    if np.linalg.eigvalsh(cov).min() < -tol * scale:
        raise ValueError("covariance must be positive semi-definite")
    return cov


def isserlis_moment(cov: np.ndarray, indices: Sequence[int]) -> float:
    """E[xi_{i_1} ... xi_{i_n}] as a sum over pair partitions.

    ``indices`` are 1-based labels into the covariance matrix; repeated labels
    give powers of a single variable.  Odd-length products vanish.
    """
    cov = validate_covariance(cov)
    idx = [int(i) for i in indices]
    for i in idx:
        if not 1 <= i <= cov.shape[0]:
            raise ValueError(f"index {i} outside covariance of size {cov.shape[0]}")
    n = len(idx)
    if n % 2:
        return 0.0
    total = 0.0
    for pairing in iter_pair_partitions(n):
        prod = 1.0
        for a, b in pairing:
            prod *= cov[idx[a - 1] - 1, idx[b - 1] - 1]
        total += prod
    return total


def isserlis_moment_recursive(cov: np.ndarray, indices: Sequence[int]) -> float:
    """Same moment by the recursion F_{1..n}(0) = sum_j c_{1j} F_{2..^j..n}(0).

    Independent of the partition enumeration; the base cases are F() = 1 and
    F_i(0) = 0, which kill odd-length products automatically.
    """
    cov = validate_covariance(cov)
    idx = [int(i) for i in indices]
    for i in idx:
        if not 1 <= i <= cov.shape[0]:
            raise ValueError(f"index {i} outside covariance of size {cov.shape[0]}")

    def rec(labels: tuple[int, ...]) -> float:
        if not labels:
            return 1.0
        if len(labels) == 1:
            return 0.0
        head = labels[0]
        total = 0.0
        for j in range(1, len(labels)):
            rest = labels[1:j] + labels[j + 1:]
            total += cov[head - 1, labels[j] - 1] * rec(rest)
        return total

    return rec(tuple(idx))


def gaussian_moment(sigma: float, n: int) -> float:
    """E[xi^n] for xi ~ N(0, sigma^2): (n-1)!! sigma^n for even n, else 0."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if n < 0:
        raise ValueError("moment order must be nonnegative")
    if n % 2:
        return 0.0
    return float(double_factorial(n - 1)) * sigma ** n


def isonormal_map(h: Sequence[float]) -> PolyFunctional:
    """W(h) = sum_i h_i xi_i, the degree-one functional attached to h."""
    h = np.asarray(h, dtype=float)
    if h.ndim != 1 or h.size == 0:
        raise ValueError("h must be a nonempty vector")
    if not np.all(np.isfinite(h)):
        raise ValueError("h must have finite entries")
    terms = {MultiIndex.make({i + 1: 1}): float(v)
             for i, v in enumerate(h) if v != 0.0}
    return PolyFunctional(terms, len(h))
