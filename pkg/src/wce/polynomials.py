"""Polynomial functionals of independent standard Gaussians xi_1..xi_d.

Two coefficient views of the same object:

  * monomial basis   -- coefficient of prod_i xi_i^{alpha_i}; products and
    partial derivatives are trivial here, so this is the canonical internal
    representation;
  * chaos basis      -- coefficient against Phi_alpha = sqrt(alpha!) *
    prod_i H_{alpha_i}(xi_i), which is orthonormal in L^2, so expectations,
    norms and degree projections are trivial there.

Coordinates are labeled 1..d throughout.  Conversions between the two views
are exact triangular basis changes done coordinate by coordinate.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import hermite

PRUNE_TOL = 1e-14
MAX_TOTAL_DEGREE = 24


class DegreeLimitError(ValueError):
    """Raised when a term would exceed the total-degree guard."""


@dataclass(frozen=True)
class MultiIndex:
    """Finitely supported map coordinate -> degree, stored as sorted pairs."""

    pairs: tuple[tuple[int, int], ...] = ()

    @staticmethod
    def make(entries: Mapping[int, int] | Iterable[tuple[int, int]]) -> "MultiIndex":
        items = entries.items() if isinstance(entries, Mapping) else entries
        agg: dict[int, int] = {}
        for coord, deg in items:
            coord, deg = int(coord), int(deg)
            if coord < 1:
                raise ValueError(f"coordinate labels start at 1, got {coord}")
            if deg < 0:
                raise ValueError(f"negative degree {deg} for coordinate {coord}")
            if deg:
                agg[coord] = agg.get(coord, 0) + deg
        return MultiIndex(tuple(sorted(agg.items())))

    def order(self) -> int:
        return sum(k for _, k in self.pairs)

    def factorial(self) -> int:
        return math.prod(math.factorial(k) for _, k in self.pairs)

    def degree_of(self, coord: int) -> int:
        for c, k in self.pairs:
            if c == coord:
                return k
        return 0

    def support(self) -> tuple[int, ...]:
        return tuple(c for c, _ in self.pairs)

    def max_coord(self) -> int:
        return self.pairs[-1][0] if self.pairs else 0

    def merged(self, other: "MultiIndex") -> "MultiIndex":
        agg = dict(self.pairs)
        for c, k in other.pairs:
            agg[c] = agg.get(c, 0) + k
        return MultiIndex(tuple(sorted(agg.items())))

    def __repr__(self) -> str:
        if not self.pairs:
            return "MultiIndex()"
        body = ",".join(f"{c}:{k}" for c, k in self.pairs)
        return f"MultiIndex({body})"


def _clean_terms(terms: Mapping[MultiIndex, float], dim: int) -> dict[MultiIndex, float]:
    out: dict[MultiIndex, float] = {}
    for alpha, c in terms.items():
        c = float(c)
        if not math.isfinite(c):
            raise ValueError("non-finite coefficient")
        if abs(c) <= PRUNE_TOL:
            continue
        if alpha.max_coord() > dim:
            raise ValueError(f"coordinate {alpha.max_coord()} exceeds dimension {dim}")
        if alpha.order() > MAX_TOTAL_DEGREE:
            raise DegreeLimitError(
                f"term degree {alpha.order()} exceeds guard {MAX_TOTAL_DEGREE}")
        out[alpha] = c
    return out


class PolyFunctional:
    """Sparse multivariate polynomial in xi_1..xi_d (monomial basis).

    Immutable after construction; all arithmetic returns new objects.
    Coefficients with |c| <= 1e-14 are pruned, and any single term of total
    degree above 24 is rejected (the moment oracle stays in double range).
    """

    __slots__ = ("terms", "dim")

    def __init__(self, terms: Mapping[MultiIndex, float] | None, dim: int):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = int(dim)
        self.terms = _clean_terms(terms or {}, self.dim)

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, dim: int) -> "PolyFunctional":
        return cls({}, dim)

    @classmethod
    def constant(cls, value: float, dim: int) -> "PolyFunctional":
        return cls({MultiIndex(): float(value)}, dim)

    @classmethod
    def coordinate(cls, coord: int, dim: int) -> "PolyFunctional":
        if not 1 <= coord <= dim:
            raise ValueError(f"coordinate {coord} outside 1..{dim}")
        return cls({MultiIndex.make({coord: 1}): 1.0}, dim)

    @classmethod
    def monomial(cls, alpha: Mapping[int, int], coeff: float, dim: int) -> "PolyFunctional":
        return cls({MultiIndex.make(alpha): coeff}, dim)

    # -- queries -----------------------------------------------------------
    def degree(self) -> int:
        return max((a.order() for a in self.terms), default=0)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.terms.values())

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def constant_part(self) -> float:
        return self.terms.get(MultiIndex(), 0.0)

    def support_coords(self) -> set[int]:
        out: set[int] = set()
        for alpha in self.terms:
            out.update(alpha.support())
        return out

    # -- arithmetic ---------------------------------------------------------
    def _require_same_dim(self, other: "PolyFunctional") -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "PolyFunctional") -> "PolyFunctional":
        self._require_same_dim(other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out.get(a, 0.0) + c
        return PolyFunctional(out, self.dim)

    def __sub__(self, other: "PolyFunctional") -> "PolyFunctional":
        return self + (-other)

    def __neg__(self) -> "PolyFunctional":
        return PolyFunctional({a: -c for a, c in self.terms.items()}, self.dim)

    def __mul__(self, other):
        if isinstance(other, PolyFunctional):
            self._require_same_dim(other)
            out: dict[MultiIndex, float] = {}
            for a, ca in self.terms.items():
                for b, cb in other.terms.items():
                    key = a.merged(b)
                    out[key] = out.get(key, 0.0) + ca * cb
            return PolyFunctional(out, self.dim)
        return PolyFunctional(
            {a: c * float(other) for a, c in self.terms.items()}, self.dim)

    __rmul__ = __mul__

    def shifted_by_constant(self, value: float) -> "PolyFunctional":
        return self + PolyFunctional.constant(value, self.dim)

    def partial(self, coord: int) -> "PolyFunctional":
        """Partial derivative with respect to xi_coord."""
        if not 1 <= coord <= self.dim:
            raise ValueError(f"coordinate {coord} outside 1..{self.dim}")
        out: dict[MultiIndex, float] = {}
        for alpha, c in self.terms.items():
            k = alpha.degree_of(coord)
            if k == 0:
                continue
            reduced = dict(alpha.pairs)
            if k == 1:
                del reduced[coord]
            else:
                reduced[coord] = k - 1
            key = MultiIndex(tuple(sorted(reduced.items())))
            out[key] = out.get(key, 0.0) + c * k
        return PolyFunctional(out, self.dim)

    # -- evaluation ----------------------------------------------------------
    def eval(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected point of shape ({self.dim},)")
        total = 0.0
        for alpha, c in self.terms.items():
            v = c
            for coord, k in alpha.pairs:
                v *= x[coord - 1] ** k
            total += v
        return total

    def eval_batch(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on an (n, d) array of sample points."""
        xs = np.asarray(xs, dtype=float)
        if xs.ndim != 2 or xs.shape[1] != self.dim:
            raise ValueError(f"expected samples of shape (n, {self.dim})")
        total = np.zeros(xs.shape[0])
        for alpha, c in self.terms.items():
            v = np.full(xs.shape[0], c)
            for coord, k in alpha.pairs:
                v *= xs[:, coord - 1] ** k
            total += v
        return total

    def __repr__(self) -> str:
        return f"PolyFunctional(dim={self.dim}, n_terms={len(self.terms)})"


class ChaosExpansion:
    """Coefficients against the orthonormal basis Phi_alpha.

    Orthonormality makes the L^2 geometry explicit: ||F||^2 = sum c_alpha^2
    and the empty multi-index carries E[F].
    """

    __slots__ = ("terms", "dim")

    def __init__(self, terms: Mapping[MultiIndex, float] | None, dim: int):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        self.dim = int(dim)
        self.terms = _clean_terms(terms or {}, self.dim)

    def coefficient(self, alpha: MultiIndex) -> float:
        return self.terms.get(alpha, 0.0)

    def expectation(self) -> float:
        return self.terms.get(MultiIndex(), 0.0)

    def l2_norm_sq(self) -> float:
        return sum(c * c for c in self.terms.values())

    def degree_norm_sq(self, n: int) -> float:
        """||J_n F||^2, the squared norm of the order-n part."""
        return sum(c * c for a, c in self.terms.items() if a.order() == n)

    def max_order(self) -> int:
        return max((a.order() for a in self.terms), default=0)

    def project(self, n: int) -> "ChaosExpansion":
        if n < 0:
            raise ValueError("chaos order must be >= 0")
        return ChaosExpansion(
            {a: c for a, c in self.terms.items() if a.order() == n}, self.dim)

    def __add__(self, other: "ChaosExpansion") -> "ChaosExpansion":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out.get(a, 0.0) + c
        return ChaosExpansion(out, self.dim)

    def __sub__(self, other: "ChaosExpansion") -> "ChaosExpansion":
        return self + other.scaled(-1.0)

    def scaled(self, factor: float) -> "ChaosExpansion":
        return ChaosExpansion(
            {a: c * factor for a, c in self.terms.items()}, self.dim)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def __repr__(self) -> str:
        return f"ChaosExpansion(dim={self.dim}, n_terms={len(self.terms)})"


# -- basis conversions --------------------------------------------------------

def poly_to_chaos(poly: PolyFunctional) -> ChaosExpansion:
    """Exact expansion of a polynomial over the orthonormal Phi_alpha basis."""
    out: dict[MultiIndex, float] = {}
    for alpha, coeff in poly.terms.items():
        factors = []
        for coord, k in alpha.pairs:
            weights = hermite.monomial_in_hermite(k)
            factors.append([(coord, n, w) for n, w in enumerate(weights) if w != 0.0])
        if not factors:
            out[MultiIndex()] = out.get(MultiIndex(), 0.0) + coeff
            continue
        for combo in itertools.product(*factors):
            w = coeff
            pairs = []
            for coord, n, weight in combo:
                w *= weight
                if n:
                    pairs.append((coord, n))
            beta = MultiIndex(tuple(pairs))
            w /= math.sqrt(beta.factorial())
            out[beta] = out.get(beta, 0.0) + w
    return ChaosExpansion(out, poly.dim)


def chaos_to_poly(expansion: ChaosExpansion) -> PolyFunctional:
    """Inverse basis change: rebuild the monomial form of sum c_alpha Phi_alpha."""
    total = PolyFunctional.zero(expansion.dim)
    for beta, coeff in expansion.terms.items():
        factor = PolyFunctional.constant(
            coeff * math.sqrt(beta.factorial()), expansion.dim)
        for coord, n in beta.pairs:
            herm = PolyFunctional(
                {MultiIndex.make({coord: j}): c
                 for j, c in enumerate(hermite.hermite_monomial_coeffs(n)) if c != 0.0},
                expansion.dim)
            factor = factor * herm
        total = total + factor
    return total


def project_chaos(poly: PolyFunctional, n: int) -> ChaosExpansion:
    """J_n: the order-n part of the chaos expansion of a polynomial."""
    return poly_to_chaos(poly).project(n)


# -- exact expectations ---------------------------------------------------------

def _standard_moment(k: int) -> float:
    # E[xi^k] = (k-1)!! for even k, 0 otherwise.
    if k % 2:
        return 0.0
    return float(math.prod(range(1, k, 2)))


def expectation_exact(poly: PolyFunctional) -> float:
    """E[F] via independence and the even-moment formula, exactly in float."""
    total = 0.0
    for alpha, c in poly.terms.items():
        v = c
        for _, k in alpha.pairs:
            v *= _standard_moment(k)
            if v == 0.0:
                break
        total += v
    return total


def l2_inner(f: PolyFunctional, g: PolyFunctional) -> float:
    """E[FG] computed through the product polynomial and the moment oracle."""
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    return expectation_exact(f * g)


def l2_inner_chaos(f: PolyFunctional, g: PolyFunctional) -> float:
    """E[FG] computed independently as the chaos-coefficient dot product."""
    if f.dim != g.dim:
        raise ValueError("dimension mismatch")
    fa, ga = poly_to_chaos(f), poly_to_chaos(g)
    small, large = (fa, ga) if len(fa.terms) <= len(ga.terms) else (ga, fa)
    return sum(c * large.terms.get(a, 0.0) for a, c in small.terms.items())


def l2_norm_sq(f: PolyFunctional) -> float:
    return expectation_exact(f * f)


# -- substitutions ---------------------------------------------------------------

def _poly_power(base: PolyFunctional, k: int) -> PolyFunctional:
    result = PolyFunctional.constant(1.0, base.dim)
    for _ in range(k):
        result = result * base
    return result


def compose(outer: PolyFunctional, inner: Sequence[PolyFunctional]) -> PolyFunctional:
    """Polynomial composition outer(inner_1, ..., inner_m).

    The outer polynomial lives in m variables (its dim must equal len(inner));
    all inner polynomials must share a common dimension.
    """
    if outer.dim != len(inner):
        raise ValueError(
            f"arity mismatch: outer has {outer.dim} variables, got {len(inner)} arguments")
    if not inner:
        raise ValueError("need at least one inner polynomial")
    dim = inner[0].dim
    for fj in inner:
        if fj.dim != dim:
            raise ValueError("inner polynomials must share a dimension")
    total = PolyFunctional.zero(dim)
    power_cache: dict[tuple[int, int], PolyFunctional] = {}
    for alpha, c in outer.terms.items():
        term = PolyFunctional.constant(c, dim)
        for coord, k in alpha.pairs:
            key = (coord, k)
            if key not in power_cache:
                power_cache[key] = _poly_power(inner[coord - 1], k)
            term = term * power_cache[key]
        total = total + term
    return total


def affine_substitute(poly: PolyFunctional,
                      matrix: np.ndarray | None = None,
                      shift: Sequence[float] | None = None) -> PolyFunctional:
    """Substitute x = A y + b into the polynomial (y has dim = A's columns)."""
    m = poly.dim
    if matrix is None:
        matrix = np.eye(m)
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != m:
        raise ValueError(f"matrix must have {m} rows")
    out_dim = matrix.shape[1]
    b = np.zeros(m) if shift is None else np.asarray(shift, dtype=float)
    if b.shape != (m,):
        raise ValueError(f"shift must have shape ({m},)")
    lines = []
    for i in range(m):
        terms: dict[MultiIndex, float] = {MultiIndex(): b[i]}
        for j in range(out_dim):
            if matrix[i, j] != 0.0:
                terms[MultiIndex.make({j + 1: 1})] = matrix[i, j]
        lines.append(PolyFunctional(terms, out_dim))
    return compose(poly, lines)


# -- serialization -----------------------------------------------------------------

def to_json_dict(obj: PolyFunctional | ChaosExpansion) -> dict:
    basis = "monomial" if isinstance(obj, PolyFunctional) else "chaos"
    records = [{"alpha": [[c, k] for c, k in alpha.pairs], "c": coeff}
               for alpha, coeff in sorted(obj.terms.items(), key=lambda kv: kv[0].pairs)]
    return {"dim": obj.dim, "basis": basis, "terms": records}


def from_json_dict(data: Mapping) -> PolyFunctional | ChaosExpansion:
    try:
        dim = int(data["dim"])
        basis = data["basis"]
        raw = data["terms"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed polynomial record: {exc}") from exc
    if basis not in ("monomial", "chaos"):
        raise ValueError(f"unknown basis {basis!r}")
    terms = {MultiIndex.make([(int(c), int(k)) for c, k in rec["alpha"]]): float(rec["c"])
             for rec in raw}
    cls = PolyFunctional if basis == "monomial" else ChaosExpansion
    return cls(terms, dim)
