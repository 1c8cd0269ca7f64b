"""Malliavin operators on polynomial functionals: the derivative D and its
directional/iterated variants, the divergence delta (adjoint of D), the
Ornstein-Uhlenbeck generator L and semigroup T_t, the Cauchy pair C and P_t,
Sobolev seminorms, the Malliavin matrix and a library of verifiable operator
identities.

Every operator here is exact on polynomials: D differentiates coefficients,
delta is the coordinate formula delta(u) = sum_i u_i xi_i - sum_i d_i u_i,
and L, T_t, C, P_t act as spectral multipliers on the chaos decomposition.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import montecarlo
from .polynomials import (
    ChaosExpansion,
    MultiIndex,
    PolyFunctional,
    chaos_to_poly,
    compose,
    expectation_exact,
    poly_to_chaos,
)


class HField:
    """H-valued polynomial random variable in canonical coordinate form.

    The field u = sum_j F_j h_j is stored collapsed onto the basis directions,
    u = sum_i u_i e_i with u_i polynomial, which makes the divergence formula
    independent of how the field was presented.
    """

    __slots__ = ("coords", "dim")

    def __init__(self, coords: Sequence[PolyFunctional]):
        coords = tuple(coords)
        if not coords:
            raise ValueError("field needs at least one coordinate")
        dim = coords[0].dim
        if len(coords) != dim:
            raise ValueError(f"expected {dim} coordinate functions, got {len(coords)}")
        for c in coords:
            if c.dim != dim:
                raise ValueError("all coordinates must share the dimension")
        self.coords = coords
        self.dim = dim

    @classmethod
    def zero(cls, dim: int) -> "HField":
        return cls([PolyFunctional.zero(dim)] * dim)

    @classmethod
    def deterministic(cls, h: Sequence[float]) -> "HField":
        h = np.asarray(h, dtype=float)
        dim = h.size
        return cls([PolyFunctional.constant(v, dim) for v in h])

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[PolyFunctional, Sequence[float]]],
                   dim: int) -> "HField":
        """Canonicalize a sum of (F_j, h_j) components onto the basis."""
        coords = [PolyFunctional.zero(dim) for _ in range(dim)]
        for f, h in pairs:
            if f.dim != dim:
                raise ValueError("component dimension mismatch")
            h = np.asarray(h, dtype=float)
            if h.shape != (dim,):
                raise ValueError(f"direction must have shape ({dim},)")
            for i, w in enumerate(h):
                if w != 0.0:
                    coords[i] = coords[i] + w * f
        return cls(coords)

    def dot_vector(self, h: Sequence[float]) -> PolyFunctional:
        """<u, h> for a deterministic h."""
        h = np.asarray(h, dtype=float)
        if h.shape != (self.dim,):
            raise ValueError(f"vector must have shape ({self.dim},)")
        out = PolyFunctional.zero(self.dim)
        for w, c in zip(h, self.coords):
            if w != 0.0:
                out = out + w * c
        return out

    def dot(self, other: "HField") -> PolyFunctional:
        """<u, v> as a polynomial functional."""
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        out = PolyFunctional.zero(self.dim)
        for a, b in zip(self.coords, other.coords):
            out = out + a * b
        return out

    def norm_sq(self) -> PolyFunctional:
        return self.dot(self)

    def directional(self, h: Sequence[float]) -> "HField":
        """D^h u, applied componentwise."""
        return HField([directional_derivative(c, h) for c in self.coords])

    def __add__(self, other: "HField") -> "HField":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        return HField([a + b for a, b in zip(self.coords, other.coords)])

    def __sub__(self, other: "HField") -> "HField":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        return HField([a - b for a, b in zip(self.coords, other.coords)])

    def scaled(self, factor: float) -> "HField":
        return HField([factor * c for c in self.coords])

    def max_abs_coeff(self) -> float:
        return max(c.max_abs_coeff() for c in self.coords)

    def __repr__(self) -> str:
        return f"HField(dim={self.dim})"


# -- derivatives ---------------------------------------------------------------

def derivative(f: PolyFunctional) -> HField:
    """DF = sum_i (dF/dxi_i) e_i; in particular D W(h) = h."""
    return HField([f.partial(i) for i in range(1, f.dim + 1)])


def directional_derivative(f: PolyFunctional, h: Sequence[float]) -> PolyFunctional:
    """D^h F = <DF, h>."""
    h = np.asarray(h, dtype=float)
    if h.shape != (f.dim,):
        raise ValueError(f"direction must have shape ({f.dim},)")
    out = PolyFunctional.zero(f.dim)
    for i, w in enumerate(h, start=1):
        if w != 0.0:
            out = out + w * f.partial(i)
    return out


def iterated_derivative(f: PolyFunctional, k: int) -> np.ndarray:
    """D^k F as a rank-k tensor of polynomials, entry (i1..ik) = d^k F / dxi_{i1}..dxi_{ik}."""
    if k < 1:
        raise ValueError("derivative order must be >= 1")
    d = f.dim
    tensor = np.empty((d,) * k, dtype=object)
    for index in np.ndindex(*tensor.shape):
        g = f
        for i in index:
            g = g.partial(i + 1)
        tensor[index] = g
    return tensor


# -- divergence ------------------------------------------------------------------

def divergence(u: HField) -> PolyFunctional:
    """delta(u) = sum_i u_i xi_i - sum_i d_i u_i (coordinate form of the adjoint)."""
    out = PolyFunctional.zero(u.dim)
    for i, ui in enumerate(u.coords, start=1):
        out = out + ui * PolyFunctional.coordinate(i, u.dim) - ui.partial(i)
    return out


def field_jacobian(u: HField) -> list[list[PolyFunctional]]:
    """Du as a d x d matrix of polynomials with entry [i][j] = d_i u_j."""
    return [[u.coords[j].partial(i + 1) for j in range(u.dim)] for i in range(u.dim)]


def trace_du_dv(u: HField, v: HField) -> PolyFunctional:
    """Tr(Du Dv) = sum_{i,j} d_i u_j d_j v_i."""
    if u.dim != v.dim:
        raise ValueError("dimension mismatch")
    out = PolyFunctional.zero(u.dim)
    for i in range(1, u.dim + 1):
        for j in range(1, u.dim + 1):
            out = out + u.coords[j - 1].partial(i) * v.coords[i - 1].partial(j)
    return out


# -- random Hilbert-Schmidt matrices ---------------------------------------------

def matrix_transpose(a: Sequence[Sequence[PolyFunctional]]) -> list[list[PolyFunctional]]:
    n = len(a)
    return [[a[j][i] for j in range(n)] for i in range(n)]


def matrix_product(a, b) -> list[list[PolyFunctional]]:
    n = len(a)
    dim = a[0][0].dim
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = PolyFunctional.zero(dim)
            for k in range(n):
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out


def trace_product_diag(a, b) -> PolyFunctional:
    """Tr(AB) by summing the diagonal of the full matrix product."""
    prod = matrix_product(a, b)
    out = PolyFunctional.zero(a[0][0].dim)
    for i in range(len(a)):
        out = out + prod[i][i]
    return out


def trace_product_basis(a, b) -> PolyFunctional:
    """Tr(AB) = sum_k <A B e_k, e_k> without forming the product matrix."""
    n = len(a)
    out = PolyFunctional.zero(a[0][0].dim)
    for k in range(n):
        for i in range(n):
            out = out + a[k][i] * b[i][k]
    return out


def hs_norm_sq(a) -> PolyFunctional:
    """||A||_HS^2 = sum of squared entries."""
    out = PolyFunctional.zero(a[0][0].dim)
    for row in a:
        for entry in row:
            out = out + entry * entry
    return out


# -- spectral multipliers ----------------------------------------------------------

Multiplier = Callable[[int], float] | Mapping[int, float]


def spectral_apply(f: PolyFunctional | ChaosExpansion,
                   multiplier: Multiplier) -> ChaosExpansion:
    """Apply sum_n m(n) J_n to a functional.

    The multiplier may be a callable on chaos orders or a mapping; a mapping
    must cover every order present in the input.
    """
    expansion = poly_to_chaos(f) if isinstance(f, PolyFunctional) else f
    if callable(multiplier):
        get = multiplier
    else:
        def get(n: int, _m=multiplier) -> float:
            if n not in _m:
                raise ValueError(f"multiplier undefined for chaos order {n}")
            return _m[n]
    out = {a: c * get(a.order()) for a, c in expansion.terms.items()}
    return ChaosExpansion(out, expansion.dim)


def ou_generator(f: PolyFunctional | ChaosExpansion) -> ChaosExpansion:
    """L F = -sum_n n J_n F."""
    return spectral_apply(f, lambda n: -float(n))


def ou_semigroup(f: PolyFunctional | ChaosExpansion, t: float) -> ChaosExpansion:
    """T_t F = sum_n e^{-n t} J_n F."""
    if t < 0:
        raise ValueError("semigroup time must be >= 0")
    return spectral_apply(f, lambda n: math.exp(-n * t))


def cauchy_generator(f: PolyFunctional | ChaosExpansion) -> ChaosExpansion:
    """C F = -sum_n sqrt(n) J_n F."""
    return spectral_apply(f, lambda n: -math.sqrt(n))


def cauchy_semigroup(f: PolyFunctional | ChaosExpansion, t: float) -> ChaosExpansion:
    """P_t F = sum_n e^{-sqrt(n) t} J_n F."""
    if t < 0:
        raise ValueError("semigroup time must be >= 0")
    return spectral_apply(f, lambda n: math.exp(-math.sqrt(n) * t))


# -- Sobolev seminorms ---------------------------------------------------------------

def sobolev_norm_sq(f: PolyFunctional, k: int) -> tuple[float, ...]:
    """(E[F^2], E||DF||^2, ..., E||D^k F||^2) from the chaos decomposition.

    E||D^j F||^2 = sum_{n >= j} n!/(n-j)! ||J_n F||^2.
    """
    if k < 1:
        raise ValueError("order must be >= 1")
    expansion = poly_to_chaos(f)
    by_order: dict[int, float] = {}
    for a, c in expansion.terms.items():
        by_order[a.order()] = by_order.get(a.order(), 0.0) + c * c
    out = [sum(by_order.values())]
    for j in range(1, k + 1):
        out.append(sum(math.perm(n, j) * w for n, w in by_order.items() if n >= j))
    return tuple(out)


def sobolev_norm_sq_direct(f: PolyFunctional, k: int) -> tuple[float, ...]:
    """Independent cross-check summing E[entry^2] over the D^j tensors."""
    if k < 1:
        raise ValueError("order must be >= 1")
    out = [expectation_exact(f * f)]
    for j in range(1, k + 1):
        tensor = iterated_derivative(f, j)
        out.append(sum(expectation_exact(g * g) for g in tensor.flat))
    return tuple(out)


# -- chain rule -------------------------------------------------------------------

def chain_rule_apply(phi: PolyFunctional,
                     fs: Sequence[PolyFunctional]) -> PolyFunctional:
    """phi(F^1, ..., F^m) with polynomial phi; D then obeys the chain rule."""
    return compose(phi, fs)


# -- Malliavin matrix --------------------------------------------------------------

@dataclass
class MalliavinMatrix:
    """Gram matrix gamma[i][j] = <DF^i, DF^j> of a random vector."""

    entries: list[list[PolyFunctional]]
    dim: int

    @property
    def size(self) -> int:
        return len(self.entries)

    def eval_batch(self, xs: np.ndarray) -> np.ndarray:
        """Evaluate to an (n_samples, size, size) array."""
        n = self.size
        xs = np.asarray(xs, dtype=float)
        out = np.empty((xs.shape[0], n, n))
        for i in range(n):
            for j in range(i, n):
                vals = self.entries[i][j].eval_batch(xs)
                out[:, i, j] = vals
                out[:, j, i] = vals
        return out

    def det_batch(self, xs: np.ndarray) -> np.ndarray:
        return np.linalg.det(self.eval_batch(xs))


def malliavin_matrix(fs: Sequence[PolyFunctional]) -> MalliavinMatrix:
    """Assemble gamma_{ij} = sum_k d_k F^i d_k F^j symbolically."""
    if not fs:
        raise ValueError("need at least one functional")
    dim = fs[0].dim
    for f in fs:
        if f.dim != dim:
            raise ValueError("functionals must share the dimension")
    grads = [derivative(f) for f in fs]
    n = len(fs)
    entries = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            g = grads[i].dot(grads[j])
            entries[i][j] = g
            entries[j][i] = g
    return MalliavinMatrix(entries, dim)


@dataclass
class NondegeneracyReport:
    """Monte Carlo diagnostics for the Malliavin-matrix criteria."""

    n_samples: int
    det_zero_prob: montecarlo.EstimateReport
    tail_probs: dict[float, montecarlo.EstimateReport]
    inverse_moments: dict[float, montecarlo.EstimateReport]
    bh_plausible: bool
    degenerate: bool


def nondegeneracy_report(fs: Sequence[PolyFunctional],
                         cfg: montecarlo.McConfig,
                         eps_values: Sequence[float] = (0.01,),
                         p_values: Sequence[float] = (1.0,),
                         zero_tol: float = 1e-12,
                         zero_prob_threshold: float = 1e-3) -> NondegeneracyReport:
    """Estimate P(det Gamma <= eps) and E[(det Gamma)^{-p}] by sampling.

    The absolute-continuity criterion is flagged plausible when the confidence
    interval for P(det Gamma = 0) lies entirely below the threshold; the vector
    is flagged degenerate when that interval lies above 1/2.
    """
    gamma = malliavin_matrix(fs)
    dim = gamma.dim

    def dets(xs: np.ndarray) -> np.ndarray:
        return gamma.det_batch(xs)

    zero = montecarlo.estimate_expectation(
        lambda xs: (dets(xs) <= zero_tol).astype(float), cfg, dim)
    tails = {
        float(eps): montecarlo.estimate_expectation(
            lambda xs, e=eps: (dets(xs) <= e).astype(float), cfg, dim)
        for eps in eps_values
    }

    def inv_moment(xs: np.ndarray, p: float) -> np.ndarray:
        d = dets(xs)
        out = np.full(d.shape, np.nan)
        ok = d > zero_tol
        out[ok] = d[ok] ** (-p)
        return out

    inv = {
        float(p): montecarlo.estimate_expectation(
            lambda xs, q=p: inv_moment(xs, q), cfg, dim)
        for p in p_values
    }
    half_width = cfg.confidence_multiplier * zero.std_error
    bh = zero.mean + half_width < zero_prob_threshold
    degen = zero.mean - half_width > 0.5
    return NondegeneracyReport(cfg.n_samples, zero, tails, inv, bh, degen)


# -- identity library ---------------------------------------------------------------

IDENTITY_TOLERANCE = 1e-9


def _sym_residual(diff: PolyFunctional) -> float:
    return diff.max_abs_coeff()


def _ibp_residual(f: PolyFunctional, h: Sequence[float]) -> float:
    from .gaussian import isonormal_map
    lhs = expectation_exact(directional_derivative(f, h))
    rhs = expectation_exact(isonormal_map(np.asarray(h, dtype=float)) * f)
    return abs(lhs - rhs)


def _ibp_product_residual(f: PolyFunctional, g: PolyFunctional,
                          h: Sequence[float]) -> float:
    from .gaussian import isonormal_map
    w = isonormal_map(np.asarray(h, dtype=float))
    lhs = expectation_exact(directional_derivative(f, h) * g)
    rhs = expectation_exact(f * g * w) - expectation_exact(f * directional_derivative(g, h))
    return abs(lhs - rhs)


def _duality_residual(f: PolyFunctional, u: HField) -> float:
    lhs = expectation_exact(f * divergence(u))
    rhs = expectation_exact(derivative(f).dot(u))
    return abs(lhs - rhs)


def _commute_residual(u: HField, h: Sequence[float]) -> float:
    lhs = directional_derivative(divergence(u), h)
    rhs = u.dot_vector(h) + divergence(u.directional(h))
    return _sym_residual(lhs - rhs)


def _energy_residual(u: HField, v: HField) -> float:
    lhs = expectation_exact(divergence(u) * divergence(v))
    rhs = expectation_exact(u.dot(v)) + expectation_exact(trace_du_dv(u, v))
    return abs(lhs - rhs)


def _delta_d_l_residual(f: PolyFunctional) -> float:
    lhs = divergence(derivative(f))
    rhs = -1.0 * chaos_to_poly(ou_generator(f))
    return _sym_residual(lhs - rhs)


def _l_second_order_residual(f: PolyFunctional) -> float:
    lf = chaos_to_poly(ou_generator(f))
    second = PolyFunctional.zero(f.dim)
    for j in range(1, f.dim + 1):
        pj = f.partial(j)
        second = second + pj.partial(j) - pj * PolyFunctional.coordinate(j, f.dim)
    return _sym_residual(lf - second)


def _trace_form_residual(a, b=None) -> float:
    if b is None:
        b = matrix_transpose(a)
    r1 = _sym_residual(trace_product_diag(a, b) - trace_product_basis(a, b))
    r2 = _sym_residual(trace_product_diag(a, matrix_transpose(a)) - hs_norm_sq(a))
    return max(r1, r2)


_IDENTITIES: dict[str, Callable[..., float]] = {
    "ibp": _ibp_residual,
    "ibp-product": _ibp_product_residual,
    "duality": _duality_residual,
    "commute": _commute_residual,
    "energy": _energy_residual,
    "delta-d-l": _delta_d_l_residual,
    "l-second-order": _l_second_order_residual,
    "trace-form": _trace_form_residual,
}


def identity_names() -> tuple[str, ...]:
    return tuple(_IDENTITIES)


def identity_residual(name: str, **inputs) -> float:
    """|LHS - RHS| of a named operator identity, computed exactly.

    Expectation identities compare scalars from the moment oracle; operator
    identities compare polynomial coefficients (max absolute difference).
    Required keyword inputs per identity:

      ibp: f, h              ibp-product: f, g, h     duality: f, u
      commute: u, h          energy: u, v             delta-d-l: f
      l-second-order: f      trace-form: a [, b]
    """
    key = name.strip().lower()
    if key not in _IDENTITIES:
        raise ValueError(f"unknown identity {name!r}; expected one of {sorted(_IDENTITIES)}")
    return _IDENTITIES[key](**inputs)
