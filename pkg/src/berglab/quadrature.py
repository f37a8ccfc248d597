"""Integration against weighted ball volumes and radial product measures.

Two schemes are provided.  The deterministic one substitutes t = |z|^2 so
the radial factor becomes the Jacobi weight (1 - t)^lam t^(d-1), splits t
over the coordinates through recursive simplex fractions (Gauss-Jacobi in
each fraction), and uses equispaced phase points, which integrate
trigonometric monomials exactly below the chosen order.  The Monte Carlo
scheme samples the same factorization with a seeded generator and serves
as an independent cross-check and as the fallback in high dimension.

All rules return plain (nodes, weights) arrays; weights sum to the total
mass of the measure, which is 1 for the normalized ball volumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special as sp_special

from .core import BallGeometry, WeightedSpace, level_of
from .errors import DomainError
from .symbols import (
    BinOp,
    Const,
    Coord,
    Func,
    GroupRadius,
    Neg,
    Power,
    ProductSymbol,
    SymbolExpr,
    eval_on_points,
)

_AST_TYPES = (Const, Coord, GroupRadius, Func, BinOp, Power, Neg, ProductSymbol)


def is_symbolic(f: object) -> bool:
    """True for DSL values (AST nodes and product symbols)."""
    return isinstance(f, _AST_TYPES)

GAUSS_JACOBI = "gauss_jacobi"
MONTE_CARLO = "monte_carlo"

# node-array cap: ~3 GiB of complex128 at d=4 is already past desk scale
_MAX_RULE_NODES = 20_000_000


@dataclass(frozen=True)
class QuadratureSpec:
    """How to integrate: scheme, orders, sample count and seed.

    ``q`` (radial order) and ``angular`` (phase points per angle) may be
    left at 0, in which case each caller picks values sufficient for its
    basis cutoff.  A fixed seed makes Monte Carlo runs bit-reproducible.
    """

    scheme: str = GAUSS_JACOBI
    q: int = 0
    angular: int = 0
    n_samples: int = 100_000
    seed: int = 20_260_813

    def __post_init__(self) -> None:
        if self.scheme not in (GAUSS_JACOBI, MONTE_CARLO):
            raise DomainError(f"unknown quadrature scheme {self.scheme!r}")
        if self.q < 0 or self.angular < 0 or self.n_samples < 1:
            raise DomainError("quadrature orders must be nonnegative and N >= 1")

    def resolved(self, d: int, max_degree: int, sym_degree: int = 0) -> "QuadratureSpec":
        """Fill in automatic orders for a basis cutoff and symbol degree."""
        q = self.q if self.q > 0 else max_degree + (sym_degree + 1) // 2 + 3
        angular = self.angular if self.angular > 0 else 2 * max_degree + sym_degree + 1
        return replace(self, q=q, angular=angular)


@lru_cache(maxsize=256)
def gauss_jacobi_rule(q: int, a_exp: float, b_exp: float) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on (0,1) absorbing the weight (1-t)^a t^b.

    sum w_i g(t_i) equals the integral of (1-t)^a t^b g(t) over (0,1)
    exactly for polynomials g of degree <= 2q - 1.
    """
    if q < 1:
        raise DomainError(f"rule order must be positive, got {q}")
    if a_exp <= -1.0 or b_exp <= -1.0:
        raise DomainError("Jacobi exponents must exceed -1")
    x, w = sp_special.roots_jacobi(q, a_exp, b_exp)
    t = 0.5 * (x + 1.0)
    w01 = w * math.exp(-(a_exp + b_exp + 1.0) * math.log(2.0))
    t.setflags(write=False)
    w01.setflags(write=False)
    return t, w01


@dataclass(frozen=True)
class BallRule:
    """Flat node/weight arrays for a weighted ball volume."""

    d: int
    lam: float
    nodes: np.ndarray  # (N, d) complex
    weights: np.ndarray  # (N,) real
    radial_t: np.ndarray  # (N,) |z|^2 per node

    @property
    def size(self) -> int:
        return self.weights.shape[0]


def ball_rule(
    d: int,
    lam: float,
    q_radial: int,
    n_phase: int,
    q_polar: Optional[int] = None,
) -> BallRule:
    """Deterministic product rule for the normalized weight on the d-ball.

    Exact for integrands z^alpha conj(z)^beta with |alpha|, |beta| bounded
    by roughly q_radial and phase differences below n_phase.
    """
    if q_polar is None:
        q_polar = q_radial
    u, wu = gauss_jacobi_rule(q_radial, lam, float(d - 1))
    # Simplex fractions of t = |z|^2 across the d axes.
    frac_nodes = [np.ones((1,))]
    frac_weights = [np.ones((1,))]
    if d > 1:
        axes_v = []
        axes_w = []
        for i in range(1, d):
            v, wv = gauss_jacobi_rule(q_polar, float(d - 1 - i), 0.0)
            axes_v.append(v)
            axes_w.append(wv)
        grids = np.meshgrid(*axes_v, indexing="ij")
        wgrids = np.meshgrid(*axes_w, indexing="ij")
        vv = np.stack([g.ravel() for g in grids], axis=-1)  # (Nv, d-1)
        ww = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
        s = np.empty((vv.shape[0], d))
        remaining = np.ones(vv.shape[0])
        for i in range(d - 1):
            s[:, i] = remaining * vv[:, i]
            remaining = remaining * (1.0 - vv[:, i])
        s[:, d - 1] = remaining
        frac_nodes = [s]
        frac_weights = [ww]
    s = frac_nodes[0] if d > 1 else np.ones((1, 1))
    ws = frac_weights[0]

    theta = 2.0 * math.pi * np.arange(n_phase) / n_phase
    phase = np.exp(1j * theta)

    # Assemble the flat product grid: radial x fractions x phases^d.
    n_frac = s.shape[0]
    shape = (q_radial, n_frac) + (n_phase,) * d
    total = int(np.prod(shape))
    if total > _MAX_RULE_NODES:
        raise DomainError(
            f"the product rule needs {total} nodes (over the "
            f"{_MAX_RULE_NODES} desk budget); lower the cutoff, the "
            "dimension or the requested orders, or switch to sampling"
        )
    nodes = np.empty((total, d), dtype=complex)
    uu = u.reshape(q_radial, 1, *([1] * d))
    radial_t = np.broadcast_to(uu, shape).ravel()
    for axis in range(d):
        r_axis = np.sqrt(uu * s[:, axis].reshape(1, n_frac, *([1] * d)))
        ph_shape = [1] * (2 + d)
        ph_shape[2 + axis] = n_phase
        nodes[:, axis] = np.broadcast_to(
            r_axis * phase.reshape(ph_shape), shape
        ).ravel()

    log_c = (
        sp_special.gammaln(d + lam + 1.0)
        - d * math.log(math.pi)
        - sp_special.gammaln(lam + 1.0)
    )
    scale = math.exp(log_c - d * math.log(2.0) + d * math.log(2.0 * math.pi / n_phase))
    w_full = scale * wu.reshape(q_radial, 1) * ws.reshape(1, n_frac)
    weights = np.broadcast_to(
        w_full.reshape(q_radial, n_frac, *([1] * d)), shape
    ).ravel() / 1.0
    return BallRule(d=d, lam=lam, nodes=nodes, weights=weights, radial_t=np.asarray(radial_t))


def monte_carlo_points(
    d: int, lam: float, n: int, seed: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Seeded samples from the normalized weight; returns (points, t).

    Radius: t = |z|^2 follows Beta(d, lam + 1).  Directions: simplex
    fractions are Dirichlet(1, ..., 1), phases are uniform.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    t = rng.beta(d, lam + 1.0, size=n)
    if d == 1:
        s = np.ones((n, 1))
    else:
        s = rng.dirichlet(np.ones(d), size=n)
    theta = rng.uniform(0.0, 2.0 * math.pi, size=(n, d))
    z = np.sqrt(t[:, None] * s) * np.exp(1j * theta)
    return z, t


PointFunction = Callable[[np.ndarray], np.ndarray]


def as_point_function(
    f: Union[SymbolExpr, ProductSymbol, PointFunction],
    geometry: Optional[BallGeometry] = None,
    allow_boundary: bool = False,
) -> PointFunction:
    """Wrap a symbol (or pass through a callable) as z-array -> values."""
    if callable(f) and not is_symbolic(f):
        return f

    def fn(z: np.ndarray) -> np.ndarray:
        return eval_on_points(
            f, z, geometry=geometry, allow_boundary=allow_boundary, check_ball=False
        )

    return fn


def _check_finite(values: np.ndarray, nodes: np.ndarray) -> None:
    finite = np.isfinite(values)
    if not np.all(finite):
        bad = np.argwhere(~finite)[0]
        raise DomainError(
            f"symbol evaluates non-finite at quadrature node {nodes[tuple(bad)]}"
        )


def integrate_ball(
    f: Union[SymbolExpr, ProductSymbol, PointFunction],
    space: WeightedSpace,
    spec: QuadratureSpec,
    *,
    max_degree: int = 8,
    sym_degree: int = 4,
) -> complex:
    """Integral of f against the normalized weight on the d-ball."""
    fn = as_point_function(f, space.geometry)
    if spec.scheme == MONTE_CARLO:
        value, _ = monte_carlo_integral(fn, space, spec)
        return value
    resolved = spec.resolved(space.d, max_degree, sym_degree)
    rule = ball_rule(space.d, space.lam, resolved.q, resolved.angular)
    values = np.asarray(fn(rule.nodes))
    _check_finite(values, rule.nodes)
    return complex(np.dot(rule.weights, values))


def monte_carlo_integral(
    f: Union[SymbolExpr, ProductSymbol, PointFunction],
    space: WeightedSpace,
    spec: QuadratureSpec,
) -> Tuple[complex, float]:
    """Monte Carlo estimate and its standard error."""
    fn = as_point_function(f, space.geometry)
    z, _ = monte_carlo_points(space.d, space.lam, spec.n_samples, spec.seed)
    values = np.asarray(fn(z))
    _check_finite(values, z)
    mean = complex(np.mean(values))
    var = float(np.mean(np.abs(values - mean) ** 2))
    stderr = math.sqrt(var / spec.n_samples)
    return mean, stderr


def axis_winding(
    expr: Union[SymbolExpr, ProductSymbol],
    d: int,
    zc_offset: int = 0,
) -> Optional[Tuple[int, ...]]:
    """Per-axis phase degree of the symbol, or None if not homogeneous.

    When defined, the pairing of f z^alpha against z^beta vanishes exactly
    unless beta = alpha + winding, so those matrix entries can be set to
    zero without integrating.  ``zc_offset`` places zc-coordinates on the
    full-ball axes (the split point for full-ball evaluation, 0 on the
    inner ball itself).
    """
    if isinstance(expr, ProductSymbol):
        geo = expr.geometry
        if geo is None:
            return None
        wa = axis_winding(expr.a, geo.ell)
        wc = axis_winding(expr.c, geo.n - geo.ell)
        if wa is None or wc is None:
            return None
        return wa + wc

    zero = (0,) * d

    def walk(node: SymbolExpr) -> Optional[Tuple[int, ...]]:
        if isinstance(node, Const):
            return zero
        if isinstance(node, GroupRadius):
            return zero
        if isinstance(node, Coord):
            if node.index is None:
                return None
            axis = node.index - 1 + (zc_offset if node.part == "zc" else 0)
            if axis >= d:
                return None
            out = [0] * d
            out[axis] = 1
            return tuple(out)
        if isinstance(node, Neg):
            return walk(node.arg)
        if isinstance(node, Func):
            if node.name == "abs2":
                arg = node.arg
                if isinstance(arg, Coord) and arg.index is None:
                    return zero
                w = walk(arg)
                return zero if w is not None else None
            if node.name == "conj":
                w = walk(node.arg)
                return tuple(-v for v in w) if w is not None else None
            w = walk(node.arg)
            return zero if w == zero else None
        if isinstance(node, Power):
            w = walk(node.base)
            return tuple(node.exponent * v for v in w) if w is not None else None
        if isinstance(node, BinOp):
            wl = walk(node.lhs)
            wr = walk(node.rhs)
            if wl is None or wr is None:
                return None
            if node.op == "*":
                return tuple(a + b for a, b in zip(wl, wr))
            if node.op == "/":
                return tuple(a - b for a, b in zip(wl, wr))
            return wl if wl == wr else None
        raise TypeError(f"unexpected node {node!r}")

    return walk(expr)


def inner_product_weighted(
    f: Union[SymbolExpr, ProductSymbol, PointFunction],
    alpha: Sequence[int],
    beta: Sequence[int],
    space: WeightedSpace,
    spec: QuadratureSpec,
) -> complex:
    """<f z^alpha, z^beta> against the weighted volume (monomials unscaled).

    For phase-homogeneous f the result is exactly 0 whenever the exponents
    are incompatible with the winding; that case short-circuits.
    """
    alpha = tuple(int(v) for v in alpha)
    beta = tuple(int(v) for v in beta)
    if len(alpha) != space.d or len(beta) != space.d:
        raise DomainError("multi-index length does not match the space dimension")
    if is_symbolic(f):
        offset = space.geometry.ell if space.geometry is not None else 0
        w = axis_winding(f, space.d, zc_offset=offset)
        if w is not None and tuple(a + ww for a, ww in zip(alpha, w)) != beta:
            return 0.0

    fn = as_point_function(f, space.geometry)
    deg = sum(alpha) + sum(beta)

    def integrand(z: np.ndarray) -> np.ndarray:
        mono = np.ones(z.shape[0], dtype=complex)
        for ax in range(space.d):
            if alpha[ax]:
                mono = mono * z[:, ax] ** alpha[ax]
            if beta[ax]:
                mono = mono * np.conj(z[:, ax]) ** beta[ax]
        return np.asarray(fn(z)) * mono

    if spec.scheme == MONTE_CARLO:
        value, _ = monte_carlo_integral(integrand, WeightedSpace(space.d, space.lam), spec)
        return value
    resolved = spec.resolved(space.d, max(sum(alpha), sum(beta)), 4)
    rule = ball_rule(space.d, space.lam, max(resolved.q, deg // 2 + 2), resolved.angular)
    values = integrand(rule.nodes)
    _check_finite(values, rule.nodes)
    return complex(np.dot(rule.weights, values))


@dataclass(frozen=True)
class SimplexRule:
    """Rule for profile moments over the set of group radii.

    Integrates a(r_1, ..., r_m) against (1 - |r|^2)^lam prod r_j^(p_j) dr
    over the positive orthant piece of the unit ball, via t_j = r_j^2.
    ``radii`` holds the r-nodes, shape (N, m).
    """

    m: int
    lam: float
    powers: Tuple[int, ...]
    radii: np.ndarray
    weights: np.ndarray

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))


def simplex_radial_rule(
    lam: float, powers: Sequence[int], q: int
) -> SimplexRule:
    """Build the rule; powers are the odd exponents p_j on each r_j.

    Each p_j must be odd so that t_j = r_j^2 turns the measure into the
    Dirichlet-type weight prod t^((p_j - 1)/2) (1 - sum t)^lam, which the
    per-axis Jacobi rules absorb exactly.
    """
    powers = tuple(int(p) for p in powers)
    if any(p < 1 or p % 2 == 0 for p in powers):
        raise DomainError(f"radial exponents must be odd and positive, got {powers}")
    m = len(powers)
    c = [(p - 1) // 2 for p in powers]
    axes_nodes = []
    axes_weights = []
    for j in range(m):
        a_exp = lam + (m - 1 - j) + sum(c[j + 1 :])
        v, wv = gauss_jacobi_rule(q, float(a_exp), float(c[j]))
        axes_nodes.append(v)
        axes_weights.append(wv)
    grids = np.meshgrid(*axes_nodes, indexing="ij")
    wgrids = np.meshgrid(*axes_weights, indexing="ij")
    vv = np.stack([g.ravel() for g in grids], axis=-1)
    ww = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    t = np.empty_like(vv)
    remaining = np.ones(vv.shape[0])
    for j in range(m):
        t[:, j] = remaining * vv[:, j]
        remaining = remaining * (1.0 - vv[:, j])
    # The substitution contributes 2^-m; fold it into the weights so the
    # rule integrates directly against the r-measure.
    ww = ww * math.exp(-m * math.log(2.0))
    return SimplexRule(
        m=m, lam=lam, powers=powers, radii=np.sqrt(t), weights=ww
    )


def torus_invariant_zero(
    f: Union[SymbolExpr, ProductSymbol],
    geometry: BallGeometry,
    alpha: Sequence[int],
    beta: Sequence[int],
) -> bool:
    """True when group-degree bookkeeping forces the pairing to vanish.

    Cruder than the per-axis winding: only requires invariance under the
    per-group torus action, in which case pairings between different group
    degrees of the z' part vanish.
    """
    from .symbols import _winding  # local import to keep the module graph acyclic

    if isinstance(f, ProductSymbol):
        w = (0,) * geometry.m
    else:
        w = _winding(f, geometry)
    if w != (0,) * geometry.m:
        return False
    a_prime = tuple(alpha[: geometry.ell])
    b_prime = tuple(beta[: geometry.ell])
    return level_of(a_prime, geometry.k) != level_of(b_prime, geometry.k)
