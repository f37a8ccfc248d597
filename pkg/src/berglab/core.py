"""Dimensions, weights, multi-index combinatorics and basis normalization.

Everything downstream (quadrature, matrix assembly, level decomposition)
is phrased in terms of the types defined here.  The conventions:

* balls are complex unit balls of complex dimension ``d``;
* the reference measure at weight ``lam > -1`` is the normalized weighted
  volume ``dv_lam = c_lam (1 - |z|^2)^lam dv`` with total mass 1;
* the monomials ``z^alpha`` scaled by :func:`basis_norm_constant` form an
  orthonormal basis of the corresponding weighted space;
* bases are truncated by total degree and ordered graded-lexicographically.

All Gamma-function ratios are taken in log space so that degrees of a few
hundred do not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, Sequence, Tuple

import numpy as np
from scipy import special as sp_special

from .errors import DomainError

MultiIndex = Tuple[int, ...]


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if x <= 0.0:
        raise DomainError(f"log_gamma requires a positive argument, got {x}")
    return float(sp_special.gammaln(x))


def beta_fn(x: float, y: float) -> float:
    """Euler Beta function B(x, y) = Gamma(x)Gamma(y)/Gamma(x+y), x, y > 0."""
    if x <= 0.0 or y <= 0.0:
        raise DomainError(f"beta_fn requires positive arguments, got ({x}, {y})")
    return math.exp(log_gamma(x) + log_gamma(y) - log_gamma(x + y))


def _check_weight(lam: float) -> None:
    if not lam > -1.0:
        raise DomainError(f"weight must exceed -1, got {lam}")


@dataclass(frozen=True)
class BallGeometry:
    """Coordinate split of the ball in C^n.

    The first ``ell`` coordinates form z', the remaining ``n - ell`` form
    z''.  The partition ``k`` groups the z' coordinates into ``m = len(k)``
    consecutive blocks of sizes k_1, ..., k_m.
    """

    n: int
    ell: int
    k: Tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"total dimension must be positive, got {self.n}")
        # ell == n leaves no z'' block; that degenerate split carries the
        # partition when the z'-factor is treated as a space of its own.
        if not 1 <= self.ell <= self.n:
            raise DomainError(
                f"split point must lie in 1..{self.n}, got {self.ell}"
            )
        kk = tuple(int(v) for v in self.k)
        object.__setattr__(self, "k", kk)
        if not kk or any(v < 1 for v in kk):
            raise DomainError(f"partition entries must be positive, got {kk}")
        if sum(kk) != self.ell:
            raise DomainError(
                f"partition {kk} must sum to the split point {self.ell}"
            )

    @property
    def m(self) -> int:
        return len(self.k)

    @property
    def d_inner(self) -> int:
        """Complex dimension of the z'' ball."""
        return self.n - self.ell

    def group_of(self, axis: int) -> int:
        """Group index (0-based) of a z' axis (0-based)."""
        if not 0 <= axis < self.ell:
            raise DomainError(f"axis {axis} is not a z' coordinate")
        upto = 0
        for j, kj in enumerate(self.k):
            upto += kj
            if axis < upto:
                return j
        raise AssertionError("unreachable")


@dataclass(frozen=True)
class WeightedSpace:
    """A weighted Bergman-type space on the ball of complex dimension d."""

    d: int
    lam: float
    geometry: BallGeometry | None = None

    def __post_init__(self) -> None:
        if self.d < 1:
            raise DomainError(f"dimension must be positive, got {self.d}")
        _check_weight(self.lam)

    @property
    def log_volume_const(self) -> float:
        """log of c_lam = Gamma(d + lam + 1) / (pi^d Gamma(lam + 1))."""
        return (
            log_gamma(self.d + self.lam + 1.0)
            - self.d * math.log(math.pi)
            - log_gamma(self.lam + 1.0)
        )

    @property
    def volume_const(self) -> float:
        return math.exp(self.log_volume_const)


@dataclass(frozen=True)
class Level:
    """Group-degree tuple rho with its derived weight mu = lam + |rho| + ell."""

    rho: Tuple[int, ...]
    total: int
    mu: float

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.rho):
            raise DomainError(f"level entries must be nonnegative, got {self.rho}")
        if self.total != sum(self.rho):
            raise DomainError("level total does not match the entries")
        if not self.mu > -1.0:
            raise DomainError(f"derived weight must exceed -1, got {self.mu}")


def make_level(rho: Sequence[int], lam: float, ell: int) -> Level:
    rho_t = tuple(int(v) for v in rho)
    total = sum(rho_t)
    return Level(rho=rho_t, total=total, mu=lam + total + ell)


def level_of(alpha_prime: Sequence[int], k: Sequence[int]) -> Tuple[int, ...]:
    """Group degrees of a z'-multi-index under the partition k."""
    if len(alpha_prime) != sum(k):
        raise DomainError(
            f"multi-index length {len(alpha_prime)} does not match partition {tuple(k)}"
        )
    out = []
    pos = 0
    for kj in k:
        out.append(int(sum(alpha_prime[pos : pos + kj])))
        pos += kj
    return tuple(out)


def dim_level(rho: Sequence[int], k: Sequence[int]) -> int:
    """Number of z'-monomials with group degrees rho.

    Equals the product over groups of C(rho_j + k_j - 1, k_j - 1), the
    count of degree-rho_j monomials in k_j variables.
    """
    if len(rho) != len(k):
        raise DomainError("level and partition lengths differ")
    out = 1
    for rj, kj in zip(rho, k):
        out *= math.comb(int(rj) + int(kj) - 1, int(kj) - 1)
    return out


def basis_norm_constant(alpha: Sequence[int], d: int, lam: float) -> float:
    """Normalization making z^alpha a unit vector at weight lam.

    sqrt(Gamma(d + |alpha| + lam + 1) / (alpha! Gamma(d + lam + 1))),
    evaluated via log-gamma differences.
    """
    _check_weight(lam)
    total = int(sum(alpha))
    log_val = log_gamma(d + total + lam + 1.0) - log_gamma(d + lam + 1.0)
    for a in alpha:
        log_val -= log_gamma(float(a) + 1.0)
    return math.exp(0.5 * log_val)


def monomial_moment(alpha: Sequence[int], d: int, lam: float) -> float:
    """Closed form of the squared monomial norm <z^a, z^a> at weight lam."""
    _check_weight(lam)
    total = int(sum(alpha))
    log_val = log_gamma(d + lam + 1.0) - log_gamma(d + total + lam + 1.0)
    for a in alpha:
        log_val += log_gamma(float(a) + 1.0)
    return math.exp(log_val)


def compositions(total: int, parts: int) -> Iterator[MultiIndex]:
    """All multi-indices of the given total degree, lexicographically
    descending, e.g. (2,0), (1,1), (0,2)."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class TruncatedBasis:
    """Monomial basis of total degree <= D, graded-lexicographic order.

    The order lists degrees 0, 1, ..., D and sorts each degree block
    lexicographically descending, so (1,0) precedes (0,1).  ``norms``
    holds the per-entry normalization constants at the space weight.
    """

    d: int
    D: int
    lam: float
    indices: Tuple[MultiIndex, ...]
    norms: np.ndarray = field(repr=False)
    degrees: np.ndarray = field(repr=False)
    position: Dict[MultiIndex, int] = field(repr=False)

    @property
    def count(self) -> int:
        return len(self.indices)

    def index_of(self, alpha: Sequence[int]) -> int:
        key = tuple(int(v) for v in alpha)
        try:
            return self.position[key]
        except KeyError:
            raise DomainError(f"multi-index {key} is not in the basis") from None

    def exponent_array(self) -> np.ndarray:
        """Basis exponents as an integer array of shape (count, d)."""
        return np.array(self.indices, dtype=np.int64).reshape(self.count, self.d)


def enumerate_basis(d: int, D: int, lam: float) -> TruncatedBasis:
    """Build the truncated basis on the d-ball at weight lam, cutoff D."""
    if d < 1:
        raise DomainError(f"dimension must be positive, got {d}")
    if D < 0:
        raise DomainError(f"degree cutoff must be nonnegative, got {D}")
    _check_weight(lam)
    indices = []
    for deg in range(D + 1):
        indices.extend(compositions(deg, d))
    indices_t = tuple(indices)
    norms = np.array([basis_norm_constant(a, d, lam) for a in indices_t])
    degrees = np.array([sum(a) for a in indices_t], dtype=np.int64)
    position = {a: i for i, a in enumerate(indices_t)}
    assert len(indices_t) == math.comb(D + d, d)
    return TruncatedBasis(
        d=d, D=D, lam=lam, indices=indices_t, norms=norms,
        degrees=degrees, position=position,
    )


def count_basis(d: int, D: int) -> int:
    """Size of the degree-<=D basis in d variables: C(D + d, d)."""
    return math.comb(D + d, d)


def levels_up_to(R: int, m: int) -> Tuple[Tuple[int, ...], ...]:
    """All group-degree tuples of length m with total <= R, graded order."""
    out = []
    for total in range(R + 1):
        out.extend(compositions(total, m))
    return tuple(out)
