"""Level decomposition: invariant subspaces, blocks, and symbol recovery.

A torus-invariant symbol leaves each subspace spanned by the monomials of
a fixed group degree rho invariant.  Reordering the truncated basis by
(rho, z'-index, z''-index) realizes the decomposition as a permutation;
within one level the matrix is a Kronecker product of a small factor on
the z'-slot and a Toeplitz matrix on the inner ball at the shifted weight
mu = lam + |rho| + ell.  The inner index varies fastest, matching the
numpy Kronecker convention.

Recovery runs the Berezin transform over the available levels and, when
several shifted weights are present, extrapolates the values to the
infinite-level limit through the node 1/(d + mu + 1) -> 0.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .berezin import berezin_of_operator
from .core import (
    BallGeometry,
    Level,
    MultiIndex,
    TruncatedBasis,
    WeightedSpace,
    compositions,
    count_basis,
    dim_level,
    enumerate_basis,
    level_of,
    levels_up_to,
    make_level,
)
from .errors import DomainError, InvarianceError
from .quadrature import (
    MONTE_CARLO,
    QuadratureSpec,
    is_symbolic,
)
from .symbols import (
    ProductSymbol,
    SymbolExpr,
    _winding,
    quasi_radial_profile,
    rebase_inner,
    symbol_to_text,
)
from .toeplitz import (
    OperatorMatrix,
    SymbolLike,
    gamma_quasi_radial,
    operator_norm,
    radial_toeplitz_diagonal,
    toeplitz_matrix,
    toeplitz_matrix_with_stderr,
)


# ---------------------------------------------------------------------------
# Index bookkeeping


def _prime_indices(rho: Sequence[int], k: Sequence[int]) -> Tuple[MultiIndex, ...]:
    """z'-multi-indices of the given group degrees, deterministic order.

    Each group runs through its degree-rho_j compositions independently
    (lexicographically descending), outer groups varying slowest.
    """
    per_group = [tuple(compositions(int(r), int(kk))) for r, kk in zip(rho, k)]
    out = []
    for combo in itertools.product(*per_group):
        flat: Tuple[int, ...] = ()
        for part in combo:
            flat = flat + part
        out.append(flat)
    return tuple(out)


@dataclass(frozen=True)
class LevelIndexMap:
    """Bijection between full-ball indices of one level and index pairs."""

    rho: Tuple[int, ...]
    D: int
    prime_indices: Tuple[MultiIndex, ...]
    inner_indices: Tuple[MultiIndex, ...]
    positions: np.ndarray = field(repr=False)  # flat pair order -> full position

    @property
    def hdim(self) -> int:
        return len(self.prime_indices)

    @property
    def inner_count(self) -> int:
        return len(self.inner_indices)

    def pair_of(self, flat: int) -> Tuple[MultiIndex, MultiIndex]:
        p, i = divmod(int(flat), self.inner_count)
        return self.prime_indices[p], self.inner_indices[i]

    def flat_of(self, alpha_prime: MultiIndex, alpha_inner: MultiIndex) -> int:
        p = self.prime_indices.index(tuple(alpha_prime))
        i = self.inner_indices.index(tuple(alpha_inner))
        return p * self.inner_count + i


def u_rho_index_map(
    rho: Sequence[int], geometry: BallGeometry, D: int
) -> LevelIndexMap:
    """Order the level's basis vectors as (z'-index) x (z''-index) pairs.

    The flat position runs the inner index fastest, so a level block of a
    factorizable operator is literally a Kronecker product in this order.
    """
    rho_t = tuple(int(v) for v in rho)
    if len(rho_t) != geometry.m:
        raise DomainError(
            f"level length {len(rho_t)} does not match the partition {geometry.k}"
        )
    total = sum(rho_t)
    if total > D:
        raise DomainError(f"level total {total} exceeds the cutoff {D}")
    if geometry.d_inner < 1:
        raise DomainError("level maps need a nonempty second coordinate block")
    primes = _prime_indices(rho_t, geometry.k)
    inner_basis_indices: List[MultiIndex] = []
    for deg in range(D - total + 1):
        inner_basis_indices.extend(compositions(deg, geometry.d_inner))
    full = enumerate_basis(geometry.n, D, 0.0)
    positions = np.empty(len(primes) * len(inner_basis_indices), dtype=np.int64)
    flat = 0
    for ap in primes:
        for ai in inner_basis_indices:
            positions[flat] = full.index_of(ap + ai)
            flat += 1
    return LevelIndexMap(
        rho=rho_t,
        D=D,
        prime_indices=primes,
        inner_indices=tuple(inner_basis_indices),
        positions=positions,
    )


def level_count_identity(n: int, ell: int, k: Sequence[int], D: int) -> bool:
    """Levels' dimensions times inner counts must tile the whole basis."""
    geometry = BallGeometry(n, ell, tuple(k))
    total = 0
    for rho in levels_up_to(D, geometry.m):
        total += dim_level(rho, geometry.k) * count_basis(
            geometry.d_inner, D - sum(rho)
        )
    return total == count_basis(n, D)


# ---------------------------------------------------------------------------
# Blocks


@dataclass(frozen=True)
class LevelBlock:
    """One invariant level of a torus-invariant operator.

    ``block`` is the factor acting on the inner space: for a pure
    inner-variable symbol the level is I (x) block, and for a product
    symbol it is (factor on the z'-slot) (x) block up to the z'-factor's
    scalar part.  ``pair_entries``, when present, is the full compression
    of the source matrix to the level in flat pair order.
    """

    level: Level
    hdim: int
    inner_basis: TruncatedBasis
    block: OperatorMatrix
    pair_entries: Optional[np.ndarray] = field(repr=False, default=None)
    index_map: Optional[LevelIndexMap] = field(repr=False, default=None)

    @property
    def rho(self) -> Tuple[int, ...]:
        return self.level.rho

    @property
    def rho_tuple(self) -> Tuple[int, ...]:
        return self.level.rho

    @property
    def mu(self) -> float:
        return self.level.mu

    def is_diagonal(self, tol: float = 1e-12) -> bool:
        e = self.block.entries
        off = e - np.diag(np.diag(e))
        scale = max(1.0, float(np.max(np.abs(e))))
        return bool(np.max(np.abs(off)) <= tol * scale)


def _group_level_vectors(basis: TruncatedBasis, geometry: BallGeometry) -> np.ndarray:
    exps = basis.exponent_array()
    out = np.empty((basis.count, geometry.m), dtype=np.int64)
    pos = 0
    for j, kj in enumerate(geometry.k):
        out[:, j] = exps[:, pos : pos + kj].sum(axis=1)
        pos += kj
    return out


def off_block_mass(M: OperatorMatrix, geometry: BallGeometry) -> Tuple[float, float]:
    """Frobenius mass outside the level-diagonal blocks, and the total."""
    lv = _group_level_vectors(M.basis, geometry)
    same = np.all(lv[:, None, :] == lv[None, :, :], axis=-1)
    total = float(np.linalg.norm(M.entries))
    off = float(np.linalg.norm(np.where(same, 0.0, M.entries)))
    return off, total


def extract_level_block(
    M: OperatorMatrix,
    rho: Sequence[int],
    geometry: BallGeometry,
    *,
    tol: float = 1e-8,
) -> LevelBlock:
    """Compress a full-ball matrix to one level, checking invariance.

    The off-block rows and columns attached to the level must be
    negligible relative to the whole matrix; a violation means the symbol
    does not actually commute with the group torus action and the
    decomposition does not apply.
    """
    basis = M.basis
    if geometry.n != basis.d:
        raise DomainError("geometry dimension does not match the matrix basis")
    rho_t = tuple(int(v) for v in rho)
    index_map = u_rho_index_map(rho_t, geometry, basis.D)
    pos = index_map.positions
    comp = np.setdiff1d(np.arange(basis.count), pos)
    frob = float(np.linalg.norm(M.entries))
    off2 = float(np.linalg.norm(M.entries[np.ix_(pos, comp)])) ** 2
    off2 += float(np.linalg.norm(M.entries[np.ix_(comp, pos)])) ** 2
    off = math.sqrt(off2)
    if frob > 0.0 and off > tol * frob:
        raise InvarianceError(
            f"level {rho_t} couples to its complement: off-block mass "
            f"{off:.3e} vs total {frob:.3e}",
            off_block_mass=off,
        )
    sub = M.entries[np.ix_(pos, pos)]
    level = make_level(rho_t, basis.lam, geometry.ell)
    inner_basis = enumerate_basis(
        geometry.d_inner, basis.D - sum(rho_t), level.mu
    )
    ic = index_map.inner_count
    block = OperatorMatrix(
        inner_basis, sub[:ic, :ic].copy(), label=f"{M.label}|rho={rho_t}"
    )
    return LevelBlock(
        level=level,
        hdim=index_map.hdim,
        inner_basis=inner_basis,
        block=block,
        pair_entries=sub,
        index_map=index_map,
    )


def level_block_direct(
    c: SymbolLike,
    geometry: BallGeometry,
    lam: float,
    rho: Sequence[int],
    D_inner: int,
    spec: QuadratureSpec,
    *,
    use_fast_paths: bool = True,
) -> LevelBlock:
    """Build the level block of a pure inner-variable symbol directly.

    For such symbols the level acts as identity (x) T_c at the shifted
    weight, so the block can be assembled on the inner ball without ever
    materializing the full-ball matrix; this is how levels beyond any
    practical full-ball cutoff are produced.
    """
    rho_t = tuple(int(v) for v in rho)
    if len(rho_t) != geometry.m:
        raise DomainError(
            f"level length {len(rho_t)} does not match the partition {geometry.k}"
        )
    level = make_level(rho_t, lam, geometry.ell)
    inner_space = WeightedSpace(geometry.d_inner, level.mu)
    c_inner = rebase_inner(c) if is_symbolic(c) else c
    block = toeplitz_matrix(
        c_inner, inner_space, D_inner, spec, use_fast_paths=use_fast_paths
    )
    inner_basis = block.basis
    return LevelBlock(
        level=level,
        hdim=dim_level(rho_t, geometry.k),
        inner_basis=inner_basis,
        block=block,
        pair_entries=None,
        index_map=None,
    )


def block_norms(
    M: OperatorMatrix, geometry: BallGeometry
) -> Dict[Tuple[int, ...], float]:
    """sigma_max of each level compression of a full-ball matrix."""
    out: Dict[Tuple[int, ...], float] = {}
    for rho in levels_up_to(M.basis.D, geometry.m):
        index_map = u_rho_index_map(rho, geometry, M.basis.D)
        sub = M.entries[np.ix_(index_map.positions, index_map.positions)]
        out[rho] = operator_norm(sub)
    return out


def reassemble_from_levels(M: OperatorMatrix, geometry: BallGeometry) -> np.ndarray:
    """Scatter the level compressions back into a full-size matrix.

    With exact level masks this reproduces the matrix; without them it
    equals the level-diagonal part.
    """
    out = np.zeros_like(M.entries)
    for rho in levels_up_to(M.basis.D, geometry.m):
        index_map = u_rho_index_map(rho, geometry, M.basis.D)
        pos = index_map.positions
        out[np.ix_(pos, pos)] = M.entries[np.ix_(pos, pos)]
    return out


# ---------------------------------------------------------------------------
# Factorization check


@dataclass(frozen=True)
class FactorizationReport:
    """Outcome of the two-route comparison on one level."""

    rho: Tuple[int, ...]
    mu: float
    max_deviation: float
    worst_beta: MultiIndex
    worst_alpha: MultiIndex
    tol: float
    passed: bool
    monte_carlo: bool = False
    max_se_ratio: float = 0.0

    def summary(self) -> str:
        status = "ok" if self.passed else "FAIL"
        extra = (
            f" (max dev / SE = {self.max_se_ratio:.2f})" if self.monte_carlo else ""
        )
        return (
            f"rho={self.rho}: max |full - kron| = {self.max_deviation:.3e} "
            f"at ({self.worst_beta}, {self.worst_alpha}) [{status}]{extra}"
        )


def _factor_on_level(
    a: SymbolLike,
    geometry: BallGeometry,
    lam: float,
    rho: Tuple[int, ...],
    spec: QuadratureSpec,
    prime_indices: Tuple[MultiIndex, ...],
) -> np.ndarray:
    """The z'-slot factor of T_a restricted to one level, hdim x hdim."""
    hdim = len(prime_indices)
    if is_symbolic(a):
        profile = quasi_radial_profile(a, geometry.m)
        if profile is not None:
            g = gamma_quasi_radial(profile, geometry.k, lam, rho)
            return g * np.eye(hdim, dtype=complex)
        if geometry.ell >= 2:
            geo_a = BallGeometry(geometry.ell, geometry.ell, geometry.k)
            if _winding(a, geo_a) != (0,) * geometry.m:
                raise DomainError(
                    "the z'-factor must be invariant under the group torus action"
                )
            space_a = WeightedSpace(geometry.ell, lam, geometry=geo_a)
            t_a = toeplitz_matrix(a, space_a, sum(rho), spec)
            out = np.empty((hdim, hdim), dtype=complex)
            for p, bp in enumerate(prime_indices):
                for q, aq in enumerate(prime_indices):
                    out[p, q] = t_a.entry(bp, aq)
            return out
        raise DomainError(
            "the z'-factor must be invariant under the group torus action"
        )
    raise DomainError("the z'-factor must be a symbol, not a raw callable")


def verify_tensor_factorization(
    a: SymbolLike,
    c: SymbolLike,
    geometry: BallGeometry,
    lam: float,
    rho: Sequence[int],
    D: int,
    spec: QuadratureSpec,
    tol: float = 1e-5,
    *,
    full_matrix: Optional[OperatorMatrix] = None,
    full_se: Optional[np.ndarray] = None,
) -> FactorizationReport:
    """Compare full-ball quadrature of the product symbol with the
    Kronecker product of the two lower-dimensional matrices on one level.

    The full route integrates over all 2n real dimensions with no use of
    the factorization; the factorized route multiplies the z'-slot factor
    by the inner Toeplitz matrix at the shifted weight.  Agreement is the
    numerical content of the level decomposition.

    ``full_matrix`` (with ``full_se`` for the sampling scheme) lets a
    caller checking many levels of one symbol reuse a single assembly; it
    must come from the same symbol, weight, cutoff and scheme.
    """
    rho_t = tuple(int(v) for v in rho)
    total = sum(rho_t)
    if total > D:
        raise DomainError(f"level total {total} exceeds the cutoff {D}")
    f_ac = ProductSymbol(a=a, c=c, geometry=geometry)
    space = WeightedSpace(geometry.n, lam, geometry=geometry)

    mc = spec.scheme == MONTE_CARLO
    se_sub = None
    if full_matrix is not None:
        full = full_matrix
        se = full_se
        if mc and se is None:
            raise DomainError("the sampling scheme needs full_se alongside full_matrix")
    elif mc:
        full, se = toeplitz_matrix_with_stderr(f_ac, space, D, spec)
    else:
        full = toeplitz_matrix(f_ac, space, D, spec, use_fast_paths=False)
    index_map = u_rho_index_map(rho_t, geometry, D)
    pos = index_map.positions
    sub = full.entries[np.ix_(pos, pos)]
    if mc:
        se_sub = se[np.ix_(pos, pos)]

    level = make_level(rho_t, lam, geometry.ell)
    inner_space = WeightedSpace(geometry.d_inner, level.mu)
    c_inner = rebase_inner(c) if is_symbolic(c) else c
    b_mat = toeplitz_matrix(c_inner, inner_space, D - total, spec)
    a_mat = _factor_on_level(a, geometry, lam, rho_t, spec, index_map.prime_indices)
    kron = np.kron(a_mat, b_mat.entries)

    dev = np.abs(sub - kron)
    worst_flat = int(np.argmax(dev))
    wb, wa = np.unravel_index(worst_flat, dev.shape)
    beta_pair = index_map.pair_of(int(wb))
    alpha_pair = index_map.pair_of(int(wa))
    max_dev = float(dev[wb, wa])
    if mc:
        margin = 5.0 * se_sub + 1e-12
        ratios = dev / margin
        max_ratio = float(np.max(ratios))
        passed = max_ratio <= 1.0
        return FactorizationReport(
            rho=rho_t,
            mu=level.mu,
            max_deviation=max_dev,
            worst_beta=beta_pair[0] + beta_pair[1],
            worst_alpha=alpha_pair[0] + alpha_pair[1],
            tol=tol,
            passed=passed,
            monte_carlo=True,
            max_se_ratio=max_ratio,
        )
    return FactorizationReport(
        rho=rho_t,
        mu=level.mu,
        max_deviation=max_dev,
        worst_beta=beta_pair[0] + beta_pair[1],
        worst_alpha=alpha_pair[0] + alpha_pair[1],
        tol=tol,
        passed=max_dev < tol,
    )


# ---------------------------------------------------------------------------
# Recovery


def _neville_to_zero(us: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Polynomial extrapolation of samples (u_i, v_i) to u = 0.

    ``values`` may carry extra trailing axes; the interpolation acts on
    the leading axis.
    """
    vs = [np.asarray(v, dtype=complex) for v in values]
    n = len(vs)
    for level in range(1, n):
        nxt = []
        for i in range(n - level):
            ui, uj = us[i], us[i + level]
            nxt.append((uj * vs[i] - ui * vs[i + 1]) / (uj - ui))
        vs = nxt
    return vs[0]


@dataclass(frozen=True)
class RecoveryReport:
    """Recovered inner symbol samples plus per-level remainder norms."""

    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    by_level: Tuple[Tuple[Tuple[int, ...], float, int, float], ...]
    eval_mus: Tuple[float, ...]
    extrapolated: bool

    def remainder_csv_lines(self) -> List[str]:
        lines = ["rho,mu,hdim,remainder_norm"]
        for rho, mu, hdim, nrm in self.by_level:
            rho_txt = " ".join(str(v) for v in rho)
            lines.append(f"{rho_txt},{repr(float(mu))},{hdim},{repr(float(nrm))}")
        return lines

    def grid_csv_lines(self) -> List[str]:
        d = self.grid.shape[1]
        header = ",".join(
            [f"re_z{i+1},im_z{i+1}" for i in range(d)] + ["re_c,im_c"]
        )
        lines = [header]
        for i in range(self.grid.shape[0]):
            parts: List[str] = []
            for ax in range(d):
                parts.append(repr(float(self.grid[i, ax].real)))
                parts.append(repr(float(self.grid[i, ax].imag)))
            parts.append(repr(float(self.values[i].real)))
            parts.append(repr(float(self.values[i].imag)))
            lines.append(",".join(parts))
        return lines

    def max_remainder(self) -> float:
        return max((row[3] for row in self.by_level), default=0.0)


def _diagonal_berezin_grid(
    diag: np.ndarray, d: int, mu: float, t_points: np.ndarray
) -> np.ndarray:
    """Berezin values of a diagonal block at radial points t = |z|^2."""
    from scipy import special as sp_special

    s_exp = d + mu + 1.0
    ms = np.arange(diag.shape[0], dtype=float)
    log_binom = (
        sp_special.gammaln(s_exp + ms)
        - sp_special.gammaln(ms + 1.0)
        - sp_special.gammaln(s_exp)
    )
    out = np.empty(t_points.shape[0], dtype=complex)
    for i, t in enumerate(t_points):
        if t <= 0.0:
            out[i] = diag[0]
            continue
        log_p = log_binom + ms * math.log(t) + s_exp * math.log1p(-t)
        p = np.exp(log_p)
        out[i] = np.dot(p, diag)
    return out


def _kernel_tail(d: int, mu: float, t: float, D: int) -> float:
    """Mass of the reproducing kernel beyond degree D at radius^2 = t."""
    from scipy import special as sp_special

    if t <= 0.0:
        return 0.0
    s_exp = d + mu + 1.0
    ms = np.arange(D + 1, dtype=float)
    log_p = (
        sp_special.gammaln(s_exp + ms)
        - sp_special.gammaln(ms + 1.0)
        - sp_special.gammaln(s_exp)
        + ms * math.log(t)
        + s_exp * math.log1p(-t)
    )
    return float(max(0.0, 1.0 - np.exp(log_p).sum()))


class RecoveredSymbol:
    """Callable estimate of the inner symbol from a family of blocks.

    At each point the blocks whose truncation still resolves the kernel
    are kept; with two or more distinct weights the values extrapolate
    through u = 1/(d + mu + 1) to u = 0, otherwise the largest reliable
    weight wins.  Falls back to the largest weight outright when nothing
    is reliable (far outside the trusted radius).
    """

    def __init__(
        self,
        blocks: Sequence[LevelBlock],
        *,
        extrapolate: bool = True,
        tail_cap: float = 1e-9,
        max_nodes: int = 6,
    ):
        if not blocks:
            raise DomainError("recovery needs at least one block")
        by_mu: Dict[float, LevelBlock] = {}
        for blk in blocks:
            mu = float(blk.mu)
            cur = by_mu.get(mu)
            if cur is None or blk.inner_basis.D > cur.inner_basis.D:
                by_mu[mu] = blk
        self.blocks = [by_mu[mu] for mu in sorted(by_mu, reverse=True)]
        self.d = self.blocks[0].inner_basis.d
        self.extrapolate = extrapolate
        self.tail_cap = tail_cap
        self.max_nodes = max_nodes
        self.all_diagonal = all(b.is_diagonal() for b in self.blocks)

    def _usable(self, t: float) -> List[LevelBlock]:
        out = [
            b
            for b in self.blocks
            if _kernel_tail(b.inner_basis.d, b.mu, t, b.inner_basis.D)
            <= self.tail_cap
        ]
        return out[: self.max_nodes]

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        single = z.ndim == 1
        if single:
            z = z[None, :]
        out = np.empty(z.shape[0], dtype=complex)
        for i in range(z.shape[0]):
            out[i] = self._at_point(z[i])
        return out[0] if single else out

    def _at_point(self, z: np.ndarray) -> complex:
        t = float(np.sum(np.abs(z) ** 2))
        usable = self._usable(t)
        if not usable:
            blk = self.blocks[0]
            return berezin_of_operator(blk.block, blk.mu, z)
        if not self.extrapolate or len(usable) < 2:
            blk = usable[0]
            return berezin_of_operator(blk.block, blk.mu, z)
        us = np.array([1.0 / (b.inner_basis.d + b.mu + 1.0) for b in usable])
        vals = np.array(
            [berezin_of_operator(b.block, b.mu, z) for b in usable]
        )
        return complex(_neville_to_zero(us, vals))

    def radial_values(self, t_points: np.ndarray) -> np.ndarray:
        """Vectorized values at radial points when every block is diagonal."""
        if not self.all_diagonal:
            raise DomainError("radial evaluation needs diagonal blocks")
        t_points = np.asarray(t_points, dtype=float)
        out = np.empty(t_points.shape[0], dtype=complex)
        per_block = {
            id(b): _diagonal_berezin_grid(
                np.diag(b.block.entries), b.inner_basis.d, b.mu, t_points
            )
            for b in self.blocks
        }
        for i, t in enumerate(t_points):
            usable = self._usable(float(t))
            if not usable:
                out[i] = per_block[id(self.blocks[0])][i]
            elif not self.extrapolate or len(usable) < 2:
                out[i] = per_block[id(usable[0])][i]
            else:
                us = np.array(
                    [1.0 / (b.inner_basis.d + b.mu + 1.0) for b in usable]
                )
                vals = np.array([per_block[id(b)][i] for b in usable])
                out[i] = complex(_neville_to_zero(us, vals))
        return out


def recover_symbol_and_remainder(
    blocks: Sequence[LevelBlock],
    grid: np.ndarray,
    spec: Optional[QuadratureSpec] = None,
    *,
    extrapolate: bool = True,
    remainder_blocks: Optional[Sequence[LevelBlock]] = None,
) -> RecoveryReport:
    """Estimate the inner symbol and the per-level remainders.

    The symbol estimate feeds on the supplied blocks (the larger the
    weights and cutoffs, the better); each remainder is the block minus
    the Toeplitz matrix of the estimate at the block's own weight.  By
    default remainders are computed for the same blocks used in the
    estimate; pass ``remainder_blocks`` to separate the two roles.
    """
    spec = spec or QuadratureSpec()
    grid = np.asarray(grid, dtype=complex)
    if grid.ndim == 1:
        grid = grid[:, None]
    estimator = RecoveredSymbol(list(blocks), extrapolate=extrapolate)
    values = estimator(grid)

    targets = list(remainder_blocks) if remainder_blocks is not None else list(blocks)
    by_level: List[Tuple[Tuple[int, ...], float, int, float]] = []
    for blk in targets:
        d = blk.inner_basis.d
        D = blk.inner_basis.D
        if estimator.all_diagonal and blk.is_diagonal():
            # the diagonal route only carries real values, so split
            diag_re = radial_toeplitz_diagonal(
                lambda tt: estimator.radial_values(np.asarray(tt)).real,
                d,
                blk.mu,
                D,
            )
            diag_im = radial_toeplitz_diagonal(
                lambda tt: estimator.radial_values(np.asarray(tt)).imag,
                d,
                blk.mu,
                D,
            )
            n_mat = blk.block.entries - np.diag(diag_re + 1j * diag_im)
        else:
            t_est = toeplitz_matrix(
                estimator, WeightedSpace(d, blk.mu), D, spec
            )
            n_mat = blk.block.entries - t_est.entries
        by_level.append(
            (blk.rho, float(blk.mu), blk.hdim, operator_norm(n_mat))
        )
    mus = tuple(float(b.mu) for b in estimator.blocks)
    return RecoveryReport(
        grid=grid,
        values=np.asarray(values),
        by_level=tuple(by_level),
        eval_mus=mus,
        extrapolated=extrapolate and len(mus) >= 2,
    )
