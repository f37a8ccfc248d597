"""Level decomposition, factorization and symbol recovery."""

import numpy as np
import pytest

from berglab import (
    BallGeometry,
    InvarianceError,
    QuadratureSpec,
    WeightedSpace,
    block_norms,
    count_basis,
    dim_level,
    extract_level_block,
    level_block_direct,
    levels_up_to,
    off_block_mass,
    operator_norm,
    parse_symbol,
    reassemble_from_levels,
    recover_symbol_and_remainder,
    toeplitz_matrix,
    u_rho_index_map,
    verify_tensor_factorization,
)
from berglab.levels import _neville_to_zero


@pytest.fixture
def split31():
    return BallGeometry(3, 2, (1, 1))


def test_index_map_partitions_basis(split31):
    D = 5
    total = count_basis(split31.n, D)
    covered = set()
    for rho in levels_up_to(D, split31.m):
        imap = u_rho_index_map(rho, split31, D)
        assert imap.hdim == dim_level(rho, split31.k)
        assert imap.inner_count == count_basis(split31.d_inner, D - sum(rho))
        for pos in imap.positions:
            assert pos not in covered
            covered.add(pos)
    assert len(covered) == total


def test_index_map_orders_inner_fastest(split31):
    imap = u_rho_index_map((1, 0), split31, 4)
    # flat index i = i_prime * inner_count + i_inner
    for flat in range(imap.hdim * imap.inner_count):
        ap, ai = imap.pair_of(flat)
        assert imap.flat_of(ap, ai) == flat


def test_extract_block_identity_tensor(split31):
    # f depends only on the inner coordinate: each block is T_c itself.
    # a == 1 keeps the integrand polynomial, so explicit modest orders
    # are exact and the 3-dim product rule stays within the node budget.
    full_spec = QuadratureSpec(q=16, angular=9)
    spec = QuadratureSpec()
    space = WeightedSpace(3, 0.0, geometry=split31)
    f = parse_symbol("prod(a = 1, c = 1 - abs2(zc))", split31)
    M = toeplitz_matrix(f, space, 4, full_spec)
    for rho in [(0, 0), (1, 0), (1, 1)]:
        blk = extract_level_block(M, rho, split31)
        direct = level_block_direct(
            parse_symbol("1 - abs2(zc)", None),
            split31,
            0.0,
            rho,
            4 - sum(rho),
            spec,
        )
        assert blk.mu == direct.mu == 0.0 + sum(rho) + split31.ell
        assert np.max(np.abs(blk.block.entries - direct.block.entries)) < 1e-10


def test_extract_block_rejects_non_invariant(split31):
    spec = QuadratureSpec()
    space = WeightedSpace(3, 0.0, geometry=split31)
    M = toeplitz_matrix(parse_symbol("re(z1)", split31), space, 3, spec)
    with pytest.raises(InvarianceError):
        extract_level_block(M, (0, 0), split31)


def test_off_block_mass_zero_for_invariant(split31):
    spec = QuadratureSpec()
    space = WeightedSpace(3, 0.5, geometry=split31)
    M = toeplitz_matrix(parse_symbol("abs2(z1) + abs2(z3)", split31), space, 3, spec)
    off, total = off_block_mass(M, split31)
    assert off <= 1e-12 * total


def test_block_norm_sup_equals_full_norm():
    g = BallGeometry(2, 1, (1,))
    spec = QuadratureSpec()
    space = WeightedSpace(2, 0.0, geometry=g)
    f = parse_symbol("prod(a = r1^2, c = 1)", g)
    M = toeplitz_matrix(f, space, 5, spec)
    norms = block_norms(M, g)
    assert max(norms.values()) == pytest.approx(operator_norm(M), abs=1e-10)


def test_reassemble_recovers_matrix(split31):
    spec = QuadratureSpec(q=16, angular=9)
    space = WeightedSpace(3, 0.0, geometry=split31)
    f = parse_symbol("prod(a = 1, c = 2 - abs2(zc))", split31)
    M = toeplitz_matrix(f, space, 4, spec)
    back = reassemble_from_levels(M, split31)
    assert np.max(np.abs(back - M.entries)) < 1e-12


@pytest.mark.parametrize(
    "a_text,c_text",
    [("r1^2", "1"), ("r1^2", "1 - abs2(zc)"), ("1 - r1^2", "re(zc1)")],
)
def test_factorization_small(a_text, c_text):
    g = BallGeometry(2, 1, (1,))
    spec = QuadratureSpec()
    a = parse_symbol(a_text, g)
    c = parse_symbol(c_text, None)
    for rho in [(0,), (2,)]:
        rep = verify_tensor_factorization(a, c, g, 0.0, rho, 4, spec)
        assert rep.passed, rep.summary()
        assert rep.max_deviation < 1e-5


def test_factorization_report_fields():
    g = BallGeometry(2, 1, (1,))
    rep = verify_tensor_factorization(
        parse_symbol("r1^2", g), parse_symbol("1", None), g, 0.5, (1,), 3, QuadratureSpec()
    )
    assert rep.rho == (1,)
    assert rep.mu == 0.5 + 1 + 1
    assert "rho=(1,)" in rep.summary()


def test_neville_extrapolation_exact_on_polynomials():
    us = np.array([0.5, 0.25, 0.125, 0.0625])
    values = 3.0 - 2.0 * us + 7.0 * us**2
    out = _neville_to_zero(us, values)
    assert out == pytest.approx(3.0, abs=1e-12)


def test_recovery_reproduces_inner_symbol():
    g = BallGeometry(2, 1, (1,))
    spec = QuadratureSpec()
    c = parse_symbol("2 - abs2(zc)", None)
    # evaluation blocks carry a deep cutoff so the kernel series has
    # converged wherever the remainder quadrature puts its nodes
    eval_blocks = [
        level_block_direct(c, g, 0.0, (rho,), 1800, spec)
        for rho in (32, 48, 64, 96, 128)
    ]
    rem_blocks = [level_block_direct(c, g, 0.0, (32,), 60, spec)]
    ts = np.linspace(0.0, 0.3, 6)
    grid = np.sqrt(ts)[:, None].astype(complex)
    report = recover_symbol_and_remainder(
        eval_blocks, grid, spec, remainder_blocks=rem_blocks
    )
    exact = 2.0 - ts
    got = np.array([v.real for v in report.values])
    assert np.max(np.abs(got - exact)) < 2.0 / 96.0
    assert report.max_remainder() < 1e-6


def test_recovery_grid_csv_headers():
    g = BallGeometry(2, 1, (1,))
    spec = QuadratureSpec()
    c = parse_symbol("1 - abs2(zc)", None)
    blocks = [level_block_direct(c, g, 0.0, (8,), 24, spec)]
    grid = np.array([[0.0 + 0.0j], [0.5 + 0.0j]])
    report = recover_symbol_and_remainder(blocks, grid, spec, remainder_blocks=blocks)
    lines = report.grid_csv_lines()
    assert lines[0].startswith("re_z1,im_z1")
    assert len(lines) == 3
    rem = report.remainder_csv_lines()
    assert rem[0] == "rho,mu,hdim,remainder_norm"
