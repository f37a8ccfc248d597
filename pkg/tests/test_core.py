"""Geometry, basis enumeration and the counting combinatorics."""

import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from berglab import (
    BallGeometry,
    DomainError,
    WeightedSpace,
    basis_norm_constant,
    count_basis,
    dim_level,
    enumerate_basis,
    level_of,
    levels_up_to,
)
from berglab.core import compositions, monomial_moment


def test_geometry_accepts_valid_partitions():
    g = BallGeometry(3, 2, (1, 1))
    assert g.d_inner == 1
    assert g.m == 2
    g2 = BallGeometry(4, 2, (2,))
    assert g2.d_inner == 2


def test_geometry_rejects_bad_input():
    with pytest.raises(DomainError):
        BallGeometry(0, 0, ())
    with pytest.raises(DomainError):
        BallGeometry(2, 3, (3,))  # split exceeds dimension
    with pytest.raises(DomainError):
        BallGeometry(3, 2, (1,))  # partition does not sum to the split
    with pytest.raises(DomainError):
        BallGeometry(3, 2, (2, 0))  # zero part


def test_weighted_space_validates_weight():
    WeightedSpace(2, -0.5)
    with pytest.raises(DomainError):
        WeightedSpace(2, -1.0)
    with pytest.raises(DomainError):
        WeightedSpace(0, 0.0)


def test_count_basis_is_binomial():
    for d in range(1, 5):
        for D in range(0, 9):
            assert count_basis(d, D) == math.comb(d + D, d)


def test_enumerate_basis_roundtrip():
    basis = enumerate_basis(2, 5, 0.5)
    assert basis.count == count_basis(2, 5)
    seen = set()
    for i, alpha in enumerate(basis.indices):
        assert basis.index_of(alpha) == i
        seen.add(tuple(alpha))
    assert len(seen) == basis.count


def test_enumerate_basis_degree_sorted():
    basis = enumerate_basis(3, 4, 0.0)
    degs = [sum(a) for a in basis.indices]
    assert degs == sorted(degs)


def test_norm_constant_matches_gamma_formula():
    # ||z^alpha||^2 = alpha! Gamma(d+lam+1) / Gamma(d+lam+1+|alpha|)
    for d, lam in [(1, 0.0), (2, 0.5), (3, 2.0)]:
        for alpha in [(0,) * d, (1,) + (0,) * (d - 1), (2, 1)[:d] + (0,) * max(0, d - 2)]:
            a = tuple(alpha)
            total = sum(a)
            expect = math.exp(
                sum(math.lgamma(ai + 1) for ai in a)
                + math.lgamma(d + lam + 1)
                - math.lgamma(d + lam + 1 + total)
            )
            assert monomial_moment(a, d, lam) == pytest.approx(expect, rel=1e-13)
            assert basis_norm_constant(a, d, lam) == pytest.approx(
                1.0 / math.sqrt(expect), rel=1e-13
            )


def test_level_of_groups_degrees():
    k = (2, 1)
    assert level_of((0, 0, 0), k) == (0, 0)
    assert level_of((1, 2, 3), k) == (3, 3)
    assert level_of((4, 0, 1), k) == (4, 1)


def test_dim_level_is_binomial():
    assert dim_level((0,), (1,)) == 1
    assert dim_level((5,), (1,)) == 1
    assert dim_level((3,), (2,)) == 4  # compositions of 3 into 2 parts
    assert dim_level((2, 3), (2, 2)) == 3 * 4


def test_compositions_cover_simplex():
    out = list(compositions(4, 3))
    assert len(out) == math.comb(4 + 2, 2)
    assert len(set(out)) == len(out)
    assert all(sum(c) == 4 for c in out)


def test_levels_up_to_counts():
    assert len(levels_up_to(6, 1)) == 7
    assert len(levels_up_to(4, 2)) == math.comb(4 + 2, 2)
    for rho in levels_up_to(3, 2):
        assert sum(rho) <= 3


@given(st.integers(1, 4), st.integers(0, 8))
@settings(max_examples=40, deadline=None)
def test_count_matches_enumeration(d, D):
    assert count_basis(d, D) == len(enumerate_basis(d, D, 0.0).indices)


@given(st.integers(0, 6), st.integers(1, 3))
@settings(max_examples=40, deadline=None)
def test_dim_level_counts_compositions(total, parts):
    k = (parts,)
    assert dim_level((total,), k) == len(list(compositions(total, parts)))


def test_counting_identity_exhaustive():
    """Level dimensions tile the truncated basis, every desk-size case."""
    from berglab import level_count_identity

    cases = 0
    for n in range(2, 5):
        for ell in range(1, min(2, n - 1) + 1):
            parts = [(ell,)] if ell == 1 else [(2,), (1, 1)]
            for k in parts:
                for D in range(0, 9):
                    assert level_count_identity(n, ell, k, D), (n, ell, k, D)
                    cases += 1
    assert cases == 63
