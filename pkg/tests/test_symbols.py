"""Symbol grammar: parsing, printing, evaluation and classification."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from berglab import (
    BallGeometry,
    DomainError,
    ProductSymbol,
    SymbolSyntaxError,
    classify_symbol,
    eval_on_points,
    eval_symbol,
    parse_symbol,
    rebase_inner,
    symbol_to_text,
)
from berglab.symbols import symbol_degree_hint

ROUNDTRIP_CORPUS = [
    "1",
    "0",
    "2.5",
    "1e-3",
    "z1",
    "zc2",
    "r1",
    "-z1",
    "1 + z1",
    "1 - abs2(z)",
    "2 - abs2(zc)",
    "abs2(z1)",
    "abs2(zc)",
    "re(z1)",
    "im(z2)",
    "conj(z1)",
    "sqrt(1 - abs2(z))",
    "r1^2",
    "r2^3",
    "1 - r1^2",
    "z1 * z2",
    "z1 * conj(z2)",
    "z1 / (2 - abs2(z))",
    "(1 + z1) * (1 - z1)",
    "z1^2",
    "z1^2 * conj(z1)",
    "1 + 2 * z1",
    "1 - 2 * abs2(z1) + abs2(z1)^2",
    "re(z1 * conj(z2))",
    "im(z1 * z2)",
    "abs2(z1 + z2)",
    "r1^2 * r2^2",
    "1 - r1^2 - r2^2",
    "0.5 + 0.5 * abs2(z)",
    "2 * re(z1) + 3 * im(z1)",
    "conj(z1) * conj(z2)",
    "sqrt(abs2(z1))",
    "(z1 + z2)^2",
    "1 / (1 + abs2(z))",
    "abs2(z) * (1 - abs2(z))",
    "z3",
    "zc1 * conj(zc1)",
    "1 - abs2(zc1)",
    "re(zc1)",
    "im(zc2)",
    "3.25 * z1 - 1.5",
    "z1 - z2 - z3",
    "z1 * z2 * z3",
    "(1 - abs2(z))^3",
    "2 - abs2(z)",
    "abs2(z)^2 - 2 * abs2(z) + 1",
    "r1^2 / (1 + r1^2)",
    "prod(a = r1^2, c = 1 - abs2(zc))",
    "prod(a = 1, c = 2 - abs2(zc))",
    "prod(a = 1 - r1^2, c = re(zc1))",
]


@pytest.mark.parametrize("text", ROUNDTRIP_CORPUS)
def test_roundtrip(text):
    expr = parse_symbol(text, None)
    printed = symbol_to_text(expr)
    again = parse_symbol(printed, None)
    assert symbol_to_text(again) == printed


def test_roundtrip_is_canonical():
    # different spellings of the same tree print identically
    a = symbol_to_text(parse_symbol("1-abs2(z)", None))
    b = symbol_to_text(parse_symbol("1  -  abs2( z )", None))
    assert a == b == "1 - abs2(z)"


EVAL_CASES = [
    # (text, point, expected)
    ("1", [0.2 + 0.1j], 1.0),
    ("z1", [0.2 + 0.1j], 0.2 + 0.1j),
    ("conj(z1)", [0.2 + 0.1j], 0.2 - 0.1j),
    ("re(z1)", [0.2 + 0.1j], 0.2),
    ("im(z1)", [0.2 + 0.1j], 0.1),
    ("abs2(z1)", [0.2 + 0.1j], 0.05),
    ("abs2(z)", [0.3, 0.4j], 0.09 + 0.16),
    ("1 - abs2(z)", [0.3, 0.4j], 1 - 0.25),
    ("z1 * z2", [0.1j, 0.5], 0.05j),
    ("z1^2", [0.2 + 0.1j], (0.2 + 0.1j) ** 2),
    ("z1 / (2 - abs2(z))", [0.4], 0.4 / (2 - 0.16)),
    ("sqrt(1 - abs2(z))", [0.6], math.sqrt(1 - 0.36)),
    ("2 * re(z1) + 3 * im(z1)", [0.2 + 0.1j], 0.7),
    ("-z1 + 1", [0.25], 0.75),
]


@pytest.mark.parametrize("text,point,expected", EVAL_CASES)
def test_eval_matches_plain_arithmetic(text, point, expected):
    got = eval_symbol(parse_symbol(text, None), point)
    assert got == pytest.approx(expected, abs=1e-14)


def test_eval_on_points_shapes():
    expr = parse_symbol("abs2(z)", None)
    z = np.array([[0.1, 0.2], [0.3j, 0.1], [0.0, 0.0]])
    vals = eval_on_points(expr, z)
    assert vals.shape == (3,)
    assert vals[2] == 0.0


def test_eval_rejects_outside_ball():
    expr = parse_symbol("z1", None)
    with pytest.raises(DomainError):
        eval_symbol(expr, [1.2])
    # boundary needs the explicit flag
    with pytest.raises(DomainError):
        eval_symbol(expr, [1.0])
    assert eval_symbol(expr, [1.0], allow_boundary=True) == 1.0


def test_group_radius_requires_partition_context():
    g = BallGeometry(2, 2, (1, 1))
    expr = parse_symbol("r1^2 + r2^2", g)
    # on the z'-ball the group radii are |z_group| values
    val = eval_on_points(expr, np.array([[0.3, 0.4j]]), geometry=g)
    assert val[0] == pytest.approx(0.25, abs=1e-14)


def test_validation_against_geometry():
    g = BallGeometry(2, 1, (1,))
    parse_symbol("z2", g)
    with pytest.raises(SymbolSyntaxError):
        parse_symbol("z3", g)
    with pytest.raises(SymbolSyntaxError):
        parse_symbol("zc2", g)  # inner ball is 1-dimensional
    with pytest.raises(SymbolSyntaxError):
        parse_symbol("prod(a = r2^2, c = 1)", g)  # only one group


def test_syntax_errors_carry_position():
    with pytest.raises(SymbolSyntaxError) as exc:
        parse_symbol("1 + + 2", None)
    assert "line 1" in str(exc.value)
    with pytest.raises(SymbolSyntaxError):
        parse_symbol("abs2(z", None)
    with pytest.raises(SymbolSyntaxError):
        parse_symbol("z0", None)
    with pytest.raises(SymbolSyntaxError):
        parse_symbol("", None)
    with pytest.raises(SymbolSyntaxError):
        parse_symbol("z1 @ z2", None)


def test_power_requires_integer_exponent():
    with pytest.raises(SymbolSyntaxError):
        parse_symbol("z1^2.5", None)
    with pytest.raises(SymbolSyntaxError):
        parse_symbol("z1^(-1)", None)


def test_classification_table():
    g11 = BallGeometry(2, 2, (1, 1))
    g2 = BallGeometry(2, 2, (2,))
    split = BallGeometry(2, 1, (1,))
    assert str(classify_symbol(parse_symbol("1 - abs2(z)", g2), g2)) == "Radial"
    assert str(classify_symbol(parse_symbol("r1^2", g11), g11)).startswith("QuasiRadial")
    assert str(classify_symbol(parse_symbol("abs2(z1)", g11), g11)) == "TorusInvariant"
    assert str(classify_symbol(parse_symbol("re(z1)", g11), g11)) == "General"
    assert str(classify_symbol(parse_symbol("zc1", split), split)) == "CzOnly"
    assert (
        str(classify_symbol(parse_symbol("prod(a = 1, c = zc1)", split), split))
        == "Product"
    )


def test_product_symbol_parses_without_geometry():
    expr = parse_symbol("prod(a = r1^2, c = 1 - abs2(zc))", None)
    assert isinstance(expr, ProductSymbol)
    assert expr.geometry is None
    assert symbol_to_text(expr) == "prod(a = r1^2, c = 1 - abs2(zc))"
    # evaluation needs the geometry
    with pytest.raises(DomainError):
        eval_on_points(expr, np.array([[0.1, 0.2]]))


def test_product_symbol_evaluates_with_geometry():
    g = BallGeometry(2, 1, (1,))
    expr = parse_symbol("prod(a = 1 - r1^2, c = 2 - abs2(zc))", g)
    z1, z2 = 0.3 + 0.1j, 0.2j
    t_in = abs(z2) ** 2
    stretched = abs(z1) ** 2 / (1 - t_in)
    expected = (1 - stretched) * (2 - t_in)
    got = eval_symbol(expr, [z1, z2])
    assert got == pytest.approx(expected, abs=1e-14)


def test_rebase_inner_renames_zc():
    expr = parse_symbol("1 - abs2(zc) + re(zc1)", None)
    rebased = rebase_inner(expr)
    assert symbol_to_text(rebased) == "1 - abs2(z) + re(z1)"
    # values agree on the inner ball
    z = np.array([[0.3 + 0.2j]])
    assert eval_on_points(expr, z)[0] == eval_on_points(rebased, z)[0]


def test_degree_hint_monotone_in_structure():
    assert symbol_degree_hint(parse_symbol("1", None)) == 0
    assert symbol_degree_hint(parse_symbol("z1", None)) == 1
    assert symbol_degree_hint(parse_symbol("abs2(z1)", None)) == 2
    assert symbol_degree_hint(parse_symbol("z1^3", None)) == 3
    d_prod = symbol_degree_hint(parse_symbol("prod(a = r1^2, c = zc1)", None))
    assert d_prod >= 3


_LEAF = st.sampled_from(["1", "2.5", "z1", "z2", "abs2(z)", "re(z1)", "conj(z2)"])


def _combine(children):
    a, b = children
    return st.sampled_from(
        [f"({a} + {b})", f"({a} - {b})", f"({a} * {b})", f"(-({a}))", f"({a})^2"]
    )


@st.composite
def _expr_text(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return draw(_LEAF)
    a = draw(_expr_text(depth=depth - 1))
    b = draw(_expr_text(depth=depth - 1))
    return draw(_combine((a, b)))


@given(_expr_text())
@settings(max_examples=60, deadline=None)
def test_roundtrip_property(text):
    expr = parse_symbol(text, None)
    printed = symbol_to_text(expr)
    assert symbol_to_text(parse_symbol(printed, None)) == printed


@given(_expr_text())
@settings(max_examples=40, deadline=None)
def test_print_preserves_value(text):
    expr = parse_symbol(text, None)
    again = parse_symbol(symbol_to_text(expr), None)
    z = np.array([[0.21 + 0.05j, -0.3j]])
    v1 = eval_on_points(expr, z)[0]
    v2 = eval_on_points(again, z)[0]
    assert v1 == pytest.approx(v2, abs=1e-13)
