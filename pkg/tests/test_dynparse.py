import pytest
from hypothesis import given, strategies as st

from heightforge.algebra import GF, QQ, Poly
from heightforge.catalog import system_names, system_text
from heightforge.correspondence import Correspondence
from heightforge.dynparse import (
    VarContext,
    format_dynamics,
    load_dynamics,
    parse_cycle,
    parse_expr,
    parse_point,
    parse_poly,
)
from heightforge.errors import (
    AllZeroCoordinates,
    ExprSyntaxError,
    InhomogeneousForm,
    MixedBlockUnsupported,
    NonLiteralExponent,
    SpaceMismatch,
    UnknownVariable,
    WrongArity,
)
from heightforge.projective import Space

P1 = Space((1,))


def test_expression_tree():
    node = parse_expr("x0^2 + t*x1^2", VarContext.for_space(P1))
    assert node.kind == "add"
    assert node.children[0].kind == "pow"


def test_rational_constant():
    node = parse_expr("3/2 * y0", VarContext.cycle())
    assert node.kind == "mul"


def test_syntax_errors_carry_position():
    with pytest.raises(NonLiteralExponent):
        parse_expr("x0^y0", VarContext.correspondence())
    with pytest.raises(UnknownVariable):
        parse_expr("x0 + z", VarContext.for_space(P1))
    with pytest.raises(ExprSyntaxError) as exc:
        parse_expr("x0 + * x1", VarContext.for_space(P1))
    assert exc.value.column == 6
    with pytest.raises(ExprSyntaxError):
        parse_expr("2 x0", VarContext.for_space(P1))


def test_deep_nesting_is_an_error_not_a_crash():
    with pytest.raises(ExprSyntaxError):
        parse_expr("(" * 5000 + "t" + ")" * 5000)
    long_sum = " + ".join(["t"] * 20000)
    assert parse_poly(long_sum, QQ) == Poly(QQ, [0, 20000])


def test_unicode_minus():
    assert parse_poly("t − 1", QQ) == Poly(QQ, [-1, 1])


def test_load_morphism():
    dyn = load_dynamics("base: QQ\nspace: P1\nmap: (x0^2 + t*x1^2, x1^2)")
    assert dyn.multidegree_matrix == [[2]]
    swap = load_dynamics("base: QQ\nspace: P1xP1\nout1: (y0^2, y1^2)\nout2: (x0^3, x1^3)")
    assert swap.multidegree_matrix == [[0, 3], [2, 0]]


def test_load_correspondence():
    c = load_dynamics("base: QQ\ncorr: y1^2*x0^3 − y0^2*x1^3")
    assert isinstance(c, Correspondence)
    assert (c.dprime, c.d) == (3, 2)


def test_load_errors():
    with pytest.raises(InhomogeneousForm):
        load_dynamics("base: QQ\nspace: P1\nmap: (x0^2 + x1, x1^2)")
    with pytest.raises(MixedBlockUnsupported):
        load_dynamics("base: QQ\nspace: P1xP1\nout1: (x0*y0, x1*y1)\nout2: (x0, x1)")
    with pytest.raises(SpaceMismatch):
        load_dynamics("base: QQ\nspace: P1xP1\nout1: (x0, x1)")
    with pytest.raises(ExprSyntaxError):
        load_dynamics("base: QQ\nspace: P1\nmap: (x0, x1)\nmap: (x0, x1)")


def test_points():
    a = parse_point("[t : 1]", P1, QQ)
    assert a.height() == (1,)
    b = parse_point("[t/(t+1) : 1]", P1, QQ)
    t = Poly.gen(QQ)
    assert b.factors == ((t, t + 1),)
    with pytest.raises(AllZeroCoordinates):
        parse_point("[0 : 0]", P1, QQ)
    with pytest.raises(WrongArity):
        parse_point("[t : 1 : 1]", P1, QQ)


def test_cycle_literal():
    c = parse_cycle("y0^2 - t^3*y1^2", QQ)
    assert c.degree == 2 and c.height() == 3 / 2


@pytest.mark.parametrize("name", system_names())
def test_catalog_round_trip(name):
    dyn = load_dynamics(system_text(name))
    again = load_dynamics(format_dynamics(dyn))
    assert again == dyn


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=6))
def test_poly_print_parse_round_trip(cs):
    for field in (QQ, GF(7)):
        f = Poly(field, cs)
        assert parse_poly(str(f), field) == f
