from fractions import Fraction

import pytest

from heightforge.algebra import QQ, BinaryForm, Poly
from heightforge.catalog import load_system
from heightforge.correspondence import XV, Correspondence, ZeroCycle, multiplier, pushforward, pushforward_raw
from heightforge.dynparse import load_dynamics, parse_cycle
from heightforge.errors import InvalidCorrespondence

t = Poly.gen(QQ)
one = Poly.one(QQ)


def test_graph_of_squaring_pushes_points():
    S = Correspondence.graph(load_system("sq"))
    assert (S.dprime, S.d) == (2, 1)
    c = pushforward(S, ZeroCycle.from_point(t, one))
    assert c == ZeroCycle.from_point(t**2, one)
    zero = pushforward(S, ZeroCycle.from_point(Poly.zero(QQ), one))
    assert zero == ZeroCycle.from_point(Poly.zero(QQ), one)


def test_cusp_pushforward():
    S = load_system("cusp")
    c1 = pushforward(S, ZeroCycle.from_point(t, one))
    assert c1 == parse_cycle("y0^2 - t^3*y1^2", QQ)
    assert c1.degree == 2 and c1.height() == Fraction(3, 2)
    c2 = pushforward(S, c1)
    assert c2 == parse_cycle("y0^4 - t^9*y1^4", QQ)
    assert c2.height() == Fraction(9, 4)


def test_pushforward_of_conjugate_pair():
    S = load_system("cusp")
    g = parse_cycle("y0^2 - t^3*y1^2", QQ)
    assert pushforward(S, g) == parse_cycle("y0^4 - t^9*y1^4", QQ)


def test_degree_law():
    S = load_system("cusp")
    c = ZeroCycle.from_point(t + 1, one)
    for _ in range(4):
        raw = pushforward_raw(S, c)
        assert raw.degree == S.d * c.degree
        c = pushforward(S, c)


def test_cycle_heights():
    assert ZeroCycle.from_point(t, one).height() == 1
    assert parse_cycle("y0*y1", QQ).height() == 0


def test_multipliers():
    assert multiplier(load_system("cusp")) == Fraction(3, 2)
    assert multiplier(Correspondence.graph(load_system("sq"))) == 2
    inv = Correspondence.graph(load_system("sq")).transpose()
    assert multiplier(inv) == Fraction(1, 2)


def test_invalid():
    with pytest.raises(InvalidCorrespondence):
        load_dynamics("base: QQ\ncorr: x0*y0 - x1*y0")
    with pytest.raises(InvalidCorrespondence):
        load_dynamics("base: QQ\ncorr: x0^2 - x1^2")
