from fractions import Fraction

import pytest

from heightforge.algebra import GF, QQ, Poly
from heightforge.canheight import (
    HeightCertificate,
    Orbit,
    basechange_check,
    canonical_height_scalar,
    canonical_height_vector,
    drift_bounds,
    functional_equation_check,
    split_data,
)
from heightforge.catalog import load_system, random_points
from heightforge.correspondence import ZeroCycle
from heightforge.dynparse import load_dynamics, parse_point, parse_poly
from heightforge.errors import EmptyEplus, NotEigenvector, NotExpanding
from heightforge.projective import Space

P1 = Space((1,))


def pt(dyn, s):
    return parse_point(s, dyn.space, dyn.field)


def brute_limit(dyn, a, e, kappa, m):
    """kappa^-m h_0(phi^m a, e) by direct iteration."""
    x = a
    for _ in range(m):
        x = dyn.apply(x)
    h = x.height() if not isinstance(x, ZeroCycle) else (x.height(),)
    return sum(Fraction(hi) * ei for hi, ei in zip(h, e)) / Fraction(kappa) ** m


@pytest.mark.parametrize("name", ["sq", "sq_t"])
def test_scalar_exact(name):
    dyn = load_system(name)
    cert = canonical_height_scalar(dyn, pt(dyn, "[t : 1]"), [1])
    assert cert.values == [1] and cert.rigor == "Exact" and cert.iterations <= 5
    assert brute_limit(dyn, pt(dyn, "[t : 1]"), [1], 2, 5) == 1


def test_scalar_correspondence():
    dyn = load_system("cusp")
    cert = canonical_height_scalar(dyn, pt(dyn, "[t : 1]"), [1])
    assert cert.values == [1] and cert.rigor == "Exact"


def test_scalar_errors():
    dyn = load_system("swap")
    with pytest.raises(NotEigenvector):
        canonical_height_scalar(dyn, pt(dyn, "[t : 1], [1 : 1]"), [1, 0])
    inv = load_dynamics("base: QQ\ncorr: y0^2*x1 - y1^2*x0")
    with pytest.raises(NotExpanding):
        canonical_height_scalar(inv, pt(inv, "[t : 1]"), [1])
    with pytest.raises(EmptyEplus):
        canonical_height_vector(inv, pt(inv, "[t : 1]"))


def test_vector_prod_reduces_to_first_factor():
    dyn = load_system("prod")
    cert = canonical_height_vector(dyn, pt(dyn, "[t : 1], [t^5 : 1]"))
    assert cert.basis == [[1, 0]]
    assert cert.values == [1] and cert.rigor == "Exact"


def test_fixed_point_is_zero():
    dyn = load_system("swap_f3")
    cert = canonical_height_vector(dyn, pt(dyn, "[0 : 1], [0 : 1]"))
    assert cert.values == [0, 0] and cert.rigor == "Exact"
    rep = functional_equation_check(dyn, pt(dyn, "[0 : 1], [0 : 1]"))
    assert rep.residual == 0


def test_functional_equation_sq_t():
    dyn = load_system("sq_t")
    rep = functional_equation_check(dyn, pt(dyn, "[t : 1]"))
    assert rep.residual == 0 and rep.ok


def test_rigorous_radius_covers_the_limit():
    # sq_shift needs the tail bound; compare with a deep brute-force iterate
    dyn = load_system("sq_shift")
    for a in random_points(QQ, P1, 2, 15, seed=4):
        cert = canonical_height_vector(dyn, a, tol=Fraction(1, 2**10))
        deep = brute_limit(dyn, a, [1], 2, cert.iterations + 4)
        lo, hi = cert.enclosure(0)
        assert lo <= deep <= hi


def test_radius_nonincreasing_in_max_iter():
    dyn = load_system("sq_shift")
    a = pt(dyn, "[-t + 1 : 1]")
    radii = [canonical_height_vector(dyn, a, tol=Fraction(1, 10**9), max_iter=m).radius[0] for m in range(1, 10)]
    assert all(x >= y for x, y in zip(radii, radii[1:]))


def test_scalar_vector_coherence():
    dyn = load_system("sq_t_f2")
    for a in random_points(GF(2), P1, 3, 20, seed=9):
        s = canonical_height_scalar(dyn, a, [1])
        v = canonical_height_vector(dyn, a)
        assert abs(s.values[0] - v.values[0]) <= s.radius[0] + v.radius[0]


def test_drift_bounds():
    assert drift_bounds(load_system("sq_t")) == [1]
    assert drift_bounds(load_system("swap")) == [0, 0]
    assert drift_bounds(load_system("p2_sq_t")) is None


def test_heuristic_mode_on_p2():
    dyn = load_system("p2_sq_t")
    cert = canonical_height_vector(dyn, pt(dyn, "[t : 1 : 1]"))
    assert cert.values == [1]
    assert cert.rigorous_radius is None


def test_basechange():
    dyn = load_system("sq_t")
    rep = basechange_check(dyn, pt(dyn, "[t : 1]"), parse_poly("t^2", QQ))
    assert rep.pulled.values == [2] and rep.original.values == [1] and rep.ok
    same = basechange_check(dyn, pt(dyn, "[t + 1 : 1]"), Poly.gen(QQ))
    assert same.factor == 1 and same.difference == 0


def test_orbit_cache_matches_apply():
    dyn = load_system("sq_t")
    a = pt(dyn, "[t : 1]")
    o = Orbit(dyn, a)
    assert o[3] == dyn.apply(dyn.apply(dyn.apply(a)))
    assert o.height(3) == [8]
