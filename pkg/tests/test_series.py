from fractions import Fraction

from hypothesis import given, strategies as st

from heightforge.catalog import load_system
from heightforge.dynparse import parse_point
from heightforge.series import (
    QuadSurd,
    check_candidate,
    d_sequence,
    expand_generating_function,
    extended_candidate,
    find_recurrence,
)


def test_dsequence_examples():
    dyn = load_system("sq_t")
    assert d_sequence(dyn, parse_point("[t : 1]", dyn.space, dyn.field), None, 4).terms == [1, 2, 4, 8, 16]
    swap = load_system("swap")
    a = parse_point("[t : 1], [1 : 1]", swap.space, swap.field)
    assert d_sequence(swap, a, [1, 0], 4).terms == [1, 0, 6, 0, 36]
    fixed = parse_point("[0 : 1], [1 : 0]", swap.space, swap.field)
    assert d_sequence(swap, fixed, [1, 1], 4).terms == [0] * 5


def test_cycle_dsequence_counts_degree():
    cusp = load_system("cusp")
    seq = d_sequence(cusp, parse_point("[t : 1]", cusp.space, cusp.field), None, 5)
    assert seq.terms == [3**m for m in range(6)]


def test_geometric():
    rep = find_recurrence([2**m for m in range(13)])
    assert rep.coeffs == [2] and rep.transient == 0
    assert rep.numerator == [1] and rep.denominator == [1, -2]
    assert rep.limit == 1 and rep.limit_exact


def test_candidate_non_minimal():
    assert check_candidate([1, 2, 4, 8], [2, -3, 1], 0) is None
    assert check_candidate([1, 2, 4, 9], [2, -3, 1], 0) == 1


def test_zero_sequence():
    rep = find_recurrence([0] * 8)
    assert rep.order == 0 and rep.numerator == [] and rep.limit == 0


def test_fibonacci_limit_is_quadratic_surd():
    fib = [1, 1]
    while len(fib) < 14:
        fib.append(fib[-1] + fib[-2])
    rep = find_recurrence(fib)
    assert rep.limit == QuadSurd(Fraction(1, 2), Fraction(1, 10), 5)


def test_alternating_has_no_limit():
    rep = find_recurrence([1, 0, 6, 0, 36, 0, 216, 0, 1296])
    assert rep.coeffs == [6, 0] and rep.limit is None


def test_transient():
    rep = find_recurrence([5, 1, 2, 4, 8, 16, 32, 64])
    assert rep.transient == 1 and rep.coeffs == [2]


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=3), st.lists(st.integers(-5, 5), min_size=3, max_size=3))
def test_generating_function_reproduces(rec, init):
    r = len(rec)
    seq = [Fraction(x) for x in init[:r]]
    while len(seq) < 16:
        seq.append(sum(Fraction(c) * seq[-r + i] for i, c in enumerate(rec)))
    rep = find_recurrence(seq, max_order=3)
    assert rep.found and rep.order <= r
    assert expand_generating_function(rep.numerator, rep.denominator, len(seq)) == seq


def test_extended_candidate_on_catalog():
    for name in ("sq", "sq_t", "swap", "prod"):
        dyn = load_system(name)
        a = parse_point(", ".join(["[t + 1 : 1]"] * len(dyn.space.dims)), dyn.space, dyn.field)
        seq = d_sequence(dyn, a, None, 10)
        assert check_candidate(seq.terms, extended_candidate(dyn), seq.rank + 1) is None
