import random
from fractions import Fraction

import pytest
import sympy

from heightforge.catalog import load_system
from heightforge.errors import UnsupportedSplit
from heightforge.nslattice import (
    NSAction,
    kronecker_classify,
    mat_mul,
    ns_action,
    power_bounded,
    spectral_split,
)


def test_ns_action_examples():
    assert ns_action(load_system("swap")).St == [[0, 3], [2, 0]]
    assert ns_action(load_system("sq_t")).St == [[2]]
    A = ns_action(load_system("cusp"))
    assert A.St == [[3]] and A.d == 2 and A.Sstar == [[Fraction(3, 2)]]


def test_kronecker_examples():
    rot = kronecker_classify([[0, -1], [1, 0]])
    assert rot.verdict == "AllTorsionOrNilpotent" and rot.cyclotomic_factors == [(4, 1)]
    uni = kronecker_classify([[1, 1], [0, 1]])
    assert uni.verdict == "AllTorsionOrNilpotent" and uni.cyclotomic_factors == [(1, 2)]
    assert kronecker_classify([[1, 1], [1, 0]]).verdict == "HasExpandingEigenvalue"
    assert kronecker_classify([[0, 0], [1, 0]]).nilpotent_order == 2


def test_kronecker_against_sympy_eigenvalues():
    rng = random.Random(11)
    for _ in range(30):
        M = [[rng.randint(-2, 2) for _ in range(3)] for _ in range(3)]
        ev = sympy.Matrix(M).eigenvals()
        small = all(abs(complex(sympy.N(lam, 30))) <= 1 + 1e-20 for lam in ev)
        verdict = kronecker_classify(M).verdict
        assert (verdict == "AllTorsionOrNilpotent") == small


def test_split_diagonal():
    s = spectral_split(NSAction([[2, 0], [0, 1]], 1))
    assert s.Eplus == [[1, 0]] and s.Eminus == [[0, 1]]
    assert s.kappa_exact and s.kappa_lo == 2


def test_split_swap_sqrt6():
    s = spectral_split(ns_action(load_system("swap")))
    assert s.dim_plus == 2 and not s.kappa_exact
    assert s.kappa_hi - s.kappa_lo <= Fraction(1, 10**12)
    assert s.kappa_lo ** 2 < 6 < s.kappa_hi ** 2


def test_split_golden_unsupported():
    with pytest.raises(UnsupportedSplit):
        spectral_split(NSAction([[1, 1], [1, 0]], 1))


def test_split_invariance():
    rng = random.Random(2)
    for _ in range(20):
        M = [[rng.randint(0, 3) for _ in range(3)] for _ in range(3)]
        try:
            s = spectral_split(NSAction(M, 1))
        except UnsupportedSplit:
            continue
        basis = s.Eplus + s.Eminus
        assert sympy.Matrix(basis).rank() == 3
        # S* maps E+ into E+
        for v in s.Eplus:
            w = [sum(Fraction(M[i][j]) * v[j] for j in range(3)) for i in range(3)]
            aug = sympy.Matrix(s.Eplus + [w])
            assert aug.rank() == len(s.Eplus)


def test_power_bounded_oracle():
    assert power_bounded([[0, -1], [1, 0]])
    assert not power_bounded([[2, 0], [0, 1]])
    # unipotent blocks grow linearly: outside the oracle's reach
    assert not power_bounded([[1, 1], [0, 1]])


def test_lemma_expanding_part_nonzero():
    for name in ("sq", "sq_t", "swap", "prod", "cusp", "p2_sq_t", "id_sq_f2"):
        assert spectral_split(ns_action(load_system(name))).dim_plus >= 1
