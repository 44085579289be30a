"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines appear in
the terminal report (see conftest.py) and on stdout when run as a script.
"""

import random
import time
from fractions import Fraction
from itertools import product

import pytest

from heightforge.algebra import GF, QQ, Poly
from heightforge.canheight import (
    boundedness_report,
    canonical_height_scalar,
    functional_equation_check,
    split_data,
    basechange_check,
)
from heightforge.catalog import load_system, random_points, system_names
from heightforge.correspondence import ZeroCycle, pushforward_raw, pushforward
from heightforge.dynparse import parse_point, parse_poly
from heightforge.errors import UnsupportedSplit
from heightforge.nslattice import NSAction, kronecker_classify, power_bounded, spectral_split
from heightforge.northcott import enumerate_points, northcott_verify
from heightforge.projective import Space
from heightforge.series import d_sequence, expand_generating_function, find_recurrence

RESULTS = {}


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def pt(dyn, s):
    return parse_point(s, dyn.space, dyn.field)


def test_criterion_1_exact_scalar_heights():
    start = time.perf_counter()
    details, ok = [], True
    for name in ("sq", "sq_t"):
        dyn = load_system(name)
        a = pt(dyn, "[t : 1]")
        cert = canonical_height_scalar(dyn, a, [1])
        fe = functional_equation_check(dyn, a)
        good = cert.values == [1] and cert.rigor == "Exact" and cert.iterations <= 5 and fe.residual == 0
        ok &= good
        details.append(f"{name}: hhat={cert.values[0]} {cert.rigor} iters={cert.iterations} residual={fe.residual}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 1
    report(1, ok, "; ".join(details) + f"; {elapsed:.2f}s")


def test_criterion_2_correspondence_engine():
    start = time.perf_counter()
    S = load_system("cusp")
    c = ZeroCycle.from_point(Poly.gen(QQ), Poly.one(QQ))
    ok = True
    for m in range(1, 7):
        raw = pushforward_raw(S, c)
        ok &= raw.degree == S.d * c.degree
        c = pushforward(S, c)
        ok &= c.height() == Fraction(3, 2) ** m
    cert = canonical_height_scalar(S, pt(S, "[t : 1]"), [1])
    ok &= cert.values == [1] and cert.rigor == "Exact"
    elapsed = time.perf_counter() - start
    ok &= elapsed < 1
    report(2, ok, f"heights (3/2)^m for m<=6, degree law at each step, hhat={cert.values[0]} {cert.rigor}; {elapsed:.2f}s")


def test_criterion_3_vector_heights_sqrt6():
    start = time.perf_counter()
    dyn = load_system("swap_f3")
    sd = split_data(dyn)
    width = sd.split.kappa_hi - sd.split.kappa_lo
    encloses = sd.split.kappa_lo ** 2 < 6 < sd.split.kappa_hi ** 2
    worst = Fraction(0)
    count = 0
    for a in enumerate_points(dyn.field, dyn.space, 2):
        rep = functional_equation_check(dyn, a, max_iter=10, split=sd)
        worst = max(worst, rep.residual_upper)
        count += 1
    elapsed = time.perf_counter() - start
    ok = worst <= Fraction(2, 100) and width <= Fraction(1, 10**12) and encloses and elapsed < 60
    report(3, ok, f"{count} points, max residual+radius={float(worst):.3g}, kappa={sd.split.kappa_text()}; {elapsed:.1f}s")


def test_criterion_4_spectral_kronecker():
    start = time.perf_counter()
    rng = random.Random(0)
    agree = 0
    for _ in range(20):
        M = [[rng.randint(-2, 2) for _ in range(4)] for _ in range(4)]
        verdict = kronecker_classify(M).verdict
        agree += (verdict == "AllTorsionOrNilpotent") == power_bounded(M, 200)
    s1 = spectral_split(NSAction([[2, 0], [0, 1]], 1))
    ex1 = s1.Eplus == [[1, 0]] and s1.Eminus == [[0, 1]] and s1.kappa_exact and s1.kappa_lo == 2
    s2 = spectral_split(NSAction([[0, 3], [2, 0]], 1))
    ex2 = (s2.dim_plus == 2 and not s2.kappa_exact and s2.kappa_lo ** 2 < 6 < s2.kappa_hi ** 2
           and s2.kappa_hi - s2.kappa_lo <= Fraction(1, 10**12) and s2.charpoly == [-6, 0, 1])
    try:
        spectral_split(NSAction([[1, 1], [1, 0]], 1))
        ex3 = False
    except UnsupportedSplit:
        ex3 = True
    elapsed = time.perf_counter() - start
    ok = agree == 20 and ex1 and ex2 and ex3 and elapsed < 10
    report(4, ok, f"oracle agreement {agree}/20, diag={ex1}, sqrt6={ex2}, golden unsupported={ex3}; {elapsed:.2f}s")


def test_criterion_5_series_rationality():
    start = time.perf_counter()
    dyn = load_system("sq_t")
    a = pt(dyn, "[t : 1]")
    seq = d_sequence(dyn, a, None, 12)
    rep = find_recurrence(seq)
    cert = canonical_height_scalar(dyn, a, [1])
    gf_ok = rep.numerator == [1] and rep.denominator == [1, -2]
    gf_ok &= expand_generating_function(rep.numerator, rep.denominator, 13) == seq.terms
    lim_ok = rep.limit_exact and rep.limit == cert.values[0] and cert.radius[0] == 0
    elapsed = time.perf_counter() - start
    ok = len(seq.terms) == 13 and rep.coeffs == [2] and gf_ok and lim_ok and elapsed < 1
    report(5, ok, f"recurrence {[str(c) for c in rep.coeffs]}, G=({rep.numerator})/({rep.denominator}), limit={rep.limit}; {elapsed:.2f}s")


# -- independent F2[t] oracle for criterion 6: polynomials as bit masks

def _deg(f):
    return f.bit_length() - 1


def _mul(a, b):
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def _mod(a, b):
    while a and _deg(a) >= _deg(b):
        a ^= b << (_deg(a) - _deg(b))
    return a


def _gcd(a, b):
    while b:
        a, b = b, _mod(a, b)
    return a


def _div(a, b):
    q = 0
    while a and _deg(a) >= _deg(b):
        s = _deg(a) - _deg(b)
        q ^= 1 << s
        a ^= b << s
    return q


def _oracle_points(B):
    out = set()
    for a, b in product(range(1 << (B + 1)), repeat=2):
        if (a, b) == (0, 0) or _gcd(a, b) != 1:
            continue
        # first nonzero coordinate monic is automatic over F2
        out.add((a, b))
    return out


def _oracle_step(p):
    a, b = p
    A, Bq = _mul(a, a) ^ _mul(2, _mul(b, b)), _mul(b, b)
    g = _gcd(A, Bq)
    return _div(A, g), _div(Bq, g)


def _h(p):
    return max(_deg(p[0]), _deg(p[1]), 0)


def _oracle_chain(B):
    box = _oracle_points(B)
    pre, chains = set(), {}
    for p in box:
        seen, x = {p}, p
        for _ in range(200):
            x = _oracle_step(x)
            if x in seen:
                pre.add(p)
                break
            seen.add(x)
            if _h(x) > 40:
                break
    for p in box - pre:
        k, x = 0, p
        while True:
            x = _oracle_step(x)
            if x not in box:
                break
            k += 1
        chains[p] = k
    return box, pre, 1 + max(chains.values()) if chains else 0


def test_criterion_6_northcott_desk():
    start = time.perf_counter()
    dyn = load_system("sq_t_f2")
    rep = northcott_verify(dyn, 2)
    box, pre, n = _oracle_chain(2)
    mine_pre = {str(a) for a, v in rep.verdicts if v.kind == "Preperiodic"}
    oracle_pre = {f"[{Poly(GF(2), [int(c) for c in bin(a)[2:][::-1]])} : {Poly(GF(2), [int(c) for c in bin(b)[2:][::-1]])}]"
                  for a, b in pre}
    elapsed = time.perf_counter() - start
    ok = (rep.count == len(box) and rep.biconditional and rep.unknown == 0 and mine_pre == oracle_pre
          and rep.chain_bound == n and n >= 1 and elapsed < 30)
    report(6, ok, f"{rep.count} points (oracle {len(box)}), biconditional={rep.biconditional}, "
                  f"chain bound {rep.chain_bound} (oracle {n}); {elapsed:.2f}s")


def test_criterion_7_base_change():
    start = time.perf_counter()
    t = Poly.gen(QQ)
    counts = []
    pts = random_points(QQ, Space((1, 1)), 4, 100, seed=0)
    for u in (t**2, t**3, t**2 + 1):
        good = sum(1 for a in pts if a.substitute_base(u).height() == tuple(u.degree * h for h in a.height()))
        counts.append(good)
    dyn = load_system("sq_t")
    bc = basechange_check(dyn, pt(dyn, "[t : 1]"), parse_poly("t^2", QQ))
    sample_ok = all(basechange_check(dyn, a, t**2).ok for a in random_points(QQ, Space((1,)), 3, 100, seed=0))
    elapsed = time.perf_counter() - start
    ok = counts == [100, 100, 100] and bc.ok and bc.pulled.values == [2] and sample_ok and elapsed < 5
    report(7, ok, f"Weil scaling {counts} of 100, hhat scaling at (t:1): {bc.pulled.values[0]} = "
                  f"{bc.factor}*{bc.original.values[0]}, 100 random points ok={sample_ok}; {elapsed:.2f}s")


CAPS = (2, 4)


def test_criterion_8_boundedness():
    start = time.perf_counter()
    failures = []
    for name in system_names():
        dyn = load_system(name)
        reps = [boundedness_report(dyn, random_points(dyn.field, dyn.space, H, 200, seed=0)) for H in CAPS]
        small, big = reps
        if big.bounds is not None:
            for rep in reps:
                if not rep.ok:
                    failures.append(f"{name}: max {rep.empirical_max} exceeds bound {rep.bounds}")
        if any(b > s for s, b in zip(small.empirical_max, big.empirical_max)):
            failures.append(f"{name}: max grew {[str(x) for x in small.empirical_max]} -> "
                            f"{[str(x) for x in big.empirical_max]} when the cap doubled")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60
    report(8, ok, ("; ".join(failures) if failures else "all systems bounded") + f"; {elapsed:.1f}s")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
