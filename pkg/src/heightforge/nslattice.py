"""Neron-Severi action, exact E+/E- splitting, kappa and Kronecker tests.

Matrices are lists of rows of Fractions (or ints).  Characteristic
polynomials and factorizations go through flint; root moduli are decided
exactly on the unit circle (via ``w = z + 1/z``) and by certified complex
enclosures elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

from math import gcd

import flint

from .errors import UnsupportedSplit, ValidationError

Matrix = list  # list of rows


# ---------------------------------------------------------------------------
# exact linear algebra helpers

def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), Fraction(0)) for j in range(len(B[0]))]
            for i in range(len(A))]


def mat_vec(A: Matrix, v: Sequence) -> list:
    return [sum((a * x for a, x in zip(row, v)), Fraction(0)) for row in A]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def _to_fmpq_mat(A: Matrix):
    n, m = len(A), len(A[0]) if A else 0
    return flint.fmpq_mat(n, m, [flint.fmpq(Fraction(x).numerator, Fraction(x).denominator) for row in A for x in row])


def _from_fmpq_mat(M) -> Matrix:
    return [[Fraction(int(M[i, j].p), int(M[i, j].q)) for j in range(M.ncols())] for i in range(M.nrows())]


def kernel(A: Matrix) -> list[list[Fraction]]:
    """Basis of the right kernel of a rational matrix (reduced echelon form)."""
    if not A:
        return []
    n = len(A[0])
    R, rank = _to_fmpq_mat(A).rref()
    R = _from_fmpq_mat(R)
    pivots = []
    for i in range(rank):
        j = next(j for j in range(n) if R[i][j] != 0)
        pivots.append(j)
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -R[i][f]
        basis.append(v)
    return basis


def mat_inv(A: Matrix) -> Matrix:
    return _from_fmpq_mat(_to_fmpq_mat(A).inv())


def solve(A: Matrix, B: Matrix) -> Matrix:
    """X with A X = B for A square invertible."""
    return _from_fmpq_mat(_to_fmpq_mat(A).solve(_to_fmpq_mat(B)))


def columns_to_matrix(cols: list[list[Fraction]], n: int) -> Matrix:
    return [[c[i] for c in cols] for i in range(n)]


def norm1(A: Matrix) -> Fraction:
    """Operator norm induced by the l1 vector norm (max absolute column sum)."""
    if not A or not A[0]:
        return Fraction(0)
    return max(sum(abs(A[i][j]) for i in range(len(A))) for j in range(len(A[0])))


def norm_inf(A: Matrix) -> Fraction:
    return max(sum(abs(x) for x in row) for row in A)


def charpoly_int(M: Matrix) -> "flint.fmpz_poly":
    n = len(M)
    return flint.fmpz_mat(n, n, [int(x) for row in M for x in row]).charpoly()


def charpoly_rat(M: Matrix) -> "flint.fmpq_poly":
    return _to_fmpq_mat(M).charpoly()


def poly_at_matrix(coeffs: Sequence[Fraction], M: Matrix) -> Matrix:
    """Horner evaluation of a polynomial (low-to-high coefficients) at M."""
    n = len(M)
    R = [[Fraction(0)] * n for _ in range(n)]
    for c in reversed(coeffs):
        R = mat_mul(R, M)
        for i in range(n):
            R[i][i] += c
    return R


def _fmpq_coeffs(p) -> list[Fraction]:
    return [Fraction(int(c.p), int(c.q)) for c in p.coeffs()]


# ---------------------------------------------------------------------------
# domain types

@dataclass
class NSAction:
    """Integer matrix ``St`` (column j = pullback of the j-th class) and the
    backward degree ``d``; ``Sstar = St / d``."""

    St: Matrix
    d: int = 1

    @property
    def rank(self) -> int:
        return len(self.St)

    @property
    def Sstar(self) -> Matrix:
        return [[Fraction(x, self.d) for x in row] for row in self.St]


def ns_action(dyn) -> NSAction:
    """Multidegree matrix for morphisms, ``(d')`` over ``d`` for correspondences."""
    if getattr(dyn, "kind", None) == "correspondence":
        return NSAction([[dyn.dprime]], dyn.d)
    return NSAction([list(r) for r in dyn.multidegree_matrix], 1)


# ---------------------------------------------------------------------------
# root classification

def _sturm_count(coeffs: list[Fraction], lo: Fraction, hi: Fraction) -> int:
    """Number of distinct real roots in the half-open interval (lo, hi]."""
    def deg(p):
        return len(p) - 1

    def trim(p):
        while p and p[-1] == 0:
            p.pop()
        return p

    def rem(a, b):
        a = list(a)
        while len(a) >= len(b) and a:
            q = a[-1] / b[-1]
            s = len(a) - len(b)
            for i, c in enumerate(b):
                a[s + i] -= q * c
            trim(a)
        return a

    p0 = trim([Fraction(c) for c in coeffs])
    p1 = trim([i * c for i, c in enumerate(p0)][1:])
    seq = [p0, p1]
    while seq[-1] and deg(seq[-1]) > 0:
        r = rem(seq[-2], seq[-1])
        if not r:
            break
        seq.append([-c for c in r])

    def ev(p, x):
        acc = Fraction(0)
        for c in reversed(p):
            acc = acc * x + c
        return acc

    def changes(x):
        signs = [ev(p, x) for p in seq if p]
        signs = [s for s in signs if s != 0]
        return sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))

    return changes(lo) - changes(hi)


def _chebyshev_reduce(cs: list[Fraction]) -> list[Fraction]:
    """For self-reciprocal ``p`` of degree ``2k`` return ``Q`` with
    ``p(z) = z^k Q(z + 1/z)``."""
    n = len(cs) - 1
    k = n // 2
    # p(z)/z^k = c_k + sum_{j>=1} c_{k+j} (z^j + z^-j); z^j + z^-j = T_j(w)
    # with T_0 = 2, T_1 = w, T_{j+1} = w T_j - T_{j-1}
    T = [[Fraction(2)], [Fraction(0), Fraction(1)]]
    while len(T) <= k:
        a, b = T[-1], T[-2]
        nxt = [Fraction(0)] + a
        for i, c in enumerate(b):
            nxt[i] -= c
        T.append(nxt)
    Q = [Fraction(0)] * (k + 1)
    Q[0] += cs[k]
    for j in range(1, k + 1):
        for i, c in enumerate(T[j]):
            Q[i] += cs[k + j] * c
    return Q


def _complex_roots(p: "flint.fmpz_poly", prec: int):
    old = flint.ctx.prec
    flint.ctx.prec = prec
    try:
        return [r for r, _ in p.complex_roots()]
    finally:
        flint.ctx.prec = old


def classify_factor(p: "flint.fmpz_poly") -> str:
    """'SMALL' (all roots |z| <= 1) or 'LARGE' (all |z| > 1) for an
    irreducible integer polynomial; UnsupportedSplit if it straddles."""
    cs = [Fraction(int(c)) for c in p.coeffs()]
    n = len(cs) - 1
    rec = cs[::-1]
    g = flint.fmpz_poly([int(c) for c in cs]).gcd(flint.fmpz_poly([int(c) for c in rec]))
    if g.degree() > 0:
        # irreducible and sharing a root with its reciprocal: self-reciprocal
        if n == 1:
            return "SMALL"  # z - 1 or z + 1
        if n % 2:
            raise UnsupportedSplit(f"odd self-reciprocal factor {p}")
        # irreducible of degree >= 2 sharing roots with its reciprocal is palindromic
        Q = _chebyshev_reduce(cs)
        on_circle = _sturm_count(Q, Fraction(-2), Fraction(2))
        # roots at exactly -2 are excluded by (lo, hi]; add them back
        if sum(Q[i] * (-2) ** i for i in range(len(Q))) == 0:
            on_circle += 1
        if on_circle == n // 2:
            return "SMALL"
        raise UnsupportedSplit(f"factor {p} has roots on both sides of the unit circle")
    prec = 64
    while True:
        roots = _complex_roots(p, prec)
        classes = set()
        undecided = False
        for r in roots:
            m2 = r.real ** 2 + r.imag ** 2
            if m2 > 1:
                classes.add("LARGE")
            elif m2 < 1:
                classes.add("SMALL")
            else:
                undecided = True
        if not undecided:
            break
        prec *= 2
        if prec > 1 << 16:
            raise UnsupportedSplit(f"could not separate roots of {p} from the unit circle")
    if len(classes) > 1:
        raise UnsupportedSplit(
            f"factor {p} has roots on both sides of the unit circle; E+ would be irrational"
        )
    return classes.pop()


@dataclass
class SpectralSplit:
    charpoly: list[Fraction]  # of S*, low-to-high, monic
    factors: list[tuple[list[Fraction], int, str]]  # (monic factor of S*, multiplicity, class)
    Eplus: list[list[Fraction]]  # basis vectors
    Eminus: list[list[Fraction]]
    kappa_lo: Fraction | None
    kappa_hi: Fraction | None
    kappa_exact: bool
    Aplus: Matrix | None = None  # S* restricted to E+ in the Eplus basis

    @property
    def kappa(self) -> Fraction | None:
        return self.kappa_lo if self.kappa_exact else None

    @property
    def dim_plus(self) -> int:
        return len(self.Eplus)

    def kappa_text(self) -> str:
        if self.kappa_lo is None:
            return "none"
        if self.kappa_exact:
            return _frac_text(self.kappa_lo)
        mid = (self.kappa_lo + self.kappa_hi) / 2
        rad = (self.kappa_hi - self.kappa_lo) / 2
        return f"{_decimal(mid, 17)}±{float(rad):.1e}"


def _frac_text(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _decimal(x: Fraction, digits: int) -> str:
    """Decimal string of a rational to ``digits`` significant digits."""
    from decimal import Decimal, localcontext

    with localcontext() as c:
        c.prec = digits
        return str(Decimal(x.numerator) / Decimal(x.denominator))


def _arb_to_fraction(a) -> Fraction:
    man, exp = a.mid().man_exp()
    man, exp = int(man), int(exp)
    return Fraction(man) * (Fraction(2) ** exp)


def arb_text(a) -> str:
    """``mid±rad`` for a real ball."""
    mid = _arb_to_fraction(a.mid())
    rad = _arb_to_fraction(a.rad())
    return f"{_decimal(mid, 17)}±{float(rad):.1e}"


def _root_modulus_bounds(p, prec):
    out = []
    for r in _complex_roots(p, prec):
        m = (r.real ** 2 + r.imag ** 2).sqrt()
        out.append((_arb_to_fraction(m.lower()), _arb_to_fraction(m.upper())))
    return out


def spectral_split(A: NSAction, width: Fraction = Fraction(1, 10**12)) -> SpectralSplit:
    """Exact S*-invariant splitting by root modulus; kappa exact or enclosed."""
    S = A.Sstar
    n = A.rank
    d = A.d
    chi = charpoly_int(A.St)
    fac = chi.factor()[1]
    factors = []
    plus_poly = [Fraction(1)]
    minus_poly = [Fraction(1)]
    large_int = []  # integer factors q(z) of St's charpoly, roots = d * roots of S*
    for q, mult in fac:
        # roots of S* are roots of q divided by d: p(z) = q(d z)
        qc = [int(c) for c in q.coeffs()]
        pc = [Fraction(c) * d ** i for i, c in enumerate(qc)]
        g = 0
        for c in pc:
            g = gcd(g, int(c))
        pint = flint.fmpz_poly([int(c) // g for c in pc])
        cls = classify_factor(pint)
        monic = [c / pc[-1] for c in pc]
        factors.append((monic, int(mult), cls))
        prod = _poly_pow([Fraction(c) for c in monic], int(mult))
        if cls == "LARGE":
            plus_poly = _poly_mul(plus_poly, prod)
            large_int.append(pint)
        else:
            minus_poly = _poly_mul(minus_poly, prod)
    Eplus = kernel(poly_at_matrix(plus_poly, S))
    Eminus = kernel(poly_at_matrix(minus_poly, S))
    Aplus = None
    if Eplus:
        P = columns_to_matrix(Eplus, n)
        SP = mat_mul(S, P)
        Aplus = _restrict(P, SP)
    lo, hi, exact = _kappa(large_int, width)
    return SpectralSplit(
        charpoly=_fmpq_coeffs(charpoly_rat(S)),
        factors=factors,
        Eplus=Eplus,
        Eminus=Eminus,
        kappa_lo=lo,
        kappa_hi=hi,
        kappa_exact=exact,
        Aplus=Aplus,
    )


def _restrict(P: Matrix, SP: Matrix) -> Matrix:
    """Coordinates C with S P = P C (P has full column rank)."""
    k = len(P[0])
    # least-squares free: solve on a set of k independent rows
    rows = _independent_rows(P)
    Psq = [P[i] for i in rows]
    Bsq = [SP[i] for i in rows]
    C = solve(Psq, Bsq)
    if mat_mul(P, C) != SP:
        raise ValidationError("subspace is not invariant")
    return C


def _independent_rows(P: Matrix) -> list[int]:
    chosen = []
    for i in range(len(P)):
        trial = [P[j] for j in chosen + [i]]
        if _to_fmpq_mat(trial).rank() == len(trial):
            chosen.append(i)
        if len(chosen) == len(P[0]):
            break
    return chosen


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_pow(a, k):
    out = [Fraction(1)]
    for _ in range(k):
        out = _poly_mul(out, a)
    return out


def _kappa(large_int, width, max_prec=1 << 14):
    """min |root| over LARGE factors: exact if attained by a rational root."""
    if not large_int:
        return None, None, False
    rats = []
    irr = []
    for p in large_int:
        if p.degree() == 1:
            c0, c1 = (int(c) for c in p.coeffs())
            rats.append(abs(Fraction(-c0, c1)))
        else:
            irr.append(p)
    r = min(rats) if rats else None
    if not irr:
        return r, r, True
    prec = 64
    while True:
        bounds = [b for p in irr for b in _root_modulus_bounds(p, prec)]
        if r is not None and all(b[0] > r for b in bounds):
            return r, r, True
        extra = [r] if r is not None else []
        lo = min([b[0] for b in bounds] + extra)
        hi = min([b[1] for b in bounds] + extra)
        ambiguous = r is not None and any(b[0] <= r <= b[1] for b in bounds)
        if hi - lo < width and (not ambiguous or prec >= max_prec):
            return lo, hi, False
        prec *= 2


# ---------------------------------------------------------------------------
# Kronecker classification

@dataclass
class KroneckerReport:
    verdict: str  # AllTorsionOrNilpotent | HasExpandingEigenvalue | OnCircleNonCyclotomic
    cyclotomic_factors: list[tuple[int, int]]
    nilpotent_order: int
    other_factors: list[str] = dc_field(default_factory=list)


def _totient(n: int) -> int:
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def cyclotomic_index(p: "flint.fmpz_poly") -> int | None:
    """n with p = Phi_n (p monic irreducible), else None."""
    deg = p.degree()
    for n in range(1, 2 * deg * deg + 3):
        if _totient(n) == deg and flint.fmpz_poly.cyclotomic(n) == p:
            return n
    return None


def kronecker_classify(M: Matrix) -> KroneckerReport:
    chi = charpoly_int(M)
    cyclo, others = [], []
    large = False
    x_mult = 0
    for q, mult in chi.factor()[1]:
        if q.degree() == 1 and int(q.coeffs()[0]) == 0:
            x_mult = int(mult)
            continue
        n = cyclotomic_index(q)
        if n is not None:
            cyclo.append((n, int(mult)))
            continue
        others.append(str(q))
        cls = _modulus_class(q)
        if cls == "LARGE":
            large = True
    cyclo.sort()
    if not others:
        verdict = "AllTorsionOrNilpotent"
    elif large:
        verdict = "HasExpandingEigenvalue"
    else:
        verdict = "OnCircleNonCyclotomic"
    return KroneckerReport(verdict, cyclo, _nilpotent_order(M, x_mult), others)


def _modulus_class(q) -> str:
    """'LARGE' if some root has modulus > 1 (certified), else 'SMALL'."""
    prec = 64
    while prec <= 1 << 14:
        undecided = False
        for r in _complex_roots(q, prec):
            m2 = r.real ** 2 + r.imag ** 2
            if m2 > 1:
                return "LARGE"
            if not m2 < 1:
                undecided = True
        if not undecided:
            return "SMALL"
        prec *= 2
    # an integer polynomial with all roots in the closed disc is a product of
    # x and cyclotomics (Kronecker); a non-cyclotomic factor must exceed 1
    return "LARGE"


def _nilpotent_order(M: Matrix, x_mult: int) -> int:
    """Index at which ker M^k stabilizes (0 if M is invertible)."""
    if x_mult == 0:
        return 0
    n = len(M)
    P = [[Fraction(x) for x in row] for row in M]
    prev = len(kernel(P))
    k = 1
    while True:
        P2 = mat_mul(P, [[Fraction(x) for x in row] for row in M])
        cur = len(kernel(P2))
        if cur == prev:
            return k
        prev, P, k = cur, P2, k + 1


def power_bounded(M: Matrix, steps: int = 200) -> bool:
    """Independent oracle: entries of M^m stay below max(1, rank*|M|_inf)^rank."""
    n = len(M)
    bound = max(1, n * max(sum(abs(int(x)) for x in row) for row in M)) ** n
    P = [[int(i == j) for j in range(n)] for i in range(n)]
    Mi = [[int(x) for x in row] for row in M]
    for _ in range(steps):
        P = [[sum(P[i][k] * Mi[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        if max(abs(x) for row in P for x in row) > bound:
            return False
    return True
