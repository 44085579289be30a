"""Intersection-number sequences along an orbit and their recurrences.

``d_m`` is the observed height number ``h_0(x_m, e) * deg(x_m)``; for
rational points ``deg = 1`` and for cycles this is the t-degree of the form.
A minimal linear recurrence is found by a Hankel-kernel search, from which
the rational generating function and ``lim d_m rho^-m`` follow.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import flint

from .canheight import Orbit
from .correspondence import ZeroCycle
from .errors import ValidationError
from .nslattice import arb_text, charpoly_int, ns_action
from .projective import pairing


@dataclass
class DSequence:
    terms: list[Fraction]
    e: list[Fraction]
    rank: int  # NS rank of the source system


def d_sequence(dyn, a, e: Sequence | None, M: int, orbit: Orbit | None = None) -> DSequence:
    """``d_0 .. d_M``; ``e`` defaults to the all-ones class."""
    A = ns_action(dyn)
    e = [Fraction(1)] * A.rank if e is None else [Fraction(x) for x in e]
    if len(e) != A.rank:
        raise ValidationError(f"pairing vector needs {A.rank} entries")
    orbit = orbit or Orbit(dyn, a)
    terms = []
    for m in range(M + 1):
        x = orbit[m]
        val = pairing(orbit.height(m), e)
        if isinstance(x, ZeroCycle):
            val *= x.degree
        terms.append(val)
    return DSequence(terms, e, A.rank)


# ---------------------------------------------------------------------------
# quadratic surds for exact limits

@dataclass(frozen=True)
class QuadSurd:
    """``a + b sqrt(D)`` with rational a, b and squarefree integer D > 1."""

    a: Fraction
    b: Fraction
    D: int

    def _lift(self, o):
        if isinstance(o, QuadSurd):
            return o
        return QuadSurd(Fraction(o), Fraction(0), self.D)

    def __add__(self, o):
        o = self._lift(o)
        return QuadSurd(self.a + o.a, self.b + o.b, self.D)

    __radd__ = __add__

    def __neg__(self):
        return QuadSurd(-self.a, -self.b, self.D)

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        o = self._lift(o)
        return QuadSurd(self.a * o.a + self.b * o.b * self.D, self.a * o.b + self.b * o.a, self.D)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._lift(o)
        n = o.a * o.a - o.b * o.b * self.D
        if n == 0:
            raise ZeroDivisionError("division by zero surd")
        return self * QuadSurd(o.a / n, -o.b / n, self.D)

    def __rtruediv__(self, o):
        return self._lift(o) / self

    def arb(self):
        return flint.arb(self.a.numerator) / self.a.denominator + \
            flint.arb(self.b.numerator) / self.b.denominator * flint.arb(self.D).sqrt()

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        surd = f"sqrt({self.D})" if self.b == 1 else f"-sqrt({self.D})" if self.b == -1 else f"{self.b}*sqrt({self.D})"
        if self.a == 0:
            return surd
        sign = "-" if surd.startswith("-") else "+"
        return f"{self.a} {sign} {surd.lstrip('-')}"


def _squarefree_split(n: int) -> tuple[int, int]:
    """``n = s^2 * f`` with f squarefree; returns (s, f)."""
    s, f = 1, 1
    sign = -1 if n < 0 else 1
    n = abs(n)
    for p, k in flint.fmpz(n).factor():
        p = int(p)
        s *= p ** (k // 2)
        if k % 2:
            f *= p
    return s, sign * f


# ---------------------------------------------------------------------------
# recurrence search

@dataclass
class RecurrenceReport:
    """``d_{m+r} = sum_i coeffs[i] d_{m+i}`` for ``m >= transient``."""

    coeffs: list[Fraction] | None
    transient: int | None
    numerator: list[int] | None  # generating function, ascending powers of z
    denominator: list[int] | None
    limit: Fraction | QuadSurd | None
    limit_enclosure: object | None  # arb
    limit_exact: bool
    dominant_root: object | None  # Fraction, QuadSurd or arb
    note: str = ""

    @property
    def order(self) -> int | None:
        return None if self.coeffs is None else len(self.coeffs)

    @property
    def found(self) -> bool:
        return self.coeffs is not None

    def characteristic(self) -> list[Fraction] | None:
        """``x^r - sum c_i x^i`` ascending."""
        if self.coeffs is None:
            return None
        return [-c for c in self.coeffs] + [Fraction(1)]


def _solve_recurrence(terms, r: int, T: int):
    """Exact coefficient vector valid for all m >= T in range, or None."""
    rows = [[terms[m + i] for i in range(r)] for m in range(T, len(terms) - r)]
    rhs = [terms[m + r] for m in range(T, len(terms) - r)]
    if r == 0:
        return [] if all(x == 0 for x in rhs) else None
    # augmented system; consistent iff rank unchanged
    aug = flint.fmpq_mat([[flint.fmpq(x.numerator, x.denominator) for x in row] + [flint.fmpq(b.numerator, b.denominator)]
                          for row, b in zip(rows, rhs)])
    R, rank = aug.rref()
    Am = flint.fmpq_mat([[flint.fmpq(x.numerator, x.denominator) for x in row] for row in rows])
    if Am.rank() != rank:
        return None
    if rank < r:
        # underdetermined: not identifiable at this order
        return None
    sol = [Fraction(0)] * r
    for i in range(rank):
        piv = next(j for j in range(r + 1) if R[i, j] != 0)
        if piv == r:
            return None
        val = R[i, r]
        sol[piv] = Fraction(int(val.p), int(val.q))
    return sol


def find_recurrence(seq: DSequence | Sequence, max_order: int = 6, transient_max: int | None = None) -> RecurrenceReport:
    """Minimal monic recurrence (order first, then transient)."""
    if isinstance(seq, DSequence):
        terms, rank = seq.terms, seq.rank
    else:
        terms, rank = [Fraction(x) for x in seq], 1
    Tmax = rank + 1 if transient_max is None else transient_max
    M = len(terms)
    for r in range(max_order + 1):
        for T in range(Tmax + 1):
            if M - r - T < r + 1:
                break
            c = _solve_recurrence(terms, r, T)
            if c is not None:
                return _finish(terms, c, T)
    return RecurrenceReport(None, None, None, None, None, None, False, None,
                            note=f"no recurrence of order <= {max_order} with transient <= {Tmax}")


def check_candidate(terms: Sequence[Fraction], poly: Sequence, transient: int) -> int | None:
    """First m >= transient where ``sum poly[i] d_{m+i}`` is nonzero, else None."""
    n = len(poly) - 1
    for m in range(transient, len(terms) - n):
        if sum((Fraction(poly[i]) * terms[m + i] for i in range(n + 1)), Fraction(0)) != 0:
            return m
    return None


def extended_candidate(dyn) -> list[int]:
    """``charpoly(S^t) * (x - 1)`` ascending."""
    cp = flint.fmpz_poly(charpoly_int(ns_action(dyn).St)) * flint.fmpz_poly([-1, 1])
    return [int(c) for c in cp.coeffs()]


def _qpoly(xs):
    return flint.fmpq_poly([flint.fmpq(Fraction(x).numerator, Fraction(x).denominator) for x in xs])


def _int_coeffs(p) -> list[int]:
    return [int(c) for c in p.numer().coeffs()] if p != 0 else []


def generating_function(terms, coeffs, T):
    """Reduced ``(N, D)`` over Q with ``sum d_m z^m = N/D`` and ``D(0) = 1``."""
    r = len(coeffs)
    D = _qpoly([1] + [-coeffs[r - k] for k in range(1, r + 1)])
    S = _qpoly(terms[: T + r])
    N = D * S
    N = flint.fmpq_poly([N[i] for i in range(min(N.degree() + 1, T + r))]) if N != 0 else N
    if N == 0:
        return N, _qpoly([1])
    g = N.gcd(D)
    N, D = N // g, D // g
    c = D[0]
    return N / c, D / c


def _scaled_pair(N, D):
    den = N.denom() * D.denom() if N != 0 else D.denom()
    Ni = _int_coeffs(N * den) if N != 0 else []
    Di = _int_coeffs(D * den)
    g = 0
    for x in Ni + Di:
        g = flint.fmpz(g).gcd(x)
    g = int(g) or 1
    return [x // g for x in Ni], [x // g for x in Di]


def _finish(terms, c, T) -> RecurrenceReport:
    N, D = generating_function(terms, c, T)
    num, den = _scaled_pair(N, D)
    rep = RecurrenceReport(c, T, num, den, None, None, False, None)
    if N == 0:
        rep.limit, rep.limit_exact, rep.note = Fraction(0), True, "zero sequence"
        return rep
    _limit(rep, N, D)
    return rep


def _limit(rep: RecurrenceReport, N, D, prec: int = 256):
    if D.degree() < 1:
        rep.limit, rep.limit_exact, rep.note = Fraction(0), True, "finite sequence"
        return
    Zi = flint.fmpz_poly(_int_coeffs(D * D.denom()))
    # reciprocal polynomial: the roots are the growth rates
    Q = flint.fmpz_poly(list(reversed(Zi.coeffs())))
    old = flint.ctx.prec
    flint.ctx.prec = prec
    try:
        roots = Q.complex_roots()
        mods = [(abs(z), z, mult) for z, mult in roots]
        best = max(mods, key=lambda t: t[0].mid())
        rivals = [t for t in mods if t[1] is not best[1]]
        if any(not (t[0] < best[0]) for t in rivals):
            rep.note = "no unique dominant root"
            return
        z, mult = best[1], best[2]
        if mult > 1:
            rep.note = "dominant root is not simple"
            return
        if isinstance(z, flint.acb) and not z.imag.contains(0):
            rep.note = "dominant root is not real"
            return
        if isinstance(z, flint.acb):
            z = z.real
        if best[0] <= 1:
            # bounded sequence: no exponential growth to normalize by
            rep.note = "dominant root has modulus <= 1"
        # exact value when the dominant root has degree <= 2
        for fac, _ in Q.factor()[1]:
            if fac.degree() > 2 or not any(_overlaps(fr, z) for fr, _ in fac.complex_roots()):
                continue
            if fac.degree() == 1:
                rho = Fraction(-int(fac[0]), int(fac[1]))
                rep.dominant_root = rho
                zq = 1 / rho
                val = -Fraction(_fq(N(flint.fmpq(zq.numerator, zq.denominator)))) / (
                    zq * Fraction(_fq(D.derivative()(flint.fmpq(zq.numerator, zq.denominator)))))
                rep.limit, rep.limit_exact = val, True
                rep.limit_enclosure = flint.arb(val.numerator) / val.denominator
                return
            a2, a1, a0 = (int(fac[2]), int(fac[1]), int(fac[0]))
            s, f = _squarefree_split(a1 * a1 - 4 * a2 * a0)
            if f > 1:
                candidates = [QuadSurd(Fraction(-a1, 2 * a2), Fraction(sg * s, 2 * a2), f) for sg in (1, -1)]
                rho = next(q for q in candidates if _overlaps(q.arb(), z))
                rep.dominant_root = rho
                zq = 1 / rho
                val = -_eval_surd(N, zq) / (zq * _eval_surd(D.derivative(), zq))
                rep.limit, rep.limit_exact = val, True
                rep.limit_enclosure = val.arb()
                return
        # enclosure only
        rep.dominant_root = z
        zz = 1 / z
        val = -_eval_arb(N, zz) / (zz * _eval_arb(D.derivative(), zz))
        rep.limit_enclosure = val
        rep.limit = val
    finally:
        flint.ctx.prec = old


def _overlaps(u, v) -> bool:
    if isinstance(u, flint.acb):
        return u.imag.contains(0) and u.real.overlaps(v)
    return u.overlaps(v)


def _fq(x) -> Fraction:
    return Fraction(int(x.p), int(x.q))


def _eval_surd(p, z: QuadSurd) -> QuadSurd:
    acc = QuadSurd(Fraction(0), Fraction(0), z.D)
    for c in reversed(p.coeffs()):
        acc = acc * z + _fq(c)
    return acc


def _eval_arb(p, z):
    acc = flint.arb(0)
    for c in reversed(p.coeffs()):
        acc = acc * z + flint.arb(int(c.p)) / int(c.q)
    return acc


def expand_generating_function(num: Sequence[int], den: Sequence[int], n: int) -> list[Fraction]:
    """First n power-series coefficients of num/den."""
    if not den or den[0] == 0:
        raise ValidationError("denominator must have a nonzero constant term")
    out = []
    for m in range(n):
        acc = Fraction(num[m]) if m < len(num) else Fraction(0)
        for k in range(1, min(m, len(den) - 1) + 1):
            acc -= den[k] * out[m - k]
        out.append(acc / den[0])
    return out


def format_limit(rep: RecurrenceReport) -> str:
    if rep.limit is None:
        return "none"
    if rep.limit_exact:
        return str(rep.limit)
    return arb_text(rep.limit_enclosure)


def format_series(coeffs: Sequence[int], var: str = "z") -> str:
    parts = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        mono = "" if i == 0 else var if i == 1 else f"{var}^{i}"
        mag = abs(c)
        body = str(mag) if not mono else mono if mag == 1 else f"{mag}*{mono}"
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    if not parts:
        return "0"
    head = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    return head + "".join(f" {s} {b}" for s, b in parts[1:])
