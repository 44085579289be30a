"""Exact base arithmetic over k = Q or F_p.

Polynomials in ``t`` (:class:`Poly`), rational functions (:class:`RatFunc`),
binary forms whose coefficients are polynomials in ``t``
(:class:`BinaryForm`), bihomogeneous forms on P^1 x P^1
(:class:`BihomogeneousForm`) and the resultant that turns a 0-cycle and a
correspondence into the pushed-forward 0-cycle.

Heavy polynomial kernels (multiplication, division, large gcds) run on
python-flint; gcds below :data:`GCD_THRESHOLD` use a plain Euclidean
remainder sequence.  Nothing here ever rounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import flint

from .errors import (
    ConstantSubstitution,
    DegenerateResultant,
    NotExactDivision,
    ValidationError,
    ZeroForm,
)

GCD_THRESHOLD = 512


@dataclass(frozen=True)
class BaseField:
    """The constant field: Q when ``characteristic == 0``, else F_p."""

    characteristic: int = 0

    def __post_init__(self):
        p = self.characteristic
        if p < 0 or p >= 2**31:
            raise ValidationError(f"characteristic {p} out of range")
        if p != 0 and not flint.fmpz(p).is_prime():
            raise ValidationError(f"{p} is not prime")

    @property
    def kind(self) -> str:
        return "Rationals" if self.characteristic == 0 else "PrimeField"

    @property
    def is_prime_field(self) -> bool:
        return self.characteristic != 0

    def __call__(self, x):
        p = self.characteristic
        if p:
            if isinstance(x, Fraction):
                return x.numerator * pow(x.denominator, -1, p) % p
            return int(x) % p
        return Fraction(x)

    def div(self, a, b):
        p = self.characteristic
        if p:
            return a * pow(b, -1, p) % p
        return Fraction(a) / b

    def elements(self):
        if not self.characteristic:
            raise ValidationError("Q is infinite")
        return range(self.characteristic)

    def __str__(self):
        return "QQ" if self.characteristic == 0 else f"GF({self.characteristic})"

    __repr__ = __str__


QQ = BaseField(0)


def GF(p: int) -> BaseField:
    return BaseField(p)


def _fmt_const(c) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return str(c)


class Poly:
    """Dense univariate polynomial in ``t`` over a :class:`BaseField`.

    Immutable; coefficients are read low-to-high via :attr:`coeffs`.
    """

    __slots__ = ("field", "_f", "_coeffs")

    def __init__(self, field: BaseField, coeffs: Iterable = ()):
        self.field = field
        cs = [field(c) for c in coeffs]
        if field.characteristic:
            self._f = flint.nmod_poly(cs, field.characteristic)
        else:
            self._f = flint.fmpq_poly([flint.fmpq(c.numerator, c.denominator) for c in cs])
        self._coeffs = None

    @classmethod
    def _wrap(cls, field, f):
        obj = cls.__new__(cls)
        obj.field = field
        obj._f = f
        obj._coeffs = None
        return obj

    @classmethod
    def zero(cls, field):
        return cls(field)

    @classmethod
    def one(cls, field):
        return cls(field, [1])

    @classmethod
    def const(cls, field, c):
        return cls(field, [c])

    @classmethod
    def gen(cls, field):
        return cls(field, [0, 1])

    @classmethod
    def monomial(cls, field, k, c=1):
        return cls(field, [0] * k + [c])

    def __reduce__(self):
        return (Poly, (self.field, self.coeffs))

    # -- access ---------------------------------------------------------
    @property
    def coeffs(self) -> tuple:
        if self._coeffs is None:
            if self.field.characteristic:
                self._coeffs = tuple(int(c) for c in self._f.coeffs())
            else:
                self._coeffs = tuple(Fraction(int(c.p), int(c.q)) for c in self._f.coeffs())
        return self._coeffs

    @property
    def degree(self) -> int:
        return self._f.degree()

    def is_zero(self) -> bool:
        return self._f.is_zero()

    def __bool__(self):
        return not self._f.is_zero()

    def is_constant(self) -> bool:
        return self._f.degree() <= 0

    @property
    def lc(self):
        if self.is_zero():
            return self.field(0)
        return self.coeffs[-1]

    def __getitem__(self, k):
        cs = self.coeffs
        return cs[k] if 0 <= k < len(cs) else self.field(0)

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.field != self.field:
                raise ValidationError("field mismatch")
            return other._f
        c = self.field(other)
        if self.field.characteristic:
            return flint.nmod_poly([c], self.field.characteristic)
        return flint.fmpq_poly([flint.fmpq(c.numerator, c.denominator)])

    def __add__(self, other):
        return Poly._wrap(self.field, self._f + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Poly._wrap(self.field, self._f - self._coerce(other))

    def __rsub__(self, other):
        return Poly._wrap(self.field, self._coerce(other) - self._f)

    def __neg__(self):
        return Poly._wrap(self.field, -self._f)

    def __mul__(self, other):
        return Poly._wrap(self.field, self._f * self._coerce(other))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        return Poly._wrap(self.field, self._f ** k)

    def __divmod__(self, other):
        b = self._coerce(other)
        if b.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q, r = divmod(self._f, b)
        return Poly._wrap(self.field, q), Poly._wrap(self.field, r)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_div(self, other) -> "Poly":
        q, r = divmod(self, other)
        if not r.is_zero():
            raise NotExactDivision(f"{other} does not divide {self}")
        return q

    def scale(self, c) -> "Poly":
        return self * c

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self * self.field.div(1, self.lc)

    def __call__(self, x):
        """Evaluate at a constant, or compose with a Poly (t -> x)."""
        if isinstance(x, Poly):
            return Poly._wrap(self.field, self._f(x._f))
        acc = self.field(0)
        p = self.field.characteristic
        xv = self.field(x)
        for c in reversed(self.coeffs):
            acc = acc * xv + c
            if p:
                acc %= p
        return acc

    # -- comparisons ----------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.field == other.field and self._f == other._f
        if isinstance(other, (int, Fraction)):
            return self._f == self._coerce(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.field.characteristic, self.coeffs))

    def sort_key(self):
        return (self.degree, tuple(reversed(self.coeffs)))

    # -- printing -------------------------------------------------------
    def __str__(self):
        return format_poly(self, "t")

    def __repr__(self):
        return f"Poly({self})"


def format_poly(f: Poly, var: str = "t") -> str:
    """Render in the expression grammar accepted by :mod:`heightforge.dynparse`."""
    terms = []
    p = f.field.characteristic
    for k in range(len(f.coeffs) - 1, -1, -1):
        c = f.coeffs[k]
        if c == 0:
            continue
        neg = (not p) and c < 0
        a = -c if neg else c
        if k == 0:
            body = _fmt_const(a)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            body = mono if a == 1 else f"{_fmt_const(a)}*{mono}"
        terms.append(("-" if neg else "+", body))
    if not terms:
        return "0"
    out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sgn, body in terms[1:]:
        out += f" {sgn} {body}"
    return out


# ---------------------------------------------------------------------------
# gcd

def _trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def _classical_gcd(field: BaseField, a: Sequence, b: Sequence) -> list:
    """Euclidean remainder sequence on coefficient lists; monic result."""
    p = field.characteristic
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        inv = pow(b[-1], -1, p) if p else 1 / Fraction(b[-1])
        r = list(a)
        db = len(b) - 1
        while len(r) - 1 >= db and r:
            q = r[-1] * inv
            if p:
                q %= p
            shift = len(r) - 1 - db
            for i, bc in enumerate(b):
                v = r[shift + i] - q * bc
                r[shift + i] = v % p if p else v
            _trim(r)
        a, b = b, r
    if not a:
        return []
    inv = pow(a[-1], -1, p) if p else 1 / Fraction(a[-1])
    return [(c * inv) % p if p else c * inv for c in a]


def poly_gcd(a: Poly, b: Poly, threshold: int | None = None) -> Poly:
    """Monic gcd; ``gcd(0, 0) == 0``.

    Inputs whose larger degree is at most ``threshold`` (default
    :data:`GCD_THRESHOLD`) take the classical Euclidean path; larger ones use
    flint's subquadratic gcd.
    """
    field = a.field
    if a.is_zero() and b.is_zero():
        return Poly.zero(field)
    if a.degree == 0 or b.degree == 0:
        return Poly.one(field)
    if a.is_zero():
        return b.monic()
    if b.is_zero():
        return a.monic()
    limit = GCD_THRESHOLD if threshold is None else threshold
    if max(a.degree, b.degree) <= limit:
        return Poly(field, _classical_gcd(field, a.coeffs, b.coeffs))
    return Poly._wrap(field, a._f.gcd(b._f)).monic()


def poly_gcd_many(polys: Iterable[Poly], field: BaseField) -> Poly:
    g = Poly.zero(field)
    for f in sorted(polys, key=lambda f: f.degree):
        g = poly_gcd(g, f)
        if g.degree == 0:
            break
    return g


def _rational_scale(polys: Sequence[Poly]) -> Fraction:
    """r with r*polys having coprime integer coefficients (over Q)."""
    from math import gcd, lcm

    den, num = 1, 0
    for f in polys:
        for c in f.coeffs:
            if c:
                den = lcm(den, c.denominator)
    for f in polys:
        for c in f.coeffs:
            if c:
                num = gcd(num, (c * den).numerator)
    return Fraction(den, num) if num else Fraction(1)


def normalize_vector(polys: Sequence[Poly], lead_index: int | None = None):
    """Canonical representative of a vector of polynomials up to K^* scaling.

    Returns ``(normalized, content)`` with ``polys == content * normalized``
    where normalized entries are coprime over k[t]; over Q they have coprime
    integer coefficients.  The leading t-coefficient of entry ``lead_index``
    (default: first nonzero entry) is positive over Q and 1 over F_p.
    """
    field = polys[0].field
    nz = [i for i, f in enumerate(polys) if not f.is_zero()]
    if not nz:
        raise ZeroForm("all entries are zero")
    g = poly_gcd_many((polys[i] for i in nz), field)
    reduced = [f if g.degree == 0 else f.exact_div(g) for f in polys]
    lead = nz[0] if lead_index is None else lead_index
    if field.characteristic:
        unit = field.div(1, reduced[lead].lc)
    else:
        unit = _rational_scale(reduced)
        if reduced[lead].lc < 0:
            unit = -unit
    normalized = [f * unit for f in reduced]
    content = g * field.div(1, unit)
    return normalized, content


# ---------------------------------------------------------------------------
# rational functions

class RatFunc:
    """Element of k(t) in lowest terms with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None):
        field = num.field
        if den is None:
            den = Poly.one(field)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        g = poly_gcd(num, den)
        if g.degree > 0:
            num, den = num.exact_div(g), den.exact_div(g)
        lc = den.lc
        if lc != 1:
            inv = field.div(1, lc)
            num, den = num * inv, den * inv
        self.num, self.den = num, den

    @property
    def field(self):
        return self.num.field

    def is_zero(self):
        return self.num.is_zero()

    def __add__(self, o):
        o = _as_ratfunc(o, self.field)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, o):
        return self + (-_as_ratfunc(o, self.field))

    def __rsub__(self, o):
        return _as_ratfunc(o, self.field) - self

    def __mul__(self, o):
        o = _as_ratfunc(o, self.field)
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = _as_ratfunc(o, self.field)
        if o.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, o):
        return _as_ratfunc(o, self.field) / self

    def __pow__(self, k: int):
        if k < 0:
            return RatFunc(self.den ** (-k), self.num ** (-k))
        return RatFunc(self.num ** k, self.den ** k)

    def __eq__(self, o):
        if isinstance(o, RatFunc):
            return self.num == o.num and self.den == o.den
        if isinstance(o, (Poly, int, Fraction)):
            return self == _as_ratfunc(o, self.field)
        return NotImplemented

    def __hash__(self):
        return hash((self.num, self.den))

    def __str__(self):
        if self.den.degree == 0:
            return str(self.num)
        return f"({self.num})/({self.den})"

    __repr__ = __str__


def _as_ratfunc(x, field) -> RatFunc:
    if isinstance(x, RatFunc):
        return x
    if isinstance(x, Poly):
        return RatFunc(x)
    return RatFunc(Poly.const(field, x))


# ---------------------------------------------------------------------------
# binary forms

class BinaryForm:
    """A form ``sum_e c_e * v0^e * v1^(deg-e)`` with ``c_e`` in k[t].

    ``coeffs[e]`` is the coefficient of ``v0^e v1^(deg-e)``; the degree is the
    formal (homogeneous) degree ``len(coeffs) - 1``.
    """

    __slots__ = ("field", "coeffs", "vars")

    def __init__(self, field: BaseField, coeffs: Sequence[Poly], vars=("y0", "y1")):
        if not coeffs:
            raise ValidationError("binary form needs at least one coefficient")
        self.field = field
        self.coeffs = tuple(coeffs)
        self.vars = tuple(vars)

    @classmethod
    def from_point(cls, a0: Poly, a1: Poly, vars=("y0", "y1")) -> "BinaryForm":
        """The linear form ``a1*v0 - a0*v1`` vanishing at ``(a0 : a1)``."""
        return cls(a0.field, (-a0, a1), vars)

    @classmethod
    def monomial(cls, field, degree, e, c=None, vars=("y0", "y1")):
        cs = [Poly.zero(field)] * (degree + 1)
        cs[e] = c if c is not None else Poly.one(field)
        return cls(field, cs, vars)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    @property
    def tdegree(self) -> int:
        """Maximal t-degree among the coefficients (-1 for the zero form)."""
        return max(c.degree for c in self.coeffs)

    def with_vars(self, vars) -> "BinaryForm":
        return BinaryForm(self.field, self.coeffs, vars)

    def __add__(self, o: "BinaryForm"):
        if o.degree != self.degree:
            raise ValidationError("adding forms of different degree")
        return BinaryForm(self.field, [a + b for a, b in zip(self.coeffs, o.coeffs)], self.vars)

    def __neg__(self):
        return BinaryForm(self.field, [-c for c in self.coeffs], self.vars)

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        if isinstance(o, BinaryForm):
            out = [Poly.zero(self.field)] * (self.degree + o.degree + 1)
            for i, a in enumerate(self.coeffs):
                if a.is_zero():
                    continue
                for j, b in enumerate(o.coeffs):
                    if not b.is_zero():
                        out[i + j] = out[i + j] + a * b
            return BinaryForm(self.field, out, self.vars)
        return BinaryForm(self.field, [c * o for c in self.coeffs], self.vars)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = BinaryForm(self.field, [Poly.one(self.field)], self.vars)
        for _ in range(k):
            out = out * self
        return out

    def evaluate(self, v0: Poly, v1: Poly) -> Poly:
        """Substitute polynomial values for the two variables."""
        d = self.degree
        pw0 = [Poly.one(self.field)]
        pw1 = [Poly.one(self.field)]
        for _ in range(d):
            pw0.append(pw0[-1] * v0)
            pw1.append(pw1[-1] * v1)
        acc = Poly.zero(self.field)
        for e, c in enumerate(self.coeffs):
            if not c.is_zero():
                acc = acc + c * pw0[e] * pw1[d - e]
        return acc

    def substitute_base(self, u: Poly) -> "BinaryForm":
        return BinaryForm(self.field, [c(u) for c in self.coeffs], self.vars)

    def content(self) -> Poly:
        return primitive_part(self)[1]

    def primitive(self) -> "BinaryForm":
        return primitive_part(self)[0]

    def __eq__(self, o):
        if not isinstance(o, BinaryForm):
            return NotImplemented
        return self.field == o.field and self.coeffs == o.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __str__(self):
        return format_binary_form(self)

    __repr__ = __str__


def _format_coeff_times(c: Poly, mono: str) -> tuple[str, str]:
    """(sign, body) for the term c*mono, c a nonzero polynomial."""
    nz = [k for k, v in enumerate(c.coeffs) if v != 0]
    p = c.field.characteristic
    if len(nz) == 1:
        v = c.coeffs[nz[0]]
        neg = (not p) and v < 0
        a = -v if neg else v
        k = nz[0]
        tpart = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
        parts = [x for x in (_fmt_const(a) if (a != 1 or (not tpart and not mono)) else "", tpart, mono) if x]
        return ("-" if neg else "+"), "*".join(parts)
    inner = format_poly(c)
    return "+", f"({inner})*{mono}" if mono else f"({inner})"


def format_binary_form(f: BinaryForm) -> str:
    v0, v1 = f.vars
    d = f.degree
    terms = []
    for e in range(d, -1, -1):
        c = f.coeffs[e]
        if c.is_zero():
            continue
        mono = "*".join(
            x for x in (
                "" if e == 0 else (v0 if e == 1 else f"{v0}^{e}"),
                "" if d - e == 0 else (v1 if d - e == 1 else f"{v1}^{d - e}"),
            ) if x
        )
        terms.append(_format_coeff_times(c, mono))
    if not terms:
        return "0"
    out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sgn, body in terms[1:]:
        out += f" {sgn} {body}"
    return out


def primitive_part(form: BinaryForm) -> tuple[BinaryForm, Poly]:
    """Split ``form = content * primitive``.

    The primitive form has coprime coefficients over k[t]; over Q they are
    coprime integer polynomials.  Normalization: the coefficient of the
    highest power of the first variable that is nonzero has positive (Q)
    or unit (F_p) leading t-coefficient.  Over Q the content absorbs the
    rational scalar, e.g. ``6 y0^2 + 4 y1^2 -> (3 y0^2 + 2 y1^2, 2)``.
    """
    if form.is_zero():
        raise ZeroForm("primitive part of the zero form")
    lead = max(e for e, c in enumerate(form.coeffs) if not c.is_zero())
    normalized, content = normalize_vector(form.coeffs, lead_index=lead)
    return BinaryForm(form.field, normalized, form.vars), content


# ---------------------------------------------------------------------------
# polynomials in one variable over k[t] (coefficient ring for resultants)

class YPoly:
    """Dense polynomial in ``y`` with coefficients in k[t].

    This is a dehomogenized binary form (second variable set to 1) and is the
    coefficient ring in which resultants of bihomogeneous forms are taken.
    """

    __slots__ = ("field", "c")

    def __init__(self, field, coeffs: Sequence[Poly]):
        self.field = field
        cs = list(coeffs)
        while cs and cs[-1].is_zero():
            cs.pop()
        self.c = cs

    @classmethod
    def const(cls, p: Poly):
        return cls(p.field, [p])

    @classmethod
    def from_form(cls, f: BinaryForm):
        return cls(f.field, f.coeffs)

    def to_form(self, degree: int, vars) -> BinaryForm:
        if len(self.c) > degree + 1:
            raise ValidationError("polynomial exceeds the stated form degree")
        z = Poly.zero(self.field)
        return BinaryForm(self.field, self.c + [z] * (degree + 1 - len(self.c)), vars)

    @property
    def degree(self):
        return len(self.c) - 1

    def __bool__(self):
        return bool(self.c)

    def is_zero(self):
        return not self.c

    def __add__(self, o):
        n = max(len(self.c), len(o.c))
        z = Poly.zero(self.field)
        return YPoly(self.field, [
            (self.c[i] if i < len(self.c) else z) + (o.c[i] if i < len(o.c) else z) for i in range(n)
        ])

    def __neg__(self):
        return YPoly(self.field, [-a for a in self.c])

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, o):
        if isinstance(o, int):
            return YPoly(self.field, [a * o for a in self.c])
        if not self.c or not o.c:
            return YPoly(self.field, [])
        out = [Poly.zero(self.field)] * (len(self.c) + len(o.c) - 1)
        for i, a in enumerate(self.c):
            if a.is_zero():
                continue
            for j, b in enumerate(o.c):
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return YPoly(self.field, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = YPoly(self.field, [Poly.one(self.field)])
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def exact_div(self, d: "YPoly") -> "YPoly":
        if d.is_zero():
            raise ZeroDivisionError("division by zero")
        if len(d.c) == 1:
            return YPoly(self.field, [a.exact_div(d.c[0]) for a in self.c])
        r = list(self.c)
        lead = d.c[-1]
        dq = len(r) - len(d.c)
        if dq < 0:
            if any(not a.is_zero() for a in r):
                raise NotExactDivision("inexact division in k[t][y]")
            return YPoly(self.field, [])
        q = [Poly.zero(self.field)] * (dq + 1)
        for k in range(dq, -1, -1):
            top = r[k + len(d.c) - 1]
            if top.is_zero():
                continue
            qk = top.exact_div(lead)
            q[k] = qk
            for i, dc in enumerate(d.c):
                if not dc.is_zero():
                    r[k + i] = r[k + i] - qk * dc
        if any(not a.is_zero() for a in r):
            raise NotExactDivision("inexact division in k[t][y]")
        return YPoly(self.field, q)

    def __eq__(self, o):
        return isinstance(o, YPoly) and self.c == o.c


# ---------------------------------------------------------------------------
# resultants over an integral domain with exact division
#
# X-polynomials are lists low-to-high of ring elements supporting + - * ** ,
# exact_div and truth testing (nonzero).

def _deg(A) -> int:
    for i in range(len(A) - 1, -1, -1):
        if A[i]:
            return i
    return -1


def _prem(A, B, one):
    da, db = _deg(A), _deg(B)
    lb = B[db]
    R = list(A[: da + 1])
    e = da - db + 1
    while _deg(R) >= db:
        dr = _deg(R)
        top = R[dr]
        shift = dr - db
        R = [lb * r for r in R]
        for i in range(db + 1):
            if B[i]:
                R[shift + i] = R[shift + i] - top * B[i]
        R = R[:dr]
        e -= 1
    if e > 0:
        f = lb ** e
        R = [f * r for r in R]
    return R


def resultant_formal(A, n: int, B, m: int, one, zero):
    """Sylvester resultant of X-polynomials with formal degrees ``n`` and ``m``.

    A formal leading coefficient may vanish (a root at infinity of the
    corresponding binary form); the determinant identities
    ``Res_{n,m} = (-1)^m B_m Res_{n-1,m}`` (when ``A_n = 0``) and
    ``Res_{n,m} = A_n Res_{n,m-1}`` (when ``B_m = 0``) reduce to true degrees.
    """
    A = list(A) + [zero] * (n + 1 - len(A))
    B = list(B) + [zero] * (m + 1 - len(B))
    factor = one
    sign = 1
    while True:
        an = A[n] if n >= 0 else zero
        bm = B[m] if m >= 0 else zero
        if an and bm:
            break
        if not an and not bm:
            return zero
        if not an:
            factor = factor * bm
            if m % 2:
                sign = -sign
            n -= 1
        else:
            factor = factor * an
            m -= 1
        if n < 0 or m < 0:
            return zero
    r = _subresultant(A[: n + 1], B[: m + 1], one, zero)
    r = factor * r
    return r if sign == 1 else -r


def _subresultant(A, B, one, zero):
    """Res(A, B) for nonzero leading coefficients (sub-resultant PRS)."""
    da, db = _deg(A), _deg(B)
    if da == 0:
        return A[0] ** db
    if db == 0:
        return B[0] ** da
    s = 1
    if da < db:
        A, B = B, A
        if da % 2 and db % 2:
            s = -s
    g = h = one
    while True:
        da, db = _deg(A), _deg(B)
        delta = da - db
        if da % 2 and db % 2:
            s = -s
        R = _prem(A, B, one)
        A = B
        if _deg(R) < 0:
            return zero
        div = g * (h ** delta)
        B = [r.exact_div(div) for r in R]
        g = A[_deg(A)]
        if delta == 0:
            pass
        elif delta == 1:
            h = g
        else:
            h = (g ** delta).exact_div(h ** (delta - 1))
        if _deg(B) == 0:
            break
    dA = _deg(A)
    lbB = B[0]
    if dA == 1:
        res = lbB
    else:
        res = (lbB ** dA).exact_div(h ** (dA - 1))
    return res if s == 1 else -res


def form_resultant(a: BinaryForm, b: BinaryForm) -> Poly:
    """Sylvester resultant of two binary forms with coefficients in k[t]."""
    f = a.field
    return resultant_formal(a.coeffs, a.degree, b.coeffs, b.degree, Poly.one(f), Poly.zero(f))


class BihomogeneousForm:
    """``F = sum_{i,e} rows[i].coeffs[e] * X0^i X1^(dx-i) * Y0^e Y1^(dy-e)``.

    ``rows[i]`` is the coefficient of ``X0^i X1^(dx-i)``, a binary form of
    degree ``dy`` in the Y pair.
    """

    __slots__ = ("field", "rows", "xvars", "yvars")

    def __init__(self, field, rows: Sequence[BinaryForm], xvars=("x0", "x1"), yvars=("y0", "y1")):
        if not rows:
            raise ValidationError("empty bihomogeneous form")
        dy = rows[0].degree
        if any(r.degree != dy for r in rows):
            raise ValidationError("rows of unequal Y-degree")
        self.field = field
        self.rows = tuple(r.with_vars(yvars) for r in rows)
        self.xvars = tuple(xvars)
        self.yvars = tuple(yvars)

    @property
    def xdegree(self) -> int:
        return len(self.rows) - 1

    @property
    def ydegree(self) -> int:
        return self.rows[0].degree

    def coeff(self, i: int, e: int) -> Poly:
        return self.rows[i].coeffs[e]

    def is_zero(self) -> bool:
        return all(r.is_zero() for r in self.rows)

    @property
    def tdegree(self) -> int:
        return max(r.tdegree for r in self.rows)

    def all_coeffs(self) -> list[Poly]:
        return [c for r in self.rows for c in r.coeffs]

    def y_coefficient_forms(self) -> list[BinaryForm]:
        """For each Y-monomial index e, its coefficient as a form in the X pair."""
        return [
            BinaryForm(self.field, [self.rows[i].coeffs[e] for i in range(self.xdegree + 1)], self.xvars)
            for e in range(self.ydegree + 1)
        ]

    def x_coefficient_forms(self) -> list[BinaryForm]:
        return list(self.rows)

    def transpose(self) -> "BihomogeneousForm":
        """Swap the roles of the X and Y pairs."""
        rows = [
            BinaryForm(self.field, [self.rows[i].coeffs[e] for i in range(self.xdegree + 1)], self.yvars)
            for e in range(self.ydegree + 1)
        ]
        return BihomogeneousForm(self.field, rows, self.xvars, self.yvars)

    def substitute_base(self, u: Poly) -> "BihomogeneousForm":
        return BihomogeneousForm(self.field, [r.substitute_base(u) for r in self.rows], self.xvars, self.yvars)

    def scale(self, c) -> "BihomogeneousForm":
        return BihomogeneousForm(self.field, [r * c for r in self.rows], self.xvars, self.yvars)

    def __eq__(self, o):
        return isinstance(o, BihomogeneousForm) and self.rows == o.rows

    def __hash__(self):
        return hash(self.rows)

    def __str__(self):
        return format_bihomogeneous(self)


def format_bihomogeneous(F: BihomogeneousForm) -> str:
    x0, x1 = F.xvars
    dx = F.xdegree
    terms = []
    for i in range(dx, -1, -1):
        row = F.rows[i]
        xm = [m for m in ("" if i == 0 else (x0 if i == 1 else f"{x0}^{i}"),
                          "" if dx - i == 0 else (x1 if dx - i == 1 else f"{x1}^{dx - i}")) if m]
        dy = row.degree
        for e in range(dy, -1, -1):
            c = row.coeffs[e]
            if c.is_zero():
                continue
            ym = [m for m in ("" if e == 0 else (F.yvars[0] if e == 1 else f"{F.yvars[0]}^{e}"),
                              "" if dy - e == 0 else (F.yvars[1] if dy - e == 1 else f"{F.yvars[1]}^{dy - e}")) if m]
            terms.append(_format_coeff_times(c, "*".join(ym + xm)))
    if not terms:
        return "0"
    out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sgn, body in terms[1:]:
        out += f" {sgn} {body}"
    return out


def _mpoly_ctx(field: BaseField):
    names = ("x", "y", "t")
    if field.characteristic:
        return flint.nmod_mpoly_ctx.get(names, modulus=field.characteristic)
    return flint.fmpq_mpoly_ctx.get(names)


def _to_flint_coeff(field, c):
    if field.characteristic:
        return int(c)
    return flint.fmpq(c.numerator, c.denominator)


def _mpoly_from_terms(ctx, field, terms):
    """terms: iterable of (x-exponent, y-exponent, Poly in t)."""
    d = {}
    for ex, ey, c in terms:
        for et, v in enumerate(c.coeffs):
            if v:
                d[(ex, ey, et)] = _to_flint_coeff(field, v)
    return ctx.from_dict(d)


def _ypart_mpoly(ctx, field, form: BinaryForm, ex=0):
    return _mpoly_from_terms(ctx, field, ((ex, e, c) for e, c in enumerate(form.coeffs) if not c.is_zero()))


def binary_resultant(g: BinaryForm, f: BihomogeneousForm) -> BinaryForm:
    """``Res_X(g, f)`` as a form of degree ``deg g * deg_Y f`` in the Y pair.

    ``g`` is a form in the X pair over k[t]; ``f`` is bihomogeneous.  If the
    roots of ``g`` are ``(a_i : b_i)`` this equals, up to a constant,
    ``prod_i f(a_i, b_i; Y)``.  Not primitivized.

    Computed on the dehomogenization ``X1 = Y1 = 1`` with flint's
    multivariate resultant; vanishing formal leading coefficients are
    handled as in :func:`resultant_formal`.
    """
    field = g.field
    ctx = _mpoly_ctx(field)
    n, m = g.degree, f.xdegree
    factor = ctx.from_dict({(0, 0, 0): 1})
    sign = 1
    gc = list(g.coeffs)
    rows = list(f.rows)
    while True:
        an = not gc[n].is_zero() if n >= 0 else False
        bm = not rows[m].is_zero() if m >= 0 else False
        if an and bm:
            break
        if (not an and not bm) or n < 0 or m < 0:
            raise DegenerateResultant("resultant vanishes identically: g shares an X-factor with f")
        if not an:
            factor = factor * _ypart_mpoly(ctx, field, rows[m])
            if m % 2:
                sign = -sign
            n -= 1
        else:
            factor = factor * _mpoly_from_terms(ctx, field, [(0, 0, gc[n])])
            m -= 1
    if n == 0 or m == 0:
        # resultant with a constant is a power of it
        if n == 0:
            core = _mpoly_from_terms(ctx, field, [(0, 0, gc[0])]) ** m
        else:
            core = _ypart_mpoly(ctx, field, rows[0]) ** n
    else:
        A = _mpoly_from_terms(ctx, field, ((i, 0, c) for i, c in enumerate(gc[: n + 1]) if not c.is_zero()))
        B = sum((_ypart_mpoly(ctx, field, rows[i], ex=i) for i in range(m + 1)), ctx.from_dict({}))
        core = A.resultant(B, "x")
    r = core * factor
    if sign < 0:
        r = -r
    if r.is_zero():
        raise DegenerateResultant("resultant vanishes identically: g shares an X-factor with f")
    D = g.degree * f.ydegree
    buckets = [dict() for _ in range(D + 1)]
    for (ex, ey, et), v in r.to_dict().items():
        if ex or ey > D:
            raise ValidationError("resultant left the expected ring")
        buckets[ey][et] = v
    coeffs = []
    for b in buckets:
        if not b:
            coeffs.append(Poly.zero(field))
            continue
        top = max(b)
        vals = [0] * (top + 1)
        for et, v in b.items():
            vals[et] = int(v) if field.characteristic else Fraction(int(v.p), int(v.q))
        coeffs.append(Poly(field, vals))
    return BinaryForm(field, coeffs, f.yvars)


def binary_resultant_prs(g: BinaryForm, f: BihomogeneousForm) -> BinaryForm:
    """Same as :func:`binary_resultant` via a sub-resultant PRS in pure Python."""
    field = g.field
    n, m = g.degree, f.xdegree
    one = YPoly(field, [Poly.one(field)])
    zero = YPoly(field, [])
    A = [YPoly.const(c) for c in g.coeffs]
    B = [YPoly.from_form(r) for r in f.rows]
    r = resultant_formal(A, n, B, m, one, zero)
    if r.is_zero():
        raise DegenerateResultant("resultant vanishes identically: g shares an X-factor with f")
    return r.to_form(n * f.ydegree, f.yvars)


def form_gcd(a: BinaryForm, b: BinaryForm) -> BinaryForm:
    """Greatest common divisor of two binary forms over k[t], primitive.

    The v1-power part is handled by multiplicity; the remaining part by a
    primitive remainder sequence in k[t][x] (x = v0/v1).
    """
    field = a.field
    if a.is_zero():
        return b.primitive() if not b.is_zero() else b
    if b.is_zero():
        return a.primitive()

    def split(f):
        # f = v1^k * f' with f' having nonzero v0^deg' coefficient... we strip
        # the top zero coefficients: they correspond to v1 factors.
        top = max(e for e, c in enumerate(f.coeffs) if not c.is_zero())
        return f.degree - top, list(f.coeffs[: top + 1])

    ka, A = split(a)
    kb, B = split(b)
    k = min(ka, kb)

    def prim(P):
        g = poly_gcd_many([c for c in P if not c.is_zero()], field)
        return [c.exact_div(g) for c in P]

    A, B = prim(A), prim(B)
    if _deg(A) < _deg(B):
        A, B = B, A
    while _deg(B) > 0:
        R = _prem(A, B, Poly.one(field))
        A = B
        if _deg(R) < 0:
            B = None
            break
        B = prim(R[: _deg(R) + 1])
    if B is not None:
        # last remainder is a nonzero constant: coprime apart from v1 powers
        G = [Poly.one(field)]
    else:
        G = A
    dg = len(G) - 1
    coeffs = list(G) + [Poly.zero(field)] * k
    # G has x-degree dg; homogenize to total degree dg + k (v1^k factor gives top zeros)
    return primitive_part(BinaryForm(field, coeffs, a.vars))[0] if dg + k > 0 else BinaryForm(field, [Poly.one(field)], a.vars)


def form_exact_div(a: BinaryForm, d: BinaryForm) -> BinaryForm:
    """Divide binary forms exactly over k[t]."""
    q = YPoly.from_form(a).exact_div(YPoly.from_form(d))
    return q.to_form(a.degree - d.degree, a.vars)


def substitute_base(x, u: Poly):
    """Replace t by u(t) in a Poly, RatFunc, BinaryForm or BihomogeneousForm."""
    if u.degree < 1:
        raise ConstantSubstitution("substitution t -> u(t) needs nonconstant u")
    if isinstance(x, Poly):
        return x(u)
    if isinstance(x, RatFunc):
        return RatFunc(x.num(u), x.den(u))
    if isinstance(x, (BinaryForm, BihomogeneousForm)):
        return x.substitute_base(u)
    if hasattr(x, "substitute_base"):
        return x.substitute_base(u)
    raise TypeError(f"cannot substitute into {type(x).__name__}")


# ---------------------------------------------------------------------------
# determinants over k[t]

def bareiss_det(M: Sequence[Sequence[Poly]], field: BaseField) -> Poly:
    """Fraction-free Gaussian elimination; exact over k[t]."""
    n = len(M)
    if n == 0:
        return Poly.one(field)
    A = [list(row) for row in M]
    sign = 1
    prev = Poly.one(field)
    for k in range(n - 1):
        if A[k][k].is_zero():
            for i in range(k + 1, n):
                if not A[i][k].is_zero():
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return Poly.zero(field)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]).exact_div(prev)
        prev = A[k][k]
    d = A[n - 1][n - 1]
    return d if sign == 1 else -d


def resultant_cofactors(a: BinaryForm, b: BinaryForm):
    """Cofactor forms for ``U*a + V*b = R * v0^(2d-1)`` and ``= R * v1^(2d-1)``.

    ``a`` and ``b`` have the same degree ``d >= 1``; ``R`` is the determinant
    of the linear map ``(U, V) -> U*a + V*b`` on forms of degree ``d-1``.
    Returns ``(R, [(U0, V0), (U1, V1)])`` where pair 0 targets ``v0^(2d-1)``
    and pair 1 targets ``v1^(2d-1)``.  Entries come from adjugate columns, so
    they are forms over k[t] even when ``R`` is not a unit.
    """
    field = a.field
    d = a.degree
    if b.degree != d or d < 1:
        raise ValidationError("cofactors need two forms of the same positive degree")
    N = 2 * d
    z = Poly.zero(field)
    # column c < d: v0^c * v1^(d-1-c) * a ; column d + c: same times b
    S = [[z] * N for _ in range(N)]
    for c in range(d):
        for e in range(d + 1):
            S[c + e][c] = a.coeffs[e]
            S[c + e][d + c] = b.coeffs[e]
    R = bareiss_det(S, field)

    def cofactor_column(row):
        # solution of S z = R e_row is the row-th column of adj(S)
        sol = []
        for col in range(N):
            minor = [[S[i][j] for j in range(N) if j != col] for i in range(N) if i != row]
            m = bareiss_det(minor, field) if minor else Poly.one(field)
            sol.append(m if (row + col) % 2 == 0 else -m)
        U = BinaryForm(field, sol[:d], a.vars)
        V = BinaryForm(field, sol[d:], a.vars)
        return U, V

    return R, [cofactor_column(N - 1), cofactor_column(0)]
