"""Points of products of projective spaces over k(t), Weil heights, morphisms.

Ambient spaces are a single P^n or a product of copies of P^1.  On a product
of P^1's a morphism is a *block* map: every output factor reads exactly one
source factor (or none, for constant outputs).  For such outputs a nonzero
binary resultant of the two coordinate forms certifies that the output has
no base points, and the resultant cofactors give an explicit bound on how
far the Weil height can move.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import flint

from .algebra import (
    BaseField,
    BinaryForm,
    Poly,
    RatFunc,
    form_exact_div,
    form_gcd,
    form_resultant,
    normalize_vector,
    poly_gcd,
    resultant_cofactors,
)
from .errors import (
    AllZeroCoordinates,
    ConstantSubstitution,
    IndeterminatePoint,
    MixedBlockUnsupported,
    SpaceMismatch,
    UnsupportedSpace,
    ValidationError,
    WrongArity,
)


@dataclass(frozen=True)
class Space:
    """Product P^{n_1} x ... x P^{n_k}; only P^n or (P^1)^k are supported."""

    dims: tuple[int, ...]

    def __post_init__(self):
        if not self.dims or any(n < 1 for n in self.dims):
            raise UnsupportedSpace(f"bad space {self.dims}")
        if len(self.dims) > 1 and any(n != 1 for n in self.dims):
            raise UnsupportedSpace("products must consist of P1 factors")

    @classmethod
    def parse(cls, text: str) -> "Space":
        parts = text.replace("×", "x").replace(" ", "").split("x")
        dims = []
        for p in parts:
            if len(p) < 2 or p[0] not in "Pp" or not p[1:].isdigit():
                raise UnsupportedSpace(f"cannot read space {text!r}")
            dims.append(int(p[1:]))
        return cls(tuple(dims))

    @property
    def rank(self) -> int:
        """Rank of the Neron-Severi group: one hyperplane class per factor."""
        return len(self.dims)

    @property
    def is_p1_product(self) -> bool:
        return all(n == 1 for n in self.dims)

    def var_names(self, i: int) -> tuple[str, ...]:
        """Canonical coordinate names of factor ``i`` (0-based)."""
        n = self.dims[i]
        if len(self.dims) == 1:
            return tuple(f"x{j}" for j in range(n + 1))
        if len(self.dims) == 2:
            return ("x0", "x1") if i == 0 else ("y0", "y1")
        return tuple(f"x{i + 1}_{j}" for j in range(n + 1))

    def __str__(self):
        return "x".join(f"P{n}" for n in self.dims)


def pairing(h: Sequence, e: Sequence) -> Fraction:
    """``h_0(a, e) = sum_i e_i h_i(a)`` for an NS vector ``e``."""
    return sum((Fraction(x) * Fraction(y) for x, y in zip(h, e)), Fraction(0))


def _clear_denominators(coords):
    if all(isinstance(c, Poly) for c in coords):
        return list(coords)
    field = next(c.field for c in coords)
    den = Poly.one(field)
    for c in coords:
        if isinstance(c, RatFunc):
            g = poly_gcd(den, c.den)
            den = den * c.den.exact_div(g)
    out = []
    for c in coords:
        if isinstance(c, RatFunc):
            out.append(c.num * den.exact_div(c.den))
        else:
            out.append(c * den)
    return out


def normalize_coords(coords, divisor_hint: Poly | None = None) -> tuple[Poly, ...]:
    """Coprime canonical representative of a projective tuple.

    Over Q the coordinates get coprime integer coefficients and the first
    nonzero coordinate has positive leading coefficient; over F_p that
    coordinate is monic.  ``divisor_hint`` is a polynomial known to be
    divisible by the gcd of the coordinates (saves a full gcd).
    """
    coords = _clear_denominators(coords)
    if all(c.is_zero() for c in coords):
        raise AllZeroCoordinates("all coordinates are zero")
    if divisor_hint is not None and divisor_hint.degree == 0:
        field = coords[0].field
        lead = next(c for c in coords if not c.is_zero())
        if field.characteristic:
            unit = field.div(1, lead.lc)
            return tuple(c * unit for c in coords)
        from .algebra import _rational_scale

        unit = _rational_scale(coords)
        if lead.lc < 0:
            unit = -unit
        return tuple(c * unit for c in coords)
    if divisor_hint is not None:
        g = divisor_hint
        for c in coords:
            if g.degree <= 0:
                break
            g = poly_gcd(g, c)
        if g.degree > 0:
            coords = [c.exact_div(g) for c in coords]
        return normalize_coords(coords, Poly.one(coords[0].field))
    return tuple(normalize_vector(coords)[0])


class MultiPoint:
    """A point of ``space`` over k(t), coordinates coprime per factor."""

    __slots__ = ("space", "field", "factors", "_h")

    def __init__(self, space: Space, factors, *, normalized: bool = False):
        if len(factors) != len(space.dims):
            raise WrongArity(f"expected {len(space.dims)} factors, got {len(factors)}")
        fs = []
        for n, coords in zip(space.dims, factors):
            if len(coords) != n + 1:
                raise WrongArity(f"factor P{n} needs {n + 1} coordinates, got {len(coords)}")
            fs.append(tuple(coords) if normalized else normalize_coords(coords))
        self.space = space
        self.factors = tuple(fs)
        self.field = self.factors[0][0].field
        self._h = None

    def height(self) -> tuple[int, ...]:
        """Per-factor Weil height: max t-degree of the coprime coordinates."""
        if self._h is None:
            self._h = tuple(max(max(c.degree for c in f), 0) for f in self.factors)
        return self._h

    def substitute_base(self, u: Poly) -> "MultiPoint":
        if u.degree < 1:
            raise ConstantSubstitution("substitution needs nonconstant u")
        # coprimality survives t -> u(t) (Bezout identities substitute)
        return MultiPoint(
            self.space,
            [normalize_coords([c(u) for c in f], Poly.one(self.field)) for f in self.factors],
            normalized=True,
        )

    def __eq__(self, other):
        return isinstance(other, MultiPoint) and self.factors == other.factors

    def __hash__(self):
        return hash(self.factors)

    def __str__(self):
        return ", ".join("[" + " : ".join(str(c) for c in f) + "]" for f in self.factors)

    def __repr__(self):
        return f"MultiPoint({self})"


# ---------------------------------------------------------------------------
# forms on a single P^n (n >= 2) as flint multivariate polynomials

def _mctx(field: BaseField, nvars: int):
    names = tuple(f"x{j}" for j in range(nvars)) + ("t",)
    if field.characteristic:
        return flint.nmod_mpoly_ctx.get(names, modulus=field.characteristic)
    return flint.fmpq_mpoly_ctx.get(names)


class MForm:
    """Homogeneous form in ``nvars`` coordinates with coefficients in k[t]."""

    __slots__ = ("field", "nvars", "p")

    def __init__(self, field: BaseField, nvars: int, p):
        self.field = field
        self.nvars = nvars
        self.p = p

    @classmethod
    def from_terms(cls, field, nvars, terms: dict):
        """``terms`` maps exponent tuples (length nvars) to Poly coefficients."""
        ctx = _mctx(field, nvars)
        d = {}
        for exps, c in terms.items():
            for et, v in enumerate(c.coeffs):
                if v:
                    d[tuple(exps) + (et,)] = int(v) if field.characteristic else flint.fmpq(v.numerator, v.denominator)
        return cls(field, nvars, ctx.from_dict(d))

    def terms(self) -> dict:
        grouped: dict[tuple, dict] = {}
        for k, v in self.p.to_dict().items():
            grouped.setdefault(k[:-1], {})[k[-1]] = v
        out = {}
        for exps, b in grouped.items():
            vals = [0] * (max(b) + 1)
            for et, v in b.items():
                vals[et] = int(v) if self.field.characteristic else Fraction(int(v.p), int(v.q))
            out[exps] = Poly(self.field, vals)
        return out

    def is_zero(self):
        return self.p.is_zero()

    @property
    def degree(self) -> int:
        ds = {sum(k[:-1]) for k in self.p.to_dict()}
        if len(ds) > 1:
            raise ValidationError("form is not homogeneous")
        return ds.pop() if ds else 0

    @property
    def tdegree(self) -> int:
        return max((k[-1] for k in self.p.to_dict()), default=-1)

    def _tpoly(self, c: Poly):
        ctx = self.p.context()
        d = {}
        for et, v in enumerate(c.coeffs):
            if v:
                d[(0,) * self.nvars + (et,)] = int(v) if self.field.characteristic else flint.fmpq(v.numerator, v.denominator)
        return ctx.from_dict(d)

    def evaluate(self, coords: Sequence[Poly]) -> Poly:
        ctx = self.p.context()
        args = [self._tpoly(c) for c in coords] + [ctx.gens()[-1]]
        r = self.p.compose(*args)
        return self._to_tpoly(r)

    def _to_tpoly(self, r) -> Poly:
        d = r.to_dict()
        if not d:
            return Poly.zero(self.field)
        top = max(k[-1] for k in d)
        vals = [0] * (top + 1)
        for k, v in d.items():
            vals[k[-1]] = int(v) if self.field.characteristic else Fraction(int(v.p), int(v.q))
        return Poly(self.field, vals)

    def compose(self, forms: Sequence["MForm"]) -> "MForm":
        ctx = self.p.context()
        return MForm(self.field, self.nvars, self.p.compose(*[f.p for f in forms], ctx.gens()[-1]))

    def substitute_base(self, u: Poly) -> "MForm":
        ctx = self.p.context()
        return MForm(self.field, self.nvars, self.p.compose(*ctx.gens()[:-1], self._tpoly(u)))

    def __eq__(self, o):
        return isinstance(o, MForm) and self.p == o.p

    def __hash__(self):
        return hash(str(self.p))


def _mform_normalize(forms: list[MForm]) -> list[MForm]:
    """Remove the common factor (including t-content) from a tuple of forms."""
    g = None
    for f in forms:
        if f.is_zero():
            continue
        g = f.p if g is None else g.gcd(f.p)
    if g is None:
        raise ValidationError("output is identically zero")
    out = [MForm(f.field, f.nvars, f.p if f.is_zero() else f.p / g) for f in forms]
    # unit normalization, first nonzero form
    lead = next(f for f in out if not f.is_zero())
    field = lead.field
    lc = lead.p.leading_coefficient()
    if field.characteristic:
        inv = pow(int(lc), -1, field.characteristic)
        return [MForm(f.field, f.nvars, f.p * inv) for f in out]
    from math import gcd, lcm

    den, num = 1, 0
    for f in out:
        for v in f.p.to_dict().values():
            den = lcm(den, int(v.q))
    for f in out:
        for v in f.p.to_dict().values():
            num = gcd(num, int(v.p * den))
    scale = flint.fmpq(den, num)
    if lc < 0:
        scale = -scale
    return [MForm(f.field, f.nvars, f.p * scale) for f in out]


# ---------------------------------------------------------------------------
# morphisms

@dataclass
class OutputFactor:
    """One output factor of a morphism.

    ``forms`` are BinaryForms in the source pair (P^1 outputs) or MForms
    (single P^n).  ``src`` is the source factor read, or None when the
    output is constant (degree 0).
    """

    src: int | None
    degree: int
    forms: tuple

    @cached_property
    def tdegree(self) -> int:
        return max(f.tdegree for f in self.forms)

    @cached_property
    def resultant(self) -> Poly | None:
        if len(self.forms) != 2 or self.degree == 0:
            return None
        return form_resultant(self.forms[0], self.forms[1])

    @cached_property
    def drift(self) -> int | None:
        """Bound on ``|h(out) - degree * h(src)|``; None if not certifiable."""
        if self.degree == 0:
            if isinstance(self.forms[0], BinaryForm):
                return max(f.coeffs[0].degree for f in self.forms)
            return None
        if len(self.forms) != 2 or self.resultant.is_zero():
            return None
        _, pairs = resultant_cofactors(self.forms[0], self.forms[1])
        cu = max(max(U.tdegree, V.tdegree) for U, V in pairs)
        return max(self.tdegree, cu)


def _binary_normalize(forms: list[BinaryForm]) -> list[BinaryForm]:
    """Divide a pair of binary forms by their common factor, then make the
    joint coefficient vector primitive and unit-normalized."""
    g = None
    for f in forms:
        if f.is_zero():
            continue
        g = f if g is None else form_gcd(g, f)
    if g is None:
        raise ValidationError("output is identically zero")
    if g.degree > 0:
        nd = forms[0].degree - g.degree
        forms = [
            BinaryForm(f.field, [Poly.zero(f.field)] * (nd + 1), f.vars) if f.is_zero() else form_exact_div(f, g)
            for f in forms
        ]
    flat = [c for f in forms for c in f.coeffs]
    lead = 0
    # lead on the highest first-variable power of the first nonzero form
    for k, f in enumerate(forms):
        if not f.is_zero():
            e = max(e for e, c in enumerate(f.coeffs) if not c.is_zero())
            lead = sum(len(x.coeffs) for x in forms[:k]) + e
            break
    normalized, _ = normalize_vector(flat, lead_index=lead)
    out, pos = [], 0
    for f in forms:
        n = len(f.coeffs)
        out.append(BinaryForm(f.field, normalized[pos: pos + n], f.vars))
        pos += n
    return out


class MorphismSpec:
    """A self-map of ``space`` given by per-factor coordinate forms.

    ``outputs[j]`` describes output factor ``j``.  The multidegree matrix
    has ``M[i][j]`` = degree of output ``j`` in source factor ``i``, so the
    height vector transforms as ``h(phi a) ~ M^T h(a)`` and the NS vector
    ``e`` pulls back to ``M e``.
    """

    kind = "morphism"

    def __init__(self, field: BaseField, space: Space, outputs: Sequence[OutputFactor]):
        self.field = field
        self.space = space
        self.outputs = tuple(outputs)
        if len(self.outputs) != len(space.dims):
            raise SpaceMismatch("one output per factor is required")

    # -- construction ---------------------------------------------------
    @classmethod
    def from_forms(cls, field: BaseField, space: Space, outputs: Sequence[Sequence],
                   reduce: bool = False) -> "MorphismSpec":
        """Build from raw forms.

        For P^1-products each output is a pair ``(src, (A, B))`` of binary
        forms in the source pair (``src`` None when both are constants);
        for a single P^n it is a tuple of MForms.  With ``reduce`` the common
        factor of each output tuple is divided out (used by composition);
        otherwise the forms are kept as written, so base points stay visible.
        """
        outs = []
        if len(space.dims) == 1 and space.dims[0] >= 2:
            forms = list(outputs[0])
            if reduce:
                forms = _mform_normalize(forms)
            elif all(f.is_zero() for f in forms):
                raise ValidationError("output is identically zero")
            if len(forms) != space.dims[0] + 1:
                raise WrongArity("wrong number of coordinates")
            degs = {f.degree for f in forms if not f.is_zero()}
            if len(degs) != 1:
                from .errors import InhomogeneousForm

                raise InhomogeneousForm("coordinates have different degrees")
            outs.append(OutputFactor(0, degs.pop(), tuple(forms)))
            return cls(field, space, outs)
        for j, (src, pair) in enumerate(outputs):
            if len(pair) != 2:
                raise WrongArity(f"output {j + 1} needs 2 coordinates")
            pair = list(pair)
            if all(f.is_zero() for f in pair):
                raise ValidationError(f"output {j + 1} is identically zero")
            if pair[0].degree != pair[1].degree:
                from .errors import InhomogeneousForm

                raise InhomogeneousForm(f"output {j + 1} coordinates have different degrees")
            if reduce:
                pair = _binary_normalize(pair)
            deg = pair[0].degree
            if deg == 0:
                src = None
            outs.append(OutputFactor(src, deg, tuple(pair)))
        return cls(field, space, outs)

    # -- invariants -----------------------------------------------------
    @property
    def is_block(self) -> bool:
        return self.space.is_p1_product

    @cached_property
    def multidegree_matrix(self) -> list[list[int]]:
        k = self.space.rank
        M = [[0] * k for _ in range(k)]
        for j, out in enumerate(self.outputs):
            if out.src is not None:
                M[out.src][j] = int(out.degree)
        return M

    @property
    def block_map(self) -> tuple:
        return tuple(o.src for o in self.outputs)

    @cached_property
    def certified(self) -> bool:
        """True when every output is base-point free (nonzero resultants)."""
        if not self.is_block:
            return False
        return all(o.degree == 0 or not o.resultant.is_zero() for o in self.outputs)

    @property
    def mode(self) -> str:
        return "morphism" if self.certified else "rational-map"

    @cached_property
    def drift_constants(self) -> list[int] | None:
        """Per output factor ``C_j`` with ``|h_j(phi a) - deg_j h_src(a)| <= C_j``.

        None when the system is not certified (no rigorous constant).
        """
        if not self.certified:
            return None
        return [o.drift for o in self.outputs]

    @property
    def coefficient_degree(self) -> int:
        return max(o.tdegree for o in self.outputs)

    @property
    def topological_degree(self) -> int:
        """Product of per-factor degrees (block maps) or deg^n on P^n."""
        if self.is_block:
            d = 1
            for o in self.outputs:
                d *= o.degree
            return d
        return self.outputs[0].degree ** self.space.dims[0]

    # -- evaluation -----------------------------------------------------
    def apply(self, a: MultiPoint) -> MultiPoint:
        if a.space != self.space:
            raise SpaceMismatch(f"point lives on {a.space}, map on {self.space}")
        out = []
        for j, o in enumerate(self.outputs):
            if o.src is None and isinstance(o.forms[0], BinaryForm):
                vals = [f.coeffs[0] for f in o.forms]
                hint = None
            elif isinstance(o.forms[0], BinaryForm):
                a0, a1 = a.factors[o.src]
                vals = [_eval_binary(f, a0, a1) for f in o.forms]
                hint = o.resultant if self.certified else None
            else:
                vals = [f.evaluate(a.factors[0]) for f in o.forms]
                hint = None
            if all(v.is_zero() for v in vals):
                raise IndeterminatePoint(f"output {j + 1} vanishes at {a}")
            out.append(normalize_coords(vals, hint))
        return MultiPoint(self.space, out, normalized=True)

    def orbit(self, a: MultiPoint, steps: int):
        pts = [a]
        for _ in range(steps):
            pts.append(self.apply(pts[-1]))
        return pts

    # -- composition ----------------------------------------------------
    def compose(self, phi: "MorphismSpec") -> "MorphismSpec":
        """``self o phi`` (apply ``phi`` first)."""
        psi = self
        if psi.space != phi.space:
            raise SpaceMismatch("spaces differ")
        if not psi.is_block:
            forms = [f.compose(phi.outputs[0].forms) for f in psi.outputs[0].forms]
            return MorphismSpec.from_forms(self.field, self.space, [forms], reduce=True)
        outs = []
        for o in psi.outputs:
            if o.src is None:
                outs.append((None, o.forms))
                continue
            inner = phi.outputs[o.src]
            if inner.src is None:
                c0, c1 = inner.forms[0].coeffs[0], inner.forms[1].coeffs[0]
                vals = [_eval_binary(f, c0, c1) for f in o.forms]
                vars_ = o.forms[0].vars
                outs.append((None, [BinaryForm(self.field, [v], vars_) for v in vals]))
                continue
            A, B = inner.forms
            comp = [_compose_binary(f, A, B) for f in o.forms]
            outs.append((inner.src, comp))
        return MorphismSpec.from_forms(self.field, self.space, outs, reduce=True)

    def iterate(self, m: int) -> "MorphismSpec":
        if m < 1:
            raise ValueError("need m >= 1")
        out = self
        for _ in range(m - 1):
            out = self.compose(out)
        return out

    def substitute_base(self, u: Poly) -> "MorphismSpec":
        if u.degree < 1:
            raise ConstantSubstitution("substitution needs nonconstant u")
        if not self.is_block:
            return MorphismSpec(self.field, self.space, [
                OutputFactor(0, self.outputs[0].degree, tuple(f.substitute_base(u) for f in self.outputs[0].forms))
            ])
        outs = []
        for o in self.outputs:
            outs.append((o.src, [f.substitute_base(u) for f in o.forms]))
        return MorphismSpec.from_forms(self.field, self.space, outs)

    def _scaled_key(self):
        """Forms of each output divided by their joint content (k(t)^* scaling)."""
        key = []
        for o in self.outputs:
            if isinstance(o.forms[0], BinaryForm):
                flat = [c for f in o.forms for c in f.coeffs]
                key.append((o.src, tuple(normalize_vector(flat)[0])))
            else:
                key.append((o.src, tuple(str(f.p) for f in _mform_normalize(list(o.forms)))))
        return tuple(key)

    def __eq__(self, other):
        """Equal as tuples of forms up to a common factor in k(t)^* per output."""
        if not isinstance(other, MorphismSpec):
            return NotImplemented
        return (self.field, self.space) == (other.field, other.space) and self._scaled_key() == other._scaled_key()

    def __hash__(self):
        return hash((self.field, self.space, self._scaled_key()))


def _eval_binary(f: BinaryForm, a0: Poly, a1: Poly) -> Poly:
    nz = [e for e, c in enumerate(f.coeffs) if not c.is_zero()]
    d = f.degree
    if len(nz) == 1:
        e = nz[0]
        r = f.coeffs[e]
        if e:
            r = r * a0 ** e
        if d - e:
            r = r * a1 ** (d - e)
        return r
    return f.evaluate(a0, a1)


def _compose_binary(f: BinaryForm, A: BinaryForm, B: BinaryForm) -> BinaryForm:
    """``f(A, B)`` for binary forms ``A, B`` of equal degree."""
    d = f.degree
    out = None
    for e, c in enumerate(f.coeffs):
        if c.is_zero():
            continue
        term = (A ** e) * (B ** (d - e)) * c
        out = term if out is None else out + term
    if out is None:
        return BinaryForm(f.field, [Poly.zero(f.field)] * (d * A.degree + 1), A.vars)
    return out.with_vars(A.vars)


def identity_map(field: BaseField, space: Space) -> MorphismSpec:
    one, zero = Poly.one(field), Poly.zero(field)
    if not space.is_p1_product:
        n = space.dims[0] + 1
        forms = [MForm.from_terms(field, n, {tuple(int(i == j) for i in range(n)): one}) for j in range(n)]
        return MorphismSpec.from_forms(field, space, [forms])
    outs = []
    for i in range(space.rank):
        v = space.var_names(i)
        outs.append((i, [BinaryForm(field, [zero, one], v), BinaryForm(field, [one, zero], v)]))
    return MorphismSpec.from_forms(field, space, outs)
