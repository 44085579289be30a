"""Correspondences on P^1 over k(t) and their action on effective 0-cycles.

A correspondence is a curve ``F(X; Y) = 0`` in P^1 x P^1.  A 0-cycle is a
primitive binary form in the Y pair whose roots are the points of the
cycle; pushing it forward is a resultant in the X pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property
from itertools import combinations

from .algebra import (
    BaseField,
    BihomogeneousForm,
    BinaryForm,
    Poly,
    binary_resultant,
    form_gcd,
    form_resultant,
    normalize_vector,
    primitive_part,
    resultant_cofactors,
)
from .errors import InvalidCorrespondence, ZeroForm
from .projective import MorphismSpec, MultiPoint, Space

XV = ("x0", "x1")
YV = ("y0", "y1")


@dataclass(frozen=True, eq=False)
class ZeroCycle:
    """Effective 0-cycle on P^1 as a primitive binary form in (y0, y1).

    ``content`` is the factor removed by the last primitivization, kept for
    bookkeeping only (not part of equality).
    """

    form: BinaryForm
    content: Poly | None = dc_field(default=None, compare=False)

    @classmethod
    def make(cls, form: BinaryForm) -> "ZeroCycle":
        prim, content = primitive_part(form.with_vars(YV))
        return cls(prim, content)

    @classmethod
    def from_point(cls, a0: Poly, a1: Poly) -> "ZeroCycle":
        return cls.make(BinaryForm.from_point(a0, a1, YV))

    @property
    def degree(self) -> int:
        return self.form.degree

    def height(self) -> Fraction:
        return cycle_height(self)

    def substitute_base(self, u: Poly) -> "ZeroCycle":
        return ZeroCycle.make(self.form.substitute_base(u))

    def __eq__(self, other):
        return isinstance(other, ZeroCycle) and self.form == other.form

    def __hash__(self):
        return hash(self.form)

    def __str__(self):
        return str(self.form)


def cycle_height(c: ZeroCycle) -> Fraction:
    """``deg_t(form) / degree``: the average Weil height of the points."""
    return Fraction(max(c.form.tdegree, 0), c.form.degree)


class Correspondence:
    """Curve ``F = 0`` in P^1 x P^1 with both projections finite.

    ``dprime`` is the X-degree (degree of the second projection) and ``d``
    the Y-degree (degree of the first projection).
    """

    kind = "correspondence"

    def __init__(self, F: BihomogeneousForm):
        if F.is_zero():
            raise InvalidCorrespondence("F is identically zero")
        flat = F.all_coeffs()
        lead = _lead_index(F)
        normalized, _ = normalize_vector(flat, lead_index=lead)
        rows, pos = [], 0
        dy = F.ydegree
        for r in F.rows:
            rows.append(BinaryForm(F.field, normalized[pos: pos + dy + 1], YV))
            pos += dy + 1
        self.F = BihomogeneousForm(F.field, rows, XV, YV)
        self.field: BaseField = F.field
        self.space = Space((1,))
        self._validate()

    def _validate(self):
        F = self.F
        if F.xdegree < 1 or F.ydegree < 1:
            raise InvalidCorrespondence("F must involve both variable pairs")
        # a factor free of X divides every X-coefficient (row) form
        g = None
        for r in F.rows:
            if not r.is_zero():
                g = r if g is None else form_gcd(g, r)
        if g.degree > 0:
            raise InvalidCorrespondence(f"F has a factor free of the X pair: {g}")
        g = None
        for c in F.y_coefficient_forms():
            if not c.is_zero():
                g = c if g is None else form_gcd(g, c)
        if g.degree > 0:
            raise InvalidCorrespondence(f"F has a factor free of the Y pair: {g}")

    @classmethod
    def graph(cls, phi: MorphismSpec) -> "Correspondence":
        """``Y1*A(X) - Y0*B(X)`` for a morphism ``x -> (A : B)`` of P^1."""
        if phi.space != Space((1,)):
            raise InvalidCorrespondence("graph needs a self-map of P1")
        A, B = phi.outputs[0].forms
        rows = [BinaryForm(phi.field, [a, -b], YV) for a, b in zip(A.coeffs, B.coeffs)]
        return cls(BihomogeneousForm(phi.field, rows, XV, YV))

    @property
    def dprime(self) -> int:
        return self.F.xdegree

    @property
    def d(self) -> int:
        return self.F.ydegree

    @property
    def multidegree_matrix(self):
        return [[self.dprime]]

    @property
    def certified(self) -> bool:
        return self.drift_constants is not None

    @property
    def mode(self) -> str:
        return "correspondence"

    @cached_property
    def cusp_pair(self):
        """Best pair of Y-coefficient forms with nonzero resultant and the
        max t-degree of its resultant cofactors; None if no pair works."""
        forms = [f for f in self.F.y_coefficient_forms() if not f.is_zero()]
        best = None
        for a, b in combinations(forms, 2):
            if form_resultant(a, b).is_zero():
                continue
            _, pairs = resultant_cofactors(a, b)
            cu = max(max(U.tdegree, V.tdegree) for U, V in pairs)
            if best is None or cu < best[0]:
                best = (cu, a, b)
        return best

    @cached_property
    def drift_constants(self) -> list[Fraction] | None:
        """``[C]`` with ``|h(S_* c) - (d'/d) h(c)| <= C`` for every cycle ``c``."""
        pair = self.cusp_pair
        if pair is None:
            return None
        return [Fraction(max(self.F.tdegree, pair[0]), self.d)]

    def apply(self, c: ZeroCycle) -> ZeroCycle:
        return pushforward(self, c)

    def substitute_base(self, u: Poly) -> "Correspondence":
        return Correspondence(self.F.substitute_base(u))

    def transpose(self) -> "Correspondence":
        return Correspondence(self.F.transpose())

    def __eq__(self, other):
        return isinstance(other, Correspondence) and self.F == other.F

    def __hash__(self):
        return hash(self.F)


def _lead_index(F: BihomogeneousForm) -> int:
    """Position (in row-major flat order) of the coefficient fixing the unit:
    highest X0 power, then highest Y0 power."""
    dy = F.ydegree
    for i in range(F.xdegree, -1, -1):
        r = F.rows[i]
        for e in range(dy, -1, -1):
            if not r.coeffs[e].is_zero():
                return i * (dy + 1) + e
    raise ZeroForm("zero form")


def pushforward(S: Correspondence, c: ZeroCycle) -> ZeroCycle:
    """``S_*(c)``: primitive part of ``Res_X(c(X), F(X; Y))``."""
    raw = binary_resultant(c.form.with_vars(XV), S.F)
    return ZeroCycle.make(raw)


def pushforward_raw(S: Correspondence, c: ZeroCycle) -> BinaryForm:
    """The resultant before primitivization (degree ``d * deg c``)."""
    return binary_resultant(c.form.with_vars(XV), S.F)


def multiplier(S: Correspondence) -> Fraction:
    """``d'/d``: the action on NS(P^1) tensor R."""
    return Fraction(S.dprime, S.d)


def point_cycle(a: MultiPoint) -> ZeroCycle:
    if a.space != Space((1,)):
        raise InvalidCorrespondence("cycles live on P1")
    a0, a1 = a.factors[0]
    return ZeroCycle.from_point(a0, a1)
