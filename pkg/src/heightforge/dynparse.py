"""Expressions, dynamics files, point and cycle literals.

Grammar (whitespace is insignificant)::

    expr   := [sign] term (sign term)*          sign := "+" | "-" | "−"
    term   := factor (("*" | "/") factor)*
    factor := atom ("^" nat)?
    atom   := nat | var | "(" expr ")"

Division is only by expressions free of coordinate variables, so ``3/2``
and ``t/(t+1)`` are fine while ``x0/x1`` is not.  Implicit multiplication
(``2x0``) is rejected.

A dynamics file is a list of ``key: value`` lines; ``#`` starts a comment::

    base: QQ            # or GF(p)
    space: P1xP1
    out1: (y0^2, y1^2)
    out2: (x0^3, x1^3)

``map`` is accepted for ``out1`` on a single factor and ``corr`` gives a
correspondence on P1 as a form in the source pair ``x0, x1`` and the target
pair ``y0, y1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Union

import flint

from .algebra import BaseField, BihomogeneousForm, BinaryForm, Poly, RatFunc, format_binary_form, _format_coeff_times
from .correspondence import Correspondence, ZeroCycle, XV, YV
from .errors import (
    ExprSyntaxError,
    InhomogeneousForm,
    MixedBlockUnsupported,
    NonLiteralExponent,
    SpaceMismatch,
    UnknownVariable,
    ValidationError,
    WrongArity,
)
from .projective import MForm, MorphismSpec, MultiPoint, Space

DynSystem = Union[MorphismSpec, Correspondence]

MAX_EXPONENT = 10_000


@dataclass(frozen=True)
class Token:
    kind: str  # num, ident, op, end
    text: str
    line: int
    col: int


def tokenize(text: str, line: int = 1, col: int = 1) -> list[Token]:
    toks = []
    i, n = 0, len(text)
    ln, colno = line, col
    while i < n:
        ch = text[i]
        if ch == "\n":
            ln += 1
            colno = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            colno += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("num", text[i:j], ln, colno))
            colno += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Token("ident", text[i:j], ln, colno))
            colno += j - i
            i = j
            continue
        if ch in "+-*/^()[]:,":
            toks.append(Token("op", ch, ln, colno))
        elif ch == "−":
            toks.append(Token("op", "-", ln, colno))
        else:
            raise ExprSyntaxError(f"unexpected character {ch!r}", ln, colno)
        i += 1
        colno += 1
    toks.append(Token("end", "", ln, colno))
    return toks


@dataclass(frozen=True)
class Node:
    """Expression tree node: kind in const, var, neg, add, sub, mul, div, pow."""

    kind: str
    children: tuple = ()
    value: object = None
    line: int = 1
    col: int = 1


class VarContext:
    """Declared coordinate variables.  ``t`` is always available.

    ``names`` are canonical names in variable order; ``aliases`` maps every
    accepted spelling to an index; ``factor_of[i]`` is the factor of
    variable ``i``.
    """

    def __init__(self, names, aliases, factor_of):
        self.names = tuple(names)
        self.aliases = dict(aliases)
        self.factor_of = tuple(factor_of)

    @classmethod
    def for_space(cls, space: Space) -> "VarContext":
        names, aliases, fac = [], {}, []
        for i, n in enumerate(space.dims):
            canon = space.var_names(i)
            for j in range(n + 1):
                idx = len(names)
                names.append(canon[j])
                fac.append(i)
                aliases[canon[j]] = idx
                aliases[f"x{i + 1}_{j}"] = idx
        return cls(names, aliases, fac)

    @classmethod
    def correspondence(cls) -> "VarContext":
        names = list(XV) + list(YV)
        return cls(names, {v: i for i, v in enumerate(names)}, [0, 0, 1, 1])

    @classmethod
    def cycle(cls) -> "VarContext":
        return cls(YV, {v: i for i, v in enumerate(YV)}, [0, 0])

    @classmethod
    def empty(cls) -> "VarContext":
        return cls((), {}, ())


class _Parser:
    def __init__(self, toks, ctx: VarContext):
        self.toks = toks
        self.i = 0
        self.ctx = ctx

    @property
    def cur(self) -> Token:
        return self.toks[self.i]

    def eat(self, text=None, kind=None) -> Token:
        tok = self.cur
        if text is not None and tok.text != text or kind is not None and tok.kind != kind:
            want = text or kind
            got = tok.text or "end of input"
            raise ExprSyntaxError(f"expected {want!r}, found {got!r}", tok.line, tok.col)
        self.i += 1
        return tok

    def expr(self) -> Node:
        tok = self.cur
        neg = False
        if tok.kind == "op" and tok.text in "+-":
            self.i += 1
            neg = tok.text == "-"
        node = self.term()
        if neg:
            node = Node("neg", (node,), line=tok.line, col=tok.col)
        while self.cur.kind == "op" and self.cur.text in "+-":
            op = self.eat()
            rhs = self.term()
            node = Node("add" if op.text == "+" else "sub", (node, rhs), line=op.line, col=op.col)
        return node

    def term(self) -> Node:
        node = self.factor()
        while True:
            tok = self.cur
            if tok.kind == "op" and tok.text in "*/":
                self.i += 1
                rhs = self.factor()
                node = Node("mul" if tok.text == "*" else "div", (node, rhs), line=tok.line, col=tok.col)
            elif tok.kind in ("num", "ident") or tok.text == "(":
                raise ExprSyntaxError("implicit multiplication is not allowed; use '*'", tok.line, tok.col)
            else:
                return node

    def factor(self) -> Node:
        node = self.atom()
        if self.cur.kind == "op" and self.cur.text == "^":
            caret = self.eat()
            tok = self.cur
            if tok.kind != "num":
                raise NonLiteralExponent("exponent must be a literal natural number", tok.line, tok.col)
            self.i += 1
            k = int(tok.text)
            if k > MAX_EXPONENT:
                raise ExprSyntaxError(f"exponent {k} too large", tok.line, tok.col)
            node = Node("pow", (node,), k, line=caret.line, col=caret.col)
        return node

    def atom(self) -> Node:
        tok = self.cur
        if tok.kind == "num":
            self.i += 1
            return Node("const", value=int(tok.text), line=tok.line, col=tok.col)
        if tok.kind == "ident":
            self.i += 1
            if tok.text == "t":
                return Node("var", value="t", line=tok.line, col=tok.col)
            if tok.text not in self.ctx.aliases:
                raise UnknownVariable(f"unknown variable {tok.text!r}", tok.line, tok.col)
            return Node("var", value=self.ctx.aliases[tok.text], line=tok.line, col=tok.col)
        if tok.text == "(":
            self.i += 1
            node = self.expr()
            self.eat(")")
            return node
        got = tok.text or "end of input"
        raise ExprSyntaxError(f"unexpected {got!r}", tok.line, tok.col)


def parse_expr(text: str, ctx: VarContext | None = None, line: int = 1, col: int = 1) -> Node:
    """Parse one expression; the whole input must be consumed."""
    p = _Parser(tokenize(text, line, col), ctx or VarContext.empty())
    try:
        node = p.expr()
    except RecursionError:
        raise ExprSyntaxError("expression nested too deeply", line, col) from None
    if p.cur.kind != "end":
        raise ExprSyntaxError(f"unexpected {p.cur.text!r}", p.cur.line, p.cur.col)
    return node


def _parse_tuple(text: str, ctx: VarContext, line: int, col: int) -> list[Node]:
    p = _Parser(tokenize(text, line, col), ctx)
    p.eat("(")
    try:
        items = [p.expr()]
        while p.cur.text == ",":
            p.eat(",")
            items.append(p.expr())
    except RecursionError:
        raise ExprSyntaxError("expression nested too deeply", line, col) from None
    p.eat(")")
    if p.cur.kind != "end":
        raise ExprSyntaxError(f"unexpected {p.cur.text!r}", p.cur.line, p.cur.col)
    return items


# ---------------------------------------------------------------------------
# evaluation to flint polynomials in (coordinate vars..., t)

class _Evaluator:
    def __init__(self, field: BaseField, ctx: VarContext):
        self.field = field
        self.nv = len(ctx.names)
        names = tuple(f"v{i}" for i in range(self.nv)) + ("t",)
        if field.characteristic:
            self.R = flint.nmod_mpoly_ctx.get(names, modulus=field.characteristic)
        else:
            self.R = flint.fmpq_mpoly_ctx.get(names)
        self.gens = self.R.gens()

    def const(self, c):
        return self.R.from_dict({(0,) * (self.nv + 1): c}) if c else self.R.from_dict({})

    def is_t_only(self, p) -> bool:
        return all(not any(k[:-1]) for k in p.to_dict())

    def eval(self, node: Node):
        try:
            return self._eval(node)
        except RecursionError:
            raise ExprSyntaxError("expression nested too deeply", node.line, node.col) from None

    def _eval(self, node: Node):
        """Returns (numerator, denominator), denominator free of coordinates."""
        k = node.kind
        if k == "const":
            v = node.value % self.field.characteristic if self.field.characteristic else node.value
            return self.const(v), self.const(1)
        if k == "var":
            g = self.gens[-1] if node.value == "t" else self.gens[node.value]
            return g, self.const(1)
        if k == "neg":
            n, d = self._eval(node.children[0])
            return -n, d
        if k == "pow":
            n, d = self._eval(node.children[0])
            return n ** node.value, d ** node.value
        if k in ("add", "sub", "mul"):
            # walk the left spine iteratively so long sums do not recurse
            kinds = ("add", "sub") if k != "mul" else ("mul",)
            chain = []
            cur = node
            while cur.kind in kinds:
                chain.append((cur.kind, cur.children[1]))
                cur = cur.children[0]
            acc = self._eval(cur)
            for op, rhs in reversed(chain):
                b = self._eval(rhs)
                if op == "add":
                    acc = (acc[0] * b[1] + b[0] * acc[1], acc[1] * b[1])
                elif op == "sub":
                    acc = (acc[0] * b[1] - b[0] * acc[1], acc[1] * b[1])
                else:
                    acc = self._reduce(acc[0] * b[0], acc[1] * b[1])
            return acc
        a, b = (self._eval(c) for c in node.children)
        if k == "add":
            return a[0] * b[1] + b[0] * a[1], a[1] * b[1]
        if k == "sub":
            return a[0] * b[1] - b[0] * a[1], a[1] * b[1]
        if k == "mul":
            return self._reduce(a[0] * b[0], a[1] * b[1])
        if k == "div":
            if not self.is_t_only(b[0]):
                raise ExprSyntaxError("division by an expression involving coordinates", node.line, node.col)
            if b[0].is_zero():
                raise ExprSyntaxError("division by zero", node.line, node.col)
            return self._reduce(a[0] * b[1], a[1] * b[0])
        raise AssertionError(k)

    def _reduce(self, n, d):
        g = n.gcd(d) if not n.is_zero() else d
        if not g.is_constant():
            n, d = n / g, d / g
        return n, d

    def to_poly(self, p) -> Poly:
        d = p.to_dict()
        if not d:
            return Poly.zero(self.field)
        vals = [0] * (max(k[-1] for k in d) + 1)
        for k, v in d.items():
            vals[k[-1]] = int(v) if self.field.characteristic else Fraction(int(v.p), int(v.q))
        return Poly(self.field, vals)

    def terms(self, p) -> dict:
        """Map coordinate exponent tuples to Poly coefficients."""
        grouped: dict[tuple, dict] = {}
        for k, v in p.to_dict().items():
            grouped.setdefault(k[:-1], {})[k[-1]] = v
        out = {}
        for exps, b in grouped.items():
            vals = [0] * (max(b) + 1)
            for et, v in b.items():
                vals[et] = int(v) if self.field.characteristic else Fraction(int(v.p), int(v.q))
            out[exps] = Poly(self.field, vals)
        return out


def _clear(ev: _Evaluator, vals):
    """Multiply a tuple of (num, den) by the lcm of the denominators."""
    L = ev.const(1)
    for _, d in vals:
        L = L * d / L.gcd(d)
    return [n * (L / d) for n, d in vals]


def expand(node: Node, field: BaseField, ctx: VarContext):
    """Expand to ``{exponents: RatFunc}`` keyed by coordinate exponents."""
    ev = _Evaluator(field, ctx)
    n, d = ev.eval(node)
    den = ev.to_poly(d)
    return {e: RatFunc(c, den) for e, c in ev.terms(n).items()}


# ---------------------------------------------------------------------------
# literals

def parse_field(text: str) -> BaseField:
    s = text.strip().replace(" ", "")
    if s in ("QQ", "Q", "ℚ"):
        return BaseField(0)
    for pre in ("GF(", "F(", "FF("):
        if s.startswith(pre) and s.endswith(")") and s[len(pre):-1].isdigit():
            return BaseField(int(s[len(pre):-1]))
    if s.startswith("GF") and s[2:].isdigit():
        return BaseField(int(s[2:]))
    raise ValidationError(f"unknown base field {text!r}")


def parse_poly(text: str, field: BaseField) -> Poly:
    """A polynomial in t (used for substitutions)."""
    node = parse_expr(text)
    ev = _Evaluator(field, VarContext.empty())
    n, d = ev.eval(node)
    if not d.is_constant():
        raise ValidationError(f"{text!r} is not a polynomial in t")
    inv = ev.to_poly(d)
    return ev.to_poly(n) * field.div(1, inv.coeffs[0])


def _split_brackets(text: str) -> list[tuple[str, int]]:
    """Bracket groups ``[ ... ]`` with their starting column."""
    groups, depth, start = [], 0, None
    for i, ch in enumerate(text):
        if ch == "[":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth < 0:
                raise ExprSyntaxError("unbalanced ']'", 1, i + 1)
            if depth == 0:
                groups.append((text[start + 1: i], start + 2))
        elif depth == 0 and not (ch.isspace() or ch in ",x×()"):
            raise ExprSyntaxError(f"unexpected {ch!r} outside point brackets", 1, i + 1)
    if depth != 0:
        raise ExprSyntaxError("unbalanced '['", 1, len(text))
    return groups


def _parse_coords(body: str, col: int, field: BaseField):
    pieces, cur, depth, cstart = [], [], 0, col
    pos = col
    for ch in body + ":":
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == ":" and depth == 0:
            pieces.append(("".join(cur), cstart))
            cur, cstart = [], pos + 1
        else:
            cur.append(ch)
        pos += 1
    ev = _Evaluator(field, VarContext.empty())
    out = []
    for txt, c in pieces:
        if not txt.strip():
            raise ExprSyntaxError("empty coordinate", 1, c)
        n, d = ev.eval(parse_expr(txt, None, 1, c))
        out.append(RatFunc(ev.to_poly(n), ev.to_poly(d)))
    return out


def parse_point(text: str, space: Space, field: BaseField) -> MultiPoint:
    """``"[t : 1]"`` or ``"[t : 1], [1 : t]"`` for products."""
    groups = _split_brackets(text)
    if not groups:
        raise ExprSyntaxError("a point literal needs [ ... ]", 1, 1)
    if len(groups) != len(space.dims):
        raise WrongArity(f"space {space} has {len(space.dims)} factors, point has {len(groups)}")
    return MultiPoint(space, [_parse_coords(b, c, field) for b, c in groups])


def parse_cycle(text: str, field: BaseField) -> ZeroCycle:
    """A point literal in P1 or a binary form in ``y0, y1``."""
    if "[" in text:
        a = parse_point(text, Space((1,)), field)
        return ZeroCycle.from_point(*a.factors[0])
    ctx = VarContext.cycle()
    ev = _Evaluator(field, ctx)
    n, d = ev.eval(parse_expr(text, ctx))
    terms = ev.terms(n)
    degs = {sum(e) for e in terms}
    if len(degs) != 1:
        raise InhomogeneousForm("a cycle must be a homogeneous form in y0, y1")
    deg = degs.pop()
    if deg == 0:
        raise InhomogeneousForm("a cycle needs positive degree")
    coeffs = [Poly.zero(field)] * (deg + 1)
    for (e0, _), c in terms.items():
        coeffs[e0] = c
    return ZeroCycle.make(BinaryForm(field, coeffs, YV))


# ---------------------------------------------------------------------------
# dynamics files

def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def parse_dyn_file(text: str) -> dict:
    """Split into ``{key: (value, line, column)}``."""
    entries = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        if ":" not in line:
            raise ExprSyntaxError("expected 'key: value'", ln, 1)
        key, value = line.split(":", 1)
        key = key.strip()
        col = len(line) - len(value) + 1
        if not (key in ("base", "space", "map", "corr") or (key.startswith("out") and key[3:].isdigit())):
            raise ExprSyntaxError(f"unknown key {key!r}", ln, 1)
        if key in entries:
            raise ExprSyntaxError(f"duplicate key {key!r}", ln, 1)
        entries[key] = (value, ln, col)
    return entries


def load_dynamics(source) -> DynSystem:
    """Read a dynamics file (path or text) into a validated system."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and ":" not in source):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source
    entries = parse_dyn_file(text)
    if "base" not in entries:
        raise ValidationError("missing 'base'")
    field = parse_field(entries["base"][0])
    if "corr" in entries:
        space = Space.parse(entries["space"][0]) if "space" in entries else Space((1,))
        if space != Space((1,)):
            raise SpaceMismatch("correspondences live on P1")
        if any(k == "map" or k.startswith("out") for k in entries):
            raise ValidationError("a file declares either a map or a correspondence")
        value, ln, col = entries["corr"]
        return _build_correspondence(field, parse_expr(value, VarContext.correspondence(), ln, col))
    if "space" not in entries:
        raise ValidationError("missing 'space'")
    space = Space.parse(entries["space"][0])
    outs = {}
    if "map" in entries:
        if len(space.dims) != 1:
            raise ValidationError("'map' is only for a single factor; use out1, out2, ...")
        outs[1] = entries["map"]
    for k, v in entries.items():
        if k.startswith("out"):
            j = int(k[3:])
            if j in outs:
                raise ValidationError(f"output {j} given twice")
            outs[j] = v
    if sorted(outs) != list(range(1, len(space.dims) + 1)):
        raise SpaceMismatch(f"space {space} needs outputs out1..out{len(space.dims)}")
    ctx = VarContext.for_space(space)
    tuples = []
    for j in range(1, len(space.dims) + 1):
        value, ln, col = outs[j]
        tuples.append(_parse_tuple(value, ctx, ln, col))
    return _build_morphism(field, space, ctx, tuples)


def _build_morphism(field, space: Space, ctx: VarContext, tuples) -> MorphismSpec:
    ev = _Evaluator(field, ctx)
    outputs = []
    for j, (items, n) in enumerate(zip(tuples, space.dims)):
        if len(items) != n + 1:
            raise WrongArity(f"output {j + 1} needs {n + 1} coordinates, got {len(items)}")
        polys = _clear(ev, [ev.eval(x) for x in items])
        termss = [ev.terms(p) for p in polys]
        if not space.is_p1_product:
            degs = {sum(e) for ts in termss for e in ts}
            if len(degs) > 1:
                raise InhomogeneousForm(f"output {j + 1} is not homogeneous")
            outputs.append([MForm.from_terms(field, n + 1, ts) for ts in termss])
            continue
        factors = {ctx.factor_of[v] for ts in termss for e in ts for v, k in enumerate(e) if k}
        if len(factors) > 1:
            raise MixedBlockUnsupported(
                f"output {j + 1} depends on several factors; only block maps are supported"
            )
        src = factors.pop() if factors else None
        if src is None:
            zero_exp = (0,) * len(ctx.names)
            pair = [BinaryForm(field, [ts.get(zero_exp, Poly.zero(field))], space.var_names(0)) for ts in termss]
            outputs.append((None, pair))
            continue
        i0 = [v for v in range(len(ctx.names)) if ctx.factor_of[v] == src]
        degs = {e[i0[0]] + e[i0[1]] for ts in termss for e in ts}
        if len(degs) != 1:
            raise InhomogeneousForm(f"output {j + 1} is not homogeneous of a single degree")
        deg = degs.pop()
        pair = []
        for ts in termss:
            coeffs = [Poly.zero(field)] * (deg + 1)
            for e, c in ts.items():
                coeffs[e[i0[0]]] = c
            pair.append(BinaryForm(field, coeffs, space.var_names(src)))
        outputs.append((src, pair))
    return MorphismSpec.from_forms(field, space, outputs)


def _build_correspondence(field, node: Node) -> Correspondence:
    ctx = VarContext.correspondence()
    ev = _Evaluator(field, ctx)
    (p,) = _clear(ev, [ev.eval(node)])
    ts = ev.terms(p)
    if not ts:
        raise ValidationError("correspondence form is zero")
    dxs = {e[0] + e[1] for e in ts}
    dys = {e[2] + e[3] for e in ts}
    if len(dxs) != 1 or len(dys) != 1:
        raise InhomogeneousForm("correspondence form must be bihomogeneous in (x0,x1; y0,y1)")
    dx, dy = dxs.pop(), dys.pop()
    rows = [[Poly.zero(field)] * (dy + 1) for _ in range(dx + 1)]
    for e, c in ts.items():
        rows[e[0]][e[2]] = c
    F = BihomogeneousForm(field, [BinaryForm(field, r, YV) for r in rows], XV, YV)
    return Correspondence(F)


# ---------------------------------------------------------------------------
# printing (round-trips through the parsers)

def format_mform(f: MForm) -> str:
    names = [f"x{j}" for j in range(f.nvars)]
    terms = []
    for exps, c in sorted(f.terms().items(), reverse=True):
        mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, exps) if k)
        terms.append(_format_coeff_times(c, mono))
    if not terms:
        return "0"
    out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sgn, body in terms[1:]:
        out += f" {sgn} {body}"
    return out


def format_dynamics(dyn: DynSystem) -> str:
    lines = [f"base: {dyn.field}"]
    if isinstance(dyn, Correspondence):
        lines += ["space: P1", f"corr: {dyn.F}"]
        return "\n".join(lines) + "\n"
    lines.append(f"space: {dyn.space}")
    for j, o in enumerate(dyn.outputs):
        if isinstance(o.forms[0], MForm):
            body = ", ".join(format_mform(f) for f in o.forms)
        else:
            body = ", ".join(format_binary_form(f) for f in o.forms)
        lines.append(f"out{j + 1}: ({body})")
    return "\n".join(lines) + "\n"
