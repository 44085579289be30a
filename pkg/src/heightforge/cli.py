"""Command-line interface.

Every command prints ``key<TAB>value`` records.  Exact numbers print as
rationals; certified ones as ``mid±radius`` followed by a rigor tag.  Errors
print a single ``error<TAB>code<TAB>message`` record and exit with 2
(validation) or 3 (resource abort).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .algebra import Poly
from .canheight import (
    DEFAULT_TOL,
    as_state,
    basechange_check,
    boundedness_report,
    canonical_height_scalar,
    canonical_height_vector,
    functional_equation_check,
    height_vector,
    split_data,
    thread_count,
)
from .catalog import random_points, resolve_dyn
from .correspondence import Correspondence, ZeroCycle
from .dynparse import format_dynamics, parse_cycle, parse_field, parse_point, parse_poly
from .errors import HeightforgeError, ValidationError
from .nslattice import _decimal, kronecker_classify, ns_action, power_bounded, spectral_split
from .northcott import count_points, enumerate_points, northcott_verify, orbit_analyze
from .projective import Space
from .series import (
    check_candidate,
    d_sequence,
    extended_candidate,
    find_recurrence,
    format_limit,
    format_series,
)


class UsageError(ValidationError):
    code = "UsageError"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage().strip()}")


# ---------------------------------------------------------------------------
# formatting

def fmt_q(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def fmt_value(value: Fraction, radius: Fraction) -> str:
    if radius == 0:
        return fmt_q(value)
    return f"{_decimal(Fraction(value), 17)}±{float(radius):.1e}"


def fmt_matrix(M) -> str:
    return "[" + ",".join("[" + ",".join(fmt_q(x) for x in row) + "]" for row in M) + "]"


def fmt_vector(v) -> str:
    return "[" + ",".join(fmt_q(x) for x in v) + "]"


def fmt_poly_x(coeffs) -> str:
    """Ascending rational coefficients as a polynomial in x."""
    parts = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = Fraction(coeffs[i])
        if c == 0:
            continue
        mono = "" if i == 0 else "x" if i == 1 else f"x^{i}"
        mag = abs(c)
        body = fmt_q(mag) if not mono else mono if mag == 1 else f"{fmt_q(mag)}*{mono}"
        parts.append(("-" if c < 0 else "+", body))
    if not parts:
        return "0"
    head = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    return head + "".join(f" {s} {b}" for s, b in parts[1:])


class Out:
    def __init__(self, stream):
        self.stream = stream

    def rec(self, key, *values):
        self.stream.write("\t".join([key, *(str(v) for v in values)]) + "\n")


# ---------------------------------------------------------------------------
# argument helpers

def _state(dyn, args):
    """The point or cycle named on the command line."""
    if args.cycle is not None:
        if not isinstance(dyn, Correspondence):
            raise UsageError("--cycle needs a correspondence")
        return parse_cycle(args.cycle, dyn.field)
    if args.point is None:
        raise UsageError("need --point (or --cycle for correspondences)")
    a = parse_point(args.point, dyn.space, dyn.field)
    return as_state(dyn, a)


def _vector(text: str | None):
    if text is None:
        return None
    try:
        return [Fraction(x.strip()) for x in text.strip("[]() ").split(",")]
    except ValueError as exc:
        raise UsageError(f"bad vector {text!r}: {exc}") from None


def _tol(text):
    try:
        t = Fraction(text)
    except ValueError:
        raise UsageError(f"bad tolerance {text!r}") from None
    if t <= 0:
        raise UsageError("tolerance must be positive")
    return t


def _matrix(text: str):
    try:
        M = json.loads(text)
        M = [[int(x) for x in row] for row in M]
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad matrix {text!r}: {exc}") from None
    if not M or any(len(r) != len(M) for r in M):
        raise UsageError("matrix must be square and nonempty")
    return M


# ---------------------------------------------------------------------------
# commands

def cmd_height(args, out):
    dyn = resolve_dyn(args.dyn)
    x = _state(dyn, args)
    out.rec("h", *(fmt_q(h) for h in height_vector(x)))
    if isinstance(x, ZeroCycle):
        out.rec("degree", x.degree)


def cmd_ns(args, out):
    dyn = resolve_dyn(args.dyn)
    A = ns_action(dyn)
    out.rec("St", fmt_matrix(A.St))
    out.rec("d", A.d)
    out.rec("Sstar", fmt_matrix(A.Sstar))
    split = spectral_split(A)
    out.rec("charpoly", fmt_poly_x(split.charpoly))
    for f, mult, cls in split.factors:
        out.rec("factor", fmt_poly_x(f), mult, cls)
    out.rec("Eplus_dim", split.dim_plus)
    out.rec("Eplus", "[" + ",".join(fmt_vector(v) for v in split.Eplus) + "]")
    out.rec("Eminus_dim", len(split.Eminus))
    out.rec("Eminus", "[" + ",".join(fmt_vector(v) for v in split.Eminus) + "]")
    out.rec("kappa", split.kappa_text(), "exact" if split.kappa_exact else "interval")
    rep = kronecker_classify(A.St)
    out.rec("kronecker", rep.verdict)
    out.rec("mode", dyn.mode)
    C = dyn.drift_constants
    out.rec("drift", fmt_vector(C) if C is not None else "none")


def cmd_classify(args, out):
    if args.matrix is not None:
        M = _matrix(args.matrix)
    elif args.dyn is not None:
        M = ns_action(resolve_dyn(args.dyn)).St
    else:
        raise UsageError("need --matrix or --dyn")
    rep = kronecker_classify(M)
    out.rec("verdict", rep.verdict)
    out.rec("cyclotomic", ",".join(f"Phi_{n}^{m}" for n, m in rep.cyclotomic_factors) or "none")
    out.rec("nilpotent_order", rep.nilpotent_order)
    out.rec("other_factors", ",".join(rep.other_factors) or "none")
    out.rec("power_bounded", "true" if power_bounded(M, 200) else "false")


def _print_cert(out, cert, key="hhat"):
    vals = [fmt_value(v, r) for v, r in zip(cert.values, cert.radius)]
    out.rec(key, *vals, cert.rigor.lower())
    out.rec("radius", *(fmt_q(r) for r in cert.radius))
    if cert.rigorous_radius is not None:
        out.rec("rigorous_radius", *(fmt_q(r) for r in cert.rigorous_radius))
    out.rec("iters", cert.iterations)
    out.rec("last_increment", *(fmt_q(r) for r in cert.last_increment))
    out.rec("rigor", cert.rigor)
    out.rec("stop", cert.stop_reason)
    out.rec("basis", "[" + ",".join(fmt_vector(b) for b in cert.basis) + "]")


def cmd_canheight(args, out):
    dyn = resolve_dyn(args.dyn)
    tol = _tol(args.tol)
    if args.sample:
        thread_count()
        sd = split_data(dyn)
        pts = random_points(dyn.field, dyn.space, args.height_max if args.height_max is not None else 3,
                            args.sample, args.seed)
        rep = boundedness_report(dyn, pts, tol, args.max_iter)
        out.rec("samples", rep.samples)
        out.rec("seed", args.seed)
        out.rec("empirical_max", *(fmt_q(x) for x in rep.empirical_max))
        out.rec("drift_bound", *(fmt_q(x) for x in rep.bounds) if rep.bounds is not None else ["none"])
        out.rec("max_radius", *(fmt_q(x) for x in rep.max_radius))
        out.rec("bounded_ok", "skipped" if rep.ok is None else str(rep.ok).lower())
        out.rec("kappa", sd.split.kappa_text())
        return
    x = _state(dyn, args)
    e = _vector(args.e)
    if e is not None:
        cert = canonical_height_scalar(dyn, x, e, tol, args.max_iter)
    else:
        cert = canonical_height_vector(dyn, x, tol, args.max_iter)
    _print_cert(out, cert)
    if args.functional_equation:
        rep = functional_equation_check(dyn, x, tol, args.max_iter)
        out.rec("fe_residual", fmt_q(rep.residual))
        out.rec("fe_allowed", fmt_q(rep.allowed))
        out.rec("fe_ok", str(rep.ok).lower())


def cmd_orbit(args, out):
    dyn = resolve_dyn(args.dyn)
    if isinstance(dyn, Correspondence):
        raise UsageError("orbit analysis needs a morphism; use pushforward for correspondences")
    a = _state(dyn, args)
    steps = args.max_iter if args.max_iter is not None else 64
    v = orbit_analyze(dyn, a, steps, args.height_max, _tol(args.tol))
    out.rec("verdict", v.kind)
    if v.kind == "Preperiodic":
        out.rec("tail", v.tail)
        out.rec("cycle", v.cycle)
        out.rec("revisited", v.revisited)
    elif v.kind == "UnboundedCertified":
        out.rec("hhat_lower", fmt_q(v.hhat_lower))
    out.rec("steps", v.steps)
    out.rec("max_height", v.max_height)


def cmd_pushforward(args, out):
    dyn = resolve_dyn(args.dyn)
    x = _state(dyn, args)
    steps = args.terms if args.terms is not None else 1
    out.rec("step", 0, x, *(fmt_q(h) for h in height_vector(x)))
    for m in range(1, steps + 1):
        x = dyn.apply(x)
        out.rec("step", m, x, *(fmt_q(h) for h in height_vector(x)))
    if isinstance(x, ZeroCycle):
        out.rec("degree", x.degree)


def cmd_series(args, out):
    dyn = resolve_dyn(args.dyn)
    x = _state(dyn, args)
    n = args.terms if args.terms is not None else 13
    seq = d_sequence(dyn, x, _vector(args.e), n - 1)
    out.rec("terms", ",".join(fmt_q(d) for d in seq.terms))
    rep = find_recurrence(seq)
    if not rep.found:
        out.rec("recurrence", "none", rep.note)
    else:
        out.rec("recurrence", fmt_vector(rep.coeffs))
        out.rec("order", rep.order)
        out.rec("transient", rep.transient)
        out.rec("gf_num", format_series(rep.numerator))
        out.rec("gf_den", format_series(rep.denominator))
        out.rec("limit", format_limit(rep), "exact" if rep.limit_exact else "interval" if rep.limit is not None else rep.note)
    cand = extended_candidate(dyn)
    bad = check_candidate(seq.terms, cand, seq.rank + 1)
    out.rec("candidate", fmt_poly_x(cand), "ok" if bad is None else f"violated_at\t{bad}")


def _space_and_field(args):
    if args.dyn is not None:
        dyn = resolve_dyn(args.dyn)
        return dyn.field, dyn.space
    if args.base is None or args.space is None:
        raise UsageError("need --dyn, or both --base and --space")
    return parse_field(args.base), Space.parse(args.space)


def cmd_enumerate(args, out):
    field, space = _space_and_field(args)
    if args.height_max is None:
        raise UsageError("need --height-max")
    pts = list(enumerate_points(field, space, args.height_max))
    out.rec("count", len(pts))
    for p in pts:
        out.rec("point", p)


def cmd_northcott(args, out):
    dyn = resolve_dyn(args.dyn)
    if args.height_max is None:
        raise UsageError("need --height-max")
    thread_count()
    rep = northcott_verify(dyn, args.height_max)
    out.rec("count", rep.count)
    out.rec("preperiodic", rep.preperiodic)
    out.rec("unbounded", rep.unbounded)
    out.rec("unknown", rep.unknown)
    out.rec("hypothesis", "ok" if rep.hypothesis_ok else "failed", rep.hypothesis_note)
    out.rec("biconditional", "skipped" if rep.biconditional is None else str(rep.biconditional).lower())
    for a in rep.mismatches:
        out.rec("mismatch", a)
    out.rec("chain_bound", rep.chain_bound)
    out.rec("chain_witness", rep.chain_witness if rep.chain_witness is not None else "none")
    out.rec("exceptional", rep.note)


def cmd_basechange(args, out):
    dyn = resolve_dyn(args.dyn)
    if args.subst is None:
        raise UsageError("need --subst")
    u = parse_poly(args.subst, dyn.field)
    pulled = dyn.substitute_base(u)
    out.rec("factor", u.degree)
    for line in format_dynamics(pulled).strip().splitlines():
        key, _, val = line.partition(": ")
        out.rec("system", key, val)
    if args.point is not None or args.cycle is not None:
        x = _state(dyn, args)
        rep = basechange_check(dyn, x, u, _tol(args.tol), args.max_iter)
        xu = x.substitute_base(u)
        out.rec("point", xu)
        out.rec("h", *(fmt_q(h) for h in height_vector(xu)))
        out.rec("hhat", *(fmt_value(v, r) for v, r in zip(rep.original.values, rep.original.radius)))
        out.rec("hhat_pulled", *(fmt_value(v, r) for v, r in zip(rep.pulled.values, rep.pulled.radius)))
        out.rec("scaling_ok", str(rep.ok).lower())
    if args.seed is not None and not isinstance(dyn, Correspondence):
        pts = random_points(dyn.field, dyn.space, args.height_max or 4, 100, args.seed)
        good = sum(1 for p in pts
                   if tuple(u.degree * h for h in p.height()) == p.substitute_base(u).height())
        out.rec("weil_scaling", f"{good}/{len(pts)}")


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="heightforge", description="Canonical heights over k(t).")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, help, dyn=True, point=False):
        s = sub.add_parser(name, help=help, description=help)
        if dyn:
            s.add_argument("--dyn", required=True, metavar="FILE", help="dynamics file or bundled name")
        if point:
            s.add_argument("--point", metavar="STR")
            s.add_argument("--cycle", metavar="STR")
        s.set_defaults(fn=fn)
        return s

    add("height", cmd_height, "Weil height of a point or cycle", point=True)
    add("ns", cmd_ns, "Neron-Severi action, spectral split and kappa")
    s = add("classify", cmd_classify, "Kronecker classification of an integer matrix", dyn=False)
    s.add_argument("--dyn", metavar="FILE")
    s.add_argument("--matrix", metavar="JSON")
    s = add("canheight", cmd_canheight, "canonical height certificate", point=True)
    s.add_argument("--e", metavar="VEC", help="eigenvector for the scalar height")
    s.add_argument("--tol", default=str(DEFAULT_TOL))
    s.add_argument("--max-iter", type=int)
    s.add_argument("--functional-equation", action="store_true")
    s.add_argument("--sample", type=int, default=0, help="boundedness report over N random points")
    s.add_argument("--height-max", type=int)
    s.add_argument("--seed", type=int, default=0)
    s = add("orbit", cmd_orbit, "classify an orbit", point=True)
    s.add_argument("--max-iter", type=int)
    s.add_argument("--height-max", type=int)
    s.add_argument("--tol", default=str(DEFAULT_TOL))
    s = add("pushforward", cmd_pushforward, "iterate a point or cycle", point=True)
    s.add_argument("--terms", type=int)
    s = add("series", cmd_series, "d_m sequence, recurrence and limit", point=True)
    s.add_argument("--terms", type=int)
    s.add_argument("--e", metavar="VEC")
    s = add("enumerate", cmd_enumerate, "points of bounded height over F_p(t)", dyn=False)
    s.add_argument("--dyn", metavar="FILE")
    s.add_argument("--base")
    s.add_argument("--space")
    s.add_argument("--height-max", type=int)
    s = add("northcott", cmd_northcott, "classify all points of bounded height")
    s.add_argument("--height-max", type=int)
    s = add("basechange", cmd_basechange, "substitute t -> u(t)", point=True)
    s.add_argument("--subst", metavar="POLY")
    s.add_argument("--tol", default=str(DEFAULT_TOL))
    s.add_argument("--max-iter", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--height-max", type=int)
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    out = Out(stdout)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand\n" + parser.format_usage().strip())
        thread_count()
        args.fn(args, out)
    except UsageError as exc:
        msg, _, usage = str(exc).partition("\n")
        out.rec("error", exc.code, msg)
        if usage:
            stderr.write(usage + "\n")
        return exc.exit_status
    except HeightforgeError as exc:
        out.rec("error", exc.code, str(exc).replace("\n", " "))
        return exc.exit_status
    except RecursionError:
        out.rec("error", "ResourceAbort", "expression nesting too deep")
        return 3
    except MemoryError:
        out.rec("error", "ResourceAbort", "out of memory")
        return 3
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
