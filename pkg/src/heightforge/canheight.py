"""Canonical heights by Tate telescoping.

For an NS vector ``e`` in E+ the canonical height is the limit of
``h_0(phi^m a, B^m e)`` where ``B`` inverts S* on E+.  Consecutive terms
differ by at most ``N(B^{m+1} e)`` with ``N(g) = sum_j C_j |g_j|`` and
``C_j`` the drift constants of the system, so every value comes with an
exact rational error radius.  All arithmetic is rational; only kappa may be
an interval.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

from .algebra import Poly
from .correspondence import Correspondence, ZeroCycle, cycle_height, point_cycle
from .errors import EmptyEplus, NotEigenvector, NotExpanding, ResourceAbort, ValidationError
from .nslattice import (
    NSAction,
    SpectralSplit,
    columns_to_matrix,
    mat_inv,
    mat_mul,
    mat_vec,
    norm1,
    ns_action,
    spectral_split,
)
from .projective import MorphismSpec, MultiPoint, pairing

MAX_DEGREE = 200_000
EXACT_WINDOW = 3
DEFAULT_TOL = Fraction(1, 10**6)


def default_max_iter(field) -> int:
    return 20 if field.characteristic else 12


def as_state(dyn, a):
    """Points of P1 become point cycles for correspondences."""
    if isinstance(dyn, Correspondence) and isinstance(a, MultiPoint):
        return point_cycle(a)
    return a


def height_vector(x) -> list[Fraction]:
    if isinstance(x, ZeroCycle):
        return [cycle_height(x)]
    return [Fraction(h) for h in x.height()]


def state_degree(x) -> int:
    if isinstance(x, ZeroCycle):
        return max(x.form.tdegree, 0)
    return max(x.height())


def predicted_degree(dyn, x) -> int:
    """Upper bound for the t-degree of the next iterate."""
    if isinstance(dyn, Correspondence):
        return dyn.dprime * max(x.form.tdegree, 0) + x.degree * dyn.F.tdegree
    h = x.height()
    best = 0
    for o in dyn.outputs:
        src_h = h[o.src] if o.src is not None else 0
        best = max(best, o.degree * src_h + max(o.tdegree, 0))
    return best


class Orbit:
    """Lazily computed forward orbit with its height vectors."""

    def __init__(self, dyn, a, max_degree: int = MAX_DEGREE):
        self.dyn = dyn
        self.points = [as_state(dyn, a)]
        self.heights = [height_vector(self.points[0])]
        self.max_degree = max_degree

    def __getitem__(self, m: int):
        while len(self.points) <= m:
            x = self.points[-1]
            if predicted_degree(self.dyn, x) > self.max_degree:
                raise ResourceAbort(
                    f"iterate {len(self.points)} would exceed degree {self.max_degree}"
                )
            y = self.dyn.apply(x)
            self.points.append(y)
            self.heights.append(height_vector(y))
        return self.points[m]

    def height(self, m: int) -> list[Fraction]:
        self[m]
        return self.heights[m]


@dataclass
class HeightCertificate:
    """Canonical height coordinates against ``basis`` with error radii.

    ``radius`` is the reported radius (0 for Exact); ``rigorous_radius`` is
    the proven tail bound after ``iterations`` steps, or None when the
    system has no certified drift constant.
    """

    values: list[Fraction]
    radius: list[Fraction]
    rigorous_radius: list[Fraction] | None
    iterations: int
    last_increment: list[Fraction]
    rigor: str  # Exact | Rigorous | Heuristic
    basis: list[list[Fraction]]
    stop_reason: str = ""
    kappa_lo: Fraction | None = None
    kappa_hi: Fraction | None = None
    history: list[list[Fraction]] = dc_field(default_factory=list, repr=False)

    def enclosure(self, i: int, rigorous: bool = True) -> tuple[Fraction, Fraction]:
        r = self.radius[i]
        if rigorous and self.rigorous_radius is not None:
            r = max(r, self.rigorous_radius[i])
        return self.values[i] - r, self.values[i] + r

    def encloses_zero(self, rigorous: bool = True) -> bool:
        """True when every coordinate's enclosure contains 0."""
        return all(lo <= 0 <= hi for lo, hi in (self.enclosure(i, rigorous) for i in range(len(self.values))))

    def max_radius(self) -> Fraction:
        return max(self.radius) if self.radius else Fraction(0)

    @property
    def value(self) -> Fraction:
        return self.values[0]


# ---------------------------------------------------------------------------
# tail bounds

class _Tail:
    """Exact bound on ``sum_{r > m} N(P B^r e_i)``."""

    def __init__(self, P, B, C: Sequence[Fraction] | None, max_L: int = 64):
        self.P = P
        self.B = B
        self.k = len(B)
        self.C = None if C is None else [Fraction(c) for c in C]
        self.ok = self.C is not None
        if not self.ok:
            return
        # w_k bounds N(P z) <= sum_k w_k |z_k|
        self.w = [sum(self.C[j] * abs(P[j][kk]) for j in range(len(P))) for kk in range(self.k)]
        self.wmax = max(self.w) if self.w else Fraction(0)
        pw = [[Fraction(int(i == j)) for j in range(self.k)] for i in range(self.k)]
        self.powers = [pw]
        L = None
        for s in range(1, max_L + 1):
            pw = mat_mul(pw, B)
            self.powers.append(pw)
            if norm1(pw) < 1:
                L = s
                break
        if L is None:
            self.ok = False
            return
        self.L = L
        self.q = norm1(self.powers[L])

    def N(self, z) -> Fraction:
        return sum((w * abs(x) for w, x in zip(self.w, z)), Fraction(0))

    def after(self, y_next: list[list[Fraction]]) -> list[Fraction]:
        """Tail bounds given ``y_next[i] = B^{m+1} e_i``."""
        out = []
        for y in y_next:
            explicit = Fraction(0)
            l1 = Fraction(0)
            for s in range(self.L):
                z = mat_vec(self.powers[s], y)
                explicit += self.N(z)
                l1 += sum(abs(x) for x in z)
            out.append(explicit + self.wmax * self.q / (1 - self.q) * l1)
        return out


def drift_vector(dyn) -> list[Fraction] | None:
    C = dyn.drift_constants
    return None if C is None else [Fraction(c) for c in C]


class Schedule:
    """Point-independent data of the Tate iteration for one system.

    ``pairings(m)[i] = P B^m e_i`` and ``tail(m)[i]`` bounds the distance
    from the m-th term to the limit (None without drift constants).
    """

    def __init__(self, P, Aplus, C: Sequence[Fraction] | None):
        self.P = P
        self.k = len(Aplus)
        self.B = mat_inv(Aplus)
        self.bound = _Tail(P, self.B, C)
        self.rigorous = self.bound.ok
        self._ys = [[[Fraction(int(i == j)) for j in range(self.k)] for i in range(self.k)]]
        self._pe = []
        self._tails = []

    def _y(self, m):
        while len(self._ys) <= m:
            self._ys.append([mat_vec(self.B, y) for y in self._ys[-1]])
        return self._ys[m]

    def pairings(self, m):
        while len(self._pe) <= m:
            self._pe.append([mat_vec(self.P, y) for y in self._y(len(self._pe))])
        return self._pe[m]

    def tail(self, m):
        if not self.rigorous:
            return None
        while len(self._tails) <= m:
            self._tails.append(self.bound.after(self._y(len(self._tails) + 1)))
        return self._tails[m]


# ---------------------------------------------------------------------------
# engine

def _tate(dyn, a, sched: Schedule, kappa_lo, kappa_hi, tol, max_iter, orbit=None, window=EXACT_WINDOW,
          max_degree=MAX_DEGREE) -> HeightCertificate:
    tol = Fraction(tol)
    P, k = sched.P, sched.k
    rigorous = sched.rigorous
    orbit = orbit or Orbit(dyn, a, max_degree)
    history = []
    last_inc = [Fraction(0)] * k
    basis = [[P[r][i] for r in range(len(P))] for i in range(k)]
    m = 0
    while True:
        h = orbit.height(m)
        vals = [pairing(h, pe) for pe in sched.pairings(m)]
        if history:
            last_inc = [abs(v - w) for v, w in zip(vals, history[-1])]
        history.append(vals)
        rig = sched.tail(m)
        reason = None
        if rigorous and all(r == 0 for r in rig):
            reason = "exact-drift-free"
        elif len(history) >= window and all(history[-1] == hv for hv in history[-window:]):
            reason = "exact-stable"
        elif rigorous and max(rig) <= tol:
            reason = "tolerance"
        elif not rigorous and m >= 1 and max(_heuristic(last_inc, kappa_lo)) <= tol:
            reason = "tolerance"
        elif m >= max_iter:
            reason = "max-iter"
        if reason is not None:
            if reason.startswith("exact"):
                rigor, radius = "Exact", [Fraction(0)] * k
            elif rigorous:
                rigor, radius = "Rigorous", rig
            else:
                rigor, radius = "Heuristic", _heuristic(last_inc, kappa_lo)
            return HeightCertificate(vals, radius, rig, m, last_inc, rigor, basis, reason,
                                     kappa_lo, kappa_hi, history)
        m += 1


def _heuristic(last_inc, kappa_lo) -> list[Fraction]:
    kap = Fraction(kappa_lo)
    return [x * kap / (kap - 1) for x in last_inc]


def canonical_height_scalar(dyn, a, e: Sequence, tol=DEFAULT_TOL, max_iter: int | None = None,
                            orbit=None, max_degree=MAX_DEGREE) -> HeightCertificate:
    """``lim kappa^-m h_0(phi^m a, e)`` for an eigenvector ``S* e = kappa e``."""
    A = ns_action(dyn)
    e = [Fraction(x) for x in e]
    if len(e) != A.rank or not any(e):
        raise NotEigenvector("e must be a nonzero vector of the NS rank")
    Se = mat_vec(A.Sstar, e)
    i0 = next(i for i, x in enumerate(e) if x)
    kappa = Se[i0] / e[i0]
    if any(s != kappa * x for s, x in zip(Se, e)):
        raise NotEigenvector(f"S* e = {Se} is not a multiple of e = {e}")
    if kappa <= 1:
        raise NotExpanding(f"eigenvalue {kappa} is not > 1")
    if max_iter is None:
        max_iter = default_max_iter(dyn.field)
    sched = Schedule([[x] for x in e], [[kappa]], drift_vector(dyn))
    return _tate(dyn, a, sched, kappa, kappa, tol, max_iter, orbit, max_degree=max_degree)


@dataclass
class _SplitData:
    split: SpectralSplit
    P: list
    Aplus: list
    schedule: Schedule


def split_data(dyn, split: SpectralSplit | None = None) -> _SplitData:
    A = ns_action(dyn)
    split = split or spectral_split(A)
    if not split.Eplus:
        raise EmptyEplus("E+ is zero: no expanding direction")
    P = columns_to_matrix(split.Eplus, A.rank)
    return _SplitData(split, P, split.Aplus, Schedule(P, split.Aplus, drift_vector(dyn)))


def canonical_height_vector(dyn, a, tol=DEFAULT_TOL, max_iter: int | None = None, split=None,
                            orbit=None, max_degree=MAX_DEGREE) -> HeightCertificate:
    """One coordinate per E+ basis vector."""
    sd = split if isinstance(split, _SplitData) else split_data(dyn, split)
    if max_iter is None:
        max_iter = default_max_iter(dyn.field)
    return _tate(dyn, a, sd.schedule, sd.split.kappa_lo, sd.split.kappa_hi, tol, max_iter, orbit,
                 max_degree=max_degree)


def drift_bounds(dyn, split=None) -> list[Fraction] | None:
    """Proven bounds on ``|hhat(a)(e_i) - h_0(a, e_i)|`` for all ``a``."""
    sd = split if isinstance(split, _SplitData) else split_data(dyn, split)
    return sd.schedule.tail(0)


@dataclass
class FunctionalEquationReport:
    residual: Fraction  # max |hhat(phi a)(e_i) - hhat(a)(S* e_i)| at the centers
    allowed: Fraction  # combined radii + tol for the worst coordinate
    ok: bool
    residual_upper: Fraction  # residual plus the combined radii
    cert_a: HeightCertificate
    cert_phi_a: HeightCertificate


def functional_equation_check(dyn, a, tol=DEFAULT_TOL, max_iter: int | None = None, split=None,
                              max_degree=MAX_DEGREE) -> FunctionalEquationReport:
    """Compare ``hhat(phi a)`` with ``hhat(a) o S*`` coordinate by coordinate."""
    sd = split if isinstance(split, _SplitData) else split_data(dyn, split)
    orbit = Orbit(dyn, a, max_degree)
    ca = canonical_height_vector(dyn, a, tol, max_iter, sd, orbit)
    orbit_b = Orbit(dyn, orbit[1], max_degree)
    orbit_b.points = orbit.points[1:]
    orbit_b.heights = orbit.heights[1:]
    cb = canonical_height_vector(dyn, orbit[1], tol, max_iter, sd, orbit_b)
    A = sd.Aplus
    k = len(A)
    worst_res, worst_allowed, worst_upper, ok = Fraction(0), Fraction(0), Fraction(0), True
    for i in range(k):
        rhs = sum((A[j][i] * ca.values[j] for j in range(k)), Fraction(0))
        res = abs(cb.values[i] - rhs)
        rad = cb.radius[i] + sum((abs(A[j][i]) * ca.radius[j] for j in range(k)), Fraction(0))
        allowed = rad + Fraction(tol)
        if res > allowed:
            ok = False
        worst_res = max(worst_res, res)
        worst_allowed = max(worst_allowed, allowed)
        worst_upper = max(worst_upper, res + rad)
    return FunctionalEquationReport(worst_res, worst_allowed, ok, worst_upper, ca, cb)


# ---------------------------------------------------------------------------
# base change

def basechange_pullback(dyn, u: Poly):
    """The system with ``t -> u(t)`` substituted in every coefficient."""
    return dyn.substitute_base(u)


def basechange_point(a, u: Poly):
    return a.substitute_base(u)


@dataclass
class BasechangeReport:
    factor: int
    original: HeightCertificate
    pulled: HeightCertificate
    difference: Fraction
    allowed: Fraction
    ok: bool


def basechange_check(dyn, a, u: Poly, tol=DEFAULT_TOL, max_iter: int | None = None) -> BasechangeReport:
    """``hhat_{pullback}(a o u) = deg(u) * hhat(a)`` within combined radii."""
    pulled = basechange_pullback(dyn, u)
    a = as_state(dyn, a)
    c1 = canonical_height_vector(dyn, a, tol, max_iter)
    c2 = canonical_height_vector(pulled, basechange_point(a, u), tol, max_iter)
    deg = u.degree
    diff = max(abs(x - deg * y) for x, y in zip(c2.values, c1.values))
    allowed = max(r2 + deg * r1 for r1, r2 in zip(c1.radius, c2.radius)) + Fraction(tol)
    return BasechangeReport(deg, c1, c2, diff, allowed, diff <= allowed)


# ---------------------------------------------------------------------------
# boundedness sampling

@dataclass
class BoundednessReport:
    empirical_max: list[Fraction]
    bounds: list[Fraction] | None
    max_radius: list[Fraction]
    samples: int
    ok: bool | None


def boundedness_report(dyn, points, tol=DEFAULT_TOL, max_iter: int | None = None) -> BoundednessReport:
    """Empirical ``max |hhat(a)(e_i) - h_0(a, e_i)|`` against the proven bound."""
    sd = split_data(dyn)
    k = len(sd.Aplus)
    emp = [Fraction(0)] * k
    rad = [Fraction(0)] * k
    count = 0
    for a in points:
        cert = canonical_height_vector(dyn, a, tol, max_iter, sd)
        h = height_vector(as_state(dyn, a))
        for i in range(k):
            e = [sd.P[r][i] for r in range(len(sd.P))]
            emp[i] = max(emp[i], abs(cert.values[i] - pairing(h, e)))
            rad[i] = max(rad[i], cert.radius[i])
        count += 1
    bounds = drift_bounds(dyn, sd)
    ok = None if bounds is None else all(x <= b + r for x, b, r in zip(emp, bounds, rad))
    return BoundednessReport(emp, bounds, rad, count, ok)


def thread_count() -> int:
    """Parallelism cap from HEIGHTFORGE_THREADS (default 1)."""
    raw = os.environ.get("HEIGHTFORGE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"HEIGHTFORGE_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError(f"HEIGHTFORGE_THREADS must be a positive integer, got {raw!r}")
    return n
