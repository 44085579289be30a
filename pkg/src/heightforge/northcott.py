"""Bounded-height enumeration over F_p(t) and orbit classification.

Points of ``P^{n_1} x ... x P^{n_k}`` with per-factor heights ``h_i <= B_i``
are listed in a fixed order: each factor's points are sorted by height, then
by their coordinates (each compared by degree, then coefficients from the top
down); the product is taken lexicographically with the first factor slowest.
A factor's coordinates are coprime with the first nonzero one monic.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from itertools import product
from typing import Iterator, Sequence

from .algebra import BaseField, Poly, poly_gcd_many
from .canheight import (
    MAX_DEGREE,
    HeightCertificate,
    canonical_height_vector,
    drift_bounds,
    predicted_degree,
    split_data,
)
from .errors import EnumerationTooLarge, HypothesisFailed, RationalsNotEnumerable, ResourceAbort, ValidationError
from .nslattice import kronecker_classify, ns_action
from .projective import MultiPoint, Space, pairing

ENUMERATION_LIMIT = 10**6


def _coprime_tuples(q: int, n: int, B: int) -> int:
    """Nonzero (n+1)-tuples of polynomials of degree <= B with unit gcd."""
    if B < 0:
        return 0
    total = q ** ((B + 1) * (n + 1)) - 1
    # tuples whose gcd has degree k >= 1: monic gcd times a coprime tuple
    return total - sum(q**k * _coprime_tuples(q, n, B - k) for k in range(1, B + 1))


def count_points(field: BaseField, space: Space, B) -> int:
    """Exact number of points of height ``<= B`` (per factor)."""
    q = _require_finite(field)
    out = 1
    for n, B in zip(space.dims, _caps(space, B)):
        out *= _coprime_tuples(q, n, B) // (q - 1)
    return out


def _require_finite(field: BaseField) -> int:
    if not field.characteristic:
        raise RationalsNotEnumerable("points of bounded height over Q(t) form an infinite set")
    return field.characteristic


def _caps(space: Space, B) -> list[int]:
    caps = [B] * len(space.dims) if isinstance(B, int) else list(B)
    if len(caps) != len(space.dims) or any(b < 0 for b in caps):
        raise ValidationError(f"need one nonnegative height cap per factor of {space}")
    return caps


def _polys_upto(field: BaseField, B: int) -> list[Poly]:
    p = field.characteristic
    return [Poly(field, cs) for cs in product(range(p), repeat=B + 1)]


def factor_points(field: BaseField, n: int, B: int) -> list[tuple[Poly, ...]]:
    """Normalized coprime (n+1)-tuples of height <= B, in canonical order."""
    polys = _polys_upto(field, B)
    out = []
    for tup in product(polys, repeat=n + 1):
        lead = next((c for c in tup if not c.is_zero()), None)
        if lead is None or lead.lc != 1:
            continue
        if poly_gcd_many(tup, field).degree > 0:
            continue
        out.append(tup)
    out.sort(key=lambda tup: (max(c.degree for c in tup), tuple(c.sort_key() for c in tup)))
    return out


def enumerate_points(field: BaseField, space: Space, B, limit: int = ENUMERATION_LIMIT) -> Iterator[MultiPoint]:
    """Every point with ``h_i <= B_i`` exactly once."""
    caps = _caps(space, B)
    total = count_points(field, space, caps)
    if total > limit:
        raise EnumerationTooLarge(f"{total} points exceed the enumeration limit {limit}")
    lists = [factor_points(field, n, b) for n, b in zip(space.dims, caps)]
    for combo in product(*lists):
        yield MultiPoint(space, combo, normalized=True)


# ---------------------------------------------------------------------------
# orbits

@dataclass
class OrbitVerdict:
    kind: str  # Preperiodic | UnboundedCertified | Unknown
    tail: int | None = None
    cycle: int | None = None
    revisited: MultiPoint | None = None
    hhat_lower: Fraction | None = None
    steps: int = 0
    max_height: int = 0
    certificate: HeightCertificate | None = None

    def __str__(self):
        if self.kind == "Preperiodic":
            return f"Preperiodic({self.tail},{self.cycle})"
        if self.kind == "UnboundedCertified":
            return f"UnboundedCertified({self.hhat_lower})"
        return f"Unknown({self.steps},{self.max_height})"


def orbit_analyze(dyn, a: MultiPoint, max_steps: int = 64, height_cap: int | None = None,
                  tol=Fraction(1, 10**6), max_iter: int | None = None, split=None) -> OrbitVerdict:
    """Exact cycle detection, then a canonical-height certificate.

    Cycle detection stops early once the orbit leaves the region where a
    height-0 point can live (``|h_0(x, e_i)| <= drift bound`` for each E+
    basis vector), or exceeds ``height_cap``.
    """
    sd = split if split is not None else split_data(dyn)
    bounds = drift_bounds(dyn, sd)
    basis = [[sd.P[r][i] for r in range(len(sd.P))] for i in range(len(sd.Aplus))]
    seen = {a: 0}
    x = a
    hmax = max(a.height())
    steps = 0
    for m in range(1, max_steps + 1):
        if predicted_degree(dyn, x) > MAX_DEGREE:
            break
        x = dyn.apply(x)
        steps = m
        if x in seen:
            return OrbitVerdict("Preperiodic", seen[x], m - seen[x], x, steps=m, max_height=hmax)
        seen[x] = m
        hmax = max(hmax, max(x.height()))
        if height_cap is not None and hmax > height_cap:
            break
        if bounds is not None and any(abs(pairing(x.height(), e)) > b for e, b in zip(basis, bounds)):
            break
    try:
        cert = canonical_height_vector(dyn, a, tol, max_iter, sd)
    except ResourceAbort:
        return OrbitVerdict("Unknown", steps=steps, max_height=hmax)
    lows = [cert.enclosure(i)[0] for i in range(len(cert.values))]
    highs = [cert.enclosure(i)[1] for i in range(len(cert.values))]
    best = None
    for lo, hi in zip(lows, highs):
        if lo > 0:
            best = lo if best is None else max(best, lo)
        elif hi < 0:
            best = -hi if best is None else max(best, -hi)
    if best is not None:
        return OrbitVerdict("UnboundedCertified", hhat_lower=best, steps=steps, max_height=hmax, certificate=cert)
    return OrbitVerdict("Unknown", steps=steps, max_height=hmax, certificate=cert)


def in_box(x: MultiPoint, caps: Sequence[int]) -> bool:
    return all(h <= b for h, b in zip(x.height(), caps))


def chain_length(dyn, a: MultiPoint, caps: Sequence[int], limit: int) -> int:
    """Largest k with ``a, phi(a), ..., phi^k(a)`` all inside the box."""
    k = 0
    x = a
    while k < limit:
        x = dyn.apply(x)
        if not in_box(x, caps):
            return k
        k += 1
    raise ValidationError("orbit stayed in the box longer than its size; point is preperiodic")


# ---------------------------------------------------------------------------
# desk verification

@dataclass
class NorthcottReport:
    caps: list[int]
    count: int
    preperiodic: int
    unbounded: int
    unknown: int
    hypothesis_ok: bool
    hypothesis_note: str
    biconditional: bool | None
    mismatches: list[MultiPoint]
    chain_bound: int
    chain_witness: MultiPoint | None
    verdicts: list[tuple[MultiPoint, OrbitVerdict]] = dc_field(default_factory=list, repr=False)
    # exceptional sets are taken to be the preperiodic locus
    note: str = "exceptional set taken as the preperiodic locus"


def check_hypothesis(dyn) -> tuple[bool, str]:
    """No power of S^t may fix a non-torsion class: no cyclotomic factor."""
    rep = kronecker_classify(ns_action(dyn).St)
    if rep.cyclotomic_factors:
        idx = ", ".join(f"Phi_{n}^{m}" for n, m in rep.cyclotomic_factors)
        return False, f"charpoly(S^t) has cyclotomic factors {idx}"
    return True, "no cyclotomic factor in charpoly(S^t)"


def northcott_verify(dyn, B, limit: int = ENUMERATION_LIMIT, max_steps: int | None = None,
                     strict: bool = False) -> NorthcottReport:
    """Classify every point of height <= B and compute the chain bound."""
    caps = _caps(dyn.space, B)
    ok, note = check_hypothesis(dyn)
    if strict and not ok:
        raise HypothesisFailed(note)
    total = count_points(dyn.field, dyn.space, caps)
    steps = max_steps if max_steps is not None else total + 1
    split = split_data(dyn) if ok else None
    verdicts = []
    mismatches = []
    pre = unb = unk = 0
    for a in enumerate_points(dyn.field, dyn.space, caps, limit):
        v = _classify(dyn, a, steps, split)
        verdicts.append((a, v))
        if v.kind == "Preperiodic":
            pre += 1
        elif v.kind == "UnboundedCertified":
            unb += 1
        else:
            unk += 1
    bicond = None
    if ok:
        bicond = True
        for a, v in verdicts:
            cert = v.certificate or canonical_height_vector(dyn, a, split=split)
            v.certificate = cert
            zero = cert.encloses_zero()
            if zero != (v.kind == "Preperiodic"):
                bicond = False
                mismatches.append(a)
    n, witness = 0, None
    for a, v in verdicts:
        if v.kind == "Preperiodic":
            continue
        k = chain_length(dyn, a, caps, total + 1)
        if k + 1 > n:
            n, witness = k + 1, a
    return NorthcottReport(caps, total, pre, unb, unk, ok, note, bicond, mismatches, n, witness, verdicts)


def _classify(dyn, a, steps, split) -> OrbitVerdict:
    if split is None:
        # hypothesis failed: cycle detection only
        seen = {a: 0}
        x = a
        for m in range(1, steps + 1):
            if predicted_degree(dyn, x) > MAX_DEGREE:
                return OrbitVerdict("Unknown", steps=m - 1, max_height=max(x.height()))
            x = dyn.apply(x)
            if x in seen:
                return OrbitVerdict("Preperiodic", seen[x], m - seen[x], x, steps=m)
            seen[x] = m
        return OrbitVerdict("Unknown", steps=steps, max_height=max(x.height()))
    return orbit_analyze(dyn, a, steps, None, split=split)
