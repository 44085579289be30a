"""Bundled example systems and seeded random points."""

from __future__ import annotations

import random
from importlib import resources

from .algebra import BaseField, Poly
from .dynparse import load_dynamics
from .errors import ValidationError
from .projective import MultiPoint, Space


def system_names() -> list[str]:
    files = resources.files("heightforge").joinpath("systems")
    return sorted(p.name[:-4] for p in files.iterdir() if p.name.endswith(".dyn"))


def system_text(name: str) -> str:
    path = resources.files("heightforge").joinpath("systems", f"{name}.dyn")
    if not path.is_file():
        raise ValidationError(f"no bundled system named {name!r}")
    return path.read_text(encoding="utf-8")


def load_system(name: str):
    return load_dynamics(system_text(name))


def resolve_dyn(arg: str):
    """A path to a dynamics file, or the name of a bundled system."""
    from pathlib import Path

    p = Path(arg)
    if p.is_file():
        return load_dynamics(p)
    stem = p.name[:-4] if p.name.endswith(".dyn") else p.name
    if stem in system_names():
        return load_system(stem)
    raise ValidationError(f"no such dynamics file or bundled system: {arg}")


def random_poly(field: BaseField, degree: int, rng: random.Random, coeff_bound: int = 3) -> Poly:
    """Degree <= ``degree``; over Q coefficients in [-coeff_bound, coeff_bound]."""
    if field.characteristic:
        cs = [rng.randrange(field.characteristic) for _ in range(degree + 1)]
    else:
        cs = [rng.randint(-coeff_bound, coeff_bound) for _ in range(degree + 1)]
    return Poly(field, cs)


def random_point(field: BaseField, space: Space, height_cap: int, rng: random.Random) -> MultiPoint:
    """Each factor: a uniform height in [0, cap], then random coordinates of
    that degree (retried until the normalized height is exact)."""
    factors = []
    for n in space.dims:
        target = rng.randint(0, height_cap)
        while True:
            coords = [random_poly(field, target, rng) for _ in range(n + 1)]
            if all(c.is_zero() for c in coords):
                continue
            f = MultiPoint(Space((n,)), [coords]).factors[0]
            if max(c.degree for c in f) == target:
                factors.append(f)
                break
    return MultiPoint(space, factors, normalized=True)


def random_points(field: BaseField, space: Space, height_cap: int, count: int, seed: int = 0) -> list[MultiPoint]:
    rng = random.Random(seed)
    return [random_point(field, space, height_cap, rng) for _ in range(count)]
