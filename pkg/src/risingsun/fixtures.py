"""Named densities and a seeded random density generator.

``paper-counterexample`` is ``f = 1 - indicator([1/2, 1]^2)`` on the unit
square with Lebesgue measure. The closed square and indicator are stored
half-open on a 2x2 grid; the difference is a null set.
"""
from __future__ import annotations

import itertools
import random
from gmpy2 import mpq
from typing import Optional

from .density import GridDensity
from .geometry import Rectangle


class UnknownPresetError(KeyError):
    pass


def paper_counterexample() -> GridDensity:
    domain = Rectangle.from_bounds([(0, 1), (0, 1)])
    return GridDensity.uniform(domain, [2, 2], [mpq(v) for v in (1, 1, 1, 0)])


def riesz_1d_step() -> GridDensity:
    domain = Rectangle.from_bounds([(0, 1)])
    return GridDensity.uniform(domain, [2], [mpq(2), mpq(0)])


def _rational(rng: random.Random, bound: int, max_den: int = 4, nonneg: bool = False) -> mpq:
    q = rng.randint(1, max_den)
    lo = 0 if nonneg else -bound * q
    return mpq(rng.randint(lo, bound * q), q)


def random_density(rng: random.Random, dim: Optional[int] = None, max_cells: int = 8,
                   f_bound: int = 16, w_bound: int = 4, nonneg: bool = False,
                   lebesgue: bool = False, cube: bool = False,
                   nonuniform: Optional[bool] = None) -> GridDensity:
    """Random rational density with ``|f| <= f_bound`` and ``0 <= w <= w_bound``.

    Domain corners and non-uniform cell edges are random rationals as well.
    """
    dim = dim or rng.choice((1, 2, 3))
    if cube:
        lo = [mpq(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(dim)]
        side = mpq(rng.randint(1, 6), rng.randint(1, 3))
        bounds = [(a, a + side) for a in lo]
        m = rng.randint(1, max_cells)
        cells = [m] * dim
    else:
        bounds = []
        for _ in range(dim):
            a = mpq(rng.randint(-4, 4), rng.randint(1, 3))
            bounds.append((a, a + mpq(rng.randint(1, 6), rng.randint(1, 3))))
        cells = [rng.randint(1, max_cells) for _ in range(dim)]
    domain = Rectangle.from_bounds(bounds)
    if nonuniform is None:
        nonuniform = not cube and rng.random() < 0.3
    n_cells = 1
    for m in cells:
        n_cells *= m
    f = [_rational(rng, f_bound, nonneg=nonneg) for _ in range(n_cells)]
    if lebesgue:
        w = [mpq(1)] * n_cells
    else:
        w = [mpq(0) if rng.random() < 0.15 else _rational(rng, w_bound, nonneg=True)
             for _ in range(n_cells)]
        if not any(w):
            w[rng.randrange(n_cells)] = mpq(1)
    d = GridDensity.uniform(domain, cells, f, w)
    if nonuniform:
        edges = []
        for (a, b), m in zip(bounds, cells):
            cuts = sorted({a + (b - a) * mpq(rng.randint(1, 63), 64) for _ in range(m - 1)})
            while len(cuts) < m - 1:
                cuts = sorted(set(cuts) | {a + (b - a) * mpq(rng.randint(1, 63), 64)})
            edges.append(tuple([a] + cuts + [b]))
        d = GridDensity(domain, tuple(edges), d.f, d.w)
    return d


def random_level(rng: random.Random, d: GridDensity, mean) -> mpq:
    """A level at or above ``mean``, usually below the largest live value of ``f``."""
    live = [fv for fv, wv in zip(d.f, d.w) if wv > 0]
    top = max(live)
    if rng.random() < 0.1 or top <= mean:
        return mean + (mpq(rng.randint(0, 3), 4) if rng.random() < 0.5 else 0)
    return mean + (top - mean) * mpq(rng.randint(0, 15), 16)


def adversarial_density(rng: random.Random, dim: Optional[int] = None) -> GridDensity:
    """Checkerboard-like spikes on a fine grid: many thin regions above the mean."""
    dim = dim or rng.choice((1, 2, 3))
    m = {1: 32, 2: 8, 3: 4}[dim]
    domain = Rectangle.from_bounds([(0, 1)] * dim)
    spike = mpq(rng.randint(4, 16))
    f = []
    for idx in itertools.product(range(m), repeat=dim):
        if sum(idx) % 2 == 0 and rng.random() < 0.7:
            f.append(spike)
        else:
            f.append(mpq(rng.randint(-8, 0), rng.randint(1, 3)))
    w = [mpq(rng.randint(1, 4), rng.randint(1, 2)) for _ in f]
    return GridDensity.uniform(domain, [m] * dim, f, w)


PRESETS = {
    "paper-counterexample": lambda seed: paper_counterexample(),
    "riesz-1d-step": lambda seed: riesz_1d_step(),
    "random": lambda seed: random_density(random.Random(seed)),
}


def preset(name: str, seed: int = 0) -> GridDensity:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise UnknownPresetError(name) from None
    return factory(seed)
