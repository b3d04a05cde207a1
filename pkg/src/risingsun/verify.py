"""Independent checks of a decomposition against its density.

Nothing cached in a :class:`~risingsun.decompose.Decomposition` is trusted:
means, masses and the residual set are all recomputed from the density in
exact arithmetic. Float-mode rectangles are converted to the exact rationals
their binary values denote, so float output is judged exactly too, at a
caller-supplied tolerance.
"""
from __future__ import annotations

import itertools
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np
from gmpy2 import mpq

from .decompose import CutSelected, CZResult, Decomposition, DivisionNode, SelectedWhole, SplitBoth
from .density import GridDensity, build_tables
from .geometry import Interval, Rectangle, Relation, exact, relation, volume

DEFAULT_FLOAT_TOLERANCE = mpq(1, 10**9)


def exact_rect(r: Rectangle) -> Rectangle:
    return r.to_exact()


def _exact_density(d: GridDensity) -> GridDensity:
    return d.to_exact()


def check_disjoint(rects: Sequence[Rectangle]) -> bool:
    """True iff the rectangles are pairwise disjoint as half-open sets."""
    rects = [r for r in rects if not r.is_degenerate()]
    order = sorted(range(len(rects)), key=lambda i: rects[i].sides[0].lo)
    for pos, i in enumerate(order):
        ri = rects[i]
        for j in order[pos + 1:]:
            rj = rects[j]
            if rj.sides[0].lo >= ri.sides[0].hi:
                break
            if relation(ri, rj) is not Relation.DISJOINT:
                return False
    return True


class MeanCheck(NamedTuple):
    ok: bool
    worst_deviation: mpq
    failures: tuple[str, ...] = ()


def check_means(t, rects: Sequence[Rectangle], A, tolerance=0) -> MeanCheck:
    """Every ``|integral_f - A * measure| <= tolerance * measure``.

    ``tolerance = 0`` is the exact contract. A rectangle of zero measure has
    no mean and is reported as a failure.
    """
    A = exact(A)
    tolerance = exact(tolerance)
    worst = exact(0)
    failures = []
    for r in rects:
        fi, mu = t.masses(exact_rect(r))
        if mu == 0:
            failures.append(f"{r}: zero measure, mean undefined")
            continue
        dev = abs(fi / mu - A)
        worst = max(worst, dev)
        if abs(fi - A * mu) > tolerance * mu:
            failures.append(f"{r}: mean {fi / mu} != {A}")
    return MeanCheck(not failures, worst, tuple(failures))


def _compress(rects: Sequence[Rectangle], dim: int):
    """Sorted breakpoints per axis and the covered mask of the compressed boxes."""
    coords = [sorted({s for r in rects for s in (r.sides[a].lo, r.sides[a].hi)}) for a in range(dim)]
    covered = np.zeros(tuple(max(len(c) - 1, 0) for c in coords), dtype=bool)
    for r in rects:
        if r.is_degenerate():
            continue
        sl = tuple(slice(bisect_left(c, s.lo), bisect_left(c, s.hi)) for c, s in zip(coords, r.sides))
        covered[sl] = True
    return coords, covered


def _union_volume(rects: Sequence[Rectangle]) -> mpq:
    if not rects:
        return exact(0)
    coords, covered = _compress(rects, rects[0].dim)
    widths = [[b - a for a, b in zip(c, c[1:])] for c in coords]
    total = exact(0)
    for idx in zip(*np.nonzero(covered)):
        v = exact(1)
        for w, k in zip(widths, idx):
            v *= w[k]
        total += v
    return total


def union_measure(d: GridDensity, rects: Sequence[Rectangle]) -> mpq:
    """Exact ``mu`` of the union, by coordinate compression on the rectangles' breakpoints.

    Each compressed box lies entirely inside or outside the union; covered
    boxes are measured through the cumulative table.
    """
    d = _exact_density(d)
    rects = [exact_rect(r) for r in rects if not r.is_degenerate()]
    if not rects:
        return exact(0)
    t = build_tables(d)
    coords, covered = _compress(rects, d.dim)
    total = exact(0)
    for idx in zip(*np.nonzero(covered)):
        box = Rectangle(tuple(Interval(c[k], c[k + 1]) for c, k in zip(coords, idx)))
        total += t.masses(box)[1]
    return total


def residual_violation_measure(d: GridDensity, selected: Sequence[Rectangle], A) -> mpq:
    """``mu`` of the set where ``f > A`` outside the union of ``selected``.

    Worked cell by cell: a cell with ``f > A`` and ``w > 0`` contributes its
    mass minus ``w`` times the volume of its intersection with the union.
    """
    d = _exact_density(d)
    A = exact(A)
    selected = [exact_rect(r) for r in selected if not r.is_degenerate()]
    # bucket each rectangle into the cells it meets
    buckets: dict[tuple, list[Rectangle]] = {}
    for r in selected:
        ranges = d.cell_range(r)
        if ranges is None:
            continue
        for idx in itertools.product(*ranges):
            buckets.setdefault(idx, []).append(r)
    total = exact(0)
    for idx, flat in d.cells():
        fv, wv = d.f[flat], d.w[flat]
        if not (fv > A and wv > 0):
            continue
        cell = d.cell_rect(idx)
        pieces = [p for p in (cell.intersection(r) for r in buckets.get(idx, ())) if p is not None]
        total += wv * (volume(cell) - _union_volume(pieces))
    return total


def _j_family(dec_or_rects) -> list[Rectangle]:
    if isinstance(dec_or_rects, Decomposition):
        return [exact_rect(r) for r in dec_or_rects.division_rects()]
    if isinstance(dec_or_rects, DivisionNode):
        return [exact_rect(n.rect) for n in dec_or_rects.walk() if n.is_division]
    return [exact_rect(r) for r in dec_or_rects]


def check_dyadic_property(dec) -> bool:
    """Any two division rectangles are nested or disjoint.

    Accepts a Decomposition, a tree root, or a bare list of rectangles
    standing in for the division family.
    """
    rects = [r for r in _j_family(dec) if not r.is_degenerate()]
    order = sorted(range(len(rects)), key=lambda i: rects[i].sides[0].lo)
    for pos, i in enumerate(order):
        ri = rects[i]
        for j in order[pos + 1:]:
            rj = rects[j]
            if rj.sides[0].lo >= ri.sides[0].hi:
                break
            if not relation(ri, rj).nested_or_disjoint:
                return False
    return True


def _cut_axes(parent: Rectangle, child: Rectangle) -> list[int]:
    return [a for a, (p, c) in enumerate(zip(parent.sides, child.sides)) if p != c]


def check_halving_and_decay(dec, tolerance=0) -> tuple[bool, bool]:
    """Halving of every non-selected child and n-level decay of the longest side.

    Halving: a child that keeps being divided (or ends as a residual leaf)
    differs from its parent on one axis only, with at most half the extent.
    Decay: along such chains, a node ``n`` levels below another has longest
    side at most half of the ancestor's.
    """
    root = dec.root if isinstance(dec, Decomposition) else dec
    if root is None:
        return True, True
    tolerance = exact(tolerance)
    slack = 1 + tolerance
    halving_ok = True
    decay_ok = True
    n = root.rect.dim
    # (node, chain of longest sides of non-selected ancestors, nearest last)
    stack = [(root, ())]
    while stack:
        node, chain = stack.pop()
        rect = exact_rect(node.rect)
        longest = max(rect.lengths)
        if len(chain) >= n and longest > chain[-n] / 2 * slack:
            decay_ok = False
        outcome = node.outcome
        if isinstance(outcome, SplitBoth):
            followed = [outcome.lower, outcome.upper]
        elif isinstance(outcome, CutSelected):
            followed = [outcome.continuing]
        else:
            followed = []
        for child in followed:
            crect = exact_rect(child.rect)
            axes = _cut_axes(rect, crect)
            if len(axes) != 1:
                halving_ok = False
                continue
            a = axes[0]
            if crect.sides[a].length > rect.sides[a].length / 2 * slack:
                halving_ok = False
            stack.append((child, chain + (longest,)))
    return halving_ok, decay_ok


@dataclass
class VerificationReport:
    disjoint_ok: bool
    means_ok: bool
    worst_mean_deviation: mpq
    residual_violation: mpq
    residual_ok: bool
    dyadic_ok: Optional[bool]
    halving_ok: Optional[bool]
    diameter_decay_ok: Optional[bool]
    cz_bounds_ok: Optional[bool] = None
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        flags = [self.disjoint_ok, self.means_ok, self.residual_ok, self.dyadic_ok,
                 self.halving_ok, self.diameter_decay_ok, self.cz_bounds_ok]
        return all(f is not False for f in flags)

    def render(self) -> str:
        def fmt(v):
            if v is None:
                return "n/a"
            if isinstance(v, bool):
                return "true" if v else "false"
            if isinstance(v, mpq):
                return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
            return str(v)

        lines = [
            f"disjoint_ok: {fmt(self.disjoint_ok)}",
            f"means_ok: {fmt(self.means_ok)}",
            f"worst_mean_deviation: {fmt(self.worst_mean_deviation)}",
            f"residual_violation: {fmt(self.residual_violation)}",
            f"residual_ok: {fmt(self.residual_ok)}",
            f"dyadic_ok: {fmt(self.dyadic_ok)}",
            f"halving_ok: {fmt(self.halving_ok)}",
            f"diameter_decay_ok: {fmt(self.diameter_decay_ok)}",
            f"cz_bounds_ok: {fmt(self.cz_bounds_ok)}",
            f"passed: {fmt(self.passed)}",
        ]
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def _inside(domain: Rectangle, rects) -> bool:
    return all(domain.contains_rect(r) for r in rects)


def verify_decomposition(d: GridDensity, dec: Decomposition, tolerance=0) -> VerificationReport:
    """Run every check; ``tolerance`` is relative (0 for exact output)."""
    d = _exact_density(d)
    tolerance = exact(tolerance)
    t = build_tables(d)
    A = exact(dec.level)
    selected = [exact_rect(r) for r in dec.selected]
    disjoint = check_disjoint(selected) and _inside(d.domain, selected)
    mc = check_means(t, selected, A, tolerance)
    violation = residual_violation_measure(d, selected, A)
    total = t.total_mass()
    residual_ok = violation <= tolerance * total
    notes = list(mc.failures)
    if dec.root is None:
        dyadic = halving = decay = None
        notes.append("no division tree supplied; structural checks skipped")
    else:
        dyadic = check_dyadic_property(dec)
        halving, decay = check_halving_and_decay(dec, tolerance)
    return VerificationReport(disjoint, mc.ok, mc.worst_deviation, violation, residual_ok,
                              dyadic, halving, decay, None, notes)


def check_cz_bounds(t, cubes: Sequence[Rectangle], A, n: int) -> bool:
    """Every cube has mean in ``(A, 2**n A]``, recomputed exactly."""
    A = exact(A)
    for c in cubes:
        fi, mu = t.masses(exact_rect(c))
        if mu == 0:
            return False
        m = fi / mu
        if not (A < m <= 2**n * A):
            return False
    return True


def verify_cz(d: GridDensity, result: Union[CZResult, Sequence], A=None) -> VerificationReport:
    """Checks for a Calderon-Zygmund cube family: disjointness, bracket, residual."""
    d = _exact_density(d)
    if isinstance(result, CZResult):
        A = result.level
        cubes = [c for c, _ in result.cubes]
    else:
        cubes = [c for c, _ in result]
    A = exact(A)
    t = build_tables(d)
    cubes = [exact_rect(c) for c in cubes]
    violation = residual_violation_measure(d, cubes, A)
    means = [t.masses(c) for c in cubes]
    worst = max((abs(fi / mu - A) for fi, mu in means if mu), default=exact(0))
    return VerificationReport(
        disjoint_ok=check_disjoint(cubes) and _inside(d.domain, cubes),
        means_ok=None,
        worst_mean_deviation=worst,
        residual_violation=violation,
        residual_ok=violation == 0,
        dyadic_ok=None, halving_ok=None, diameter_decay_ok=None,
        cz_bounds_ok=check_cz_bounds(t, cubes, A, d.dim),
    )
