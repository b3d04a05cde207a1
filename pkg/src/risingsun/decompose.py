"""The generalized dyadic division process and the two classical baselines.

Starting from the domain, a rectangle whose mean is below the level ``A`` is
halved across its longest side. If one half has mean above ``A`` the cutting
hyperplane slides away from the midpoint, into the other half, until the
growing piece has mean exactly ``A``; that piece is selected and the remainder,
whose mean is then below ``A``, keeps being divided.

Exact mode works over :class:`fractions.Fraction` and never rounds. Float mode
runs the same code on binary floats with a relative tolerance on every
comparison.
"""
from __future__ import annotations

import itertools
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Union

from . import _batched
from .density import CumulativeTable, GridDensity, build_tables
from .geometry import Rectangle, Scalar, longest_axis, split_at, to_scalar

DEFAULT_RTOL = 1e-9
_EPS = 2.220446049250313e-16


class DecompositionError(ValueError):
    """Base class for bad inputs to a decomposition."""


class LevelBelowMeanError(DecompositionError):
    """The level is smaller than the mean of ``f`` over the whole domain."""


class ZeroMeasureError(DecompositionError):
    """The domain carries no mass, so no mean is defined."""


class CZInputError(DecompositionError):
    """Input outside the Calderon-Zygmund setting (non-cube, signed f, non-Lebesgue)."""


class PreconditionError(ValueError):
    """An engine routine was called outside its documented precondition."""


class InvariantViolation(AssertionError):
    """A case that exact arithmetic rules out was reached."""


@dataclass(frozen=True)
class StoppingPolicy:
    """Finite guards for a process that may otherwise select countably many rectangles.

    ``min_side``: do not split when half the longest side would drop below it.
    ``max_depth``: nodes at this depth are not divided.
    ``max_selected``: stop dividing once this many rectangles are selected.
    """

    min_side: Scalar = Fraction(0)
    max_depth: Optional[int] = None
    max_selected: Optional[int] = None

    def __post_init__(self):
        if self.min_side < 0:
            raise ValueError("min_side must be >= 0")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be positive")
        if self.max_selected is not None and self.max_selected < 1:
            raise ValueError("max_selected must be positive")
        if not (self.min_side > 0 or self.max_depth is not None):
            raise ValueError("policy needs min_side > 0 or a finite max_depth")

    def exhausted(self, rect: Rectangle, depth: int, n_selected: int) -> bool:
        if self.max_depth is not None and depth >= self.max_depth:
            return True
        if self.max_selected is not None and n_selected >= self.max_selected:
            return True
        if self.min_side > 0 and max(rect.lengths) / 2 < self.min_side:
            return True
        return False


@dataclass
class SelectedWhole:
    pass


@dataclass
class SplitBoth:
    axis: int
    midpoint: Scalar
    lower: "DivisionNode"
    upper: "DivisionNode"


@dataclass
class CutSelected:
    axis: int
    cut: Scalar
    selected: "DivisionNode"
    continuing: "DivisionNode"


BELOW_LEVEL = "below-level"
ZERO_MEASURE = "zero-measure"
RESOLUTION_LIMIT = "resolution-limit"
LEAF_REASONS = (BELOW_LEVEL, ZERO_MEASURE, RESOLUTION_LIMIT)


@dataclass
class ResidualLeaf:
    reason: str


Outcome = Union[SelectedWhole, SplitBoth, CutSelected, ResidualLeaf]


@dataclass(eq=False, slots=True)
class DivisionNode:
    rect: Rectangle
    mean: Optional[Scalar]
    depth: int
    outcome: Optional[Outcome] = None

    @property
    def children(self) -> tuple["DivisionNode", ...]:
        o = self.outcome
        if isinstance(o, SplitBoth):
            return (o.lower, o.upper)
        if isinstance(o, CutSelected):
            return (o.selected, o.continuing)
        return ()

    @property
    def is_division(self) -> bool:
        """True for the rectangles that get divided further (mean below the level)."""
        return isinstance(self.outcome, (SplitBoth, CutSelected))

    def walk(self) -> Iterator["DivisionNode"]:
        """Preorder traversal, children in canonical order."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


@dataclass
class Decomposition:
    level: Scalar
    root: Optional[DivisionNode]
    selected_nodes: list[DivisionNode]
    residual_nodes: list[DivisionNode]
    complete: bool
    exact: bool = True
    domain: Optional[Rectangle] = None

    def __post_init__(self):
        if self.domain is None and self.root is not None:
            self.domain = self.root.rect

    @property
    def selected(self) -> list[Rectangle]:
        return [n.rect for n in self.selected_nodes]

    @property
    def residual_leaves(self) -> list[tuple[Rectangle, str]]:
        return [(n.rect, n.outcome.reason) for n in self.residual_nodes]

    def division_rects(self) -> list[Rectangle]:
        if self.root is None:
            return []
        return [n.rect for n in self.root.walk() if n.is_division]


class _Compare:
    """Three-way comparison, exact or with a relative tolerance."""

    def __init__(self, exact: bool, rtol: float):
        self.exact = exact
        self.rtol = 0 if exact else rtol

    def sign(self, a, b) -> int:
        d = a - b
        if not self.exact and abs(d) <= self.rtol * max(1.0, abs(b)):
            return 0
        return (d > 0) - (d < 0)

    def is_zero(self, x, scale) -> bool:
        if self.exact:
            return x == 0
        return abs(x) <= self.rtol * scale


def _coerce_level(A, exact: bool):
    if exact:
        if isinstance(A, float):
            raise TypeError("exact mode needs a rational level, not a float")
        return to_scalar(A)
    return float(A)


def _compare_for(t: CumulativeTable, rtol) -> _Compare:
    return _Compare(t.density.is_exact, DEFAULT_RTOL if rtol is None else rtol)


def find_cut(t: CumulativeTable, rect: Rectangle, axis: int, A, grow_from: str,
             rtol: Optional[float] = None) -> Scalar:
    """Slide the hyperplane from the midpoint until the growing piece has mean ``A``.

    ``h(s) = integral_f(R(s)) - A * measure(R(s))`` is linear in ``s`` between
    cell edges, so it is sampled at the edges moving outward from the midpoint
    and the first crossing is solved for exactly. The growing piece ``R(s)``
    is ``[lo, s)`` for ``grow_from="lower"`` and ``[s, hi)`` for ``"upper"``.
    """
    cmp = _compare_for(t, rtol)
    A = _coerce_level(A, cmp.exact)
    side = rect.sides[axis]
    mid = side.midpoint
    edges = t.density.edges[axis]
    if grow_from == "lower":
        far = side.hi
        inner = edges[bisect_right(edges, mid):bisect_left(edges, far)]

        def piece(s):
            return rect.with_side(axis, side.lo, s)
    elif grow_from == "upper":
        far = side.lo
        inner = edges[bisect_right(edges, far):bisect_left(edges, mid)][::-1]

        def piece(s):
            return rect.with_side(axis, s, side.hi)
    else:
        raise ValueError(f"grow_from must be 'lower' or 'upper', not {grow_from!r}")

    rect_f, rect_mu = t.masses(rect)
    scale = max(1.0, abs(float(A))) * float(rect_mu) if not cmp.exact else 0

    def h(s):
        fi, mu = t.masses(piece(s))
        return fi - A * mu

    h_prev = h(mid)
    if h_prev <= 0 or cmp.is_zero(h_prev, scale):
        raise PreconditionError(f"the {grow_from} half of {rect} does not have mean above {A}")
    h_far = rect_f - A * rect_mu
    if rect_mu <= 0 or h_far >= 0 or cmp.is_zero(h_far, scale):
        raise PreconditionError(f"{rect} must have positive measure and mean below {A}")
    prev = mid
    for s in list(inner) + [far]:
        hs = h_far if s == far else h(s)
        if cmp.is_zero(hs, scale):
            return s
        if hs < 0:
            return prev + h_prev * (s - prev) / (h_prev - hs)
        prev, h_prev = s, hs
    raise InvariantViolation(f"no sign change of h on {rect} along axis {axis}")


def divide_step(t: CumulativeTable, rect: Rectangle, A, rtol: Optional[float] = None,
                depth: int = 0, masses: Optional[tuple] = None) -> DivisionNode:
    """One application of the division argument to ``rect`` (mean below ``A``).

    Returns a node whose outcome is ``SplitBoth`` or ``CutSelected``. The
    selected child of a cut is marked ``SelectedWhole``; other children are
    returned undivided (outcome None).
    """
    node, _ = _divide(t, rect, A, _compare_for(t, rtol), depth, masses)
    return node


def _divide(t, rect, A, cmp: _Compare, depth, masses=None):
    A = _coerce_level(A, cmp.exact)
    fi, mu = masses if masses is not None else t.masses(rect)
    if mu <= 0:
        raise PreconditionError(f"{rect} has zero measure")
    if cmp.sign(fi / mu, A) >= 0:
        raise PreconditionError(f"{rect} has mean {fi / mu}, not below {A}")
    node = DivisionNode(rect, fi / mu, depth)
    axis = longest_axis(rect)
    mid = rect.sides[axis].midpoint
    lower, upper = split_at(rect, axis, mid)
    lo_f, lo_mu = t.masses(lower)
    hi_f, hi_mu = fi - lo_f, mu - lo_mu
    tiny = 64 * _EPS * abs(mu)
    c_lo = _classify(lo_f, lo_mu, A, cmp, tiny)
    c_hi = _classify(hi_f, hi_mu, A, cmp, tiny)
    if c_lo > 0 and c_hi > 0:
        raise InvariantViolation(f"both halves of {rect} have mean above {A}")

    def child(r, cf, cm):
        return DivisionNode(r, None if _is_null(cm, cmp, tiny) else cf / cm, depth + 1)

    if c_lo == 0 or c_hi == 0:
        if c_lo == 0:
            sel, sel_m, cont, cont_m = lower, (lo_f, lo_mu), upper, (hi_f, hi_mu)
        else:
            sel, sel_m, cont, cont_m = upper, (hi_f, hi_mu), lower, (lo_f, lo_mu)
        cut = mid
    elif c_lo > 0 or c_hi > 0:
        grow = "lower" if c_lo > 0 else "upper"
        cut = find_cut(t, rect, axis, A, grow, rtol=cmp.rtol or None)
        below, above = split_at(rect, axis, cut)
        if grow == "lower":
            sel, cont = below, above
        else:
            sel, cont = above, below
        sel_m = t.masses(sel)
        cont_m = (fi - sel_m[0], mu - sel_m[1])
    else:
        lo_node = child(lower, lo_f, lo_mu)
        hi_node = child(upper, hi_f, hi_mu)
        node.outcome = SplitBoth(axis, mid, lo_node, hi_node)
        return node, {id(lo_node): (lo_f, lo_mu), id(hi_node): (hi_f, hi_mu)}
    sel_node = child(sel, *sel_m)
    sel_node.outcome = SelectedWhole()
    cont_node = child(cont, *cont_m)
    node.outcome = CutSelected(axis, cut, sel_node, cont_node)
    return node, {id(cont_node): cont_m}


def _is_null(mu, cmp: _Compare, tiny) -> bool:
    return mu == 0 if cmp.exact else mu <= tiny


def _classify(f_int, mu, A, cmp: _Compare, tiny) -> int:
    """Sign of (mean - A); a null half counts as below the level."""
    if _is_null(mu, cmp, tiny):
        return -1
    return cmp.sign(f_int / mu, A)


def _hot(d: GridDensity, A, cmp: _Compare):
    threshold = A if cmp.exact else A + cmp.rtol * max(1.0, abs(A))
    return d.hot_mask(threshold)


def _has_hot_cell(d: GridDensity, hot, rect: Rectangle) -> bool:
    ranges = d.cell_range(rect)
    if ranges is None:
        return False
    return bool(hot[tuple(slice(r.start, r.stop) for r in ranges)].any())


def rising_sun_decompose(d: GridDensity, A, policy: StoppingPolicy,
                         rtol: Optional[float] = None) -> Decomposition:
    """Run the division process to completion or until ``policy`` stops it.

    Leaf rules, checked in this order before a rectangle is divided:
    zero measure; no cell of positive mass with ``f > A`` (then ``f <= A``
    a.e. on the rectangle); policy exhausted. ``complete`` is False iff some
    policy leaf still contains such a cell.

    Float densities without a ``max_selected`` guard go through a vectorized
    engine that handles a whole depth of the tree at a time.
    """
    t = build_tables(d)
    cmp = _compare_for(t, rtol)
    A = _coerce_level(A, cmp.exact)
    domain = d.domain
    fi, mu = t.masses(domain)
    if mu <= 0 or (not cmp.exact and mu <= 64 * _EPS * t.total_mass()):
        raise ZeroMeasureError("the domain has zero total measure")
    root_mean = fi / mu
    if cmp.sign(root_mean, A) > 0:
        raise LevelBelowMeanError(
            f"level {A} is below the domain mean {root_mean}")
    root = DivisionNode(domain, root_mean, 0)
    if cmp.sign(root_mean, A) == 0:
        root.outcome = SelectedWhole()
        return Decomposition(A, root, [root], [], True, cmp.exact)

    hot = _hot(d, A, cmp)
    if not cmp.exact and policy.max_selected is None:
        grid = _batched.FloatGrid(t, hot)
        root, selected, residual, complete = _batched.run(
            grid, domain, fi, mu, A, cmp.rtol, policy, _EPS)
        return Decomposition(A, root, selected, residual, complete, False)

    tiny = 64 * _EPS * abs(mu)
    selected: list[DivisionNode] = []
    residual: list[DivisionNode] = []
    complete = True
    stack = [(root, (fi, mu))]
    while stack:
        node, (nf, nmu) = stack.pop()
        rect = node.rect
        if _is_null(nmu, cmp, tiny):
            node.outcome = ResidualLeaf(ZERO_MEASURE)
            residual.append(node)
            continue
        if not _has_hot_cell(d, hot, rect):
            node.outcome = ResidualLeaf(BELOW_LEVEL)
            residual.append(node)
            continue
        if policy.exhausted(rect, node.depth, len(selected)):
            node.outcome = ResidualLeaf(RESOLUTION_LIMIT)
            residual.append(node)
            complete = False
            continue
        divided, child_masses = _divide(t, rect, A, cmp, node.depth, (nf, nmu))
        node.outcome = divided.outcome
        pending = []
        for c in node.children:
            if isinstance(c.outcome, SelectedWhole):
                selected.append(c)
            else:
                pending.append((c, child_masses[id(c)]))
        stack.extend(reversed(pending))
    return Decomposition(A, root, selected, residual, complete, cmp.exact)


def riesz_1d(d: GridDensity, A, policy: StoppingPolicy,
             rtol: Optional[float] = None) -> Decomposition:
    """The one-dimensional rising sun decomposition (same engine, n = 1)."""
    if d.dim != 1:
        raise ValueError(f"riesz_1d needs a 1-D density, got dimension {d.dim}")
    return rising_sun_decompose(d, A, policy, rtol)


@dataclass
class CZResult:
    """Selected dyadic cubes with their means, plus the stopping leaves."""

    level: Scalar
    cubes: list[tuple[Rectangle, Scalar]]
    residual_leaves: list[tuple[Rectangle, str]] = field(default_factory=list)
    complete: bool = True

    def __iter__(self):
        return iter(self.cubes)

    def __len__(self):
        return len(self.cubes)


def _dyadic_children(cube: Rectangle) -> list[Rectangle]:
    halves = []
    for side in cube.sides:
        m = side.midpoint
        halves.append(((side.lo, m), (m, side.hi)))
    return [Rectangle.from_bounds(choice) for choice in itertools.product(*halves)]


def cz_decompose(d: GridDensity, A, policy: StoppingPolicy,
                 rtol: Optional[float] = None) -> CZResult:
    """Classical Calderon-Zygmund stopping time over dyadic subcubes.

    A subcube is selected as soon as its mean exceeds ``A``; its parent had
    mean at most ``A`` so the selected mean is at most ``2**n * A``.
    """
    lengths = d.domain.lengths
    if any(L != lengths[0] for L in lengths):
        raise CZInputError(f"domain {d.domain} is not a cube")
    if any(x < 0 for x in d.f):
        raise CZInputError("Calderon-Zygmund decomposition needs f >= 0")
    if any(x != 1 for x in d.w):
        raise CZInputError("Calderon-Zygmund decomposition needs Lebesgue measure (w = 1)")
    t = build_tables(d)
    cmp = _compare_for(t, rtol)
    A = _coerce_level(A, cmp.exact)
    fi, mu = t.masses(d.domain)
    if mu <= 0:
        raise ZeroMeasureError("the domain has zero total measure")
    if cmp.sign(fi / mu, A) > 0:
        raise LevelBelowMeanError(f"level {A} is below the domain mean {fi / mu}")
    hot = _hot(d, A, cmp)
    result = CZResult(A, [])

    stack = [(d.domain, 0)]
    while stack:
        cube, depth = stack.pop()
        if not _has_hot_cell(d, hot, cube):
            result.residual_leaves.append((cube, BELOW_LEVEL))
            continue
        if policy.exhausted(cube, depth, len(result.cubes)):
            result.residual_leaves.append((cube, RESOLUTION_LIMIT))
            result.complete = False
            continue
        pending = []
        for child in _dyadic_children(cube):
            cf, cm = t.masses(child)
            if cmp.sign(cf / cm, A) > 0:
                result.cubes.append((child, cf / cm))
            else:
                pending.append((child, depth + 1))
        stack.extend(reversed(pending))
    return result
