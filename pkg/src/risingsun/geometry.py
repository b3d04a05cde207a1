"""Half-open axis-aligned intervals and rectangles with exact rational endpoints.

Exact scalars are ``gmpy2.mpq`` rationals. They compare and hash equal to
:class:`fractions.Fraction`, and ints, strings and Fractions are accepted
anywhere a scalar is expected. The same classes also carry plain floats when a
problem is evaluated in float mode.
"""
from __future__ import annotations

import enum
import re
from fractions import Fraction
from typing import Iterable, Union

from gmpy2 import mpq

Scalar = Union[mpq, float]
MPQ = type(mpq(0))


class GeometryError(ValueError):
    """Invalid geometric input (degenerate rectangle, bad split, dimension mismatch)."""


def to_scalar(value) -> mpq:
    """Coerce ints, strings, Fractions and mpqs to an exact rational.

    Floats are rejected on purpose: an exact quantity never comes from one.
    """
    if type(value) is MPQ:
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(value, (int, Fraction)) or type(value).__name__ == "mpz":
        return mpq(value)
    if isinstance(value, str):
        return parse_scalar(value)
    raise TypeError(f"cannot build an exact scalar from {type(value).__name__}")


def exact(value) -> mpq:
    """Like :func:`to_scalar` but also accepts floats, converting their exact binary value."""
    if isinstance(value, float):
        return mpq(value)
    return to_scalar(value)


_SCALAR_RE = re.compile(r"^[+-]?(\d+(/\d+)?|\d*\.\d+([eE][+-]?\d+)?|\d+\.?\d*[eE][+-]?\d+|\d+\.)$")


def parse_scalar(text: str) -> mpq:
    """Parse ``"p/q"``, ``"p"`` or a decimal literal into an exact rational."""
    text = text.strip()
    if not _SCALAR_RE.match(text):
        raise ValueError(f"not a rational literal: {text!r}")
    return mpq(Fraction(text))


def format_scalar(value: Scalar) -> str:
    """Render ``p/q`` in lowest terms, or ``p`` when the denominator is 1.

    Floats render with ``repr`` so they parse back to the same binary value.
    """
    if isinstance(value, float):
        return repr(value)
    value = to_scalar(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class Interval(tuple):
    """The half-open set ``[lo, hi)``; an immutable ``(lo, hi)`` pair."""

    __slots__ = ()

    def __new__(cls, lo, hi):
        if type(lo) is not MPQ and type(lo) is not float:
            lo = to_scalar(lo)
        if type(hi) is not MPQ and type(hi) is not float:
            hi = to_scalar(hi)
        if hi < lo:
            raise GeometryError(f"interval with hi < lo: [{lo}, {hi})")
        return tuple.__new__(cls, (lo, hi))

    @property
    def lo(self) -> Scalar:
        return self[0]

    @property
    def hi(self) -> Scalar:
        return self[1]

    @property
    def length(self) -> Scalar:
        return self[1] - self[0]

    @property
    def midpoint(self) -> Scalar:
        return (self[0] + self[1]) / 2

    def __repr__(self) -> str:
        return f"Interval({self[0]!r}, {self[1]!r})"

    def __str__(self) -> str:
        return f"[{format_scalar(self[0])},{format_scalar(self[1])})"


class Rectangle:
    """Product of half-open intervals, one per axis. Immutable."""

    __slots__ = ("sides",)

    def __init__(self, sides):
        sides = tuple(sides)
        if not sides:
            raise GeometryError("a rectangle needs at least one side")
        object.__setattr__(self, "sides", sides)

    def __setattr__(self, name, value):
        raise AttributeError("Rectangle is immutable")

    def __eq__(self, other):
        if not isinstance(other, Rectangle):
            return NotImplemented
        return self.sides == other.sides

    def __hash__(self):
        return hash(self.sides)

    def __repr__(self) -> str:
        return f"Rectangle({self})"

    @classmethod
    def from_bounds(cls, bounds: Iterable[tuple]) -> "Rectangle":
        """Build from ``[(a1, b1), (a2, b2), ...]``; ints, strings and Fractions become ``mpq``."""
        return cls(tuple(Interval(lo, hi) for lo, hi in bounds))

    @property
    def dim(self) -> int:
        return len(self.sides)

    @property
    def lows(self) -> tuple:
        return tuple(s.lo for s in self.sides)

    @property
    def highs(self) -> tuple:
        return tuple(s.hi for s in self.sides)

    @property
    def lengths(self) -> tuple:
        return tuple(s.length for s in self.sides)

    def is_degenerate(self) -> bool:
        return any(s.hi == s.lo for s in self.sides)

    def with_side(self, axis: int, lo, hi) -> "Rectangle":
        sides = list(self.sides)
        sides[axis] = Interval(lo, hi)
        return Rectangle(tuple(sides))

    def contains_rect(self, other: "Rectangle") -> bool:
        """Set inclusion ``other ⊆ self`` for non-degenerate ``other``."""
        _check_dim(self, other)
        return all(a.lo <= b.lo and b.hi <= a.hi for a, b in zip(self.sides, other.sides))

    def intersection(self, other: "Rectangle") -> "Rectangle | None":
        """Overlap of the two rectangles, or None when it has zero volume."""
        _check_dim(self, other)
        sides = []
        for a, b in zip(self.sides, other.sides):
            lo = max(a.lo, b.lo)
            hi = min(a.hi, b.hi)
            if hi <= lo:
                return None
            sides.append(Interval(lo, hi))
        return Rectangle(tuple(sides))

    def to_float(self) -> "Rectangle":
        return Rectangle(tuple(Interval(float(s.lo), float(s.hi)) for s in self.sides))

    def to_exact(self) -> "Rectangle":
        """Exact copy; float endpoints become the rationals they denote."""
        return Rectangle(tuple(Interval(exact(s.lo), exact(s.hi)) for s in self.sides))

    def __str__(self) -> str:
        return "x".join(str(s) for s in self.sides)


_tuple_new = tuple.__new__
_set_sides = Rectangle.sides.__set__


def trusted_rect(bounds) -> Rectangle:
    """Build a Rectangle from already-valid ``(lo, hi)`` scalar pairs, skipping checks.

    For engine internals that produce many rectangles from known-good numbers.
    """
    r = object.__new__(Rectangle)
    _set_sides(r, tuple([_tuple_new(Interval, pair) for pair in bounds]))
    return r


def _check_dim(r1: Rectangle, r2: Rectangle) -> None:
    if r1.dim != r2.dim:
        raise GeometryError(f"dimension mismatch: {r1.dim} vs {r2.dim}")


def volume(rect: Rectangle) -> Scalar:
    """Product of the side lengths."""
    v = rect.sides[0].length
    for s in rect.sides[1:]:
        v = v * s.length
    return v


def longest_axis(rect: Rectangle) -> int:
    """Index of a longest side; ties go to the smallest index."""
    if rect.is_degenerate():
        raise GeometryError(f"zero-volume rectangle {rect} has no meaningful longest side")
    best = 0
    best_len = rect.sides[0].length
    for axis, side in enumerate(rect.sides[1:], start=1):
        if side.length > best_len:
            best, best_len = axis, side.length
    return best


def split_at(rect: Rectangle, axis: int, t) -> tuple[Rectangle, Rectangle]:
    """Cut ``rect`` by the hyperplane ``x[axis] = t`` into (lower, upper)."""
    if not 0 <= axis < rect.dim:
        raise GeometryError(f"axis {axis} out of range for dimension {rect.dim}")
    side = rect.sides[axis]
    if not side.lo < t < side.hi:
        raise GeometryError(f"cut {t} not strictly inside {side}")
    return rect.with_side(axis, side.lo, t), rect.with_side(axis, t, side.hi)


class Relation(enum.Enum):
    DISJOINT = "disjoint"
    EQUAL = "equal"
    R1_INSIDE_R2 = "r1-inside-r2"
    R2_INSIDE_R1 = "r2-inside-r1"
    PROPER_OVERLAP = "proper-overlap"

    @property
    def nested_or_disjoint(self) -> bool:
        return self is not Relation.PROPER_OVERLAP


def relation(r1: Rectangle, r2: Rectangle) -> Relation:
    """Classify two rectangles as point sets with half-open semantics.

    Degenerate rectangles are empty sets and are disjoint from everything.
    Identical rectangles give ``Relation.EQUAL``, which counts as nested.
    """
    _check_dim(r1, r2)
    if r1.is_degenerate() or r2.is_degenerate():
        return Relation.DISJOINT
    if r1.intersection(r2) is None:
        return Relation.DISJOINT
    inside12 = r2.contains_rect(r1)
    inside21 = r1.contains_rect(r2)
    if inside12 and inside21:
        return Relation.EQUAL
    if inside12:
        return Relation.R1_INSIDE_R2
    if inside21:
        return Relation.R2_INSIDE_R1
    return Relation.PROPER_OVERLAP


_RECT_SIDE_RE = re.compile(r"\[([^,\[\)]+),([^,\[\)]+)\)")


def parse_rect(text: str) -> Rectangle:
    """Inverse of ``str(rect)``: ``"[a1,b1)x[a2,b2)"`` to a Rectangle."""
    text = text.strip()
    parts = text.split(")x[")
    if not text.startswith("[") or not text.endswith(")"):
        raise ValueError(f"not a rectangle literal: {text!r}")
    bounds = []
    for i, part in enumerate(parts):
        chunk = part
        if i > 0:
            chunk = "[" + chunk
        if i < len(parts) - 1:
            chunk = chunk + ")"
        m = _RECT_SIDE_RE.fullmatch(chunk)
        if not m:
            raise ValueError(f"not a rectangle literal: {text!r}")
        bounds.append((parse_scalar(m.group(1)), parse_scalar(m.group(2))))
    return Rectangle.from_bounds(bounds)

