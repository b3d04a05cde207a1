from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

from risingsun.geometry import (
    GeometryError,
    Interval,
    Rectangle,
    Relation,
    format_scalar,
    longest_axis,
    parse_rect,
    parse_scalar,
    relation,
    split_at,
    to_scalar,
    volume,
)

R = Rectangle.from_bounds
F = Fraction


def test_volume_examples():
    assert volume(R([(0, 1), (0, 1)])) == 1
    assert volume(R([(0, F(2, 3)), (0, 1)])) == F(2, 3)
    assert volume(R([(F(1, 2), F(1, 2)), (0, 1)])) == 0


def test_longest_axis_examples():
    assert longest_axis(R([(0, 1), (0, 1)])) == 0
    assert longest_axis(R([(F(2, 3), 1), (0, 1)])) == 1
    assert longest_axis(R([(0, 5), (0, 2), (0, 3)])) == 0


def test_longest_axis_rejects_degenerate():
    with pytest.raises(GeometryError):
        longest_axis(R([(0, 0), (0, 1)]))


def test_split_examples():
    unit = R([(0, 1), (0, 1)])
    assert split_at(unit, 0, F(1, 2)) == (R([(0, F(1, 2)), (0, 1)]), R([(F(1, 2), 1), (0, 1)]))
    assert split_at(unit, 0, F(2, 3)) == (R([(0, F(2, 3)), (0, 1)]), R([(F(2, 3), 1), (0, 1)]))
    with pytest.raises(GeometryError):
        split_at(unit, 0, 0)
    with pytest.raises(GeometryError):
        split_at(unit, 2, F(1, 2))


def test_relation_examples():
    assert relation(R([(0, F(1, 2)), (0, 1)]), R([(F(1, 2), 1), (0, 1)])) is Relation.DISJOINT
    assert relation(R([(F(2, 3), 1), (0, F(4, 7))]), R([(F(2, 3), 1), (0, 1)])) is Relation.R1_INSIDE_R2
    assert relation(R([(0, F(3, 4)), (0, 1)]), R([(F(1, 2), 1), (0, 1)])) is Relation.PROPER_OVERLAP
    unit = R([(0, 1), (0, 1)])
    assert relation(unit, unit) is Relation.EQUAL
    assert Relation.EQUAL.nested_or_disjoint


def test_degenerate_rectangles_are_disjoint_from_everything():
    flat = R([(F(1, 2), F(1, 2)), (0, 1)])
    assert relation(flat, R([(0, 1), (0, 1)])) is Relation.DISJOINT


def test_interval_rejects_reversed_bounds():
    with pytest.raises(GeometryError):
        Interval(1, 0)


def test_rectangle_is_immutable_and_hashable():
    r = R([(0, 1)])
    with pytest.raises(AttributeError):
        r.sides = ()
    assert len({r, R([(0, 1)])}) == 1


def test_scalars_reject_floats_and_bools():
    with pytest.raises(TypeError):
        to_scalar(0.5)
    with pytest.raises(TypeError):
        to_scalar(True)


def test_scalar_text():
    assert format_scalar(mpq(6, 4)) == "3/2"
    assert format_scalar(mpq(-4, 2)) == "-2"
    assert parse_scalar("-3/6") == F(-1, 2)
    assert parse_scalar("0.25") == F(1, 4)
    with pytest.raises(ValueError):
        parse_scalar("1/2/3")


def test_rect_text_round_trip():
    r = R([(F(-1, 3), F(2, 3)), (0, F(4, 7))])
    assert str(r) == "[-1/3,2/3)x[0,4/7)"
    assert parse_rect(str(r)) == r


rationals = st.fractions(min_value=-100, max_value=100, max_denominator=50)


@given(st.integers(-10**6, 10**6), st.integers(1, 10**6))
def test_format_parse_round_trip(p, qd):
    x = mpq(p, qd)
    assert parse_scalar(format_scalar(x)) == x


@st.composite
def rects(draw, dim=None):
    dim = dim or draw(st.integers(1, 3))
    sides = []
    for _ in range(dim):
        a = draw(rationals)
        b = draw(rationals.filter(lambda v: v != a))
        sides.append((min(a, b), max(a, b)))
    return R(sides)


@given(rects(), st.data())
def test_split_preserves_volume(r, data):
    axis = data.draw(st.integers(0, r.dim - 1))
    side = r.sides[axis]
    s = data.draw(st.fractions(min_value=0, max_value=1, max_denominator=97).filter(lambda v: 0 < v < 1))
    t = side.lo + (side.hi - side.lo) * mpq(s.numerator, s.denominator)
    lo, hi = split_at(r, axis, t)
    assert volume(lo) + volume(hi) == volume(r)
    assert relation(lo, hi) is Relation.DISJOINT


_SWAP = {Relation.R1_INSIDE_R2: Relation.R2_INSIDE_R1, Relation.R2_INSIDE_R1: Relation.R1_INSIDE_R2}


@given(st.integers(1, 3).flatmap(lambda n: st.tuples(rects(n), rects(n))))
def test_relation_symmetry(pair):
    a, b = pair
    ab, ba = relation(a, b), relation(b, a)
    assert _SWAP.get(ab, ab) is ba
