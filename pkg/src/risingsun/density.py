"""Piecewise-constant densities on a cell grid and their cumulative tables.

A :class:`GridDensity` stores a function ``f`` and a weight ``w >= 0`` that
are constant on each cell; the measure is ``dmu = w dx``. Rectangle integrals
go through a :class:`CumulativeTable` of n-dimensional prefix sums.

Inside a cell both cumulative functions are multilinear in the corner
coordinate, so interpolating the prefix table linearly along each axis is
exact, not an approximation. A rectangle query with arbitrary rational corners
therefore costs at most ``4**n`` table lookups after ``O(prod m_i)`` preprocessing.
"""
from __future__ import annotations

import itertools
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from gmpy2 import mpq

from .geometry import Interval, Rectangle, Scalar, exact, to_scalar


class DensityError(ValueError):
    """Malformed density (bad edges, wrong value count, negative weight)."""


def _strides(shape: Sequence[int]) -> tuple[int, ...]:
    strides = [1] * len(shape)
    for i in range(len(shape) - 2, -1, -1):
        strides[i] = strides[i + 1] * shape[i + 1]
    return tuple(strides)


@dataclass(frozen=True, eq=False)
class GridDensity:
    """``f`` and ``w`` on the grid spanned by ``edges`` over ``domain``.

    ``f`` and ``w`` are flat sequences in row-major order (last axis fastest).
    """

    domain: Rectangle
    edges: tuple[tuple, ...]
    f: tuple
    w: tuple
    allow_zero_measure: bool = True
    _hot_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        conv = to_scalar if self.is_exact else float
        edges = tuple(tuple(conv(x) for x in e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "f", tuple(conv(x) for x in self.f))
        object.__setattr__(self, "w", tuple(conv(x) for x in self.w))
        if len(edges) != self.domain.dim:
            raise DensityError(f"{len(edges)} edge lists for a {self.domain.dim}-D domain")
        for axis, (e, side) in enumerate(zip(edges, self.domain.sides)):
            if len(e) < 2:
                raise DensityError(f"axis {axis} needs at least one cell")
            if e[0] != side.lo or e[-1] != side.hi:
                raise DensityError(f"axis {axis} edges must run from {side.lo} to {side.hi}")
            if any(b <= a for a, b in zip(e, e[1:])):
                raise DensityError(f"axis {axis} edges must be strictly increasing")
        n_cells = math.prod(self.shape)
        if len(self.f) != n_cells:
            raise DensityError(f"expected {n_cells} f values, got {len(self.f)}")
        if len(self.w) != n_cells:
            raise DensityError(f"expected {n_cells} w values, got {len(self.w)}")
        if any(x < 0 for x in self.w):
            raise DensityError("weights must be non-negative")

    @classmethod
    def uniform(cls, domain: Rectangle, cells: Sequence[int], f, w=None) -> "GridDensity":
        """Equal-width cells; ``w`` defaults to Lebesgue measure (all ones)."""
        edges = []
        for side, m in zip(domain.sides, cells):
            if m < 1:
                raise DensityError("cell counts must be positive")
            step = (side.hi - side.lo) / m
            edges.append(tuple([side.lo + step * k for k in range(m)] + [side.hi]))
        f = list(f)
        if w is None:
            w = [1] * len(f)
        return cls(domain, tuple(edges), tuple(f), tuple(w))

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(e) - 1 for e in self.edges)

    @property
    def is_exact(self) -> bool:
        return not isinstance(self.domain.sides[0].lo, float)

    def cell_rect(self, index: Sequence[int]) -> Rectangle:
        return Rectangle(tuple(Interval(e[k], e[k + 1]) for e, k in zip(self.edges, index)))

    def cells(self):
        """Yield ``(multi_index, flat_index)`` in row-major order."""
        for flat, idx in enumerate(itertools.product(*(range(m) for m in self.shape))):
            yield idx, flat

    def f_array(self) -> np.ndarray:
        return np.array(self.f, dtype=object if self.is_exact else float).reshape(self.shape)

    def w_array(self) -> np.ndarray:
        return np.array(self.w, dtype=object if self.is_exact else float).reshape(self.shape)

    def cell_range(self, rect: Rectangle) -> Optional[tuple[range, ...]]:
        """Per-axis ranges of cells meeting ``rect`` in positive volume."""
        ranges = []
        for e, side in zip(self.edges, rect.sides):
            if side.hi <= side.lo:
                return None
            k0 = max(bisect_right(e, side.lo) - 1, 0)
            k1 = min(bisect_left(e, side.hi), len(e) - 1)
            if k1 <= k0:
                return None
            ranges.append(range(k0, k1))
        return tuple(ranges)

    def hot_mask(self, level) -> np.ndarray:
        """Cells of positive measure where ``f > level`` (cached per level)."""
        key = level
        mask = self._hot_cache.get(key)
        if mask is None:
            mask = np.array([fv > level and wv > 0 for fv, wv in zip(self.f, self.w)],
                            dtype=bool).reshape(self.shape)
            self._hot_cache[key] = mask
        return mask

    def total_measure(self) -> Scalar:
        total = 0
        widths = [[b - a for a, b in zip(e, e[1:])] for e in self.edges]
        for idx, flat in self.cells():
            v = self.w[flat]
            for axis, k in enumerate(idx):
                v = v * widths[axis][k]
            total += v
        return total

    def to_exact(self) -> "GridDensity":
        """Exact copy; float data become the rationals they denote."""
        if self.is_exact:
            return self
        return GridDensity(
            self.domain.to_exact(),
            tuple(tuple(exact(x) for x in e) for e in self.edges),
            tuple(exact(x) for x in self.f),
            tuple(exact(x) for x in self.w),
        )

    def to_float(self) -> "GridDensity":
        """Nearest-binary-float copy, for float mode."""
        if not self.is_exact:
            return self
        return GridDensity(
            self.domain.to_float(),
            tuple(tuple(float(x) for x in e) for e in self.edges),
            tuple(float(x) for x in self.f),
            tuple(float(x) for x in self.w),
        )


class CumulativeTable:
    """Prefix sums of ``f dmu`` and ``dmu`` at the grid nodes of a density.

    ``F[idx]`` is the integral of ``f dmu`` over ``[lo, node(idx))`` and
    ``M[idx]`` the measure of the same box. Both vanish on the lower faces.
    """

    def __init__(self, density: GridDensity):
        self.density = density
        shape = density.shape
        dtype = object if density.is_exact else float
        cellvol = np.ones(shape, dtype=dtype)
        for axis, e in enumerate(density.edges):
            widths = np.array([b - a for a, b in zip(e, e[1:])], dtype=dtype)
            view = [1] * len(shape)
            view[axis] = len(widths)
            cellvol = cellvol * widths.reshape(view)
        mass = density.w_array() * cellvol
        fmass = density.f_array() * mass
        self.M = self._prefix(mass)
        self.F = self._prefix(fmass)
        self._node_shape = self.M.shape
        self._strides = _strides(self._node_shape)
        self._Mflat = self.M.ravel().tolist()
        self._Fflat = self.F.ravel().tolist()
        self._edges = density.edges
        self._zero = mpq(0) if density.is_exact else 0.0

    @staticmethod
    def _prefix(cell_values: np.ndarray) -> np.ndarray:
        out = cell_values
        for axis in range(out.ndim):
            out = np.cumsum(out, axis=axis)
        pad = [(1, 0)] * out.ndim
        if out.dtype == object:
            padded = np.empty(tuple(s + 1 for s in out.shape), dtype=object)
            padded[...] = mpq(0)
            padded[tuple(slice(1, None) for _ in range(out.ndim))] = out
            return padded
        return np.pad(out, pad)

    @property
    def domain(self) -> Rectangle:
        return self.density.domain

    def total_mass(self):
        """Sum of all cell masses ``w * |cell|`` (no cancellation, unlike a corner query)."""
        return self.M.flat[-1]

    def _locate(self, axis: int, x):
        """Cell index ``k`` with ``e[k] <= x <= e[k+1]`` and the fraction across it."""
        e = self._edges[axis]
        k = bisect_right(e, x) - 1
        if k >= len(e) - 1:
            k = len(e) - 2
        if k < 0:
            k = 0
        lo, hi = e[k], e[k + 1]
        if x == lo:
            return k, None
        return k, (x - lo) / (hi - lo)

    def _axis_weights(self, axis: int, lo, hi) -> list:
        """Flat-offset weights on one axis whose contraction gives G(hi) - G(lo)."""
        stride = self._strides[axis]
        acc: dict = {}
        for x, sign in ((hi, 1), (lo, -1)):
            k, s = self._locate(axis, x)
            if s is None:
                acc[k] = acc.get(k, 0) + sign
            else:
                acc[k] = acc.get(k, 0) + sign * (1 - s)
                acc[k + 1] = acc.get(k + 1, 0) + sign * s
        return [(k * stride, wt) for k, wt in acc.items() if wt != 0]

    def masses(self, rect: Rectangle) -> tuple:
        """``(integral of f dmu, mu)`` over ``rect`` in one pass."""
        self._check_inside(rect)
        terms = [(0, 1)]
        for axis, side in enumerate(rect.sides):
            aw = self._axis_weights(axis, side.lo, side.hi)
            if not aw:
                return self._zero, self._zero
            terms = [(o + o2, w * w2) for o, w in terms for o2, w2 in aw]
        Fv, Mv = self._Fflat, self._Mflat
        fi = self._zero
        mu = self._zero
        for off, wt in terms:
            fi += wt * Fv[off]
            mu += wt * Mv[off]
        return fi, mu

    def _check_inside(self, rect: Rectangle) -> None:
        if rect.dim != self.domain.dim:
            raise DensityError(f"rectangle dimension {rect.dim} != density dimension {self.domain.dim}")
        for s, d in zip(rect.sides, self.domain.sides):
            if s.lo < d.lo or s.hi > d.hi:
                raise DensityError(f"rectangle {rect} is not inside the domain {self.domain}")


def build_tables(d: GridDensity) -> CumulativeTable:
    return CumulativeTable(d)


def measure(t: CumulativeTable, r: Rectangle) -> Scalar:
    """Exact ``mu(r)``."""
    return t.masses(r)[1]


def integral_f(t: CumulativeTable, r: Rectangle) -> Scalar:
    """Exact integral of ``f dmu`` over ``r``."""
    return t.masses(r)[0]


def mean(t: CumulativeTable, r: Rectangle) -> Optional[Scalar]:
    """Average of ``f`` over ``r`` against ``mu``; None when ``mu(r) = 0``."""
    fi, mu = t.masses(r)
    if mu == 0:
        return None
    return fi / mu


def essential_sup_f(d: GridDensity, r: Rectangle) -> Optional[Scalar]:
    """Largest ``f`` value among cells meeting ``r`` with positive mass.

    Cells with ``w = 0`` are ignored: the bound is a mu-a.e. statement.
    """
    ranges = d.cell_range(r)
    if ranges is None:
        return None
    strides = _strides(d.shape)
    best = None
    for idx in itertools.product(*ranges):
        flat = sum(k * s for k, s in zip(idx, strides))
        if d.w[flat] > 0 and (best is None or d.f[flat] > best):
            best = d.f[flat]
    return best


def exact_density(domain_bounds, cells, f, w=None, edges=None) -> GridDensity:
    """Convenience constructor coercing every number to an exact rational."""
    domain = Rectangle.from_bounds(domain_bounds)
    f = [to_scalar(x) for x in f]
    if w is not None:
        w = [to_scalar(x) for x in w]
    if edges is None:
        return GridDensity.uniform(domain, cells, f, w)
    edges = tuple(tuple(to_scalar(x) for x in e) for e in edges)
    if w is None:
        w = [mpq(1)] * len(f)
    return GridDensity(domain, edges, tuple(f), tuple(w))
