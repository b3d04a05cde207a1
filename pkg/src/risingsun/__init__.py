"""Exact rising sun decompositions of piecewise-constant densities.

Given ``f`` and a measure ``dmu = w dx`` on a box ``I_0`` and a level ``A`` at
least the mean of ``f``, :func:`rising_sun_decompose` finds pairwise disjoint
rectangles on which the mean of ``f`` is exactly ``A``, with ``f <= A``
almost everywhere outside them. :mod:`risingsun.verify` re-checks every such
claim from scratch.
"""
from .decompose import (
    BELOW_LEVEL,
    RESOLUTION_LIMIT,
    ZERO_MEASURE,
    CutSelected,
    CZInputError,
    CZResult,
    Decomposition,
    DecompositionError,
    DivisionNode,
    InvariantViolation,
    LevelBelowMeanError,
    PreconditionError,
    ResidualLeaf,
    SelectedWhole,
    SplitBoth,
    StoppingPolicy,
    ZeroMeasureError,
    cz_decompose,
    divide_step,
    find_cut,
    riesz_1d,
    rising_sun_decompose,
)
from .density import (
    CumulativeTable,
    DensityError,
    GridDensity,
    build_tables,
    essential_sup_f,
    exact_density,
    integral_f,
    mean,
    measure,
)
from .formats import (
    FormatError,
    decomposition_from_text,
    decomposition_to_text,
    density_from_text,
    density_to_text,
    read_decomposition,
    read_density,
    write_decomposition,
    write_density,
)
from .geometry import (
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
    volume,
)
from .verify import (
    VerificationReport,
    check_disjoint,
    check_dyadic_property,
    check_halving_and_decay,
    check_means,
    residual_violation_measure,
    union_measure,
    verify_cz,
    verify_decomposition,
)

__version__ = "0.1.0"
