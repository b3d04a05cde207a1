import random
from fractions import Fraction

from gmpy2 import mpq
from hypothesis import given
from hypothesis import strategies as st

import oracles
from risingsun.decompose import (
    CutSelected,
    Decomposition,
    DivisionNode,
    ResidualLeaf,
    SelectedWhole,
    StoppingPolicy,
    cz_decompose,
    rising_sun_decompose,
)
from risingsun.density import build_tables, exact_density
from risingsun.fixtures import random_density
from risingsun.geometry import Rectangle
from risingsun.verify import (
    check_disjoint,
    check_dyadic_property,
    check_halving_and_decay,
    check_means,
    residual_violation_measure,
    union_measure,
    verify_cz,
    verify_decomposition,
)

R = Rectangle.from_bounds
F = Fraction
PAIR = [R([(0, F(2, 3)), (0, 1)]), R([(F(2, 3), 1), (0, F(4, 7))])]


def test_check_disjoint_examples():
    assert check_disjoint(PAIR)
    assert not check_disjoint([R([(0, F(3, 4))]), R([(F(1, 2), 1)])])
    assert check_disjoint([])


def test_check_means_examples(counterexample):
    t = build_tables(counterexample)
    assert check_means(t, PAIR, F(7, 8))[:2] == (True, 0)
    bad = check_means(t, [R([(0, F(1, 2)), (0, 1)])], F(7, 8))
    assert not bad.ok and bad.worst_deviation == F(1, 8)
    assert check_means(t, [], F(7, 8))[:2] == (True, 0)


def test_check_means_tolerance_is_relative_to_measure(counterexample):
    t = build_tables(counterexample)
    r = [R([(0, F(1, 2)), (0, 1)])]
    assert not check_means(t, r, F(7, 8), F(1, 9)).ok
    assert check_means(t, r, F(7, 8), F(1, 8)).ok


def test_zero_measure_rect_fails_mean_check():
    d = exact_density([(0, 1)], [2], [1, 1], w=[0, 1])
    assert not check_means(build_tables(d), [R([(0, F(1, 2))])], 1).ok


def test_residual_violation_examples(counterexample):
    assert residual_violation_measure(counterexample, PAIR, F(7, 8)) == 0
    ones = exact_density([(0, 1), (0, 1)], [2, 2], [1] * 4)
    assert residual_violation_measure(ones, [], 1) == 0
    assert residual_violation_measure(counterexample, [], F(7, 8)) == F(3, 4)


def test_dyadic_examples(counterexample):
    dec = rising_sun_decompose(counterexample, F(7, 8), StoppingPolicy(max_depth=8))
    assert check_dyadic_property(dec)
    assert not check_dyadic_property([R([(0, F(3, 4))]), R([(F(1, 2), 1)])])
    leaf = DivisionNode(R([(0, 1)]), F(1), 0, SelectedWhole())
    assert check_dyadic_property(leaf)


def _injected_tree():
    root = DivisionNode(R([(0, 1), (0, 1)]), F(1, 2), 0)
    sel = DivisionNode(R([(0, F(1, 10)), (0, 1)]), F(1), 1, SelectedWhole())
    cont = DivisionNode(R([(F(1, 10), 1), (0, 1)]), F(0), 1, ResidualLeaf("below-level"))
    root.outcome = CutSelected(0, F(1, 10), sel, cont)
    return Decomposition(F(1), root, [sel], [cont], True)


def test_halving_examples(counterexample):
    dec = rising_sun_decompose(counterexample, F(7, 8), StoppingPolicy(max_depth=8))
    assert check_halving_and_decay(dec) == (True, True)
    halving, decay = check_halving_and_decay(_injected_tree())
    assert not halving
    # depth 1 < n: decay holds vacuously
    assert decay


def test_union_measure_examples(counterexample):
    assert union_measure(counterexample, PAIR) == F(6, 7)
    assert union_measure(counterexample, [PAIR[0], PAIR[0]]) == F(2, 3)
    assert union_measure(counterexample, []) == 0


def test_report_on_counterexample(counterexample):
    dec = rising_sun_decompose(counterexample, F(7, 8), StoppingPolicy(max_depth=8))
    rep = verify_decomposition(counterexample, dec)
    assert rep.passed and rep.residual_violation == 0
    text = rep.render()
    assert text.splitlines()[0] == "disjoint_ok: true"
    assert text.splitlines()[-1] == "passed: true"


def test_report_catches_edited_rectangle(counterexample):
    dec = rising_sun_decompose(counterexample, F(7, 8), StoppingPolicy(max_depth=8))
    dec.selected_nodes[0] = DivisionNode(R([(0, F(1, 2)), (0, 1)]), F(7, 8), 1, SelectedWhole())
    rep = verify_decomposition(counterexample, dec)
    assert not rep.means_ok and not rep.passed


def test_report_empty_selection():
    d = exact_density([(0, 1), (0, 1)], [2, 2], [0] * 4)
    dec = rising_sun_decompose(d, 1, StoppingPolicy(max_depth=4))
    assert dec.selected == []
    assert verify_decomposition(d, dec).passed


def test_report_without_tree_skips_structure(counterexample):
    dec = rising_sun_decompose(counterexample, F(7, 8), StoppingPolicy(max_depth=8))
    bare = Decomposition(dec.level, None, dec.selected_nodes, dec.residual_nodes, True,
                         domain=counterexample.domain)
    rep = verify_decomposition(counterexample, bare)
    assert rep.passed and rep.dyadic_ok is None and rep.notes


def test_float_report_needs_tolerance(counterexample):
    dec = rising_sun_decompose(counterexample.to_float(), 0.875, StoppingPolicy(max_depth=8))
    assert verify_decomposition(counterexample, dec, mpq(1, 10**9)).passed


def test_verify_cz_bounds():
    d = exact_density([(0, 1), (0, 1)], [2, 2], [4, 0, 0, 0])
    rep = verify_cz(d, cz_decompose(d, F(3, 2), StoppingPolicy(max_depth=6)))
    assert rep.cz_bounds_ok and rep.passed


seeds = st.integers(0, 2**32 - 1)


def _random_family(rng, d, k):
    out = []
    for _ in range(k):
        sides = []
        for s in d.domain.sides:
            a = s.lo + s.length * mpq(rng.randint(0, 12), 12)
            b = s.lo + s.length * mpq(rng.randint(0, 12), 12)
            sides.append((min(a, b), max(a, b)))
        out.append(R(sides))
    return out


@given(seeds)
def test_union_matches_rasterization(seed):
    rng = random.Random(seed)
    d = random_density(rng, max_cells=4)
    rects = _random_family(rng, d, rng.randint(0, 5))
    assert union_measure(d, rects) == oracles.union_mass(d, rects)


@given(seeds)
def test_violation_with_no_selection_is_mass_above_level(seed):
    rng = random.Random(seed)
    d = random_density(rng, max_cells=4)
    A = mpq(rng.randint(-16, 16), rng.randint(1, 4))
    direct = sum(w * oracles.overlap(cb, cb) for cb, f, w in oracles.cells(d) if f > oracles.q(A))
    assert residual_violation_measure(d, [], A) == direct


@given(seeds)
def test_violation_matches_oracle(seed):
    rng = random.Random(seed)
    d = random_density(rng, max_cells=3)
    rects = _random_family(rng, d, rng.randint(0, 4))
    A = mpq(rng.randint(-16, 16), rng.randint(1, 4))
    assert residual_violation_measure(d, rects, A) == oracles.violation(d, rects, A)


@given(seeds)
def test_disjoint_matches_pairwise_oracle(seed):
    rng = random.Random(seed)
    d = random_density(rng, max_cells=2)
    rects = _random_family(rng, d, rng.randint(0, 5))
    pairwise = all(oracles.overlap(oracles.bounds(a), oracles.bounds(b)) == 0
                   for i, a in enumerate(rects) for b in rects[i + 1:])
    assert check_disjoint(rects) == pairwise
