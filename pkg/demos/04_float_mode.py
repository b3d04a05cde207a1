"""Exact versus float evaluation on larger grids.

Exact mode keeps every cut position as a rational; denominators grow along
deep chains. Float mode does the same arithmetic in binary floating point
with a relative tolerance of 1e-9 and runs a whole depth of the tree at once.
The verifier checks a float run in exact arithmetic at that tolerance.
"""
import random
import time

from gmpy2 import mpq

from risingsun import GridDensity, Rectangle, StoppingPolicy, build_tables, rising_sun_decompose
from risingsun.verify import DEFAULT_FLOAT_TOLERANCE, verify_decomposition

rng = random.Random(4)
m = 64
f = [mpq(rng.randint(-64, 64), 4) for _ in range(m * m)]
w = [mpq(rng.randint(0, 16), 4) for _ in range(m * m)]
d = GridDensity.uniform(Rectangle.from_bounds([(0, 1), (0, 1)]), [m, m], f, w)
fi, mu = build_tables(d).masses(d.domain)
A = fi / mu + (16 - fi / mu) / 2
policy = StoppingPolicy(max_depth=40)

t0 = time.perf_counter()
exact_dec = rising_sun_decompose(d, A, policy)
t1 = time.perf_counter()
float_dec = rising_sun_decompose(d.to_float(), float(A), policy)
t2 = time.perf_counter()
print(f"exact: {len(exact_dec.selected)} rectangles in {t1 - t0:.3f} s")
print(f"float: {len(float_dec.selected)} rectangles in {t2 - t1:.3f} s")

deepest = max(exact_dec.selected_nodes, key=lambda n: n.depth)
print("largest exact denominator:", max(s.lo.denominator for s in deepest.rect.sides))

report = verify_decomposition(d, float_dec, DEFAULT_FLOAT_TOLERANCE)
print("float run verified at 1e-9:", report.passed,
      "| worst mean deviation:", float(report.worst_mean_deviation))
