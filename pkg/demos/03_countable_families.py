"""When the process does not stop: truncation and how much it leaves behind.

For some piecewise-constant densities in two and three dimensions the
division argument keeps finding new rectangles at every depth, so the
selected family is infinite. A stopping policy truncates the process; the
result then reports complete = false, and the mass of {f > A} that is left
uncovered shrinks as the depth limit grows.
"""
import random

from risingsun import StoppingPolicy, build_tables, rising_sun_decompose
from risingsun.fixtures import random_density, random_level
from risingsun.verify import residual_violation_measure

# a 3-D density found by searching seeds for one still truncated at depth 24
rng = random.Random(84)
d = random_density(rng, dim=3, max_cells=4)
fi, mu = build_tables(d).masses(d.domain)
A = random_level(rng, d, fi / mu)
print(f"{d.shape} cells, level {A}")

total = build_tables(d).total_mass()
print(f"{'depth':>5} {'selected':>9} {'uncovered mass of f > A':>26}")
for depth in (4, 8, 12, 16, 20, 24, 28):
    dec = rising_sun_decompose(d, A, StoppingPolicy(max_depth=depth))
    v = residual_violation_measure(d, dec.selected, A)
    print(f"{depth:>5} {len(dec.selected):>9} {float(v / total):>26.3e}"
          + ("" if dec.complete else "   truncated"))
