"""Exact means where dyadic cubes cannot reach them.

f = 1 everywhere on the unit square except the top-right quarter, where it is
0. Its mean is 3/4. Every dyadic subcube has mean 3/4, 1 or 0, so no
Calderon-Zygmund stopping time at level A = 7/8 selects cubes of mean
exactly 7/8. Sliding a hyperplane does.
"""
from fractions import Fraction
from pathlib import Path

from risingsun import StoppingPolicy, build_tables, cz_decompose, mean, rising_sun_decompose
from risingsun.fixtures import paper_counterexample
from risingsun.render import render_svg
from risingsun.verify import verify_decomposition

d = paper_counterexample()
A = Fraction(7, 8)
policy = StoppingPolicy(max_depth=20)
t = build_tables(d)
print("domain mean:", mean(t, d.domain))

dec = rising_sun_decompose(d, A, policy)
print("\nrising sun, level", A)
for node in dec.selected_nodes:
    print(f"  select {node.rect}  mean={node.mean}")
for rect, reason in dec.residual_leaves:
    print(f"  leave  {rect}  ({reason})")

# the division tree: the first cut is where t/2 + 1/4 = (7/8) t, i.e. t = 2/3
root = dec.root.outcome
print("\nfirst cut on axis", root.axis, "at", root.cut)
print("second cut on axis", root.continuing.outcome.axis, "at", root.continuing.outcome.cut)

print("\nverifier:")
print(verify_decomposition(d, dec).render())

cz = cz_decompose(d, A, policy)
print("Calderon-Zygmund cubes at the same level:")
for cube, m in cz.cubes:
    print(f"  {cube}  mean={m}  (bracket ({A}, {4 * A}])")

out = Path(__file__).with_name("counterexample.svg")
out.write_text(render_svg(dec, 480, 480))
print("\nfigure written to", out)
