"""The one-dimensional case: F. Riesz's rising sun on a step function.

On [0, 1) take f = 2 on the left half and 0 on the right. The mean is 1.
For each level A in (1, 2) the selected interval is [0, 1/A): its mean is
(2 * 1/2) / (1/A) = A. Mirroring f moves the interval to the right end.
"""
from fractions import Fraction

from risingsun import StoppingPolicy, exact_density, riesz_1d

policy = StoppingPolicy(max_depth=20)
step = exact_density([(0, 1)], [2], [2, 0])
mirror = exact_density([(0, 1)], [2], [0, 2])

for A in (Fraction(5, 4), Fraction(3, 2), Fraction(7, 4)):
    left = riesz_1d(step, A, policy).selected
    right = riesz_1d(mirror, A, policy).selected
    print(f"A={A}:  step -> {left[0]}   mirror -> {right[0]}   1/A = {1 / A}")

# a rougher function: several disjoint intervals, each with mean exactly A
rough = exact_density([(0, 1)], [8], [5, -1, 0, 4, 0, 0, 6, -2])
dec = riesz_1d(rough, 2, policy)
print("\nrough f, level 2:")
for node in dec.selected_nodes:
    print(f"  {node.rect}  mean={node.mean}")
print("complete:", dec.complete)
