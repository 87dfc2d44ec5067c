"""
How much scaling does a ball of gradient estimates need?
========================================================

Given a center ``m`` and radius ``R``, the closed-form scaling makes
``alpha m - x`` lie in the dual cone of ``C(x, c)`` for every ``x`` in the
ball. Here it is compared with the numerically exact minimum.
"""

import numpy as np

from zomirror.conic import (DominanceProblem, ball_min_dominance_alpha, dominance_witness,
                            min_dominance_alpha, verify_dominance)

print("  R/|m|     c   closed form   exact")
for ratio in (0.1, 0.3, 0.6):
    for c in (0.8, 0.95):
        p = DominanceProblem.from_norms(1.0, ratio, c)
        try:
            alpha = min_dominance_alpha(p)
        except ValueError as exc:
            print(f"  {ratio:5.2f}  {c:4.2f}   infeasible ({exc.condition})")
            continue
        exact, _ = ball_min_dominance_alpha(p)
        print(f"  {ratio:5.2f}  {c:4.2f}   {alpha:11.4f}  {exact:7.4f}")

# the closed form always dominates, but it is conservative:
p = DominanceProblem.from_norms(1.0, 0.6, 0.8)
exact, _ = ball_min_dominance_alpha(p)
print()
print("closed form 5.8 dominates:", verify_dominance(p, 5.8))
print(f"exact minimum {exact:.4f} dominates:", verify_dominance(p, exact * (1 + 1e-9)))
x, y = dominance_witness(p, 0.99 * exact)
print("below the exact minimum a violating pair exists, <alpha m - x, y> =",
      float((0.99 * exact * p.m - x) @ y))
