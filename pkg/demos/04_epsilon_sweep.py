"""
Rate plus floor: sweeping the difference step
=============================================

Smaller difference steps shrink the floor region, so the final gap keeps
improving until the run length, not the field, is the bottleneck.
"""

import numpy as np

from zomirror import FiniteDiffField, StepConfig, euclidean_mirror, make_problem, run, star_c_from_mu_L
from zomirror.certify import floor_radius
from zomirror.problems import ProblemSpec

spec = ProblemSpec(kind="log-sum-exp", dim=5, mu=1.0, L=4.0, seed=0)
print("   eps     final gap   (L/2) r^2")
for eps in (1e-1, 1e-2, 1e-3):
    oracle = make_problem(spec)
    field = FiniteDiffField(oracle, eps, star_c_from_mu_L(oracle.mu, oracle.L))
    x1 = oracle.x_star + 2.0
    record = run(euclidean_mirror(), oracle, field, StepConfig(eta0=0.125), x1, 200)
    r = floor_radius(oracle.mu, oracle.L, eps, oracle.dim)
    print(f"{eps:6.0e}  {record.rows[-1].f - oracle.f_star:11.3e}  {0.5 * oracle.L * r * r:10.3e}")
