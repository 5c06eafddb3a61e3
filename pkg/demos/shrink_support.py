"""
Shrinking a randomized model to two scorers
===========================================

The saddle-point solver returns a uniform mixture over every best response
it visited. A tiny linear program picks at most two of them that keep the
cost budget and do not raise the disparity.
"""
import numpy as np

from goodset import Scorer
from goodset.expgrad import shrink_support

rng = np.random.default_rng(0)

# twelve candidate scorers with (disparity, cost) pairs
disp = rng.normal(size=12)
cost = rng.normal(size=12)
support = [(Scorer([d]), d, c) for d, c in zip(disp, cost)]

###############################################################################
# The input is the uniform mixture; its budget is eps_hat, loosened by
# doubling nu' until the input itself fits.
eps_hat = float(cost.mean()) - 0.02
sr = shrink_support(support, eps_hat, nu=0.01)
print(f"input:  disparity {disp.mean():+.4f}, cost {cost.mean():+.4f}, 12 scorers")
print(f"output: disparity {sr.objective:+.4f}, cost {sr.cost:+.4f}, scorers {sr.indices}, "
      f"weights {np.round(sr.weights, 3)}, nu' {sr.nu_prime}")
