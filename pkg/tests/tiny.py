"""A tiny enumerable instance: 8 rows, 2 features, grid of 4 levels, 9 linear scorers."""
import itertools

import numpy as np
from scipy.optimize import linprog

from goodset import Dataset, Grid, LossSpec, Scorer
from goodset.oracle import CostSensitiveProblem

GRID = Grid(4)
LOSS = LossSpec("squared")
T = np.array([0.05, 0.2, 0.35, 0.5, 0.6, 0.7, 0.85, 0.95])
X = np.column_stack([np.ones(8), T])
A = np.array([0, 0, 0, 1, 0, 1, 1, 1])
Y = np.array([0, 0, 1, 0, 1, 1, 1, 1], dtype=float)
SCORERS = [Scorer([b0, b1]) for b0, b1 in itertools.product((0.0, 0.3, 0.6), (-0.4, 0.0, 0.8))]


def dataset() -> Dataset:
    return Dataset(x=X, a=A, y=Y, feature_names=("one", "t"))


def points(spec):
    prob = CostSensitiveProblem(dataset(), spec, GRID, LOSS)
    return np.array([prob.evaluate(f) for f in SCORERS])


def lp_min(d, c, eps_hat):
    """``min p.d`` s.t. ``p.c <= eps_hat`` over the simplex; ``None`` when infeasible."""
    k = len(d)
    r = linprog(d, A_ub=[c], b_ub=[eps_hat], A_eq=[np.ones(k)], b_eq=[1], bounds=[(0, None)] * k,
                method="highs")
    return r.fun if r.status == 0 else None


def lp_min_abs(d, c, eps_hat):
    """``min |p.d|`` s.t. ``p.c <= eps_hat`` over the simplex."""
    k = len(d)
    obj = np.r_[np.zeros(k), 1.0]
    A_ub = [np.r_[d, -1.0], np.r_[-d, -1.0], np.r_[c, 0.0]]
    r = linprog(obj, A_ub=A_ub, b_ub=[0, 0, eps_hat], A_eq=[np.r_[np.ones(k), 0.0]], b_eq=[1],
                bounds=[(0, None)] * (k + 1), method="highs")
    return r.fun if r.status == 0 else None
