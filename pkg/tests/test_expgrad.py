import itertools
import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.optimize import linprog

from goodset import Dataset, ExpGradConfig, Grid, LossSpec, Scorer, make_spec
from goodset.disparity import DisparitySpec
from goodset.errors import DomainError
from goodset.expgrad import (
    EXHAUSTED,
    FEASIBLE,
    INFEASIBLE,
    GroupLossOracle,
    GroupLossProblem,
    calibrate_eps,
    certify,
    iteration_cap,
    shrink_lp,
    shrink_result,
    shrink_support,
    solve_abs_disparity_min,
    solve_bgl,
    solve_disparity_max,
    solve_disparity_min,
)
from goodset.loss import c0_hat
from goodset.oracle import CandidateOracle

import tiny

SP = make_spec("SP")
NULL = DisparitySpec(0.0, 0.0, None, None)
ORACLE = CandidateOracle(tiny.SCORERS)


def _eps():
    return float(np.sort(tiny.points(SP)[:, 1])[3])


def test_config_defaults():
    cfg = ExpGradConfig(eps_hat=0.1).resolved(3607)
    assert cfg.B_lambda == pytest.approx(math.sqrt(3607) / 2)
    assert cfg.nu == pytest.approx(1 / math.sqrt(3607))
    assert ExpGradConfig(eps_hat=0.1).resolved(3607, maximize=True).B_lambda == pytest.approx(math.sqrt(3607))
    with pytest.raises(DomainError):
        ExpGradConfig(eps_hat=0.1, nu=0)


def test_calibrate_eps():
    y = np.r_[np.zeros(5), np.ones(5)]
    ds = Dataset(x=np.ones((10, 1)), a=np.arange(10) % 2, y=y)
    sq, g = LossSpec("squared"), Grid(40)
    assert calibrate_eps(0.2, 0.0, sq, g, ds) + c0_hat(sq, g, ds) == pytest.approx(0.2, abs=1e-15)
    assert calibrate_eps(0.2, 0.0, sq, g, ds) == pytest.approx(0.2 - 0.4753125, abs=1e-12)
    with pytest.raises(DomainError):
        calibrate_eps(0.2, -0.1, sq, g, ds)


def test_null_measure_gives_zero_disparity():
    cfg = ExpGradConfig(eps_hat=_eps())
    res = solve_disparity_min(tiny.dataset(), NULL, cfg, tiny.LOSS, tiny.GRID, learner=ORACLE)
    assert res.status == FEASIBLE
    assert res.disparity == 0
    assert certify(res, tiny.dataset(), tiny.LOSS, tiny.GRID).passed


def test_min_within_bound_of_exact():
    eps = _eps()
    pts = tiny.points(SP)
    exact = tiny.lp_min(pts[:, 0], pts[:, 1], eps)
    cfg = ExpGradConfig(eps_hat=eps, B_lambda=10, nu=0.05, max_iter=2000)
    res = solve_disparity_min(tiny.dataset(), SP, cfg, tiny.LOSS, tiny.GRID, learner=ORACLE)
    assert res.status == FEASIBLE
    assert res.disparity <= exact + 2 * res.config.nu
    assert res.cost <= eps + res.slack


def test_max_is_negated_min():
    eps = _eps()
    cfg = ExpGradConfig(eps_hat=eps, B_lambda=10, nu=0.05, max_iter=2000)
    mx = solve_disparity_max(tiny.dataset(), SP, cfg, tiny.LOSS, tiny.GRID, learner=ORACLE)
    mn = solve_disparity_min(tiny.dataset(), SP.negated(), cfg, tiny.LOSS, tiny.GRID, learner=ORACLE)
    assert mx.disparity == -mn.disparity
    assert mx.iterations == mn.iterations
    assert mx.algorithm == "alg3-max"
    assert [r["disp_hat"] for r in mx.trace] == [-r["disp_hat"] for r in mn.trace]
    pts = tiny.points(SP)
    exact = -tiny.lp_min(-pts[:, 0], pts[:, 1], eps)
    assert mx.disparity >= exact - 2 * mx.config.nu
    assert certify(mx, tiny.dataset(), tiny.LOSS, tiny.GRID).passed


def test_budget_exhausted_keeps_best_iterate():
    cfg = ExpGradConfig(eps_hat=_eps(), B_lambda=10, nu=1e-6, max_iter=5)
    res = solve_disparity_min(tiny.dataset(), SP, cfg, tiny.LOSS, tiny.GRID, learner=ORACLE)
    assert res.status == EXHAUSTED
    assert res.model is not None
    assert res.iterations == 5
    assert res.nu_T == min(r["nu_t"] for r in res.trace)
    assert len(res.points) == len(res.model.scorers)


def test_infeasible_budget():
    cfg = ExpGradConfig(eps_hat=-5.0, B_lambda=10, nu=0.05, max_iter=2000)
    res = solve_disparity_min(tiny.dataset(), SP, cfg, tiny.LOSS, tiny.GRID, learner=ORACLE)
    assert res.status == INFEASIBLE
    assert res.model is None and res.candidate is not None


def test_abs_min_within_bound():
    eps = _eps()
    pts = tiny.points(SP)
    exact = tiny.lp_min_abs(pts[:, 0], pts[:, 1], eps)
    cfg = ExpGradConfig(eps_hat=eps, B_lambda=10, nu=0.05, max_iter=2000)
    res = solve_abs_disparity_min(tiny.dataset(), SP, cfg, tiny.LOSS, tiny.GRID, learner=ORACLE)
    assert res.status == FEASIBLE
    assert abs(res.disparity) <= exact + 2 * res.config.nu + res.slack
    assert certify(res, tiny.dataset(), tiny.LOSS, tiny.GRID).passed


def test_abs_min_null_measure_xi_vanishes():
    cfg = ExpGradConfig(eps_hat=_eps(), B_lambda=10, nu=0.05, max_iter=2000)
    res = solve_abs_disparity_min(tiny.dataset(), NULL, cfg, tiny.LOSS, tiny.GRID, learner=ORACLE)
    assert res.xi <= 0.05


def _two_group(rng, n, noise0, noise1, shift=0.0):
    a = np.arange(n) % 2
    t = rng.random(n)
    noise = np.where(a == 1, noise1, noise0)
    y = np.clip(0.2 + 0.6 * t + shift * a + noise * rng.standard_normal(n), 0, 1)
    return Dataset(x=np.column_stack([np.ones(n), t]), a=a, y=y)


def test_bgl_symmetric_groups():
    rng = np.random.default_rng(0)
    ds = _two_group(rng, 4000, 0.1, 0.1)
    sq = LossSpec("squared")
    bench = float(np.mean((ds.y - Scorer(np.linalg.lstsq(ds.x, ds.y, rcond=None)[0]).predict(ds.x)) ** 2))
    res = solve_bgl(ds, ExpGradConfig(eps_hat=1.01 * bench), sq)
    assert res.model is not None
    assert abs(res.disparity) < 0.005


def test_bgl_large_lambda_is_loss_minimizer():
    rng = np.random.default_rng(1)
    ds = _two_group(rng, 500, 0.05, 0.2)
    prob = GroupLossProblem(ds, make_spec("BGL"), LossSpec("squared"))
    f = GroupLossOracle(prob)(prob, 1e6, 1.0)
    ols = np.linalg.lstsq(ds.x, ds.y, rcond=None)[0]
    np.testing.assert_allclose(f.weights, ols, atol=1e-4)


def test_bgl_against_scorer_grid():
    rng = np.random.default_rng(2)
    ds = _two_group(rng, 200, 0.05, 0.25)
    sq = LossSpec("squared")
    prob = GroupLossProblem(ds, make_spec("BGL"), sq)
    cands = [Scorer([b0, b1]) for b0, b1 in itertools.product(np.linspace(0, 0.6, 7), np.linspace(0, 1, 6))]
    pts = np.array([prob.evaluate(f) for f in cands])
    eps = float(np.quantile(pts[:, 1], 0.3))
    exact = tiny.lp_min(pts[:, 0], pts[:, 1], eps)
    cfg = ExpGradConfig(eps_hat=eps, B_lambda=20, nu=0.02, max_iter=3000)
    res = solve_bgl(ds, cfg, sq, learner=CandidateOracle(cands))
    assert res.status == FEASIBLE
    assert res.disparity <= exact + 2 * res.config.nu


# ------------------------------------------------------------------- shrink


def test_shrink_hand_example():
    d, c = [0.1, 0.5, 0.3], [0.9, 0.1, 0.5]
    idx, w, obj = shrink_lp(d, c, 0.5)
    assert obj == pytest.approx(0.3, abs=1e-15)
    # the blend of points 0 and 1 on the budget line ties with point 2 alone; the smaller support wins
    assert idx == (2,)
    idx, w, obj = shrink_lp(d[:2], c[:2], 0.5)
    assert idx == (1, 0)
    assert w[1] == pytest.approx(0.5, abs=1e-15)
    assert obj == pytest.approx(0.3, abs=1e-15)


def test_shrink_single_point():
    sr = shrink_support([(Scorer([0.1]), 0.2, 0.3)], eps_hat=0.5, nu=0.1)
    assert sr.indices == (0,) and sr.weights.tolist() == [1.0]


def _linprog_min(d, c, budget):
    k = len(d)
    r = linprog(d, A_ub=[c], b_ub=[budget], A_eq=[np.ones(k)], b_eq=[1], bounds=[(0, None)] * k,
                method="highs")
    return r.fun


def _pair_scan(d, c, budget):
    best = math.inf
    for i in range(len(d)):
        if c[i] <= budget:
            best = min(best, d[i])
        for j in range(len(d)):
            if c[i] <= budget < c[j]:
                p = (c[j] - budget) / (c[j] - c[i])
                best = min(best, p * d[i] + (1 - p) * d[j])
    return best


def test_shrink_matches_pair_scan_and_lp():
    rng = np.random.default_rng(3)
    for _ in range(50):
        k = int(rng.integers(2, 12))
        d, c = rng.normal(size=k), rng.normal(size=k)
        w = rng.dirichlet(np.ones(k))
        sr = shrink_support(zip([Scorer([v]) for v in d], d, c), eps_hat=float(w @ c), nu=0.01, weights=w)
        budget = float(w @ c) + 2 * sr.nu_prime
        assert len(sr.indices) <= 2
        assert sr.objective <= float(w @ d) + 1e-9
        assert sr.cost <= budget + 1e-12
        assert sr.objective == _pair_scan(d, c, budget)
        assert sr.objective == pytest.approx(_linprog_min(d, c, budget), abs=1e-9)


def test_shrink_budget_grows_until_input_fits():
    sr = shrink_support([(Scorer([0.0]), 0.0, 1.0), (Scorer([1.0]), 1.0, 1.0)], eps_hat=0.9, nu=0.02)
    assert sr.nu_prime == 0.08
    assert sr.cost <= 0.9 + 2 * sr.nu_prime


def test_shrink_result_on_solver_output():
    eps = _eps()
    cfg = ExpGradConfig(eps_hat=eps, B_lambda=10, nu=0.05, max_iter=2000)
    for maximize in (False, True):
        solve = solve_disparity_max if maximize else solve_disparity_min
        res = solve(tiny.dataset(), SP, cfg, tiny.LOSS, tiny.GRID, learner=ORACLE)
        sr = shrink_result(res, maximize)
        assert sr.model.support_size <= 2
        if maximize:
            assert sr.objective >= res.disparity - 1e-9
        else:
            assert sr.objective <= res.disparity + 1e-9


# ------------------------------------------------------------------ certify


def test_certificate_negative_control():
    eps = _eps()
    cfg = ExpGradConfig(eps_hat=eps, B_lambda=10, nu=0.05, max_iter=2000)
    res = solve_disparity_min(tiny.dataset(), SP, cfg, tiny.LOSS, tiny.GRID, learner=ORACLE)
    forged = replace(res, cost=eps + res.slack + 1.0)
    cert = certify(forged)
    assert not cert.passed
    assert not cert.to_dict()["cost_slack"]["passed"]
    assert cert.to_dict()["nu_recomputed"]["passed"]


def test_iteration_cap_arithmetic():
    n = 3607
    cap = iteration_cap(math.sqrt(n) / 2, 1 / math.sqrt(n))
    assert cap == pytest.approx(math.log(2) * n * n, rel=1e-12)
    assert cap == pytest.approx(9.018156e6, rel=1e-6)
    assert iteration_cap(1.0, 1.0, 3) == pytest.approx(4 * math.log(3))
