"""Exponentiated-gradient saddle-point solvers over the set of good models.

Three games share one loop: the dual player runs exponentiated gradient on
``theta`` (``lambda = B * softmax-with-slack(theta)``) and the prediction
player best-responds through an oracle. Iterates are averaged uniformly and
the loop stops once the averaged pair is a ``nu``-approximate saddle point.

* :func:`solve_disparity_min` / :func:`solve_disparity_max` minimize (maximize)
  a disparity subject to the loss budget, over threshold classifiers.
* :func:`solve_abs_disparity_min` minimizes ``|disparity|`` through a slack
  variable ``xi`` and three dual coordinates.
* :func:`solve_bgl` minimizes the group-loss gap without discretization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit

from .disparity import DisparitySpec, make_spec
from .errors import DomainError, EmptyGroupError
from .loss import Grid, LossSpec, c0_hat
from .models import Scorer, StochasticModel
from .oracle import (
    DEFAULT_RIDGE,
    CostSensitiveProblem,
    HeuristicOracle,
    fit_wls,
)

FEASIBLE = "feasible"
INFEASIBLE = "infeasible_null"
EXHAUSTED = "budget_exhausted"

TRACE_FIELDS = ("t", "lambda", "disp_t", "cost_t", "xi_t", "disp_hat", "cost_hat", "xi_hat",
                "L_hat", "L_upper", "L_lower", "nu_t")


@dataclass(frozen=True)
class ExpGradConfig:
    """Solver parameters. ``None`` entries are resolved from ``n`` by :meth:`resolved`.

    Defaults: ``B_lambda = sqrt(n)/2`` (``sqrt(n)`` when maximizing),
    ``nu = 1/sqrt(n)``, ``eta = 2``, ``max_iter = 500``, ``B_xi = 1``.
    """

    eps_hat: float
    B_lambda: float | None = None
    nu: float | None = None
    eta: float = 2.0
    max_iter: int = 500
    B_xi: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.eps_hat):
            raise DomainError("eps_hat must be finite")
        for name in ("B_lambda", "nu"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise DomainError(f"{name} must be positive")
        if not (self.eta > 0 and self.B_xi > 0):
            raise DomainError("eta and B_xi must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise DomainError("max_iter must be a positive integer")

    def resolved(self, n: int, maximize: bool = False) -> "ExpGradConfig":
        root = math.sqrt(n)
        B = self.B_lambda if self.B_lambda is not None else (root if maximize else root / 2)
        nu = self.nu if self.nu is not None else 1.0 / root
        return replace(self, B_lambda=float(B), nu=float(nu))


@dataclass(frozen=True, eq=False)
class SaddleResult:
    """Outcome of a saddle-point solve.

    ``model`` is the averaged primal iterate (for ``budget_exhausted`` the
    iterate with the smallest ``nu_t``); it is ``None`` only for
    ``infeasible_null``. ``disparity`` and ``cost`` are the training values of
    ``model`` (``cost`` is the average loss for BGL runs). ``points`` holds the
    per-iterate ``(disparity, cost)`` used by support shrinking.
    """

    status: str
    model: StochasticModel | None
    lam: object
    iterations: int
    trace: list
    config: ExpGradConfig
    algorithm: str
    spec: DisparitySpec
    disparity: float
    cost: float
    xi: float = 0.0
    nu_T: float = float("inf")
    points: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    candidate: StochasticModel | None = None

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE

    @property
    def slack(self) -> float:
        c = self.config
        top = c.B_xi if self.algorithm == "alg4" else self.spec.beta_l1
        return (top + 2 * c.nu) / c.B_lambda


def calibrate_eps(benchmark_loss: float, delta: float, spec: LossSpec, grid: Grid, ds) -> float:
    """``eps_hat = (1 + delta) * benchmark_loss - c0_hat``."""
    if not 0 <= benchmark_loss <= 1:
        raise DomainError("benchmark loss must lie in [0, 1]")
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    return (1 + delta) * benchmark_loss - c0_hat(spec, grid, ds)


def least_squares_anchor(prob) -> Scorer:
    """Ridge least-squares fit of the outcome on the features (a fallback response)."""
    return fit_wls(prob.X, prob.y, ridge=DEFAULT_RIDGE)


# ------------------------------------------------------------------------ loops


def _uniform(scorers) -> StochasticModel:
    k = len(scorers)
    return StochasticModel(tuple(scorers), np.full(k, 1.0 / k))


def _finish(status, scorers, best_t, lam_hist, trace, cfg, algorithm, spec, dc, xi_hist=None):
    """Build the result from the prefix of iterates ending at ``best_t``."""
    t = best_t
    model = _uniform(scorers[:t])
    d, c = dc[:t].mean(axis=0)
    xi = float(np.mean(xi_hist[:t])) if xi_hist is not None else 0.0
    lam = np.mean(lam_hist[:t], axis=0)
    lam = float(lam) if np.ndim(lam) == 0 else lam
    row = trace[t - 1]
    if status == FEASIBLE:
        top = cfg.B_xi if algorithm == "alg4" else spec.beta_l1
        if c > cfg.eps_hat + (top + 2 * cfg.nu) / cfg.B_lambda:
            return SaddleResult(INFEASIBLE, None, lam, len(trace), trace, cfg, algorithm, spec,
                                float(d), float(c), xi, row["nu_t"], dc[:t].copy(), candidate=model)
    return SaddleResult(status, model, lam, len(trace), trace, cfg, algorithm, spec,
                        float(d), float(c), xi, row["nu_t"], dc[:t].copy())


def _run_single(prob, oracle, cfg: ExpGradConfig, spec, algorithm: str) -> SaddleResult:
    """One dual coordinate: the loop shared by the min/max problem and BGL."""
    B, nu, eps = cfg.B_lambda, cfg.nu, cfg.eps_hat
    theta = 0.0
    scorers, lam_hist, trace = [], [], []
    dc = np.zeros((cfg.max_iter, 2))
    sum_d = sum_c = sum_l = 0.0
    best_t, best_nu = 1, float("inf")
    for t in range(1, cfg.max_iter + 1):
        lam = B * expit(theta)
        h = oracle(prob, lam, 1.0)
        d_t, c_t = prob.evaluate(h)
        scorers.append(h)
        lam_hist.append(lam)
        dc[t - 1] = d_t, c_t
        sum_d += d_t
        sum_c += c_t
        sum_l += lam
        d_hat, c_hat, lam_hat = sum_d / t, sum_c / t, sum_l / t
        L_hat = d_hat + lam_hat * (c_hat - eps)
        L_upper = d_hat + (B * (c_hat - eps) if c_hat > eps else 0.0)
        h_lo = oracle(prob, lam_hat, 1.0)
        d_lo, c_lo = prob.evaluate(h_lo)
        L_lower = d_lo + lam_hat * (c_lo - eps)
        nu_t = max(L_hat - L_lower, L_upper - L_hat)
        trace.append({"t": t, "lambda": lam, "disp_t": d_t, "cost_t": c_t, "xi_t": 0.0,
                      "disp_hat": d_hat, "cost_hat": c_hat, "xi_hat": 0.0,
                      "L_hat": L_hat, "L_upper": L_upper, "L_lower": L_lower, "nu_t": nu_t})
        if nu_t < best_nu:
            best_t, best_nu = t, nu_t
        if nu_t <= nu:
            return _finish(FEASIBLE, scorers, t, lam_hist, trace, cfg, algorithm, spec, dc)
        theta += cfg.eta * (c_t - eps)
    return _finish(EXHAUSTED, scorers, best_t, lam_hist, trace, cfg, algorithm, spec, dc)


def _default_oracle(prob, learner, anchors):
    if learner is not None:
        return learner
    return HeuristicOracle(prob, anchors=[least_squares_anchor(prob), *anchors])


def _problem(ds, spec, grid, lossspec, g=None):
    if spec.mode == "bgl":
        raise DomainError("use solve_bgl for bounded-group-loss specs")
    return CostSensitiveProblem(ds, spec, grid, lossspec, g)


def solve_disparity_min(ds, spec: DisparitySpec, cfg: ExpGradConfig, lossspec: LossSpec,
                        grid: Grid, learner=None, anchors=(), g=None) -> SaddleResult:
    """Minimize ``disparity(Q)`` subject to ``cost(Q) <= eps_hat`` over threshold classifiers.

    ``learner`` is an oracle ``(problem, lam, disp_scale) -> scorer``; the
    default is the heuristic least-squares best response with the zero scorer
    and a least-squares fit as fallbacks.
    """
    cfg = cfg.resolved(ds.n, maximize=False)
    prob = _problem(ds, spec, grid, lossspec, g)
    return _run_single(prob, _default_oracle(prob, learner, anchors), cfg, spec, "alg3")


def solve_disparity_max(ds, spec: DisparitySpec, cfg: ExpGradConfig, lossspec: LossSpec,
                        grid: Grid, learner=None, anchors=(), g=None) -> SaddleResult:
    """Maximize ``disparity(Q)``: minimize the negated measure and flip the sign back."""
    cfg = cfg.resolved(ds.n, maximize=True)
    res = solve_disparity_min(ds, spec.negated(), cfg, lossspec, grid, learner, anchors, g)
    trace = [dict(r, disp_t=-r["disp_t"], disp_hat=-r["disp_hat"]) for r in res.trace]
    pts = res.points.copy()
    pts[:, 0] *= -1
    return replace(res, spec=spec, disparity=-res.disparity, trace=trace, points=pts,
                   algorithm="alg3-max")


def _dual3(theta, B):
    e = np.exp(theta - max(0.0, theta.max()))
    return B * e / (math.exp(-max(0.0, theta.max())) + e.sum())


def solve_abs_disparity_min(ds, spec: DisparitySpec, cfg: ExpGradConfig, lossspec: LossSpec,
                            grid: Grid, learner=None, anchors=(), g=None) -> SaddleResult:
    """Minimize ``|disparity(Q)|`` subject to the cost budget via a slack ``xi``.

    Dual coordinates are ``(lambda_plus, lambda_minus, lambda_cost)`` for the
    constraints ``disp <= xi``, ``-disp <= xi`` and ``cost <= eps_hat``.
    """
    cfg = cfg.resolved(ds.n, maximize=False)
    prob = _problem(ds, spec, grid, lossspec, g)
    oracle = _default_oracle(prob, learner, anchors)
    B, nu, eps, Bxi = cfg.B_lambda, cfg.nu, cfg.eps_hat, cfg.B_xi
    theta = np.zeros(3)
    scorers, lam_hist, xi_hist, trace = [], [], [], []
    dc = np.zeros((cfg.max_iter, 2))
    sums = np.zeros(3)
    lam_sum = np.zeros(3)
    best_t, best_nu = 1, float("inf")

    def best_xi(lam):
        return Bxi if 1 - lam[0] - lam[1] < 0 else 0.0

    for t in range(1, cfg.max_iter + 1):
        lam = _dual3(theta, B)
        xi_t = best_xi(lam)
        h = oracle(prob, lam[2], lam[0] - lam[1])
        d_t, c_t = prob.evaluate(h)
        scorers.append(h)
        lam_hist.append(lam)
        xi_hist.append(xi_t)
        dc[t - 1] = d_t, c_t
        sums += (d_t, c_t, xi_t)
        lam_sum += lam
        d_hat, c_hat, xi_hat = sums / t
        lh = lam_sum / t
        viol = np.array([d_hat - xi_hat, -d_hat - xi_hat, c_hat - eps])
        L_hat = xi_hat + lh @ viol
        L_upper = xi_hat + B * max(0.0, viol.max())
        h_lo = oracle(prob, lh[2], lh[0] - lh[1])
        d_lo, c_lo = prob.evaluate(h_lo)
        xi_lo = best_xi(lh)
        L_lower = xi_lo * (1 - lh[0] - lh[1]) + (lh[0] - lh[1]) * d_lo + lh[2] * (c_lo - eps)
        nu_t = max(L_hat - L_lower, L_upper - L_hat)
        trace.append({"t": t, "lambda": lam.tolist(), "disp_t": d_t, "cost_t": c_t, "xi_t": xi_t,
                      "disp_hat": d_hat, "cost_hat": c_hat, "xi_hat": xi_hat,
                      "L_hat": L_hat, "L_upper": L_upper, "L_lower": L_lower, "nu_t": nu_t})
        if nu_t < best_nu:
            best_t, best_nu = t, nu_t
        if nu_t <= nu:
            return _finish(FEASIBLE, scorers, t, lam_hist, trace, cfg, "alg4", spec, dc, xi_hist)
        theta = theta + cfg.eta * np.array([d_t - xi_t, -d_t - xi_t, c_t - eps])
    return _finish(EXHAUSTED, scorers, best_t, lam_hist, trace, cfg, "alg4", spec, dc, xi_hist)


# -------------------------------------------------------------------------- BGL


class GroupLossProblem:
    """Weighted-loss view of the bounded-group-loss game (no discretization)."""

    def __init__(self, ds, spec: DisparitySpec, lossspec: LossSpec):
        self.ds = ds
        self.spec = spec
        self.lossspec = lossspec
        self.X = ds.x
        self.y = ds.outcomes()
        self.n = ds.n
        coef = np.zeros(ds.n)
        for _, beta, ev in spec.sides():
            mask = np.asarray(ds.a) == ev.a
            if not mask.any():
                raise EmptyGroupError(f"group A={ev.a} is empty")
            coef += beta * mask / mask.mean()
        self.disp_coef = coef

    def evaluate(self, f):
        """``(group-loss disparity, average loss)`` of ``f`` (mixture-weighted)."""
        if hasattr(f, "components"):
            vals = np.array([self.evaluate(s) for s, _ in f.components()])
            return tuple(float(v) for v in f.weights @ vals)
        losses = self.lossspec(self.y, f.predict(self.X))
        return float(np.mean(self.disp_coef * losses)), float(np.mean(losses))

    def row_weights(self, lam: float, disp_scale: float = 1.0) -> np.ndarray:
        return disp_scale * self.disp_coef + lam

    def lagrangian(self, f, lam: float, disp_scale: float = 1.0, eps_hat: float = 0.0) -> float:
        d, c = self.evaluate(f)
        return disp_scale * d + lam * (c - eps_hat)


class GroupLossOracle:
    """Best response for the group-loss game.

    Rows with positive weight are fitted toward their outcome and rows with
    negative weight toward the farthest endpoint of [0, 1], with ``|W|`` as
    regression weights. For squared loss, when the signed weighted Gram
    matrix is positive definite the exact weighted minimizer is also
    considered. The zero scorer and anchors act as a floor.
    """

    def __init__(self, prob: GroupLossProblem, anchors=(), ridge: float = DEFAULT_RIDGE):
        self.ridge = ridge
        self.anchors = [Scorer.zero(prob.X.shape[1]), *anchors]
        self._far = np.where(prob.y > 0.5, 0.0, 1.0)

    def __call__(self, prob: GroupLossProblem, lam: float, disp_scale: float):
        W = prob.row_weights(lam, disp_scale)
        cands = []
        if np.any(W != 0):
            targets = np.where(W > 0, prob.y, self._far)
            cands.append(fit_wls(prob.X, targets, np.abs(W), ridge=self.ridge))
        if prob.lossspec.kind == "squared":
            gram = prob.X.T @ (prob.X * W[:, None]) + self.ridge * np.eye(prob.X.shape[1])
            if np.linalg.eigvalsh(gram).min() > 0:
                cands.append(Scorer(np.linalg.solve(gram, prob.X.T @ (W * prob.y))))
        cands.extend(self.anchors)
        vals = [prob.lagrangian(f, lam, disp_scale) for f in cands]
        return cands[int(np.argmin(vals))]


def solve_bgl(ds, cfg: ExpGradConfig, lossspec: LossSpec, spec: DisparitySpec | None = None,
              learner=None, anchors=()) -> SaddleResult:
    """Minimize the group-loss gap subject to ``loss(Q) <= eps_hat`` (here ``eps_hat = eps``)."""
    spec = spec or make_spec("BGL")
    cfg = cfg.resolved(ds.n, maximize=False)
    prob = GroupLossProblem(ds, spec, lossspec)
    if learner is None:
        learner = GroupLossOracle(prob, anchors=[least_squares_anchor(prob), *anchors])
    return _run_single(prob, learner, cfg, spec, "bgl")


# ----------------------------------------------------------------------- shrink


@dataclass(frozen=True, eq=False)
class ShrinkResult:
    model: StochasticModel
    indices: tuple
    weights: np.ndarray
    objective: float
    cost: float
    nu_prime: float


def shrink_budget(costs, weights, eps_hat: float, nu: float) -> float:
    """Smallest ``nu'`` in ``{0, nu, 2 nu, 4 nu, ...}`` with the weighted input cost within ``eps_hat + 2 nu'``."""
    if not nu > 0:
        raise DomainError("nu must be positive")
    c = float(np.asarray(weights) @ np.asarray(costs))
    if c <= eps_hat:
        return 0.0
    nu_p = nu
    while c > eps_hat + 2 * nu_p:
        nu_p *= 2
    return nu_p


def shrink_lp(disps, costs, budget: float):
    """Exact solution of ``min p.d  s.t.  p.c <= budget, p in simplex``.

    Returns ``(indices, weights, objective)`` with at most two indices, or
    ``None`` when no point is feasible. The optimum is either a single
    feasible point or a blend of a feasible and an infeasible point that
    meets the budget with equality.
    """
    d = np.asarray(disps, dtype=float)
    c = np.asarray(costs, dtype=float)
    ok = c <= budget
    if not ok.any():
        return None
    i_best = int(np.flatnonzero(ok)[np.argmin(d[ok])])
    best = ((i_best,), np.ones(1), float(d[i_best]))
    lo, hi = np.flatnonzero(ok), np.flatnonzero(~ok & (d < d[i_best]))
    if hi.size:
        cl, ch = c[lo][:, None], c[hi][None, :]
        p = (ch - budget) / (ch - cl)
        obj = p * d[lo][:, None] + (1 - p) * d[hi][None, :]
        k = int(np.argmin(obj))
        r, s = divmod(k, hi.size)
        if obj.flat[k] < best[2]:
            pk = float(p[r, s])
            best = ((int(lo[r]), int(hi[s])), np.array([pk, 1 - pk]), float(obj.flat[k]))
    return best


def shrink_support(support, eps_hat: float, nu: float, weights=None) -> ShrinkResult:
    """Reduce a mixture to at most two scorers without raising its disparity.

    ``support`` is a list of ``(scorer, disparity, cost)``; ``weights`` are
    the input mixture weights (uniform by default). The budget is
    ``eps_hat + 2 nu'`` with ``nu'`` from :func:`shrink_budget`, so the input
    mixture itself is always feasible.
    """
    support = list(support)
    if not support:
        raise DomainError("support is empty")
    scorers = [s for s, _, _ in support]
    d = np.array([v for _, v, _ in support], dtype=float)
    c = np.array([v for _, _, v in support], dtype=float)
    w = np.full(len(d), 1.0 / len(d)) if weights is None else np.asarray(weights, dtype=float)
    nu_p = shrink_budget(c, w, eps_hat, nu)
    budget = eps_hat + 2 * nu_p
    idx, p, obj = shrink_lp(d, c, budget)
    model = StochasticModel(tuple(scorers[i] for i in idx), p)
    return ShrinkResult(model, idx, p, obj, float(p @ c[list(idx)]), nu_p)


def shrink_result(res: SaddleResult, maximize: bool = False) -> ShrinkResult:
    """Shrink a solver's averaged model; for maximization the disparity is negated inside the LP."""
    if res.model is None:
        raise DomainError("nothing to shrink: solver returned no model")
    d, c = res.points[:, 0], res.points[:, 1]
    sign = -1.0 if maximize else 1.0
    sr = shrink_support(zip(res.model.scorers, sign * d, c), res.config.eps_hat, res.config.nu)
    return replace(sr, objective=sign * sr.objective)


# ---------------------------------------------------------------------- certify


@dataclass(frozen=True)
class CertificateLine:
    name: str
    passed: bool
    lhs: float
    rhs: float


@dataclass(frozen=True)
class Certificate:
    lines: tuple

    @property
    def passed(self) -> bool:
        return all(l.passed for l in self.lines)

    def to_dict(self) -> dict:
        return {l.name: {"passed": bool(l.passed), "lhs": float(l.lhs), "rhs": float(l.rhs)}
                for l in self.lines}


def iteration_cap(B: float, nu: float, k: int = 2) -> float:
    """``4 B^2 log(k) / nu^2``; ``k = 2`` for one dual coordinate, ``k = 3`` for three."""
    return 4 * B * B * math.log(k) / (nu * nu)


def certify(res: SaddleResult, ds=None, lossspec: LossSpec | None = None,
            grid: Grid | None = None, g=None, tol: float = 1e-10) -> Certificate:
    """Recheck a solver result from its own trace (and, given data, from scratch).

    Lines: ``nu_T`` recomputed from the stored Lagrangian values, ``nu_T <= nu``
    at convergence, the cost slack inequality, and the iteration cap.
    """
    cfg = res.config
    lines = []
    last = res.trace[-1]
    nu_re = max(last["L_hat"] - last["L_lower"], last["L_upper"] - last["L_hat"])
    lines.append(CertificateLine("nu_recomputed", abs(nu_re - last["nu_t"]) <= tol, nu_re, last["nu_t"]))
    if res.status != EXHAUSTED:
        lines.append(CertificateLine("nu_T<=nu", nu_re <= cfg.nu, nu_re, cfg.nu))
    cost = res.cost
    if res.model is not None and ds is not None:
        if res.algorithm == "bgl":
            prob = GroupLossProblem(ds, res.spec, lossspec)
        else:
            spec = res.spec.negated() if res.algorithm == "alg3-max" else res.spec
            prob = CostSensitiveProblem(ds, spec, grid, lossspec, g)
        cost = float(sum(w * prob.evaluate(s)[1] for s, w in res.model.components()))
    bound = cfg.eps_hat + res.slack
    lines.append(CertificateLine("cost_slack", cost <= bound + tol, cost, bound))
    k = 3 if res.algorithm == "alg4" else 2
    cap = min(cfg.max_iter, iteration_cap(cfg.B_lambda, cfg.nu, k))
    lines.append(CertificateLine("iterations", res.iterations <= cap, res.iterations, cap))
    return Certificate(tuple(lines))
