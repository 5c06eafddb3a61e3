"""Learners and best responses for the prediction player.

The prediction player's Lagrangian over threshold classifiers is a
cost-sensitive classification problem with per-(row, level) costs

    c_lam(i, z) = s * sum_a (beta_a / p_a) w_a(i) + lam * c(y_i_, z)

where ``w_a`` are the event weights of the disparity measure, ``p_a`` their
means and ``s`` the sign/scale placed on the disparity term. For a scorer
``f`` only ``k_i = #{z <= f(x_i)}`` matters, so its Lagrangian is
``mean_i S_i(k_i) / N`` with ``S_i(k) = sum_{j <= k} c_lam(i, z_j)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import expit

from .disparity import DisparitySpec, event_weights
from .errors import DomainError, EmptySelectionError, SingularSystemError
from .loss import Grid, LossSpec, cost_table
from .models import Scorer

DEFAULT_RIDGE = 1e-6


class SeparationWarning(UserWarning):
    """Logistic weights diverged (data look separable); the fit was capped."""


# ---------------------------------------------------------------------- learners


def fit_wls(X, targets, weights=None, ridge: float = DEFAULT_RIDGE) -> Scorer:
    """Weighted ridge least squares, ``argmin sum w (t - X b)^2 + ridge |b|^2``."""
    X = np.asarray(X, dtype=float)
    t = np.asarray(targets, dtype=float)
    w = np.ones(len(t)) if weights is None else np.asarray(weights, dtype=float)
    if X.shape[0] != t.shape[0] or w.shape != t.shape:
        raise DomainError("dimension mismatch between features, targets and weights")
    if np.any(w < 0) or not np.any(w > 0):
        raise DomainError("weights must be nonnegative and not all zero")
    if ridge < 0:
        raise DomainError("ridge must be nonnegative")
    Xw = X * w[:, None]
    gram = X.T @ Xw + ridge * np.eye(X.shape[1])
    rhs = Xw.T @ t
    try:
        factor = linalg.cho_factor(gram, check_finite=False)
    except linalg.LinAlgError:
        raise SingularSystemError("normal equations are singular; use ridge > 0") from None
    beta = linalg.cho_solve(factor, rhs, check_finite=False)
    if not np.all(np.isfinite(beta)):
        raise SingularSystemError("normal equations are singular; use ridge > 0")
    return Scorer(beta, "identity_clipped")


class LeastSquaresLearner:
    """Unit-weight ridge least squares with the factorization cached for a fixed design."""

    def __init__(self, X, ridge: float = DEFAULT_RIDGE):
        self.X = np.asarray(X, dtype=float)
        gram = self.X.T @ self.X + ridge * np.eye(self.X.shape[1])
        try:
            self._factor = linalg.cho_factor(gram, check_finite=False)
        except linalg.LinAlgError:
            raise SingularSystemError("normal equations are singular; use ridge > 0") from None

    def fit(self, targets) -> Scorer:
        beta = linalg.cho_solve(self._factor, self.X.T @ np.asarray(targets, dtype=float),
                                check_finite=False)
        return Scorer(beta, "identity_clipped")


def _xent(X, t, w, ridge, beta):
    s = X @ beta
    # log(1 + e^s) - t s is the cross-entropy with p = expit(s)
    return float(w @ (np.logaddexp(0.0, s) - t * s) + ridge * beta @ beta)


def fit_logistic(X, labels, weights=None, ridge: float = DEFAULT_RIDGE,
                 max_iter: int = 100, tol: float = 1e-8, norm_cap: float = 1e4) -> Scorer:
    """Weighted ridge logistic regression by damped Newton steps.

    Labels may be fractional. Stops when the gradient norm is ``<= tol`` or
    after ``max_iter`` steps; if the weight norm passes ``norm_cap`` the fit
    stops, warns, and is flagged ``meta["capped"]``.
    """
    X = np.asarray(X, dtype=float)
    t = np.asarray(labels, dtype=float)
    w = np.ones(len(t)) if weights is None else np.asarray(weights, dtype=float)
    if np.any((t < 0) | (t > 1)):
        raise DomainError("labels must lie in [0, 1]")
    if np.any(w < 0) or not np.any(w > 0):
        raise DomainError("weights must be nonnegative and not all zero")
    beta = np.zeros(X.shape[1])
    eye = np.eye(X.shape[1])
    obj = _xent(X, t, w, ridge, beta)
    converged = capped = False
    it = 0
    for it in range(1, max_iter + 1):
        p = expit(X @ beta)
        grad = X.T @ (w * (p - t)) + 2 * ridge * beta
        if np.linalg.norm(grad) <= tol:
            converged = True
            break
        hess = X.T @ (X * (w * p * (1 - p))[:, None]) + 2 * ridge * eye
        try:
            step = linalg.solve(hess, grad, assume_a="pos", check_finite=False)
        except linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        size = 1.0
        while size > 1e-10:
            cand = beta - size * step
            new = _xent(X, t, w, ridge, cand)
            if new <= obj + 1e-4 * size * (grad @ -step):
                break
            size *= 0.5
        beta, obj = cand, new
        if np.linalg.norm(beta) > norm_cap:
            capped = True
            warnings.warn("logistic fit diverging; data may be separable", SeparationWarning, stacklevel=2)
            break
    else:
        p = expit(X @ beta)
        converged = np.linalg.norm(X.T @ (w * (p - t)) + 2 * ridge * beta) <= tol
    if not capped and np.all(np.isin(t, (0.0, 1.0))):
        # saturated probabilities stop the gradient long before the norm cap
        p = expit(X @ beta)
        if np.max(np.abs(p - t)[w > 0]) < 1e-6:
            capped = True
            warnings.warn("logistic fit separates the labels; weights are unbounded", SeparationWarning,
                          stacklevel=2)
    return Scorer(beta, "sigmoid", meta={"converged": bool(converged), "capped": capped, "iterations": it})


def fit_outcome_model(ds, learner: str = "logistic", ridge: float = DEFAULT_RIDGE) -> Scorer:
    """Regress the observed outcome on features among funded rows only."""
    funded = ds.funded
    if not funded.any():
        raise EmptySelectionError("no funded rows to fit the outcome model on")
    X, y = ds.x[funded], ds.y[funded]
    if learner == "logistic":
        if not (np.any(y < 0.5) and np.any(y > 0.5)):
            raise EmptySelectionError("funded rows need both outcome values for a logistic fit")
        return fit_logistic(X, y, ridge=ridge)
    if learner == "wls":
        return fit_wls(X, y, ridge=ridge)
    raise DomainError(f"unknown outcome learner {learner!r}")


# --------------------------------------------------------------- cost-sensitive


class CostSensitiveProblem:
    """Row-level pieces of the cost-sensitive reduction for one dataset and measure.

    Holds the disparity coefficient per row and the cumulative cost sums
    ``sum_{j <= k} c(y_i_, z_j)`` for ``k = 0..N``.
    """

    def __init__(self, ds, spec: DisparitySpec, grid: Grid, lossspec: LossSpec, g=None):
        self.ds = ds
        self.spec = spec
        self.grid = grid
        self.lossspec = lossspec
        self.X = ds.x
        self.n = ds.n
        y = self.y = ds.outcomes()
        coef = np.zeros(ds.n)
        for _, beta, w, _cnt in event_weights(ds, spec, g):
            coef += beta * w / w.mean()
        self.disp_coef = coef
        self.costs = cost_table(lossspec, grid, y)
        self.cost_cum = np.concatenate([np.zeros((ds.n, 1)), np.cumsum(self.costs, axis=1)], axis=1)
        self._steps = np.arange(grid.N + 1)

    def counts(self, f) -> np.ndarray:
        return self.grid.count(f.predict(self.X))

    def disparity_at(self, k) -> float:
        return float(np.mean(self.disp_coef * k) / self.grid.N)

    def cost_at(self, k) -> float:
        return float(np.mean(self.cost_cum[np.arange(self.n), k]) / self.grid.N)

    def evaluate(self, f):
        """``(disparity, cost)`` of the threshold classifiers of ``f``."""
        k = self.counts(f)
        return self.disparity_at(k), self.cost_at(k)

    def cumulative(self, lam: float, disp_scale: float = 1.0) -> np.ndarray:
        """``S_i(k)`` for ``k = 0..N`` (shape ``(n, N+1)``)."""
        return disp_scale * self.disp_coef[:, None] * self._steps[None, :] + lam * self.cost_cum

    def lagrangian(self, f, lam: float, disp_scale: float = 1.0, eps_hat: float = 0.0) -> float:
        d, c = self.evaluate(f)
        return disp_scale * d + lam * (c - eps_hat)

    def targets(self, lam: float, disp_scale: float = 1.0) -> np.ndarray:
        """Per-row level minimizing ``S_i``; ties go to the smallest level."""
        return np.argmin(self.cumulative(lam, disp_scale), axis=1) / self.grid.N


@dataclass(frozen=True, eq=False)
class CaseWeightTable:
    """Costs ``c_lam(i, z)`` of predicting at least level ``z`` for row ``i``."""

    values: np.ndarray
    levels: np.ndarray

    @property
    def shape(self):
        return self.values.shape


def build_case_weights(lam: float, ds, spec: DisparitySpec, grid: Grid, lossspec: LossSpec,
                       disp_scale: float = 1.0, g=None) -> CaseWeightTable:
    """Case-weight table for dual value ``lam`` (and disparity scale ``disp_scale``)."""
    prob = CostSensitiveProblem(ds, spec, grid, lossspec, g)
    values = disp_scale * prob.disp_coef[:, None] + lam * prob.costs
    return CaseWeightTable(values, grid.levels)


def _pick(prob: CostSensitiveProblem, candidates, lam, disp_scale):
    vals = [prob.lagrangian(f, lam, disp_scale) for f in candidates]
    return candidates[int(np.argmin(vals))]


def best_response_h(lam: float, ds, spec: DisparitySpec, grid: Grid, lossspec: LossSpec,
                    learner="wls_heuristic", disp_scale: float = 1.0, anchors=(),
                    problem: CostSensitiveProblem | None = None) -> Scorer:
    """Heuristic least-squares best response.

    Each row's cumulative cost is minimized exactly over the grid and the
    resulting per-row targets are fitted by ridge least squares. The result
    is swapped for the zero scorer or any anchor scorer if one of those has a
    smaller Lagrangian.
    """
    prob = problem or CostSensitiveProblem(ds, spec, grid, lossspec)
    if learner == "wls_heuristic":
        learner = LeastSquaresLearner(prob.X)
    elif isinstance(learner, str):
        raise DomainError(f"unknown learner {learner!r}")
    fitted = learner.fit(prob.targets(lam, disp_scale))
    return _pick(prob, [fitted, Scorer.zero(prob.X.shape[1]), *anchors], lam, disp_scale)


def exact_best_response(lam: float, ds, spec: DisparitySpec, grid: Grid, lossspec: LossSpec,
                        candidates, disp_scale: float = 1.0,
                        problem: CostSensitiveProblem | None = None):
    """Minimize the Lagrangian over a finite candidate list (first wins ties)."""
    candidates = list(candidates)
    if not candidates:
        raise DomainError("candidate list is empty")
    prob = problem or CostSensitiveProblem(ds, spec, grid, lossspec)
    return _pick(prob, candidates, lam, disp_scale)


class CandidateOracle:
    """Exact best response over a fixed finite scorer list (test oracle)."""

    def __init__(self, candidates):
        self.candidates = list(candidates)

    def __call__(self, prob: CostSensitiveProblem, lam: float, disp_scale: float):
        return _pick(prob, self.candidates, lam, disp_scale)


class HeuristicOracle:
    """:func:`best_response_h` bound to one problem, with a cached least-squares factorization."""

    def __init__(self, prob: CostSensitiveProblem, anchors=(), ridge: float = DEFAULT_RIDGE):
        self.learner = LeastSquaresLearner(prob.X, ridge)
        self.anchors = [Scorer.zero(prob.X.shape[1]), *anchors]

    def __call__(self, prob: CostSensitiveProblem, lam: float, disp_scale: float):
        fitted = self.learner.fit(prob.targets(lam, disp_scale))
        return _pick(prob, [fitted, *self.anchors], lam, disp_scale)
