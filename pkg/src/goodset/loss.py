"""Losses, the discretization grid and the cost transform of the threshold-classifier reduction.

For a grid of size ``N`` (``alpha = 1/N``) a prediction ``u`` is represented by
the ``N`` threshold classifiers ``1{u >= z}``, ``z in {alpha, 2 alpha, ..., 1}``.
With per-level costs ``c(y, z) = N (l(y, z + alpha/2) - l(y, z - alpha/2))``
the average classifier cost telescopes into the discretized loss:

    mean_z c(y_, z) 1{u >= z} + l(y_, alpha/2) = l(y_, [u]_alpha + alpha/2)

where ``y_`` is ``y`` snapped onto the ``alpha/2`` cover of [0, 1].
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, MissingLabelError, SizeError

_TOL = 1e-9


@dataclass(frozen=True)
class LossSpec:
    """Loss ``l(y, u)`` on [0, 1] x [0, 1] with values in [0, 1].

    ``kind="logistic"`` is ``log(1 + exp(-C (2y-1)(2u-1))) / log(1 + exp(C))``.
    ``kind="custom"`` takes a vectorised ``func(y, u)`` and a declared
    Lipschitz constant.
    """

    kind: str = "squared"
    C: float = 5.0
    func: Callable | None = None
    lipschitz: float | None = None

    def __post_init__(self):
        if self.kind not in ("squared", "logistic", "custom"):
            raise DomainError(f"unknown loss kind {self.kind!r}")
        if self.kind == "logistic" and not self.C > 0:
            raise DomainError("logistic loss needs C > 0")
        if self.kind == "custom" and (self.func is None or self.lipschitz is None):
            raise DomainError("custom loss needs func and a declared lipschitz constant")

    @property
    def lipschitz_constant(self) -> float:
        if self.kind == "squared":
            return 2.0
        if self.kind == "logistic":
            return 2.0 * self.C / np.log1p(np.exp(self.C))
        return float(self.lipschitz)

    def __call__(self, y, u):
        """Evaluate without range checks (grid midpoints may sit just past 1)."""
        y = np.asarray(y, dtype=float)
        u = np.asarray(u, dtype=float)
        if self.kind == "squared":
            return (y - u) ** 2
        if self.kind == "logistic":
            margin = -self.C * (2 * y - 1) * (2 * u - 1)
            return np.logaddexp(0.0, margin) / np.logaddexp(0.0, self.C)
        return np.asarray(self.func(y, u), dtype=float)


def _check_unit(name, v):
    v = np.asarray(v, dtype=float)
    if np.any(~np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
        raise DomainError(f"{name} must lie in [0, 1]")
    return v


def loss_value(spec: LossSpec, y, u):
    """``l(y, u)`` with domain checks."""
    return spec(_check_unit("y", y), _check_unit("u", u))


@dataclass(frozen=True)
class Grid:
    """Discretization grid of size ``N``."""

    N: int = 40

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise DomainError("grid size N must be a positive integer")

    @property
    def alpha(self) -> float:
        return 1.0 / self.N

    @property
    def levels(self) -> np.ndarray:
        """Thresholds ``{j/N : j = 1..N}``."""
        return np.arange(1, self.N + 1) / self.N

    @property
    def cover(self) -> np.ndarray:
        """Outcome cover ``{(j - 1/2)/N : j = 1..N}``."""
        return (np.arange(self.N) + 0.5) / self.N

    def count(self, u) -> np.ndarray:
        """Number of thresholds ``z`` with ``u >= z`` (so ``[u]_alpha = count * alpha``)."""
        u = np.asarray(u, dtype=float)
        return np.searchsorted(self.levels, u, side="right")

    def snap_index(self, y) -> np.ndarray:
        """Index of the smallest cover point within ``alpha/2`` of ``y``."""
        y = np.asarray(y, dtype=float)
        k = np.ceil(y * self.N - 1 - _TOL).astype(int)
        return np.clip(k, 0, self.N - 1)


def snap_outcome(grid: Grid, y):
    """Smallest cover point within ``alpha/2`` of ``y``; ties go to the smaller point."""
    return grid.cover[grid.snap_index(y)]


def discretized_loss(spec: LossSpec, grid: Grid, y, u):
    """``l(y_, [u]_alpha + alpha/2)``.

    At ``u = 1`` the evaluated midpoint is ``1 + alpha/2``; keeping it (rather
    than clamping) is what makes the cost identity exact for clipped scorers.
    """
    y = _check_unit("y", y)
    u = _check_unit("u", u)
    mid = grid.count(u) * grid.alpha + grid.alpha / 2
    return spec(snap_outcome(grid, y), mid)


def cost_weight(spec: LossSpec, grid: Grid, y, z):
    """``c(y, z) = N (l(y, z + alpha/2) - l(y, z - alpha/2))``."""
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    h = grid.alpha / 2
    return grid.N * (spec(y, z + h) - spec(y, z - h))


def cost_table(spec: LossSpec, grid: Grid, y) -> np.ndarray:
    """``c(y_i_, z_j)`` for every row ``i`` and grid level ``j`` (shape ``(n, N)``)."""
    ys = snap_outcome(grid, np.asarray(y, dtype=float))
    return cost_weight(spec, grid, ys[:, None], grid.levels[None, :])


def _require_outcomes(y):
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise SizeError("empty dataset")
    if np.isnan(y).any():
        raise MissingLabelError("outcomes missing; supply pseudo-labels")
    return y


def _outcomes_of(ds):
    if hasattr(ds, "outcomes"):
        return _require_outcomes(ds.outcomes())
    return _require_outcomes(ds)


def c0_hat(spec: LossSpec, grid: Grid, ds) -> float:
    """Mean of ``l(y_, alpha/2)`` over rows; ``ds`` is a dataset or an outcome vector."""
    y = _outcomes_of(ds)
    return float(np.mean(spec(snap_outcome(grid, y), grid.alpha / 2)))


def _predictions(model, ds):
    x = ds.x if hasattr(ds, "x") else ds
    return model.predict(x)


def avg_loss(model, ds, spec: LossSpec, discretized: Grid | None = None) -> float:
    """Average loss of a scorer or stochastic model (mixture-weighted).

    With ``discretized`` set, the discretized loss on that grid is averaged.
    """
    y = _outcomes_of(ds)
    x = ds.x

    def one(f):
        u = f.predict(x)
        if discretized is None:
            return float(np.mean(loss_value(spec, y, u)))
        return float(np.mean(discretized_loss(spec, discretized, y, u)))

    if hasattr(model, "components"):
        return float(sum(w * one(f) for f, w in model.components()))
    return one(model)


def avg_cost(model, ds, spec: LossSpec, grid: Grid) -> float:
    """``mean_i mean_z c(y_i_, z) 1{f(x_i) >= z}``, mixture-weighted for stochastic models."""
    y = _outcomes_of(ds)
    table = cost_table(spec, grid, y)
    x = ds.x

    def one(f):
        h = f.predict(x)[:, None] >= grid.levels[None, :]
        return float(np.mean(np.mean(table * h, axis=1)))

    if hasattr(model, "components"):
        return float(sum(w * one(f) for f, w in model.components()))
    return one(model)
