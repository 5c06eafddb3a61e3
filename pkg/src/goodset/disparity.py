"""Predictive-disparity measures and their empirical estimators.

A measure is ``beta0 * M0 + beta1 * M1`` where ``M_a`` is the (weighted)
average prediction over rows satisfying event ``a``. In ``eq1`` mode the
weights are plain event indicators. In ``eq5`` mode the outcome part of an
event is replaced by a nuisance weight ``g`` (``mu`` for ``Y*=1``,
``1 - mu`` for ``Y*=0``), which identifies outcome-conditional means from
an outcome model when labels are selective:

    E[f | Y*=1, A=a] = E[f mu | A=a] / E[mu | A=a]
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, EmptyGroupError, MissingLabelError, UnidentifiedMeasureError
from .loss import Grid, LossSpec, loss_value

KINDS = ("SP", "BFPC", "BFNC", "AA", "QAA", "BGL")
NUISANCES = ("one", "mu", "one_minus_mu")
MODES = ("eq1", "eq5", "bgl")


@dataclass(frozen=True)
class Event:
    """``{A = a}`` or ``{A = a, Y* = y}``."""

    a: int
    y: int | None = None

    def describe(self) -> str:
        return f"A={self.a}" if self.y is None else f"A={self.a},Y*={self.y}"


@dataclass(frozen=True)
class DisparitySpec:
    beta0: float
    beta1: float
    event0: Event | None
    event1: Event | None
    nuisance: str = "one"
    mode: str = "eq1"
    kind: str = "custom"

    def __post_init__(self):
        if self.nuisance not in NUISANCES:
            raise DomainError(f"unknown nuisance {self.nuisance!r}")
        if self.mode not in MODES:
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.beta0 != 0 and self.event0 is None or self.beta1 != 0 and self.event1 is None:
            raise DomainError("an event is required for every nonzero coefficient")

    @property
    def beta_l1(self) -> float:
        return abs(self.beta0) + abs(self.beta1)

    @property
    def references_outcome(self) -> bool:
        return any(e is not None and e.y is not None for e in (self.event0, self.event1))

    def negated(self) -> "DisparitySpec":
        return replace(self, beta0=-self.beta0, beta1=-self.beta1)

    def sides(self):
        """``[(index, beta, event)]`` for each side with a nonzero coefficient."""
        pairs = ((self.beta0, self.event0), (self.beta1, self.event1))
        return [(k, b, e) for k, (b, e) in enumerate(pairs) if b != 0]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "beta0": self.beta0, "beta1": self.beta1,
                "event0": None if self.event0 is None else self.event0.describe(),
                "event1": None if self.event1 is None else self.event1.describe(),
                "nuisance": self.nuisance, "mode": self.mode}


@dataclass(frozen=True)
class DisparityEstimate:
    value: float
    n0: int
    n1: int
    standard_error: float


def make_spec(kind: str, selective: bool = False) -> DisparitySpec:
    """Standard measures: SP, BFPC, BFNC, AA, QAA and BGL.

    With ``selective=True`` outcome-conditional measures switch to ``eq5``
    with the matching nuisance weight.
    """
    kind = kind.upper()
    if kind == "SP":
        return DisparitySpec(-1.0, 1.0, Event(0), Event(1), kind="SP")
    if kind in ("BFPC", "BFNC"):
        y = 1 if kind == "BFPC" else 0
        if selective:
            g = "mu" if y == 1 else "one_minus_mu"
            return DisparitySpec(-1.0, 1.0, Event(0, y), Event(1, y), nuisance=g, mode="eq5", kind=kind)
        return DisparitySpec(-1.0, 1.0, Event(0, y), Event(1, y), kind=kind)
    if kind == "AA":
        return DisparitySpec(0.0, 1.0, None, Event(1), kind="AA")
    if kind == "QAA":
        if selective:
            return DisparitySpec(0.0, 1.0, None, Event(1, 1), nuisance="mu", mode="eq5", kind="QAA")
        return DisparitySpec(0.0, 1.0, None, Event(1, 1), kind="QAA")
    if kind == "BGL":
        return DisparitySpec(-1.0, 1.0, Event(0), Event(1), mode="bgl", kind="BGL")
    raise DomainError(f"unknown disparity kind {kind!r}; expected one of {KINDS}")


def _nuisance_values(ds, spec: DisparitySpec, g=None) -> np.ndarray:
    if spec.nuisance == "one":
        return np.ones(ds.n)
    mu = g if g is not None else getattr(ds, "mu_hat", None)
    if mu is None:
        raise MissingLabelError("nuisance weight needs an outcome model (mu_hat)")
    mu = np.asarray(mu, dtype=float)
    return mu if spec.nuisance == "mu" else 1.0 - mu


def event_weights(ds, spec: DisparitySpec, g=None) -> list:
    """``[(index, beta, weights, count)]`` for each side with nonzero coefficient."""
    out = []
    nuisance = None
    for side, beta, ev in spec.sides():
        mask = np.asarray(ds.a) == ev.a
        if spec.mode == "eq5":
            if nuisance is None:
                nuisance = _nuisance_values(ds, spec, g)
            w = mask * nuisance
        else:
            if ev.y is not None:
                if getattr(ds, "mu_hat", None) is not None:
                    raise UnidentifiedMeasureError(
                        "outcome-conditional event on pseudo-labelled data needs eq5 mode")
                y = ds.outcomes()
                if not np.all(np.isin(y[mask], (0.0, 1.0))):
                    raise DomainError("outcome-conditional events need binary outcomes")
                mask = mask & (y == ev.y)
            w = mask.astype(float)
        total = w.sum()
        if not total > 0:
            raise EmptyGroupError(f"event {ev.describe()} is empty")
        out.append((side, beta, w, int(np.count_nonzero(mask))))
    return out


def estimate_from_predictions(pred, ds, spec: DisparitySpec, g=None) -> DisparityEstimate:
    """Disparity and standard error for a vector of (expected) predictions."""
    pred = np.asarray(pred, dtype=float)
    value, var = 0.0, 0.0
    counts = {0: 0, 1: 0}
    for side, beta, w, cnt in event_weights(ds, spec, g):
        total = w.sum()
        mean = float(w @ pred / total)
        value += beta * mean
        var += beta ** 2 * float(np.sum(w ** 2 * (pred - mean) ** 2)) / total ** 2
        counts[side] = cnt
    return DisparityEstimate(float(value), counts[0], counts[1], float(np.sqrt(var)))


def disparity_of_scorer(f, ds, spec: DisparitySpec, g=None) -> DisparityEstimate:
    """Disparity of a scorer (or the expected prediction of a stochastic model)."""
    return estimate_from_predictions(f.predict(ds.x), ds, spec, g)


def threshold_average(f, x, grid: Grid) -> np.ndarray:
    """Per-row ``mean_z 1{f(x) >= z}`` (mixture-weighted for stochastic models)."""
    if hasattr(f, "components"):
        return sum(w * grid.count(s.predict(x)) for s, w in f.components()) / grid.N
    return grid.count(f.predict(x)) / grid.N


def disparity_of_mixture(Q, ds, spec: DisparitySpec, grid: Grid, g=None) -> DisparityEstimate:
    """Disparity of the threshold classifiers induced by ``Q`` on ``grid``."""
    return estimate_from_predictions(threshold_average(Q, ds.x, grid), ds, spec, g)


def bgl_disparity(f, ds, lossspec: LossSpec, spec: DisparitySpec | None = None) -> float:
    """Average loss on ``A=1`` minus average loss on ``A=0`` (``beta``-weighted for other specs)."""
    spec = spec or make_spec("BGL")
    y = ds.outcomes()
    x = ds.x

    def one(s):
        losses = loss_value(lossspec, y, s.predict(x))
        total = 0.0
        for _, beta, ev in spec.sides():
            mask = np.asarray(ds.a) == ev.a
            if not mask.any():
                raise EmptyGroupError(f"group A={ev.a} is empty")
            total += beta * float(losses[mask].mean())
        return total

    if hasattr(f, "components"):
        return float(sum(w * one(s) for s, w in f.components()))
    return one(f)
