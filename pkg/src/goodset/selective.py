"""Selective-labels pipelines.

* KGB keeps only funded rows.
* RIE keeps observed outcomes and fills unfunded rows with ``mu_hat(x)``.
* IE replaces every outcome, observed or not, with ``mu_hat(x)``.

``mu_hat`` is always supplied by the caller (see
:func:`goodset.oracle.fit_outcome_model`); nothing here refits it.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .data import Dataset
from .disparity import DisparitySpec
from .errors import DomainError, EmptySelectionError, UnidentifiedMeasureError
from .oracle import fit_logistic

PIPELINES = ("kgb", "rie", "ie")
OBSERVED, EXTRAPOLATED, INTERPOLATED = "observed", "extrapolated", "interpolated"


@dataclass(frozen=True, eq=False)
class PseudoLabelledDataset:
    """A dataset whose every row carries a pseudo-outcome.

    Exposes the same read interface as :class:`~goodset.data.Dataset`;
    :meth:`outcomes` returns the pseudo-outcomes and ``mu_hat`` feeds the
    nuisance weights of outcome-conditional disparities.
    """

    base: Dataset
    y_hat: np.ndarray
    mu_hat: np.ndarray
    provenance: np.ndarray
    pipeline: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("y_hat", "mu_hat", "provenance"):
            v = np.array(getattr(self, name), copy=True)
            if v.shape[0] != self.base.n:
                raise DomainError(f"{name} length does not match number of rows")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    x = property(lambda self: self.base.x)
    a = property(lambda self: self.base.a)
    d = property(lambda self: self.base.d)
    n = property(lambda self: self.base.n)
    funded = property(lambda self: self.base.funded)
    feature_names = property(lambda self: self.base.feature_names)
    columns = property(lambda self: self.base.columns)
    label_mode = property(lambda self: "pseudo")

    def outcomes(self) -> np.ndarray:
        return self.y_hat

    def column(self, name):
        return self.base.column(name)

    def subset(self, idx) -> "PseudoLabelledDataset":
        idx = np.asarray(idx)
        return replace(self, base=self.base.subset(idx), y_hat=self.y_hat[idx],
                       mu_hat=self.mu_hat[idx], provenance=self.provenance[idx])

    def with_features(self, x, names=()) -> "PseudoLabelledDataset":
        return replace(self, base=self.base.with_features(x, names))


def _mu_values(ds, mu_hat) -> np.ndarray:
    mu = mu_hat.predict(ds.x) if hasattr(mu_hat, "predict") else np.asarray(mu_hat, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (ds.n,):
        raise DomainError("mu_hat must give one value per row")
    if np.any(~np.isfinite(mu)) or np.any(mu < 0) or np.any(mu > 1):
        raise DomainError("mu_hat values must lie in [0, 1]")
    return mu


def kgb(ds: Dataset) -> Dataset:
    """Funded rows only, as a full-label dataset."""
    keep = ds.funded
    if not keep.any():
        raise EmptySelectionError("no funded rows")
    sub = ds.subset(np.flatnonzero(keep))
    return Dataset(x=sub.x, a=sub.a, y=sub.y, d=sub.d, label_mode="full",
                   feature_names=sub.feature_names, columns=sub.columns, _truth=sub._truth)


def rie(ds: Dataset, mu_hat) -> PseudoLabelledDataset:
    """``y_hat = (1 - d) mu_hat(x) + d y``."""
    mu = _mu_values(ds, mu_hat)
    f = ds.funded
    y_hat = np.where(f, np.nan_to_num(ds.y), mu)
    prov = np.where(f, OBSERVED, EXTRAPOLATED)
    return PseudoLabelledDataset(ds, y_hat, mu, prov, "rie")


def ie(ds: Dataset, mu_hat) -> PseudoLabelledDataset:
    """``y_hat = mu_hat(x)`` on every row, funded or not."""
    mu = _mu_values(ds, mu_hat)
    prov = np.where(ds.funded, INTERPOLATED, EXTRAPOLATED)
    return PseudoLabelledDataset(ds, mu.copy(), mu, prov, "ie")


def apply_pipeline(ds: Dataset, pipeline: str, mu_hat=None):
    if pipeline == "kgb":
        return kgb(ds)
    if pipeline in ("rie", "ie"):
        if mu_hat is None:
            raise DomainError(f"{pipeline} needs an outcome model")
        return (rie if pipeline == "rie" else ie)(ds, mu_hat)
    raise DomainError(f"unknown pipeline {pipeline!r}; expected one of {PIPELINES}")


def select_nuisance(spec: DisparitySpec, pipeline: str, mu_hat=None) -> DisparitySpec:
    """Bind the nuisance weight that identifies ``spec`` under ``pipeline``.

    Outcome-conditional events use ``g = mu`` (``Y* = 1``) or ``g = 1 - mu``
    (``Y* = 0``) in weighted mode; attribute-only events keep ``g = 1``.
    """
    if pipeline not in PIPELINES:
        raise DomainError(f"unknown pipeline {pipeline!r}; expected one of {PIPELINES}")
    if spec.mode == "bgl" or not spec.references_outcome:
        return spec
    if pipeline == "kgb":
        raise UnidentifiedMeasureError(
            f"{spec.kind} conditions on the true outcome, which funded-only data cannot identify "
            "for the full population")
    ys = {e.y for _, _, e in spec.sides()}
    if None in ys or len(ys) != 1:
        raise UnidentifiedMeasureError("events must all condition on the same outcome value")
    g = "mu" if ys.pop() == 1 else "one_minus_mu"
    return replace(spec, nuisance=g, mode="eq5")


def positivity_diagnostic(ds: Dataset) -> float:
    """Smallest fitted funding propensity (logistic in the features); a diagnostic, not a test."""
    if ds.d is None:
        return 1.0
    d = ds.d.astype(float)
    if d.min() == d.max():
        return float(d[0])
    return float(fit_logistic(ds.x, d).predict(ds.x).min())
