"""Tabular data: CSV ingestion, splits, feature maps and a synthetic selective-labels generator.

A :class:`Dataset` is immutable. In selective mode the outcome of every
unfunded row (``d == 0``) is hidden: :attr:`Dataset.y` holds ``NaN`` there.
Ground truth produced by :func:`generate_synthetic` travels in a sealed side
channel that only :func:`reveal_ground_truth` opens; training code never
touches it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from scipy.special import expit

from .errors import (
    ConsistencyError,
    DomainError,
    MissingLabelError,
    PositivityError,
    SchemaError,
    SizeError,
    ZeroVarianceError,
)

LABEL_MODES = ("full", "selective")
MASK_COLUMN = "_masked"


def _frozen(arr, dtype=float) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Sealed synthetic truth: realised outcomes and the generating probabilities."""

    y_star: np.ndarray
    mu: np.ndarray
    pi: np.ndarray

    def subset(self, idx) -> "GroundTruth":
        return GroundTruth(_frozen(self.y_star[idx]), _frozen(self.mu[idx]), _frozen(self.pi[idx]))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Rows of ``(x, a, d, y)``.

    Parameters
    ----------
    x : array of shape (n, p)
        Feature matrix (raw columns or an expanded feature map).
    a : array of shape (n,)
        Binary sensitive attribute.
    y : array of shape (n,)
        Outcomes in [0, 1]; ``NaN`` marks an absent outcome.
    d : array of shape (n,), optional
        Binary decision. Required in selective mode.
    label_mode : {"full", "selective"}
    feature_names : tuple of str
    columns : mapping of str to array
        Auxiliary per-row columns carried along (e.g. an external risk score).
    """

    x: np.ndarray
    a: np.ndarray
    y: np.ndarray
    d: np.ndarray | None = None
    label_mode: str = "full"
    feature_names: tuple = ()
    columns: Mapping[str, np.ndarray] = field(default_factory=dict)
    _truth: GroundTruth | None = field(default=None, repr=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2:
            raise SchemaError("feature matrix must be two-dimensional")
        n = x.shape[0]
        if n < 1:
            raise SizeError("a dataset needs at least one row")
        if not np.all(np.isfinite(x)):
            bad = int(np.argwhere(~np.isfinite(x))[0, 0])
            raise DomainError(f"non-finite feature value in row {bad}")
        if self.label_mode not in LABEL_MODES:
            raise SchemaError(f"label_mode must be one of {LABEL_MODES}, got {self.label_mode!r}")

        a = np.asarray(self.a)
        if a.shape != (n,):
            raise SchemaError("attribute length does not match number of rows")
        if not np.all(np.isin(a, (0, 1))):
            raise DomainError(f"attribute must be 0/1; row {int(np.flatnonzero(~np.isin(a, (0, 1)))[0])}")

        y = np.asarray(self.y, dtype=float)
        if y.shape != (n,):
            raise SchemaError("outcome length does not match number of rows")
        present = ~np.isnan(y)
        out_of_range = present & ((y < 0) | (y > 1))
        if out_of_range.any():
            bad = int(np.flatnonzero(out_of_range)[0])
            raise DomainError(f"outcome {y[bad]} outside [0, 1] in row {bad}")

        d = None
        if self.d is not None:
            d = np.asarray(self.d)
            if d.shape != (n,):
                raise SchemaError("decision length does not match number of rows")
            if not np.all(np.isin(d, (0, 1))):
                raise DomainError("decision must be 0/1")
        if self.label_mode == "selective":
            if d is None:
                raise SchemaError("selective mode requires a decision column")
            missing = (d == 1) & ~present
            if missing.any():
                raise ConsistencyError(f"funded row {int(np.flatnonzero(missing)[0])} has no outcome")
            y = np.where(d == 1, y, np.nan)
        elif not present.all():
            raise MissingLabelError(f"full-label dataset has no outcome in row {int(np.flatnonzero(~present)[0])}")

        names = tuple(self.feature_names) or tuple(f"x{j}" for j in range(x.shape[1]))
        if len(names) != x.shape[1]:
            raise SchemaError("feature_names length does not match feature columns")
        cols = {}
        for k, v in dict(self.columns).items():
            v = np.asarray(v)
            if v.shape[0] != n:
                raise SchemaError(f"column {k!r} length does not match number of rows")
            cols[k] = _frozen(v, dtype=v.dtype)

        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "a", _frozen(a, dtype=np.int8))
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "d", None if d is None else _frozen(d, dtype=np.int8))
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "columns", cols)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def funded(self) -> np.ndarray:
        """Boolean mask of rows whose outcome is observed."""
        if self.label_mode == "full" or self.d is None:
            return np.ones(self.n, dtype=bool)
        return self.d == 1

    def outcomes(self) -> np.ndarray:
        """Training outcomes for every row; raises in selective mode."""
        if self.label_mode == "selective":
            raise MissingLabelError("selective dataset has no outcome for unfunded rows; "
                                    "apply kgb/rie/ie first")
        return self.y

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(
            x=self.x[idx],
            a=self.a[idx],
            y=self.y[idx],
            d=None if self.d is None else self.d[idx],
            label_mode=self.label_mode,
            feature_names=self.feature_names,
            columns={k: v[idx] for k, v in self.columns.items()},
            _truth=None if self._truth is None else self._truth.subset(idx),
        )

    def with_features(self, x, names: Sequence[str] = ()) -> "Dataset":
        return Dataset(x=x, a=self.a, y=self.y, d=self.d, label_mode=self.label_mode,
                       feature_names=tuple(names), columns=self.columns, _truth=self._truth)

    def column(self, name: str) -> np.ndarray:
        if name in self.feature_names:
            return self.x[:, self.feature_names.index(name)]
        if name in self.columns:
            return self.columns[name]
        raise SchemaError(f"no column named {name!r}")


def reveal_ground_truth(ds: Dataset) -> GroundTruth:
    """Open the sealed synthetic truth. Evaluation code only."""
    if ds._truth is None:
        raise MissingLabelError("dataset carries no synthetic ground truth")
    return ds._truth


# --------------------------------------------------------------------------- CSV


@dataclass(frozen=True)
class Schema:
    """Column-role mapping for :func:`load_csv`.

    ``attribute_positive`` / ``outcome_positive`` turn a categorical column into
    a 0/1 indicator (``value == positive``). ``categorical`` feature columns are
    one-hot encoded with the first sorted level dropped.
    """

    features: tuple
    attribute: str
    attribute_positive: object = None
    decision: str | None = None
    outcome: str | None = None
    outcome_positive: object = None
    categorical: tuple = ()
    extra: tuple = ()

    @classmethod
    def from_mapping(cls, m: Mapping) -> "Schema":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(m) - known
        if unknown:
            raise SchemaError(f"unknown schema keys: {sorted(unknown)}")
        if "features" not in m or "attribute" not in m:
            raise SchemaError("schema needs 'features' and 'attribute'")
        kw = dict(m)
        for k in ("features", "categorical", "extra"):
            if k in kw:
                kw[k] = tuple(kw[k])
        return cls(**kw)


def _numeric(frame: pd.DataFrame, col: str) -> np.ndarray:
    raw = frame[col]
    vals = pd.to_numeric(raw, errors="coerce")
    bad = vals.isna() & raw.notna()
    if bad.any():
        i = int(np.flatnonzero(bad.to_numpy())[0])
        raise DomainError(f"malformed numeric {raw.iloc[i]!r} in column {col!r}, row {i}")
    # pandas' fast parser can be off by one ulp; numpy's string cast rounds correctly
    return raw.to_numpy(dtype=object).astype(float)


def _indicator(frame: pd.DataFrame, col: str, positive) -> np.ndarray:
    if positive is not None:
        raw = frame[col]
        if raw.isna().any():
            raise DomainError(f"missing value in column {col!r}, row {int(np.flatnonzero(raw.isna())[0])}")
        return (raw.astype(str) == str(positive)).to_numpy().astype(np.int8)
    v = _numeric(frame, col)
    bad = ~np.isin(v, (0.0, 1.0))
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DomainError(f"column {col!r} must be 0/1; got {v[i]} in row {i}")
    return v.astype(np.int8)


def load_csv(path, schema: Schema | Mapping) -> Dataset:
    """Read a headered UTF-8 CSV into a :class:`Dataset`.

    Selective mode is used whenever the schema names a decision column.
    """
    if not isinstance(schema, Schema):
        schema = Schema.from_mapping(schema)
    frame = pd.read_csv(path, encoding="utf-8", dtype=str, keep_default_na=True)
    needed = list(schema.features) + [schema.attribute] + list(schema.extra)
    needed += [c for c in (schema.decision, schema.outcome) if c]
    missing = [c for c in needed if c not in frame.columns]
    if missing:
        raise SchemaError(f"missing columns in {path}: {missing}")

    feats, names = [], []
    for col in schema.features:
        if col in schema.categorical:
            raw = frame[col]
            if raw.isna().any():
                raise DomainError(f"missing value in column {col!r}, row {int(np.flatnonzero(raw.isna())[0])}")
            levels = sorted(raw.unique())
            for lev in levels[1:]:
                feats.append((raw == lev).to_numpy(dtype=float))
                names.append(f"{col}={lev}")
            continue
        v = _numeric(frame, col)
        if np.isnan(v).any():
            raise DomainError(f"missing value in feature {col!r}, row {int(np.flatnonzero(np.isnan(v))[0])}")
        feats.append(v)
        names.append(col)
    x = np.column_stack(feats) if feats else np.zeros((len(frame), 0))

    a = _indicator(frame, schema.attribute, schema.attribute_positive)
    d = _indicator(frame, schema.decision, None) if schema.decision else None
    if schema.outcome:
        if schema.outcome_positive is not None:
            y = _indicator(frame, schema.outcome, schema.outcome_positive).astype(float)
        else:
            y = _numeric(frame, schema.outcome)
    else:
        y = np.full(len(frame), np.nan)
    present = ~np.isnan(y)
    bad = present & ((y < 0) | (y > 1))
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DomainError(f"outcome {y[i]} outside [0, 1] in row {i}")
    if MASK_COLUMN in frame.columns and d is not None:
        y = np.where(_indicator(frame, MASK_COLUMN, None) == 1, np.nan, y)

    extra = {c: _numeric(frame, c) for c in schema.extra}
    return Dataset(x=x, a=a, y=y, d=d, label_mode="selective" if d is not None else "full",
                   feature_names=tuple(names), columns=extra)


def write_csv(ds: Dataset, path) -> Path:
    """Snapshot a dataset to CSV; selective mode adds a ``_masked`` marker column."""
    path = Path(path)
    frame = pd.DataFrame(np.asarray(ds.x), columns=list(ds.feature_names))
    frame["a"] = ds.a
    if ds.d is not None:
        frame["d"] = ds.d
    frame["y"] = ds.y
    if ds.label_mode == "selective":
        frame[MASK_COLUMN] = (~ds.funded).astype(int)
    for k, v in ds.columns.items():
        frame[k] = v
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def split(ds: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Random disjoint partition; the first part has ``round(fraction * n)`` rows."""
    if ds.n < 2:
        raise SizeError("need at least two rows to split")
    if not 0 < fraction < 1:
        raise DomainError("fraction must lie in (0, 1)")
    k = int(np.floor(fraction * ds.n + 0.5))
    k = min(max(k, 1), ds.n - 1)
    perm = np.random.default_rng(seed).permutation(ds.n)
    return ds.subset(np.sort(perm[:k])), ds.subset(np.sort(perm[k:]))


# ---------------------------------------------------------------------- features


@dataclass(frozen=True)
class FeaturizerSpec:
    columns: tuple | None = None
    degree: int = 1
    standardize: bool = False
    intercept: bool = True

    @classmethod
    def from_mapping(cls, m: Mapping) -> "FeaturizerSpec":
        kw = dict(m)
        if kw.get("columns") is not None:
            kw["columns"] = tuple(kw["columns"])
        return cls(**kw)


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Fitted feature map; reapply to held-out data with :meth:`transform`."""

    spec: FeaturizerSpec
    source: tuple
    terms: tuple
    names: tuple
    means: np.ndarray | None
    scales: np.ndarray | None

    def transform(self, ds: Dataset) -> np.ndarray:
        raw = np.column_stack([ds.column(c) for c in self.source]).astype(float)
        cols = [np.prod(raw[:, list(t)], axis=1) for t in self.terms]
        body = np.column_stack(cols) if cols else np.zeros((ds.n, 0))
        if self.means is not None:
            body = (body - self.means) / self.scales
        if self.spec.intercept:
            body = np.column_stack([np.ones(ds.n), body])
        return body

    def apply(self, ds: Dataset) -> Dataset:
        """Return ``ds`` with its features replaced by this map's output."""
        return ds.with_features(self.transform(ds), self.names)


def featurize(ds: Dataset, spec: FeaturizerSpec, fitted: FeatureMap | None = None):
    """Polynomial expansion (+ optional standardization and intercept).

    Returns ``(matrix, feature_map)``. When ``fitted`` is given its
    standardization parameters are reused instead of refitting.
    """
    if fitted is not None:
        return fitted.transform(ds), fitted
    source = tuple(spec.columns) if spec.columns is not None else ds.feature_names
    for c in source:
        ds.column(c)
    if spec.degree < 1:
        raise DomainError("degree must be >= 1")
    terms = []
    for deg in range(1, spec.degree + 1):
        terms.extend(itertools.combinations_with_replacement(range(len(source)), deg))

    def term_name(t):
        counts = {j: t.count(j) for j in sorted(set(t))}
        return "*".join(source[j] if c == 1 else f"{source[j]}^{c}" for j, c in counts.items())

    names = [term_name(t) for t in terms]
    raw_spec = FeaturizerSpec(source, spec.degree, standardize=False, intercept=False)
    body = FeatureMap(raw_spec, source, tuple(terms), (), None, None).transform(ds)
    means = scales = None
    if spec.standardize:
        means = body.mean(axis=0)
        scales = body.std(axis=0)
        flat = scales <= 1e-12 * np.maximum(1.0, np.abs(means))
        if flat.any():
            raise ZeroVarianceError(f"zero-variance feature column {names[int(np.flatnonzero(flat)[0])]!r}")
    if spec.intercept:
        names = ["intercept"] + names
    fm = FeatureMap(spec, source, tuple(terms), tuple(names),
                    None if means is None else _frozen(means),
                    None if scales is None else _frozen(scales))
    return fm.transform(ds), fm


# --------------------------------------------------------------------- synthetic


@dataclass(frozen=True)
class SynthDgpConfig:
    """Logistic ground truth: ``pi(x) = expit(pi_intercept + x @ pi_coef)``, same for ``mu``."""

    pi_coef: tuple
    mu_coef: tuple
    pi_intercept: float = 0.0
    mu_intercept: float = 0.0
    seed: int = 0

    def pi(self, x) -> np.ndarray:
        return expit(self.pi_intercept + np.asarray(x, float) @ np.asarray(self.pi_coef, float))

    def mu(self, x) -> np.ndarray:
        return expit(self.mu_intercept + np.asarray(x, float) @ np.asarray(self.mu_coef, float))

    @classmethod
    def from_mapping(cls, m: Mapping) -> "SynthDgpConfig":
        kw = dict(m)
        kw["pi_coef"] = tuple(kw["pi_coef"])
        kw["mu_coef"] = tuple(kw["mu_coef"])
        return cls(**kw)


# Disadvantaged group (a=1) has higher risk and is funded less often.
DEFAULT_DGP = SynthDgpConfig(pi_coef=(-1.5, 0.3), mu_coef=(1.0, 0.5),
                             pi_intercept=0.3, mu_intercept=-1.2, seed=20210)


def default_population(n: int, seed: int, group_rate: float = 0.25, shift: float = 0.8):
    """Base features and attribute for the shipped synthetic population.

    ``x1 ~ N(shift * a, 1)`` is a risk factor, ``x2 ~ N(0, 1)`` is noise.
    """
    rng = np.random.default_rng(seed)
    a = (rng.random(n) < group_rate).astype(np.int8)
    x = rng.standard_normal((n, 2))
    x[:, 0] += shift * a
    return x, a


def generate_synthetic(cfg: SynthDgpConfig, base_features, attribute,
                       feature_names: Sequence[str] = ()) -> Dataset:
    """Draw ``d ~ Bernoulli(pi(x))`` and ``y* ~ Bernoulli(mu(x))``; mask ``y*`` where ``d == 0``."""
    x = np.asarray(base_features, dtype=float)
    if x.ndim != 2 or x.shape[1] != len(cfg.pi_coef) or x.shape[1] != len(cfg.mu_coef):
        raise SchemaError("DGP coefficients do not match the feature dimension")
    pi, mu = cfg.pi(x), cfg.mu(x)
    if np.any(pi <= 0):
        raise PositivityError(f"pi(x) = 0 in row {int(np.flatnonzero(pi <= 0)[0])}")
    rng = np.random.default_rng(cfg.seed)
    d = (rng.random(len(x)) < pi).astype(np.int8)
    y_star = (rng.random(len(x)) < mu).astype(float)
    truth = GroundTruth(_frozen(y_star), _frozen(mu), _frozen(pi))
    return Dataset(x=x, a=attribute, y=np.where(d == 1, y_star, np.nan), d=d,
                   label_mode="selective", feature_names=tuple(feature_names), _truth=truth)


def default_synthetic(n: int = 10_000, seed: int = 0, cfg: SynthDgpConfig = DEFAULT_DGP) -> Dataset:
    """The shipped synthetic selective-labels dataset."""
    x, a = default_population(n, seed)
    if seed:
        cfg = SynthDgpConfig(cfg.pi_coef, cfg.mu_coef, cfg.pi_intercept, cfg.mu_intercept, cfg.seed + seed)
    return generate_synthetic(cfg, x, a, feature_names=("x1", "x2"))
