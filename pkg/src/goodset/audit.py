"""Audits over the set of good models and their reports.

An audit is driven by one configuration mapping (usually a YAML file):

.. code-block:: yaml

    data: {source: compas}            # or {source: csv, path, schema} / {source: synthetic, ...}
    featurizer: {columns: [age, priors_count], degree: 2, standardize: true}
    loss: {kind: logistic, C: 5}
    grid: {N: 40}
    disparity: {kind: SP}
    selective: {pipeline: none}       # kgb | rie | ie
    expgrad: {delta: 0.01, eta: 2, max_iter: 500}
    benchmark: {source: external_scores_column, column: decile_score, scale: 0.1}
    split: {fraction: 0.5, seed: 0}

Every report carries the SHA-256 digest of the resolved configuration.
"""
from __future__ import annotations

import copy
import csv
import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
import yaml
from scipy.stats import rankdata

from . import expgrad as eg
from .data import (
    Dataset,
    FeaturizerSpec,
    Schema,
    SynthDgpConfig,
    DEFAULT_DGP,
    default_population,
    featurize,
    generate_synthetic,
    load_csv,
    reveal_ground_truth,
    split,
)
from .datasets import load_compas
from .disparity import Event, DisparitySpec, bgl_disparity, disparity_of_mixture, disparity_of_scorer, make_spec
from .errors import DomainError, SchemaError, UnidentifiedMeasureError
from .loss import Grid, LossSpec, avg_loss, c0_hat
from .models import ColumnScorer, StochasticModel
from .oracle import fit_logistic, fit_outcome_model, fit_wls
from .selective import PseudoLabelledDataset, apply_pipeline, select_nuisance

DEFAULTS = {
    "data": {"source": "compas"},
    "featurizer": {"columns": None, "degree": 1, "standardize": True, "intercept": True},
    "loss": {"kind": "squared", "C": 5.0},
    "grid": {"N": 40},
    "disparity": {"kind": "SP"},
    "selective": {"pipeline": "none", "outcome_learner": "logistic", "oracle_mu": False},
    "expgrad": {"delta": 0.01, "B_lambda": None, "nu": None, "eta": 2.0, "max_iter": 500, "B_xi": 1.0},
    "oracle": {"ridge": 1e-6},
    "benchmark": {"source": "fit_loss_minimizer", "learner": "wls"},
    "split": {"fraction": 0.5, "seed": 0},
    "sweep": {"deltas": []},
    "seed": 0,
    "out": "report",
}

METRIC_FIELDS = ("model", "population", "n", "loss", "mse", "auc", "disparity", "disparity_se",
                 "disparity_grid")
SWEEP_FIELDS = ("delta", "eps", "eps_hat", "status_min", "status_max", "min_train", "max_train",
                "min_test", "max_test")
EMPTY_GOOD_SET = "empty good set at this delta"


# ----------------------------------------------------------------------- config


def _merge(base: dict, over: Mapping) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def apply_overrides(cfg: dict, overrides=()) -> dict:
    """Apply ``key.sub=value`` strings; values are parsed as YAML scalars."""
    cfg = copy.deepcopy(cfg)
    for item in overrides:
        if "=" not in item:
            raise SchemaError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        node = cfg
        parts = key.strip().split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise SchemaError(f"override {key!r} descends into a scalar")
        node[parts[-1]] = yaml.safe_load(raw)
    return cfg


def load_config(path=None, overrides=(), base: Mapping | None = None) -> dict:
    """Merge defaults, a YAML file (or ``base``) and overrides into a resolved config."""
    raw = dict(base or {})
    if path is not None:
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
        data = raw.get("data", {})
        if "path" in data and not Path(data["path"]).is_absolute():
            data["path"] = str((path.parent / data["path"]).resolve())
    cfg = _merge(DEFAULTS, raw)
    cfg = apply_overrides(cfg, overrides)
    if cfg["benchmark"].get("source") not in ("external_scores_column", "fit_loss_minimizer"):
        raise SchemaError("benchmark.source must be external_scores_column or fit_loss_minimizer")
    return cfg


def config_hash(cfg: Mapping) -> str:
    """SHA-256 of the canonical JSON form of the config (output location excluded)."""
    body = {k: v for k, v in cfg.items() if k != "out"}
    return hashlib.sha256(json.dumps(body, sort_keys=True, default=str).encode()).hexdigest()


# ------------------------------------------------------------------------- data


def load_data(cfg: Mapping) -> Dataset:
    d = cfg["data"]
    src = d.get("source", "csv")
    if src == "compas":
        return load_compas()
    if src == "csv":
        if "path" not in d or "schema" not in d:
            raise SchemaError("csv data needs 'path' and 'schema'")
        return load_csv(d["path"], Schema.from_mapping(d["schema"]))
    if src == "synthetic":
        n = int(d.get("n", 10_000))
        x, a = default_population(n, int(d.get("population_seed", cfg.get("seed", 0))))
        dgp = SynthDgpConfig.from_mapping(d["dgp"]) if "dgp" in d else DEFAULT_DGP
        return generate_synthetic(dgp, x, a, feature_names=("x1", "x2"))
    raise SchemaError(f"unknown data source {src!r}")


def truth_view(ds: Dataset) -> Dataset:
    """Full-label copy of a synthetic dataset with the sealed outcomes revealed."""
    t = reveal_ground_truth(ds)
    return Dataset(x=ds.x, a=ds.a, y=t.y_star, label_mode="full", feature_names=ds.feature_names,
                   columns=ds.columns)


def funded_view(ds) -> Dataset:
    base = ds.base if isinstance(ds, PseudoLabelledDataset) else ds
    keep = np.flatnonzero(base.funded)
    sub = base.subset(keep)
    return Dataset(x=sub.x, a=sub.a, y=sub.y, label_mode="full", feature_names=sub.feature_names,
                   columns=sub.columns)


@dataclass
class Prepared:
    """Everything an audit needs after ingestion, featurization and pseudo-labelling."""

    cfg: dict
    train: object
    test: Dataset
    lossspec: LossSpec
    grid: Grid
    spec: DisparitySpec
    eval_spec: DisparitySpec
    bench_train: object
    bench_test: object
    benchmark_loss: float
    eps: float
    eps_hat: float
    c0: float
    notes: list = field(default_factory=list)


def _custom_spec(d: Mapping) -> DisparitySpec:
    def ev(m):
        return None if m is None else Event(int(m["a"]), None if m.get("y") is None else int(m["y"]))
    return DisparitySpec(float(d["beta0"]), float(d["beta1"]), ev(d.get("event0")), ev(d.get("event1")),
                         nuisance=d.get("nuisance", "one"), mode=d.get("mode", "eq1"), kind="custom")


def prepare(cfg: Mapping, delta: float | None = None) -> Prepared:
    cfg = dict(cfg)
    notes = []
    ds = load_data(cfg)
    tr_raw, te_raw = split(ds, float(cfg["split"]["fraction"]), int(cfg["split"]["seed"]))
    fz = FeaturizerSpec.from_mapping(cfg["featurizer"])
    _, fmap = featurize(tr_raw, fz)
    tr, te = fmap.apply(tr_raw), fmap.apply(te_raw)

    lossspec = LossSpec(cfg["loss"]["kind"], float(cfg["loss"].get("C", 5.0)))
    grid = Grid(int(cfg["grid"]["N"]))
    dcfg = cfg["disparity"]
    kind = str(dcfg.get("kind", "SP")).upper()
    pipeline = str(cfg["selective"].get("pipeline", "none")).lower()
    selective = tr.label_mode == "selective"
    if selective and pipeline == "none":
        raise SchemaError("selective data needs selective.pipeline in {kgb, rie, ie}")

    if kind == "CUSTOM":
        spec = _custom_spec(dcfg)
        eval_spec = spec
    else:
        spec = make_spec(kind)
        eval_spec = make_spec(kind)
    ridge = float(cfg["oracle"]["ridge"])
    if selective:
        mu_hat = None
        if pipeline in ("rie", "ie"):
            if cfg["selective"].get("oracle_mu"):
                mu_hat = reveal_ground_truth(tr).mu
                notes.append("outcome model: oracle mu from the synthetic ground truth")
            else:
                mu_hat = fit_outcome_model(tr, cfg["selective"].get("outcome_learner", "logistic"), ridge)
        spec = select_nuisance(spec, pipeline, mu_hat)
        tr = apply_pipeline(tr, pipeline, mu_hat)

    bcfg = cfg["benchmark"]
    if bcfg["source"] == "external_scores_column":
        col, scale = bcfg["column"], float(bcfg.get("scale", 1.0))
        bench_train = ColumnScorer(np.clip(tr.column(col) * scale, 0, 1))
        bench_test = ColumnScorer(np.clip(te.column(col) * scale, 0, 1))
        notes.append(f"benchmark scores: column {col!r} multiplied by {scale:g}")
    else:
        y = tr.outcomes()
        if bcfg.get("learner", "wls") == "logistic":
            bench_train = fit_logistic(tr.x, y, ridge=ridge)
        else:
            bench_train = fit_wls(tr.x, y, ridge=ridge)
        bench_test = bench_train
    benchmark_loss = avg_loss(bench_train, tr, lossspec)
    delta = float(cfg["expgrad"]["delta"]) if delta is None else float(delta)
    eps = (1 + delta) * benchmark_loss
    c0 = c0_hat(lossspec, grid, tr)
    eps_hat = eg.calibrate_eps(benchmark_loss, delta, lossspec, grid, tr)
    return Prepared(cfg, tr, te, lossspec, grid, spec, eval_spec, bench_train, bench_test,
                    benchmark_loss, eps, eps_hat, c0, notes)


def _solver_cfg(p: Prepared, eps_hat: float) -> eg.ExpGradConfig:
    e = p.cfg["expgrad"]
    return eg.ExpGradConfig(eps_hat=eps_hat, B_lambda=e.get("B_lambda"), nu=e.get("nu"),
                            eta=float(e.get("eta", 2.0)), max_iter=int(e.get("max_iter", 500)),
                            B_xi=float(e.get("B_xi", 1.0)))


# -------------------------------------------------------------------- evaluate


def auc(scores, labels) -> float:
    """Rank-based AUC with tied scores sharing their average rank; NaN without both classes."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=float)
    if not np.all(np.isin(y, (0.0, 1.0))):
        return float("nan")
    pos = y == 1
    n1, n0 = int(pos.sum()), int((~pos).sum())
    if n1 == 0 or n0 == 0:
        return float("nan")
    r = rankdata(s)
    return float((r[pos].sum() - n1 * (n1 + 1) / 2) / (n1 * n0))


def _population(ds, which: str):
    if which == "funded":
        return funded_view(ds)
    if which != "all":
        raise DomainError(f"unknown population {which!r}")
    if isinstance(ds, PseudoLabelledDataset):
        return ds
    if ds.label_mode == "selective":
        if ds._truth is not None:
            return truth_view(ds)
        raise UnidentifiedMeasureError("full-population outcomes are unobserved; supply pseudo-labels")
    return ds


def evaluate(model, ds, specs, populations=("all", "funded"), lossspec: LossSpec | None = None,
             grid: Grid | None = None, name: str = "model") -> list:
    """Metric rows per population and disparity spec.

    ``ds`` may be a full-label dataset, a selective dataset carrying synthetic
    ground truth, or a pseudo-labelled dataset. Loss, MSE and AUC use the
    population's outcomes; each spec contributes one row.
    """
    lossspec = lossspec or LossSpec("squared")
    grid = grid or Grid()
    rows = []
    for pop in populations:
        view = _population(ds, pop)
        y = view.outcomes()
        pred = model.predict(view.x)
        base = {"model": name, "population": pop, "n": view.n,
                "loss": avg_loss(model, view, lossspec),
                "mse": float(np.mean((y - pred) ** 2)), "auc": auc(pred, y)}
        for spec in specs:
            if spec.mode == "bgl":
                value, se, dg = bgl_disparity(model, view, lossspec, spec), float("nan"), float("nan")
            else:
                est = disparity_of_scorer(model, view, spec)
                value, se = est.value, est.standard_error
                dg = disparity_of_mixture(model, view, spec, grid).value
            rows.append(dict(base, disparity=value, disparity_se=se, disparity_grid=dg, spec=spec.kind))
    return rows


# ---------------------------------------------------------------------- reports


@dataclass
class AuditReport:
    command: str
    config: dict
    config_hash: str
    summary: dict
    metrics: list
    trace: list
    sweep: list
    runtime: dict
    exit_code: int = 0

    def to_dict(self) -> dict:
        return {"command": self.command, "config_hash": self.config_hash, "config": self.config,
                **self.summary}


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_clean(x) for x in v.tolist()]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _cell(v):
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(repr(float(x)) for x in v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _write_csv(path: Path, fields, rows, digest: str):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# config_hash={digest}\n")
        w = csv.DictWriter(fh, fieldnames=list(fields), extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(r.get(k, "")) for k in fields})


def render_report(report: AuditReport, outdir) -> list:
    """Write ``report.json``, ``metrics.csv``, ``trace.csv``, ``sweep.csv`` and ``runtime.json``.

    Everything except ``runtime.json`` is a deterministic function of the
    config and seed.
    """
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    p = out / "report.json"
    p.write_text(json.dumps(_clean(report.to_dict()), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    files.append(p)
    metric_fields = METRIC_FIELDS[:6] + ("spec",) + METRIC_FIELDS[6:]
    for name, fields, rows in (("metrics.csv", metric_fields, report.metrics),
                               ("trace.csv", ("run",) + eg.TRACE_FIELDS, report.trace),
                               ("sweep.csv", SWEEP_FIELDS, report.sweep)):
        _write_csv(out / name, fields, rows, report.config_hash)
        files.append(out / name)
    p = out / "runtime.json"
    p.write_text(json.dumps({"config_hash": report.config_hash, **_clean(report.runtime)}, indent=2,
                            sort_keys=True) + "\n", encoding="utf-8")
    files.append(p)
    return files


# ------------------------------------------------------------------------- runs


def merge_duplicates(model: StochasticModel) -> StochasticModel:
    """Combine components with identical weights (repeated best responses)."""
    seen, scorers, weights = {}, [], []
    for s, w in model.components():
        key = (type(s).__name__, getattr(s, "link", None), np.asarray(s.weights).tobytes()) \
            if hasattr(s, "weights") else id(s)
        if key in seen:
            weights[seen[key]] += w
        else:
            seen[key] = len(scorers)
            scorers.append(s)
            weights.append(w)
    w = np.asarray(weights)
    return StochasticModel(tuple(scorers), w / w.sum())


def _run_summary(res: eg.SaddleResult, p: Prepared, model, extra=None) -> dict:
    cert = eg.certify(res, p.train, p.lossspec, p.grid) if res.model is not None else None
    out = {"status": res.status, "iterations": res.iterations, "nu_T": res.nu_T,
           "train_disparity": res.disparity, "train_cost": res.cost, "xi": res.xi,
           "B_lambda": res.config.B_lambda, "nu": res.config.nu, "eta": res.config.eta,
           "certificate": None if cert is None else {"passed": cert.passed, **cert.to_dict()},
           "model": None if model is None else {"support": model.support_size, **model.to_dict()}}
    out.update(extra or {})
    return out


def _trace_rows(name, res):
    return [dict(r, run=name) for r in res.trace]


def _bench_rows(p: Prepared, pops, specs):
    return evaluate(p.bench_test, p.test, specs, pops, p.lossspec, p.grid, name="benchmark")


def _populations(p: Prepared):
    if p.test.label_mode != "selective":
        return ("all",)
    if p.test._truth is None:
        if "funded-only evaluation" not in p.notes:
            p.notes.append("funded-only evaluation: full-population outcomes are unobserved")
        return ("funded",)
    return ("all", "funded")


def _solve_range(p: Prepared, eps_hat: float):
    cfg = _solver_cfg(p, eps_hat)
    rmin = eg.solve_disparity_min(p.train, p.spec, cfg, p.lossspec, p.grid)
    rmax = eg.solve_disparity_max(p.train, p.spec, cfg, p.lossspec, p.grid)
    return rmin, rmax


def _shrunk(res: eg.SaddleResult, maximize: bool):
    if res.model is None:
        return None, None
    sr = eg.shrink_result(res, maximize)
    return merge_duplicates(sr.model), sr


def run_range_audit(cfg: Mapping, command: str = "audit range") -> AuditReport:
    """Minimize and maximize the disparity over the good set and evaluate on the test split."""
    t0 = time.perf_counter()
    p = prepare(cfg)
    pops = _populations(p)
    specs = [p.eval_spec]
    rmin, rmax = _solve_range(p, p.eps_hat)
    t_solve = time.perf_counter() - t0
    metrics = _bench_rows(p, pops, specs)
    runs, endpoints = {}, {}
    for name, res, mx in (("min", rmin, False), ("max", rmax, True)):
        model, sr = _shrunk(res, mx)
        shrink = None if sr is None else {"objective": sr.objective, "cost": sr.cost,
                                          "nu_prime": sr.nu_prime, "indices": list(sr.indices)}
        runs[name] = _run_summary(res, p, model, {"shrink": shrink})
        if model is not None:
            rows = evaluate(model, p.test, specs, pops, p.lossspec, p.grid, name=name)
            metrics += rows
            endpoints[name] = rows[0]
    bench = metrics[0]
    flags = []
    if rmin.model is None and rmax.model is None:
        flags.append(EMPTY_GOOD_SET)
    rng = {"benchmark": bench["disparity"], "benchmark_se": bench["disparity_se"],
           "min": endpoints.get("min", {}).get("disparity"),
           "min_se": endpoints.get("min", {}).get("disparity_se"),
           "max": endpoints.get("max", {}).get("disparity"),
           "max_se": endpoints.get("max", {}).get("disparity_se")}
    if rng["min"] is not None and rng["max"] is not None:
        rng["benchmark_inside"] = bool(rng["min"] <= rng["benchmark"] <= rng["max"])
    sweep = _sweep(p)
    summary = {"data": _data_summary(p), "benchmark": _bench_summary(p, bench),
               "runs": runs, "range": rng, "flags": flags, "notes": p.notes}
    trace = _trace_rows("min", rmin) + _trace_rows("max", rmax)
    runtime = {"total_seconds": time.perf_counter() - t0, "solve_seconds": t_solve}
    return AuditReport(command, dict(cfg), config_hash(cfg), summary, metrics, trace, sweep, runtime,
                       exit_code=2 if flags else 0)


def _sweep(p: Prepared) -> list:
    rows = []
    for delta in p.cfg.get("sweep", {}).get("deltas") or []:
        delta = float(delta)
        eps_hat = eg.calibrate_eps(p.benchmark_loss, delta, p.lossspec, p.grid, p.train)
        rmin, rmax = _solve_range(p, eps_hat)
        row = {"delta": delta, "eps": (1 + delta) * p.benchmark_loss, "eps_hat": eps_hat,
               "status_min": rmin.status, "status_max": rmax.status}
        for name, res, mx in (("min", rmin, False), ("max", rmax, True)):
            model, _ = _shrunk(res, mx)
            row[f"{name}_train"] = res.disparity if model is not None else None
            if model is not None:
                row[f"{name}_test"] = evaluate(model, p.test, [p.eval_spec], ("all",),
                                               p.lossspec, p.grid)[0]["disparity"]
        rows.append(row)
    return rows


def _data_summary(p: Prepared) -> dict:
    return {"n_train": p.train.n, "n_test": p.test.n, "features": list(p.train.feature_names),
            "split": dict(p.cfg["split"]), "seed": p.cfg.get("seed", 0),
            "pipeline": p.cfg["selective"].get("pipeline", "none"), "spec": p.spec.to_dict()}


def _bench_summary(p: Prepared, bench_row: dict) -> dict:
    return {"loss_train": p.benchmark_loss, "loss_test": bench_row["loss"],
            "disparity_test": bench_row["disparity"], "disparity_test_se": bench_row["disparity_se"],
            "delta": float(p.cfg["expgrad"]["delta"]), "eps": p.eps, "eps_hat": p.eps_hat, "c0": p.c0}


def run_min_abs(cfg: Mapping, command: str = "audit min-abs") -> AuditReport:
    """Minimize ``|disparity|`` over the good set and evaluate on the test split."""
    t0 = time.perf_counter()
    p = prepare(cfg)
    pops = _populations(p)
    specs = [p.eval_spec]
    res = eg.solve_abs_disparity_min(p.train, p.spec, _solver_cfg(p, p.eps_hat), p.lossspec, p.grid)
    metrics = _bench_rows(p, pops, specs)
    model = None if res.model is None else merge_duplicates(res.model)
    runs = {"min_abs": _run_summary(res, p, model)}
    flags = [] if model is not None else [EMPTY_GOOD_SET]
    if model is not None:
        metrics += evaluate(model, p.test, specs, pops, p.lossspec, p.grid, name="min_abs")
    summary = {"data": _data_summary(p), "benchmark": _bench_summary(p, metrics[0]),
               "runs": runs, "flags": flags, "notes": p.notes}
    runtime = {"total_seconds": time.perf_counter() - t0}
    return AuditReport(command, dict(cfg), config_hash(cfg), summary, metrics,
                       _trace_rows("min_abs", res), [], runtime, exit_code=2 if flags else 0)


def run_bgl(cfg: Mapping, command: str = "audit bgl") -> AuditReport:
    """Minimize the group-loss gap subject to ``loss <= (1 + delta) * benchmark loss``."""
    t0 = time.perf_counter()
    p = prepare(cfg)
    pops = _populations(p)
    spec = make_spec("BGL")
    solver = _solver_cfg(p, p.eps)
    res = eg.solve_bgl(p.train, solver, p.lossspec, spec)
    metrics = _bench_rows(p, pops, [spec])
    model = None if res.model is None else merge_duplicates(res.model)
    flags = [] if model is not None else [EMPTY_GOOD_SET]
    if model is not None:
        metrics += evaluate(model, p.test, [spec], pops, p.lossspec, p.grid, name="bgl")
    runs = {"bgl": _run_summary(res, p, model)}
    bench = _bench_summary(p, metrics[0])
    summary = {"data": _data_summary(p), "benchmark": bench, "runs": runs, "flags": flags,
               "notes": p.notes}
    runtime = {"total_seconds": time.perf_counter() - t0}
    return AuditReport(command, dict(cfg), config_hash(cfg), summary, metrics,
                       _trace_rows("bgl", res), [], runtime, exit_code=2 if flags else 0)


def evaluate_saved(cfg: Mapping, model_path, which: str | None = None) -> AuditReport:
    """Evaluate a model stored in a ``report.json`` (or a bare model JSON) on the config's test split."""
    p = prepare(cfg)
    blob = json.loads(Path(model_path).read_text(encoding="utf-8"))
    models = {}
    if "runs" in blob:
        for name, run in blob["runs"].items():
            if run.get("model") and (which is None or which == name):
                models[name] = StochasticModel.from_dict(run["model"])
    else:
        models[which or "model"] = StochasticModel.from_dict(blob)
    if not models:
        raise SchemaError(f"no model found in {model_path}")
    pops = _populations(p)
    metrics = []
    for name, m in models.items():
        metrics += evaluate(m, p.test, [p.eval_spec], pops, p.lossspec, p.grid, name=name)
    summary = {"data": _data_summary(p), "models": sorted(models), "flags": [], "notes": p.notes}
    return AuditReport("evaluate", dict(cfg), config_hash(cfg), summary, metrics, [], [], {})
