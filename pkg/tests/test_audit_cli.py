import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from goodset import audit, cli
from goodset.audit import AuditReport, auc, config_hash, evaluate, load_config, render_report
from goodset.errors import SchemaError, UnidentifiedMeasureError
from goodset.models import ConstantScorer

ROOT = Path(__file__).resolve().parents[1]

SMALL = {
    "data": {"source": "synthetic", "n": 2000, "population_seed": 0},
    "featurizer": {"columns": ["x1", "x2"], "degree": 1, "standardize": True},
    "loss": {"kind": "squared"},
    "disparity": {"kind": "SP"},
    "selective": {"pipeline": "rie"},
    "expgrad": {"delta": 0.05, "max_iter": 40},
    "benchmark": {"source": "fit_loss_minimizer", "learner": "wls"},
}


@pytest.fixture
def small_config(tmp_path):
    p = tmp_path / "small.yaml"
    p.write_text(yaml.safe_dump(SMALL))
    return p


def test_auc_edges():
    y = np.array([0, 0, 1, 1])
    assert auc([0.1, 0.2, 0.8, 0.9], y) == 1.0
    assert auc(np.full(4, 0.3), y) == 0.5
    assert np.isnan(auc([0.1, 0.2], [1, 1]))


def test_config_overrides_and_hash():
    cfg = load_config(base=SMALL, overrides=["expgrad.delta=0.1", "split.seed=3"])
    assert cfg["expgrad"]["delta"] == 0.1 and cfg["split"]["seed"] == 3
    assert config_hash(cfg) == config_hash(load_config(base=SMALL, overrides=["split.seed=3", "expgrad.delta=0.1"]))
    assert config_hash(cfg) != config_hash(load_config(base=SMALL))
    assert config_hash(cfg) == config_hash(dict(cfg, out="elsewhere"))
    with pytest.raises(SchemaError):
        load_config(base=SMALL, overrides=["novalue"])


def test_constant_scorer_metrics():
    p = audit.prepare(load_config(base=SMALL))
    rows = evaluate(ConstantScorer(0.4), p.test, [p.eval_spec], ("all", "funded"), p.lossspec, p.grid)
    for r in rows:
        assert r["auc"] == 0.5
        assert r["disparity"] == pytest.approx(0.0, abs=1e-15)


def test_funded_sp_understates_full_population():
    cfg = load_config(ROOT / "configs" / "synthetic.yaml")
    p = audit.prepare(cfg)
    rows = {r["population"]: r for r in evaluate(p.bench_test, p.test, [p.eval_spec], ("all", "funded"),
                                                  p.lossspec, p.grid)}
    assert abs(rows["funded"]["disparity"]) < abs(rows["all"]["disparity"])


def test_unobserved_population_is_unidentified():
    cfg = load_config(base=SMALL)
    p = audit.prepare(cfg)
    bare = p.test.subset(np.arange(p.test.n))
    object.__setattr__(bare, "_truth", None)
    with pytest.raises(UnidentifiedMeasureError):
        evaluate(ConstantScorer(0.4), bare, [p.eval_spec], ("all",), p.lossspec, p.grid)


def test_empty_sweep_gives_header_only_csv(tmp_path):
    rep = AuditReport("audit range", {}, "abc", {}, [], [], [], {})
    render_report(rep, tmp_path)
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "# config_hash=abc"
    assert len(lines) == 2


def _run(argv):
    return cli.main([str(a) for a in argv])


def test_cli_range_audit_and_determinism(small_config, tmp_path, capsys):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert _run(["audit", "range", "--config", small_config, "--out", out1]) == 0
    assert _run(["audit", "range", "--config", small_config, "--out", out2]) == 0
    text = capsys.readouterr().out
    digest = text.split("config_hash ")[1].split()[0]
    for name in ("report.json", "metrics.csv", "trace.csv", "sweep.csv"):
        a, b = (out1 / name).read_bytes(), (out2 / name).read_bytes()
        assert a == b
        assert digest.encode() in a
    rep = json.loads((out1 / "report.json").read_text())
    assert rep["range"]["min"] <= rep["range"]["max"]
    assert {r["model"] for r in _metrics(out1)} == {"benchmark", "min", "max"}


def _metrics(outdir):
    import csv

    with open(outdir / "metrics.csv") as fh:
        next(fh)
        return list(csv.DictReader(fh))


def test_cli_other_subcommands(small_config, tmp_path):
    assert _run(["audit", "min-abs", "--config", small_config, "--out", tmp_path / "abs"]) == 0
    assert _run(["audit", "bgl", "--config", small_config, "--out", tmp_path / "bgl"]) == 0
    assert _run(["selective", "prep", "--config", small_config, "--out", tmp_path / "prep"]) == 0
    prep = (tmp_path / "prep" / "train_pseudo.csv").read_text().splitlines()
    assert prep[0].endswith("y_hat,mu_hat,provenance")
    assert _run(["synth", "gen", "--config", small_config, "--out", tmp_path / "syn"]) == 0
    assert (tmp_path / "syn" / "synthetic_truth.csv").exists()
    _run(["audit", "range", "--config", small_config, "--out", tmp_path / "rng"])
    assert _run(["evaluate", "--config", small_config, "--model", tmp_path / "rng" / "report.json",
                 "--which", "min", "--out", tmp_path / "ev"]) == 0
    assert {r["model"] for r in _metrics(tmp_path / "ev")} == {"min"}


def test_cli_errors(small_config, tmp_path, capsys):
    assert _run(["audit", "range", "--config", tmp_path / "missing.yaml"]) == 1
    assert _run(["audit", "range", "--config", small_config, "--set", "disparity.kind=NOPE",
                 "--out", tmp_path / "x"]) == 1
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert _run(["audit", "range", "--config", small_config, "--out", blocker / "sub"]) == 1
    assert "error:" in capsys.readouterr().err


def test_cli_empty_good_set_exit_code(small_config, tmp_path, monkeypatch):
    real = audit._solve_range

    def starved(p, eps_hat):
        return real(p, eps_hat - 0.5)

    monkeypatch.setattr(audit, "_solve_range", starved)
    assert _run(["audit", "range", "--config", small_config, "--set", "expgrad.nu=0.5",
                 "--out", tmp_path / "e"]) == 2
    rep = json.loads((tmp_path / "e" / "report.json").read_text())
    assert audit.EMPTY_GOOD_SET in rep["flags"]
