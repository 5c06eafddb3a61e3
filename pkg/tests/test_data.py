import numpy as np
import pytest

from goodset import Dataset, FeaturizerSpec, featurize, load_csv, reveal_ground_truth, split, write_csv
from goodset.data import DEFAULT_DGP, SynthDgpConfig, default_population, default_synthetic, generate_synthetic
from goodset.datasets import load_compas
from goodset.errors import (
    ConsistencyError,
    DomainError,
    MissingLabelError,
    PositivityError,
    SchemaError,
    SizeError,
    ZeroVarianceError,
)

SCHEMA = {"features": ["x1"], "attribute": "a", "decision": "d", "outcome": "y"}


def _csv(tmp_path, text):
    p = tmp_path / "data.csv"
    p.write_text(text)
    return p


def test_selective_csv(tmp_path):
    p = _csv(tmp_path, "x1,a,d,y\n0.1,0,1,1\n0.2,1,1,0\n0.3,0,0,\n0.4,1,1,1\n")
    ds = load_csv(p, SCHEMA)
    assert ds.n == 4
    assert ds.label_mode == "selective"
    assert np.isnan(ds.y).tolist() == [False, False, True, False]


def test_outcome_out_of_range_names_row(tmp_path):
    p = _csv(tmp_path, "x1,a,d,y\n0.1,0,1,1\n0.2,1,1,1.5\n")
    with pytest.raises(DomainError, match="row 1"):
        load_csv(p, SCHEMA)


def test_missing_column(tmp_path):
    p = _csv(tmp_path, "x1,a,y\n0.1,0,1\n")
    with pytest.raises(SchemaError):
        load_csv(p, SCHEMA)


def test_funded_row_without_outcome():
    with pytest.raises(ConsistencyError):
        Dataset(x=[[1.0], [2.0]], a=[0, 1], y=[1.0, np.nan], d=[1, 1], label_mode="selective")


def test_full_mode_rejects_missing_outcome():
    with pytest.raises(MissingLabelError):
        Dataset(x=[[1.0], [2.0]], a=[0, 1], y=[1.0, np.nan])


def test_selective_outcomes_raise():
    ds = Dataset(x=[[1.0], [2.0]], a=[0, 1], y=[1.0, np.nan], d=[1, 0], label_mode="selective")
    with pytest.raises(MissingLabelError):
        ds.outcomes()


def test_csv_round_trip(tmp_path):
    ds = default_synthetic(n=50)
    path = write_csv(ds, tmp_path / "s.csv")
    back = load_csv(path, {"features": ["x1", "x2"], "attribute": "a", "decision": "d", "outcome": "y"})
    np.testing.assert_array_equal(back.x, ds.x)
    np.testing.assert_array_equal(back.funded, ds.funded)
    np.testing.assert_array_equal(np.nan_to_num(back.y, nan=-1), np.nan_to_num(ds.y, nan=-1))


def test_compas_rows():
    ds = load_compas()
    assert ds.n == 7214
    assert ds.label_mode == "full"
    assert set(np.unique(ds.y)) == {0.0, 1.0}
    assert ds.column("decile_score").min() >= 1 and ds.column("decile_score").max() <= 10


def test_split_partition_and_determinism():
    ds = Dataset(x=np.arange(10.0)[:, None], a=np.arange(10) % 2, y=np.zeros(10))
    tr, te = split(ds, 0.5, 7)
    assert (tr.n, te.n) == (5, 5)
    assert sorted(np.r_[tr.x[:, 0], te.x[:, 0]].tolist()) == list(range(10))
    tr2, _ = split(ds, 0.5, 7)
    np.testing.assert_array_equal(tr.x, tr2.x)


def test_split_compas_size():
    tr, te = split(load_compas(), 0.5, 0)
    assert tr.n == 3607 and te.n == 3607


def test_split_too_small():
    with pytest.raises(SizeError):
        split(Dataset(x=[[1.0]], a=[0], y=[0.0]), 0.5, 0)


def test_featurize_quadratic_columns():
    ds = Dataset(x=np.array([[1.0, 2.0], [3.0, 5.0], [4.0, 4.0]]), a=[0, 1, 0], y=[0, 1, 0],
                 feature_names=("x1", "x2"))
    m, fm = featurize(ds, FeaturizerSpec(degree=2, intercept=True))
    assert fm.names == ("intercept", "x1", "x2", "x1^2", "x1*x2", "x2^2")
    np.testing.assert_allclose(m[1], [1, 3, 5, 9, 15, 25])


def test_standardize_and_reuse():
    tr = Dataset(x=np.array([[1.0], [2.0], [3.0]]), a=[0, 1, 0], y=[0, 0, 1], feature_names=("v",))
    te = Dataset(x=np.array([[10.0]]), a=[1], y=[1], feature_names=("v",))
    m, fm = featurize(tr, FeaturizerSpec(standardize=True, intercept=False))
    assert m.mean() == pytest.approx(0.0, abs=1e-15)
    assert m.std() == pytest.approx(1.0)
    held, _ = featurize(te, FeaturizerSpec(standardize=True, intercept=False), fitted=fm)
    s = np.std([1.0, 2.0, 3.0])
    assert held[0, 0] == pytest.approx((10.0 - 2.0) / s)


def test_constant_column_standardized():
    ds = Dataset(x=np.ones((3, 1)), a=[0, 1, 0], y=[0, 0, 1], feature_names=("c",))
    with pytest.raises(ZeroVarianceError):
        featurize(ds, FeaturizerSpec(standardize=True))


def test_synthetic_funding_rate():
    ds = default_synthetic(n=10_000)
    truth = reveal_ground_truth(ds)
    d = ds.funded.astype(float)
    se = np.sqrt(np.sum(truth.pi * (1 - truth.pi))) / ds.n
    assert abs(d.mean() - truth.pi.mean()) <= 3 * se


def test_synthetic_degenerate_cases():
    x, a = default_population(200, 1)
    always = SynthDgpConfig(pi_coef=(0.0, 0.0), mu_coef=(0.0, 0.0), pi_intercept=50.0, mu_intercept=-50.0)
    ds = generate_synthetic(always, x, a)
    assert ds.funded.all()
    assert np.all(ds.y == 0)


def test_synthetic_positivity():
    x, a = default_population(20, 1)
    never = SynthDgpConfig(pi_coef=(0.0, 0.0), mu_coef=(0.0, 0.0), pi_intercept=-1e4)
    with pytest.raises(PositivityError):
        generate_synthetic(never, x, a)


def test_synthetic_is_reproducible():
    a, b = default_synthetic(n=300), default_synthetic(n=300)
    np.testing.assert_array_equal(a.d, b.d)
    np.testing.assert_array_equal(reveal_ground_truth(a).y_star, reveal_ground_truth(b).y_star)
    assert DEFAULT_DGP.seed == default_synthetic.__defaults__[2].seed
