import math

import numpy as np
import pytest

import vinecls


def test_bicop_tau_and_density():
    c = vinecls.Bicop.from_tau("clayton", 0.5)
    assert c.params[0] == pytest.approx(2.0)
    assert c.tau() == pytest.approx(0.5)
    u = np.linspace(0.1, 0.9, 5)
    cdf = c.cdf(u, u)
    assert np.all(cdf <= u + 1e-12)
    draws = c.sample(2000, 3)
    assert draws.shape == (2000, 2)
    assert np.all((draws > 0) & (draws < 1))


def test_posterior_worked_case():
    p = vinecls.bayes_posterior([0.2, 0.8], [math.log(2.0), 0.0])
    assert p[0] == pytest.approx(1 / 3, abs=1e-12)


def test_fit_predict_round_trip(tmp_path):
    x, y, schema = vinecls.simulate("mixed", 200, 7)
    assert x.shape == (400, 2)
    assert schema[1]["kind"] == "ordinal"
    model = vinecls.Classifier.fit(x, y, schema, class_families={0: ["gumbel"], 1: ["frank"]}, oracle=True)
    p = model.predict_proba(x)
    assert p.shape == (400, 2)
    assert np.allclose(p.sum(axis=1), 1.0, atol=1e-12)
    path = str(tmp_path / "model.json")
    model.save(path)
    again = vinecls.Classifier.load(path).predict_proba(x)
    assert np.array_equal(p, again)
    edges = model.edges(1)
    assert edges[0]["family"] == "frank"
    assert vinecls.auc(p[:, 1].tolist(), y.tolist()) > 0.5


def test_metrics_and_risk_groups():
    labels = [0, 1, 1, 0]
    half = np.full((4, 2), 0.5)
    assert vinecls.per_class_brier(half, labels) == [0.25, 0.25]
    perfect = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    assert vinecls.per_class_nll(perfect, labels)["per_class"] == [0.0, 0.0]
    assert vinecls.risk_groups([0.95, 0.10, 0.60], 0.25) == ["high", "low", "moderate"]


def test_errors_are_raised_as_value_errors():
    x, y, schema = vinecls.simulate("continuous", 20, 1)
    with pytest.raises(vinecls.VineclsError):
        vinecls.Classifier.fit(x, np.ones_like(y), schema)
    with pytest.raises(ValueError):
        vinecls.risk_groups([0.5], 0.7)


def test_conditional_spearman_bands():
    rng = np.random.default_rng(0)
    x = rng.normal(size=300)
    y = 0.5 * x + rng.normal(size=300)
    z = (np.arange(300) % 3 + 1).astype(float)
    bands = vinecls.conditional_spearman(x.tolist(), y.tolist(), z.tolist(), 3, replicates=200, seed=4)
    assert len(bands) == 3
    for b in bands:
        assert b["lower"] <= b["observed"] <= b["upper"]
