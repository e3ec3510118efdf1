import numpy as np
import pytest

from oracles import quad_deviance
from solarcast.core import ConfigError, EmptySplitError, NonFiniteError
from solarcast.models import tweedie
from solarcast.models.boosting import SECOND_ORDER_DEFAULTS, BoostConfig, BoostedModel, fit_gbm
from solarcast.models.tweedie import TweedieSpec, estimate_dispersion, tweedie_deviance


def test_deviance_examples():
    assert tweedie_deviance(1.0, 1.0, 1.5) == 0.0
    assert tweedie_deviance(0.0, 1.0, 1.5) == pytest.approx(4.0, abs=1e-14)
    assert tweedie_deviance(2.0, 1.0, 1.5) == pytest.approx(quad_deviance(2.0, 1.0, 1.5), abs=1e-8)
    with pytest.raises(NonFiniteError):
        tweedie_deviance(1.0, 0.0)
    with pytest.raises(ConfigError):
        TweedieSpec(2.0)


def test_deviance_matches_quadrature():
    rng = np.random.default_rng(0)
    for _ in range(100):
        y = rng.uniform(0, 20) if rng.random() > 0.1 else 0.0
        mu = rng.uniform(0.05, 20)
        assert tweedie_deviance(y, mu, 1.5) == pytest.approx(quad_deviance(y, mu, 1.5), abs=1e-8)


def test_gradient_hessian_finite_differences():
    rng = np.random.default_rng(1)
    y = np.where(rng.random(1000) < 0.2, 0.0, rng.gamma(2.0, 3.0, 1000))
    F = rng.uniform(-2, 3, 1000)
    eps = 1e-5
    half = lambda f: 0.5 * tweedie_deviance(y, np.exp(f), 1.5)
    fd_g = (half(F + eps) - half(F - eps)) / (2 * eps)
    g = tweedie.gradient(y, F, 1.5)
    fd_h = (tweedie.gradient(y, F + eps, 1.5) - tweedie.gradient(y, F - eps, 1.5)) / (2 * eps)
    h = tweedie.hessian(y, F, 1.5)
    assert np.max(np.abs(fd_g - g) / np.maximum(1, np.abs(g))) < 1e-6
    assert np.max(np.abs(fd_h - h) / np.maximum(1, np.abs(h))) < 1e-6


def test_dispersion():
    y = np.array([1.0, 2.0, 3.0])
    mu = np.array([1.5, 2.0, 2.5])
    assert estimate_dispersion(y, mu) == pytest.approx(tweedie_deviance(y, mu).sum() / 2)


def test_zero_stages():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(30, 2))
    y = rng.uniform(1, 5, 30)
    m = fit_gbm(X, y, BoostConfig(n_estimators=0))
    assert np.all(m.predict(X) == y.mean())
    m = fit_gbm(X, np.full(30, 2.0), BoostConfig(n_estimators=0, loss="tweedie"))
    assert np.allclose(m.predict(X), 2.0, rtol=1e-15)


def test_memorizes_noiseless_fixture():
    rng = np.random.default_rng(3)
    X = rng.uniform(0, 1, size=(50, 3))
    y = np.sin(6 * X[:, 0]) + X[:, 1] * X[:, 2]
    m = fit_gbm(X, y, BoostConfig(n_estimators=20, learning_rate=1.0, max_depth=None, min_samples_leaf=1))
    assert np.mean((m.predict(X) - y) ** 2) < 1e-10


@pytest.mark.parametrize("loss", ["squared", "tweedie"])
@pytest.mark.parametrize("lr", [0.1, 0.5, 1.0])
def test_first_order_loss_non_increasing(loss, lr):
    rng = np.random.default_rng(4)
    X = rng.normal(size=(200, 4))
    mu = np.exp(0.5 * X[:, 0] - 0.3 * X[:, 1])
    y = np.where(rng.random(200) < 0.3, 0.0, rng.gamma(2.0, mu / 2))
    m = fit_gbm(X, y, BoostConfig(n_estimators=30, learning_rate=lr, max_depth=3, loss=loss))
    losses = np.array(m.train_loss)
    assert np.all(np.diff(losses) <= 1e-12 * np.abs(losses[:-1]))


def test_prediction_is_init_plus_weighted_stages():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(150, 3))
    y = rng.gamma(2.0, 2.0, 150)
    for cfg in (BoostConfig(n_estimators=15, loss="tweedie"),
                BoostConfig(**SECOND_ORDER_DEFAULTS, n_estimators=15)):
        m = fit_gbm(X, y, cfg, seed=2)
        Q = rng.normal(size=(40, 3))
        score = m.init + sum(w * t.predict(Q) for w, t in zip(m.stage_weights, m.trees))
        expect = np.exp(score) if cfg.loss == "tweedie" else score
        assert np.allclose(m.predict(Q), expect, rtol=1e-12)
        assert np.allclose(m.raw_score(Q), score, rtol=1e-12)


def test_tweedie_predictions_positive():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(100, 2))
    y = np.where(X[:, 0] > 0, rng.gamma(2, 2, 100), 0.0)
    m = fit_gbm(X, y, BoostConfig(n_estimators=25, loss="tweedie"))
    assert np.all(m.predict(rng.normal(size=(500, 2)) * 10) > 0)
    assert np.isfinite(m.dispersion) and m.dispersion > 0


def test_second_order_seeded_and_subsampled():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(200, 5))
    y = X[:, 0] - X[:, 1] + rng.normal(size=200)
    cfg = BoostConfig(**SECOND_ORDER_DEFAULTS, n_estimators=10)
    a, b, c = fit_gbm(X, y, cfg, seed=1), fit_gbm(X, y, cfg, seed=1), fit_gbm(X, y, cfg, seed=2)
    assert np.array_equal(a.predict(X), b.predict(X))
    assert not np.array_equal(a.predict(X), c.predict(X))
    # leaf value -G/(H+lambda): the L2 penalty shrinks a single-stage model toward init
    big = fit_gbm(X, y, BoostConfig(**{**SECOND_ORDER_DEFAULTS, "reg_lambda": 1e6}, n_estimators=1))
    assert np.max(np.abs(big.predict(X) - big.init)) < 1e-3


def test_second_order_leaf_values_closed_form():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(60, 2))
    y = rng.normal(size=60)
    lam = 2.5
    cfg = BoostConfig(n_estimators=1, learning_rate=1.0, order="second", max_depth=2,
                      min_samples_leaf=1, reg_lambda=lam)
    m = fit_gbm(X, y, cfg)
    t = m.trees[0]
    leaf = t.apply(X)
    g = m.init - y  # squared-loss gradient at the initial score
    for node in np.unique(leaf):
        sel = leaf == node
        assert t.value[node] == pytest.approx(-g[sel].sum() / (sel.sum() + lam), rel=1e-12)


def test_logistic_loss_gate():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(300, 2))
    z = (X[:, 0] + 0.3 * rng.normal(size=300) > 0).astype(float)
    m = fit_gbm(X, z, BoostConfig(n_estimators=30, loss="logistic"))
    p = m.predict_proba(X)
    assert np.all((p > 0) & (p < 1))
    assert np.mean((p > 0.5) == (z == 1)) > 0.9


def test_config_errors():
    with pytest.raises(ConfigError):
        BoostConfig(learning_rate=0.0)
    with pytest.raises(ConfigError):
        BoostConfig(loss="huber")
    with pytest.raises(ConfigError):
        BoostConfig(row_subsample=1.5)
    with pytest.raises(EmptySplitError):
        fit_gbm(np.ones((5, 1)), np.zeros(5), BoostConfig(loss="tweedie"))


def test_boosted_serialization():
    rng = np.random.default_rng(10)
    X = rng.normal(size=(80, 3))
    y = rng.gamma(2, 2, 80)
    m = fit_gbm(X, y, BoostConfig(n_estimators=5, loss="tweedie"))
    back = BoostedModel.from_dict(m.to_dict())
    assert back.predict(X).tobytes() == m.predict(X).tobytes()
