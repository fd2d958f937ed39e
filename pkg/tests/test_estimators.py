import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from helpers import stable_truth

from cmvt.estimators import (
    MinnesotaType1MatrixT,
    MinnesotaType2MatrixT,
    Type1MatrixT,
    Type2MatrixT,
)
from cmvt.minnesota import MinnesotaHyper
from cmvt.params import TParams
from cmvt.simulate import RngStream, simulate_bvar


def _rows(seed, n=2, l=1, p=1, T=50, model="type1"):
    truth = stable_truth(n, l, p)
    dataset = simulate_bvar(truth, n, l, p, T, model, rng=RngStream(seed))
    return np.hstack([dataset.presample, dataset.endogenous]).T


def test_get_set_params_and_clone():
    est = Type1MatrixT(p=2, tol=1e-6, max_iter=10)
    params = est.get_params()
    assert params["p"] == 2 and params["tol"] == 1e-6
    est.set_params(max_iter=7)
    assert est.max_iter == 7
    cloned = clone(est)
    assert cloned.get_params() == est.get_params()


def test_score_requires_fit():
    with pytest.raises(NotFittedError):
        Type1MatrixT().score(_rows(0))


@pytest.mark.parametrize("cls,model", [
    (Type1MatrixT, "type1"),
    (Type2MatrixT, "type2"),
])
def test_general_estimators_fit(cls, model):
    rows = _rows(1, model=model)
    est = cls(p=1, max_iter=40, tol=1e-10).fit(rows)
    assert est.pi0_.shape == (2 * 3,)
    assert est.lambda0_.shape == (3,)
    assert est.v0_.shape == (2, 2)
    assert isinstance(est.params_, TParams)
    assert est.n_iter_ >= 1
    assert np.diff(est.trace_.loglik).min() >= -1e-8
    # score on the training data equals the final trace objective
    assert est.score(rows) == pytest.approx(est.loglik_, abs=1e-9)


@pytest.mark.parametrize("cls", [MinnesotaType1MatrixT, MinnesotaType2MatrixT])
def test_minnesota_estimators_fit(cls):
    rows = _rows(2, p=2, T=60)
    est = cls(p=2, phi=[0.0, 1.0], max_iter=25, tol=1e-10).fit(rows)
    assert isinstance(est.params_, MinnesotaHyper)
    assert est.alpha_ > 0 and np.all(est.gamma_ > 0) and np.all(est.eps_ > 0)
    assert est.c_m_.shape == (2, 1)
    assert est.pi0_.shape == (2 * (1 + 2 * 2),)
    assert np.diff(est.trace_.loglik).min() >= -1e-8
    assert est.score(rows) == pytest.approx(est.loglik_, abs=1e-9)


def test_estimator_accepts_exogenous_and_dict_init():
    rng = RngStream(9)
    T = 40
    exog = np.vstack([np.ones((1, T)), rng.normal((1, T))])
    truth = stable_truth(1, 2, 1)
    dataset = simulate_bvar(truth, 1, 2, 1, T, "type1", exogenous=exog, rng=rng)
    rows = np.hstack([dataset.presample, dataset.endogenous]).T
    exog_rows = dataset.exogenous.T  # T rows, constant included
    init = {
        "pi0": [0.0, 0.0, 0.0],
        "lambda0": [1.0, 1.0, 1.0],
        "nu0": 3.0,
        "V0": [[1.0]],
    }
    est = Type1MatrixT(p=1, max_iter=15, init=init).fit(rows, exog=exog_rows)
    assert est.converged_ or est.n_iter_ == 15
    score = est.score(rows, exog=exog_rows)
    assert np.isfinite(score)


def test_estimator_deterministic():
    rows = _rows(3, model="type2")
    a = Type2MatrixT(p=1, max_iter=20).fit(rows)
    b = Type2MatrixT(p=1, max_iter=20).fit(rows)
    assert a.trace_.loglik == b.trace_.loglik
    assert np.array_equal(a.pi0_, b.pi0_)
