import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from chains import chain_b, chain_d
from metastab import MetastableChain
from metastab.asymptotics import make
from metastab.chain_model import TimeScale, spec_to_dict
from metastab.errors import ChainValidationError, CriticalTimeScale


def test_params_and_clone():
    est = MetastableChain(repair=True)
    assert est.get_params() == {"repair": True}
    twin = clone(est)
    assert twin.get_params() == {"repair": True} and twin is not est


def test_not_fitted():
    with pytest.raises(NotFittedError):
        MetastableChain().predict((1, 0, 2))


@pytest.mark.parametrize("source", ["spec", "dict", "path"])
def test_fit_sources(source, data_dir):
    X = {"spec": chain_d(), "dict": spec_to_dict(chain_d()), "path": data_dir / "chain_d.json"}[source]
    est = MetastableChain().fit(X)
    assert est.n_states_ == 4 and est.rho_ == 2
    assert est.hierarchy_.sizes == (4, 2, 1)


@pytest.mark.parametrize("t", [(1, 0, 7), "1,0,7", TimeScale.from_triple(1, 0, 7), make(1, 0, -7)])
def test_predict_time_forms(t):
    est = MetastableChain().fit(chain_d())
    np.testing.assert_allclose(est.predict(t, start=0), [0, 0, 0.5, 0.5])
    np.testing.assert_allclose(est.predict(t, start="s1"), [0, 0, 0.5, 0.5])
    assert est.predict(t).shape == (4, 4)


def test_predict_bad_time():
    est = MetastableChain().fit(chain_b())
    with pytest.raises(TypeError):
        est.predict(object())
    with pytest.raises(CriticalTimeScale):
        est.predict((1, 0, 1))


def test_classify():
    est = MetastableChain().fit(chain_b())
    assert est.classify((1, 0, 2)).critical == []


def test_repair_param(data_dir):
    with pytest.raises(ChainValidationError):
        MetastableChain().fit(data_dir / "chain_zero.json")
    est = MetastableChain(repair=True).fit(data_dir / "chain_zero.json")
    assert est.rho_ == 2


def test_verify():
    rep = MetastableChain().fit(chain_b()).verify((1, 0, 2), (0.4, 0.2, 0.1))
    assert rep.final_error <= 0.05 and rep.monotone


def test_bad_input():
    with pytest.raises(TypeError):
        MetastableChain().fit(42)
