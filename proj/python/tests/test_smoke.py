import math

import numpy as np
import pytest

import mccpd


def test_eval_and_cores():
    m = mccpd.CPModel([1, 1], 1)
    m.set_core(0, np.array([[2.0]]))
    m.set_core(1, np.array([[3.0]]))
    assert mccpd.eval_cp(m, [0, 0]) == 6.0
    assert m([0, 0]) == 6.0
    assert m.core(1).shape == (1, 1)
    with pytest.raises(IndexError):
        m([0, 1])
    with pytest.raises(ValueError):
        m.set_core(0, np.zeros((2, 1)))


def test_f38_f39_values():
    f38 = mccpd.TensorOracle.f38([100] * 6)
    assert f38([0] * 6) == pytest.approx(5 / math.sqrt(6), rel=1e-14)
    f39 = mccpd.TensorOracle.f39([100] * 6)
    assert f39([49] * 6) == pytest.approx(5 + 6 * math.sin(10), rel=1e-14)


def test_dense_oracle_and_discrepancy():
    rng = np.random.default_rng(1)
    values = rng.uniform(-1, 1, size=(3, 4, 2))
    oracle = mccpd.TensorOracle.dense(values)
    assert oracle.dims == [3, 4, 2]
    assert oracle([2, 1, 0]) == values[2, 1, 0]
    model = mccpd.init_random_start([3, 4, 2], 2, 0.1, 7)
    approx = np.einsum(
        "ai,aj,ak->ijk", model.core(0), model.core(1), model.core(2)
    )
    expected = 0.5 * np.mean((approx - values) ** 2)
    assert mccpd.dense_global_discrepancy(model, oracle) == pytest.approx(expected, rel=1e-12)
    grads = mccpd.dense_global_gradient(model, oracle)
    local = mccpd.dense_local_gradient(model, oracle, 1, 3)
    assert np.allclose(grads[1][:, 3] * 4, local, rtol=0, atol=1e-15)


def test_local_system_and_inverse():
    model = mccpd.init_random_start([4, 4, 4], 3, 0.3, 2)
    oracle = mccpd.TensorOracle.f38([4, 4, 4])
    sys = mccpd.mc_local_system(model, oracle, 0, 1, ens_size=200, eta=1e-3)
    h = sys.hess
    assert np.allclose(h, h.T)
    assert np.min(np.linalg.eigvalsh(h)) >= 1e-3 * (1 - 1e-9)
    inv = mccpd.gauss_jordan_invert(h)
    assert np.max(np.abs(h @ inv - np.eye(3))) < 1e-9
    with pytest.raises(mccpd.SingularMatrixError):
        mccpd.gauss_jordan_invert(np.zeros((2, 2)))


def test_run_recovers_rank_one(tmp_path):
    target = mccpd.CPModel([4, 4, 4], 1)
    for s in range(3):
        target.set_core(s, np.linspace(0.6, 1.2, 4)[None, :])
    oracle = mccpd.TensorOracle.cp_synthetic(target)
    cfg = mccpd.SolverConfig()
    cfg.rank = 1
    cfg.ens_size = 200
    cfg.global_ens_size = 2000
    cfg.eta = 1e-8
    cfg.eps2 = 1e-14
    cfg.max_sweeps = 20
    cfg.threads = 1
    result = mccpd.run(oracle, cfg, record_initial=True)
    assert result["history"][0]["sweep"] == 0
    assert result["converged"]
    fitted = result["model"]
    assert mccpd.dense_global_discrepancy(fitted, oracle) < 1e-8

    path = tmp_path / "fit.cpd"
    mccpd.save_cpd(str(path), fitted)
    assert mccpd.load_cpd(str(path)) == fitted


def test_methods_share_update_identity():
    oracle = mccpd.TensorOracle.f38([5, 5, 5])
    start = mccpd.init_random_start([5, 5, 5], 2, 0.1, 3)
    cfg = mccpd.SolverConfig()
    cfg.rank = 2
    cfg.ens_size = 100
    cfg.threads = 1
    a = mccpd.run(oracle, cfg, initial=start)["model"]
    cfg.method = mccpd.Method.als
    b = mccpd.run(oracle, cfg, initial=start)["model"]
    for s in range(3):
        assert np.max(np.abs(a.core(s) - b.core(s))) <= 1e-10


def test_selftest_passes():
    results = mccpd.selftest()
    failed = [r["id"] for r in results if not r["passed"]]
    assert not failed
