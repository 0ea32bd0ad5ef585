import math

import numpy as np
import pytest

import beamalloc as ba

def test_waterfill_examples():
    np.testing.assert_allclose(ba.waterfill(np.array([1.0, 1.0]), 2.0), [1.0, 1.0])
    np.testing.assert_allclose(ba.waterfill(np.array([1.0, 3.0]), 1.0), [1.0, 0.0])


def test_pipeline_budget_and_rates():
    cfg = ba.SystemConfig()
    h = ba.channel(cfg, 7)
    assert h.shape == (7, 7) and np.iscomplexobj(h)
    pre = ba.make_zf(h)
    prob = ba.AllocationProblem(h, pre, cfg)
    demands = np.full(7, 400.0)
    for strategy in ("equal", "sumopt", "satisset", "joint"):
        r = ba.allocate(strategy, prob, demands)
        assert r.powers.min() >= 0.0
        assert r.powers.sum() <= cfg.p_max_w * (1 + 1e-9)
        np.testing.assert_allclose(r.rates, prob.rates(r.powers), rtol=1e-10)
        assert r.sum_rate == pytest.approx(r.rates.sum())


def test_feasibility_and_errors():
    g = np.eye(2)
    rep = ba.check_feasible(g, np.array([500.0, 500.0]), 1.0, 500.0, 10.0)
    assert rep.feasible
    np.testing.assert_allclose(rep.min_powers, [1.0, 1.0])
    with pytest.raises(ba.InvalidInput):
        ba.waterfill(np.array([-1.0]), 1.0)
    h = np.eye(2, dtype=complex)
    prob = ba.AllocationProblem(h, ba.make_zf(h), ba.SystemConfig())
    with pytest.raises(ba.InvalidConfig):
        ba.allocate("maxmin", prob, np.ones(2))
    assert issubclass(ba.InvalidConfig, ba.Error)


def test_metrics():
    assert ba.jain(np.array([1.0, 1.0, 1.0])) == pytest.approx(1.0)
    assert ba.jain(np.array([1.0, 0.0])) == pytest.approx(0.5)
    assert math.isfinite(ba.lambda_objective(3, 7, 900.0, 1000.0))


def test_campaign_is_deterministic(tmp_path):
    cfg = tmp_path / "small.cfg"
    cfg.write_text(
        "qos.xi_mbps = 300, 900\nrun.n_trials = 3\nrun.base_seed = 5\n"
        "run.strategies = equal, joint\nrun.precoders = zf\n"
    )
    a = ba.run_campaign(str(cfg), str(tmp_path / "a"))
    b = ba.run_campaign(str(cfg), str(tmp_path / "b"))
    assert len(a) == 4 and a == b
    for name in ("trials.csv", "summary.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    with pytest.raises(ba.InvalidConfig):
        bad = tmp_path / "bad.cfg"
        bad.write_text("run.strategies = maxmin\n")
        ba.run_campaign(str(bad))
