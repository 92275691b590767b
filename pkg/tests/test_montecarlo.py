import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dwp2m.montecarlo import (FACTOR_HI, FACTOR_LO, NOMINAL, TrialError, VariationSpec, keyed_normal, keyed_uniform,
                              load_spec, run_trials, sample, sample_batch)


def test_same_seed_same_sample():
    spec = VariationSpec(master_seed=7)
    assert sample(spec, 12) == sample(spec, 12)


def test_different_seed_differs():
    assert sample(VariationSpec(master_seed=1), 3) != sample(VariationSpec(master_seed=2), 3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**40), st.permutations(list(range(20))))
def test_order_independent(seed, order):
    spec = VariationSpec(trials=20, master_seed=seed)
    batch = sample_batch(spec, order)
    for j, t in enumerate(order):
        s = sample(spec, t)
        assert batch["m_tx"][j] == s.m_tx
        assert batch["m_r_acc_neg"][j] == s.m_r_acc_neg


def test_fields_independent():
    b = sample_batch(VariationSpec(trials=2000))
    assert abs(np.corrcoef(b["m_r_acc_pos"], b["m_r_acc_neg"])[0, 1]) < 0.1


def test_moments():
    spec = VariationSpec(trials=20000, master_seed=3)
    b = sample_batch(spec)
    assert np.mean(b["m_tx"]) == pytest.approx(1.0, abs=0.003)
    assert np.std(b["m_tx"]) == pytest.approx(spec.sigma_tx, rel=0.05)
    assert np.std(b["m_r_weight"]) == pytest.approx(spec.sigma_r, rel=0.05)


def test_zero_sigma_is_nominal():
    spec = VariationSpec.off(trials=5)
    s = sample(spec, 4)
    assert (s.m_tx, s.m_r_weight, s.m_jitter) == (1.0, 1.0, 1.0)
    assert NOMINAL.m_r_thr2 == 1.0


def test_factors_clipped():
    b = sample_batch(VariationSpec(sigma_tx=5.0, trials=500))
    assert b["m_tx"].min() == FACTOR_LO and b["m_tx"].max() == FACTOR_HI


def test_keyed_uniform_range_and_broadcast():
    u = keyed_uniform(0, np.arange(10000), 5)
    assert u.shape == (10000,)
    assert 0 < u.min() and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.01
    assert keyed_normal(1, 2, 3) == keyed_normal(1, 2, 3)


def test_bad_spec_and_index():
    with pytest.raises(ValueError):
        VariationSpec(sigma_r=-0.1)
    with pytest.raises(ValueError):
        VariationSpec(trials=0)
    with pytest.raises(IndexError):
        sample(VariationSpec(trials=3), 3)


def test_run_trials_parallel_matches_serial():
    spec = VariationSpec(trials=50)
    f = lambda t: sample(spec, t).m_tx * 2
    assert run_trials(spec, f, workers=4) == run_trials(spec, f)


def test_run_trials_reports_lowest_failing_trial():
    spec = VariationSpec(trials=40)

    def f(t):
        if t in (17, 31):
            raise ValueError("boom")
        return t

    for workers in (1, 4):
        with pytest.raises(TrialError) as exc:
            run_trials(spec, f, workers=workers)
        assert exc.value.trial_index == 17


def test_load_spec(tmp_path):
    f = tmp_path / "v.ini"
    f.write_text("[variation]\nsigma_tx = 0.1\ntrials = 20\n")
    assert load_spec(f, master_seed=9) == VariationSpec(sigma_tx=0.1, trials=20, master_seed=9)
    f.write_text("[variation]\nsigma_q = 0.1\n")
    with pytest.raises(ValueError):
        load_spec(f)
