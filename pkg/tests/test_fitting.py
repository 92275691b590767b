import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from dwp2m.fitting import (F1_GRID, FitError, FitModel, Scatter, build_fit_model, bin_stats, eval_f1, eval_f2,
                           f1_derivative, f2_derivative, fit_curve, lower_envelope, sweep_f1, sweep_f2,
                           worst_case_spread)
from dwp2m.montecarlo import VariationSpec


def _scatter(x, y):
    x = np.asarray(x, float)
    return Scatter(x, np.zeros(x.size, int), np.asarray(y, float))


def test_cubic_recovered_exactly():
    x = np.linspace(0, 1, 9)
    c = np.array([0.1, -0.4, 2.0, 0.3])
    f = fit_curve(_scatter(x, P.polyval(x, c)), 3)
    np.testing.assert_allclose(f.coeffs, c, atol=1e-10)
    assert f.rmse < 1e-12


def test_knee_anchored_fit():
    x = np.linspace(0, 1, 11)
    y = np.where(x >= 0.2, 3 * (x - 0.2) ** 2, 0.0)
    f = fit_curve(_scatter(x, y), 3, knee=0.2)
    assert f.rmse < 1e-12
    assert f.coeffs[0] == 0.0


def test_too_few_points_raises():
    with pytest.raises(FitError, match="grid"):
        fit_curve(_scatter([0.0, 0.5, 1.0], [0, 1, 2]), 3)


def test_bin_stats():
    c, m, s, n = bin_stats(_scatter([0, 0, 1, 1], [1.0, 3.0, 5.0, 5.0]))
    np.testing.assert_array_equal(c, [0, 1])
    np.testing.assert_array_equal(m, [2, 5])
    np.testing.assert_array_equal(s, [1, 0])
    np.testing.assert_array_equal(n, [2, 2])


def test_lower_envelope_below_mean():
    sc = sweep_f2(spec=VariationSpec(trials=200))
    env = lower_envelope(sc)
    mean = fit_curve(sc)
    xs = np.unique(sc.x)
    assert np.all(P.polyval(xs, env.coeffs) <= P.polyval(xs, mean.coeffs) + 1e-12)
    with pytest.raises(FitError):
        lower_envelope(sweep_f2(spec=VariationSpec(trials=50)))


def test_f1_sweep_zero_and_range():
    sc = sweep_f1("hybrid", spec=VariationSpec(trials=100))
    assert np.all(sc.y[sc.x == 0] == 0)
    assert sc.y.max() <= 2.0
    with pytest.raises(ValueError):
        sweep_f1("pmos")


def test_nominal_sweep_has_zero_spread():
    for tag in ("cmos", "mdw", "hybrid"):
        assert worst_case_spread(sweep_f1(tag, spec=VariationSpec.off(trials=3))) == pytest.approx(0, abs=1e-12)


def test_f2_antisymmetric_about_half():
    sc = sweep_f2(spec=VariationSpec.off())
    c, m, _, _ = bin_stats(sc)
    np.testing.assert_allclose(m + m[::-1], 1.0, atol=1e-3)


def test_fit_model_roundtrip(tmp_path, hybrid_fit):
    f = tmp_path / "fit.json"
    hybrid_fit.save(f)
    assert FitModel.load(f) == hybrid_fit
    assert f.read_text() == hybrid_fit.to_json()
    with pytest.raises(ValueError, match="schema"):
        FitModel.from_json('{"schema": "other"}')


def test_fit_model_deterministic(hybrid_fit):
    assert build_fit_model("hybrid").to_json() == hybrid_fit.to_json()


def test_eval_f1_behaviour(hybrid_fit):
    assert eval_f1(hybrid_fit, 0.0) == (0.0, 0.0)
    assert eval_f1(hybrid_fit, hybrid_fit.f1_knee * 0.5)[0] == 0.0
    m, s = eval_f1(hybrid_fit, F1_GRID)
    # the range is normalized to the strongest (fully parallel) setting, above d_hybrid = 0.5
    assert np.all(np.diff(m) >= -1e-9) and 0.5 < m[-1] < 1.0
    with pytest.raises(ValueError):
        eval_f1(hybrid_fit, 1.2)


def test_eval_f2_behaviour(hybrid_fit):
    d = np.linspace(-1, 1, 41)
    assert np.all(eval_f2(hybrid_fit, d, "lower") <= eval_f2(hybrid_fit, d, "mean") + 1e-12)
    assert eval_f2(hybrid_fit, 0.0) == pytest.approx(0.5, abs=0.01)
    with pytest.raises(ValueError):
        eval_f2(hybrid_fit, 0.0, "upper")
    with pytest.raises(ValueError):
        eval_f2(hybrid_fit, -1.5)


def test_derivatives_match_finite_differences(hybrid_fit):
    h = 1e-6
    for x in (0.5, 0.8):
        fd = (eval_f1(hybrid_fit, x + h)[0] - eval_f1(hybrid_fit, x - h)[0]) / (2 * h)
        assert f1_derivative(hybrid_fit, x) == pytest.approx(fd, rel=1e-5)
    for d in (-0.4, 0.3):
        fd = (eval_f2(hybrid_fit, d + h, "lower") - eval_f2(hybrid_fit, d - h, "lower")) / (2 * h)
        assert f2_derivative(hybrid_fit, d) == pytest.approx(fd, rel=1e-5)
