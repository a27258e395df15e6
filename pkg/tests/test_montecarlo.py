import math

import numpy as np
import pytest
from scipy import stats

from chtest import (
    AnomalyModel,
    BipartiteDesign,
    ConfigError,
    DegenerateDistributionError,
    Ensemble,
    EnsembleDesign,
    ErrorCurvePoint,
    FixedDesign,
    Gaussian1D,
    Hypothesis,
    SeparateDesign,
    TrialPlan,
    empirical_exponent,
    enumerate_hypotheses,
    error_curve,
    simulate_trial,
)
from chtest.montecarlo import (
    CURVE_HEADER,
    draw_realizations,
    draw_truth,
    format_curve,
    plot_script,
    trial_rng,
    wilson_interval,
)

N01 = Gaussian1D(0.0, 1.0)


class CountingRng:
    """Wraps a Generator and records every standard_normal request."""

    def __init__(self, seed):
        self._rng = np.random.default_rng(seed)
        self.requests = []

    def standard_normal(self, size):
        self.requests.append(size)
        return self._rng.standard_normal(size)


def test_draw_count_accounting():
    model = AnomalyModel(5, 2, N01, Gaussian1D(1, 4))
    rng = CountingRng(0)
    x = draw_realizations(model, Hypothesis((1, 3)), 11, rng)
    assert rng.requests == [(5, 11)]
    assert x.shape == (5, 11)
    # every column is a fresh draw: no two columns coincide
    assert len({tuple(c) for c in x.T}) == 11


def test_realization_parameters():
    model = AnomalyModel(3, 1, Gaussian1D(8, 1), Gaussian1D(0, 4))
    x = draw_realizations(model, Hypothesis((2,)), 200_000, np.random.default_rng(1))
    np.testing.assert_allclose(x.mean(axis=1), [8, 8, 0], atol=0.02)
    np.testing.assert_allclose(x.var(axis=1), [1, 1, 4], rtol=0.02)


def test_simulate_trial_overwhelming_separation():
    model = AnomalyModel(4, 1, N01, Gaussian1D(1e6, 1.0))
    truth = Hypothesis((2,))
    rows = np.tile(np.eye(4), (3, 1))
    assert simulate_trial(model, truth, rows, "lrt", seed=0)
    assert simulate_trial(model, truth, rows, "pairwise_np", seed=0)


def test_simulate_trial_zero_budget():
    model = AnomalyModel(3, 1, N01, Gaussian1D(1.0, 1.0))
    empty = np.zeros((0, 3))
    assert simulate_trial(model, Hypothesis((0,)), empty, seed=1)
    assert not simulate_trial(model, Hypothesis((1,)), empty, seed=1)


def test_simulate_trial_deterministic():
    model = AnomalyModel(5, 1, N01, Gaussian1D(0.3, 1.5))
    rows = np.random.default_rng(0).normal(size=(4, 5))
    outcomes = [simulate_trial(model, Hypothesis((3,)), rows, seed=s) for s in range(40)]
    again = [simulate_trial(model, Hypothesis((3,)), rows, seed=s) for s in range(40)]
    assert outcomes == again
    assert 0 < sum(outcomes) < 40


def test_trial_streams_are_independent_of_budget_set():
    a = trial_rng(7, 50, 3).standard_normal(4)
    b = trial_rng(7, 50, 3).standard_normal(4)
    c = trial_rng(7, 51, 3).standard_normal(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_uniform_truth_chi_square():
    hyps = enumerate_hypotheses(5, 1)
    counts = np.zeros(5)
    for t in range(10_000):
        counts[hyps.index(draw_truth(hyps, trial_rng(2024, 30, t)))] += 1
    assert stats.chisquare(counts).pvalue > 0.001


def test_plan_validation():
    model = AnomalyModel(3, 1, N01, Gaussian1D(1, 1))
    with pytest.raises(ConfigError):
        TrialPlan(model, SeparateDesign(), (10, 5), 10)
    with pytest.raises(ConfigError):
        TrialPlan(model, SeparateDesign(), (5, 10), 0)
    with pytest.raises(ConfigError):
        TrialPlan(model, SeparateDesign(), (5,), 10, detector="bayes")
    with pytest.raises(ConfigError):
        EnsembleDesign(Ensemble.single([1, 0, 0]), regime="adaptive")


def test_error_curve_reproducible_and_budget_local():
    model = AnomalyModel(6, 1, N01, Gaussian1D(0.0, 9.0))
    plan = TrialPlan(model, BipartiteDesign(d=3), (4, 8, 12), trials=60, master_seed=11)
    a, b = error_curve(plan), error_curve(plan)
    assert a == b
    # dropping a budget leaves the others untouched
    sub = error_curve(TrialPlan(model, BipartiteDesign(d=3), (8,), trials=60, master_seed=11))
    assert sub[0] == a[1]
    assert error_curve(plan, workers=2) == a


def test_error_curve_points_well_formed():
    model = AnomalyModel(4, 1, N01, Gaussian1D(1.0, 1.0))
    for design in (SeparateDesign(), FixedDesign(np.eye(4)),
                   EnsembleDesign(Ensemble(np.eye(4), [0.25] * 4), "random"),
                   EnsembleDesign(Ensemble(np.eye(4), [0.25] * 4), "deterministic")):
        pts = error_curve(TrialPlan(model, design, (0, 4, 16), trials=80, master_seed=3))
        for p in pts:
            assert 0 <= p.ci_low <= p.error_rate <= p.ci_high <= 1
            assert p.errors == round(p.error_rate * p.trials)
        # m=0 guesses the first hypothesis: error near 3/4
        assert 0.6 < pts[0].error_rate < 0.9


class RecordingDesign:
    name = "recording"

    def __init__(self):
        self.calls = 0

    def realize(self, n, m, rng):
        self.calls += 1
        return np.eye(n)[rng.integers(n, size=m)]


def test_freeze_design_realizes_once_per_budget():
    model = AnomalyModel(6, 1, N01, Gaussian1D(0.0, 9.0))
    frozen = RecordingDesign()
    error_curve(TrialPlan(model, frozen, (4, 5), trials=30, master_seed=1, freeze_design=True))
    assert frozen.calls == 2
    fresh = RecordingDesign()
    error_curve(TrialPlan(model, fresh, (4, 5), trials=30, master_seed=1))
    assert fresh.calls == 60


def test_error_curve_reports_trial_identity():
    model = AnomalyModel(3, 1, Gaussian1D(0.0, 0.0), N01)
    plan = TrialPlan(model, FixedDesign(np.array([[1.0, 0, 0]])), (2,), trials=3)
    with pytest.raises(DegenerateDistributionError, match="m=2, trial=0"):
        error_curve(plan)


def test_indistinguishable_limit():
    L = 3
    model = AnomalyModel(L, 1, N01, Gaussian1D(1e-7, 1.0))
    pts = error_curve(TrialPlan(model, SeparateDesign(), (6,), trials=3000, master_seed=5))
    lo, hi = pts[0].ci_low, pts[0].ci_high
    assert lo <= 1 - 1 / L <= hi


def test_wilson_interval():
    lo, hi = wilson_interval(0, 1000)
    assert lo == 0.0 and 0.003 < hi < 0.004
    lo, hi = wilson_interval(1, 1000)
    # closed-form Wilson score interval
    z, n, p = stats.norm.ppf(0.975), 1000, 0.001
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / (1 + z * z / n)
    assert lo == pytest.approx(centre - half, abs=1e-12)
    assert hi == pytest.approx(centre + half, abs=1e-12)


def point(m, rate, trials=1000):
    return ErrorCurvePoint(m, trials, round(rate * trials), rate, rate, rate)


def test_empirical_exponent_exact():
    pts = [point(m, math.exp(-0.1 * m)) for m in range(10, 60, 10)]
    fit = empirical_exponent(pts)
    assert fit.slope == pytest.approx(0.1, abs=1e-12)
    assert fit.stderr < 1e-12


def test_empirical_exponent_drops_zero_points():
    pts = [point(m, math.exp(-0.2 * m)) for m in (5, 10, 15)] + [point(20, 0.0)]
    assert empirical_exponent(pts).slope == pytest.approx(0.2, abs=1e-12)
    with pytest.raises(ConfigError):
        empirical_exponent([point(m, 0.0) for m in (5, 10, 15)])


def test_curve_csv_and_plot_script():
    pts = [ErrorCurvePoint(10, 100, 3, 0.03, 0.01, 0.08)]
    text = format_curve(pts, "separate", "lrt")
    assert text.splitlines() == [CURVE_HEADER, "10,separate,lrt,100,3,0.03,0.01,0.08"]
    script = plot_script("curve.csv")
    assert "'curve.csv'" in script and "'curve.png'" in script
    compile(script, "plot_curve.py", "exec")
