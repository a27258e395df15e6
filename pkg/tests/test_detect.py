import math

import numpy as np
import pytest
from scipy import stats

from chtest import (
    AnomalyModel,
    ConfigError,
    DegenerateDistributionError,
    Ensemble,
    Gaussian1D,
    Hypothesis,
    NPConfig,
    enumerate_hypotheses,
    log_likelihood,
    log_likelihoods,
    lrt,
    pairwise_np,
    realize_deterministic_schedule,
    realize_random_schedule,
)
from chtest.detect import FAILURE, Decision, apportion, format_observations, pairwise_wins, parse_observations, read_observations
from chtest.montecarlo import draw_realizations, observe

N01 = Gaussian1D(0.0, 1.0)


def shift_model(A=1.0, B=0.0, s2=1.0):
    return AnomalyModel(2, 1, Gaussian1D(B, s2), Gaussian1D(A, s2))


def test_empty_schedule_scores_zero():
    model = AnomalyModel(4, 2, N01, Gaussian1D(1, 3))
    hyps = enumerate_hypotheses(4, 2)
    scores = log_likelihoods(model, hyps, np.zeros((0, 4)), [])
    np.testing.assert_array_equal(scores, np.zeros(len(hyps)))
    d = lrt(model, np.zeros((0, 4)), [], hyps)
    assert d.index == 0 and d.hypothesis == hyps[0]


def test_log_likelihood_matches_scipy():
    model = AnomalyModel(3, 1, Gaussian1D(1.0, 2.0), Gaussian1D(-1.0, 0.5))
    rows = np.array([[1.0, 2.0, 0.0], [0.5, -1.0, 3.0]])
    y = np.array([0.7, -2.2])
    h = Hypothesis((1,))
    mu = rows @ [1.0, -1.0, 1.0]
    var = (rows ** 2) @ [2.0, 0.5, 2.0]
    ref = stats.norm.logpdf(y, mu, np.sqrt(var)).sum()
    assert log_likelihood(model, h, rows, y) == pytest.approx(ref, abs=1e-12)


def test_additivity_of_duplicated_rows():
    model = AnomalyModel(3, 1, N01, Gaussian1D(2, 5))
    row = np.array([[0.3, 1.0, -2.0]])
    h = Hypothesis((2,))
    one = log_likelihood(model, h, row, [1.3])
    two = log_likelihood(model, h, np.vstack([row, row]), [1.3, 1.3])
    assert two == pytest.approx(2 * one, rel=1e-15)


def test_crossover_threshold():
    # N(0,100) beats N(0,1) exactly when |y| > sqrt(ln(100) * 100 / 99)
    model = AnomalyModel(2, 1, N01, Gaussian1D(0.0, 100.0))
    hyps = enumerate_hypotheses(2, 1)
    t = math.sqrt(math.log(100) * 100 / 99)
    for y in np.linspace(-5, 5, 201):
        if abs(abs(y) - t) < 1e-9:
            continue
        scores = log_likelihoods(model, hyps, [[1.0, 0.0]], [y])
        oracle = stats.norm.logpdf(y, 0, 10) > stats.norm.logpdf(y, 0, 1)
        assert (scores[0] > scores[1]) == oracle == (abs(y) > t)


def test_degenerate_row_named():
    model = AnomalyModel(3, 1, Gaussian1D(0.0, 0.0), N01)
    with pytest.raises(DegenerateDistributionError, match="row 2"):
        log_likelihoods(model, enumerate_hypotheses(3, 1), [[1.0, 0, 0], [0, 1.0, 0]], [0.1, 0.2])


def test_length_mismatch():
    model = shift_model()
    with pytest.raises(ConfigError):
        log_likelihoods(model, enumerate_hypotheses(2, 1), [[1.0, 0.0]], [1.0, 2.0])
    with pytest.raises(ConfigError):
        log_likelihoods(model, enumerate_hypotheses(2, 1), [[1.0, 0.0]], [math.nan])


def test_lrt_opposite_sign_row_sanity():
    A, B = 1.0, 0.0
    model = shift_model(A, B)
    hyps = enumerate_hypotheses(2, 1)
    rows = np.tile([1.0, -1.0], (200, 1))
    truth = Hypothesis((0,))
    rng = np.random.default_rng(8)
    correct = 0
    for _ in range(500):
        y = observe(rows, draw_realizations(model, truth, 200, rng))
        correct += lrt(model, rows, y, hyps).hypothesis == truth
    assert correct / 500 >= 0.99


def test_lrt_single_hypothesis():
    model = shift_model()
    h = Hypothesis((1,))
    assert lrt(model, [[1.0, 0.0]], [5.0], [h]).hypothesis == h
    assert pairwise_np(model, [[1.0, 0.0]], [5.0], [h]).hypothesis == h


def test_pairwise_agrees_with_lrt_random():
    rng = np.random.default_rng(21)
    for _ in range(1000):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(1, n))
        model = AnomalyModel(n, k, Gaussian1D(rng.normal(), rng.uniform(0.2, 3)),
                             Gaussian1D(rng.normal(), rng.uniform(0.2, 3)))
        hyps = enumerate_hypotheses(n, k)
        m = int(rng.integers(1, 6))
        rows = rng.normal(size=(m, n))
        y = rng.normal(0, 2, size=m)
        a, b = lrt(model, rows, y, hyps), pairwise_np(model, rows, y, hyps)
        assert not b.failed
        assert a == b


def test_pairwise_three_way_tie_fails():
    # all three single-anomaly hypotheses look identical through the all-ones row
    model = AnomalyModel(3, 1, N01, Gaussian1D(1.0, 2.0))
    hyps = enumerate_hypotheses(3, 1)
    rows = np.ones((2, 3))
    y = [0.4, 1.7]
    assert pairwise_np(model, rows, y, hyps) is FAILURE
    assert str(FAILURE) == "FAILURE"
    assert lrt(model, rows, y, hyps).index == 0


def test_pairwise_two_hypotheses_is_np_test():
    model = shift_model(2.0, 0.0)
    hyps = enumerate_hypotheses(2, 1)
    rows = np.array([[1.0, 0.0]])
    for y, thr, expected in [(1.5, 0.0, 0), (0.5, 0.0, 1), (1.5, 1.5, 1), (1.5, -3.0, 0)]:
        # log ratio for y is 2y - 2
        d = pairwise_np(model, rows, [y], hyps, NPConfig(log_threshold=thr))
        assert d.index == expected, (y, thr)


def test_pairwise_large_threshold_favours_later_index():
    model = AnomalyModel(3, 1, N01, Gaussian1D(3.0, 1.0))
    hyps = enumerate_hypotheses(3, 1)
    # equal scores and a large threshold: the later hypothesis wins every pairing
    d = pairwise_np(model, np.eye(3), [1.5, 1.5, 1.5], hyps, NPConfig(log_threshold=10.0))
    assert d.index == 2


def test_pairwise_negative_threshold_cycle():
    # 0 beats 1, 1 beats 2, 2 beats 0: nobody is unbeaten
    wins = pairwise_wins(np.array([0.0, 0.6, 1.2]), log_threshold=-1.0)
    assert wins[0, 1] and wins[1, 2] and wins[2, 0]
    assert not np.any(wins.sum(axis=1) == 2)


def test_npconfig_validation():
    with pytest.raises(ConfigError):
        NPConfig(log_threshold=math.inf)
    with pytest.raises(ConfigError):
        NPConfig(tie_rule="random")


def test_decision_str():
    assert str(Decision(2, Hypothesis((0, 2)))) == "SELECTED 1 3"


def test_row_permutation_invariance():
    rng = np.random.default_rng(5)
    model = AnomalyModel(5, 2, Gaussian1D(0, 1), Gaussian1D(0.8, 2))
    hyps = enumerate_hypotheses(5, 2)
    for _ in range(50):
        rows = rng.normal(size=(12, 5))
        truth = hyps[int(rng.integers(len(hyps)))]
        y = observe(rows, draw_realizations(model, truth, 12, rng))
        perm = rng.permutation(12)
        s1 = log_likelihoods(model, hyps, rows, y)
        s2 = log_likelihoods(model, hyps, rows[perm], y[perm])
        np.testing.assert_allclose(s1, s2, rtol=1e-12, atol=1e-10)
        assert lrt(model, rows, y, hyps) == lrt(model, rows[perm], y[perm], hyps)


def test_row_scaling_decision_invariance():
    rng = np.random.default_rng(6)
    model = AnomalyModel(4, 1, Gaussian1D(0, 1), Gaussian1D(1.0, 3))
    hyps = enumerate_hypotheses(4, 1)
    for _ in range(50):
        rows = rng.normal(size=(6, 4))
        scale = rng.uniform(0.1, 10, size=6) * rng.choice([-1, 1], size=6)
        truth = hyps[int(rng.integers(4))]
        x = draw_realizations(model, truth, 6, rng)
        d1 = lrt(model, rows, observe(rows, x), hyps)
        d2 = lrt(model, rows * scale[:, None], observe(rows * scale[:, None], x), hyps)
        assert d1 == d2


# -- schedules from ensembles -------------------------------------------------

def test_random_schedule_single_atom():
    ens = Ensemble.single([1.0, -1.0])
    s = realize_random_schedule(ens, 7, seed=0)
    np.testing.assert_array_equal(s.rows, np.tile([1.0, -1.0], (7, 1)))


def test_random_schedule_binomial():
    ens = Ensemble(np.eye(2), [0.5, 0.5])
    m = 10_000
    s = realize_random_schedule(ens, m, seed=31)
    count = s.rows[:, 0].sum()
    assert abs(count - m / 2) <= 3 * math.sqrt(m / 4)
    assert s == realize_random_schedule(ens, m, seed=31)


def test_apportionment():
    assert apportion([0.5, 0.5], 10).tolist() == [5, 5]
    assert apportion([1 / 3] * 3, 7).tolist() == [3, 2, 2]
    assert apportion([0.1, 0.2, 0.7], 4).tolist() == [0, 1, 3]
    rng = np.random.default_rng(0)
    for _ in range(200):
        w = rng.dirichlet(np.ones(int(rng.integers(1, 8))))
        m = int(rng.integers(1, 100))
        c = apportion(w, m)
        assert c.sum() == m
        assert np.all(np.abs(c - w * m) < 1)


def test_deterministic_schedule():
    ens = Ensemble(np.eye(3), [1 / 3] * 3)
    s = realize_deterministic_schedule(ens, 7)
    assert s.rows.sum(axis=0).tolist() == [3, 2, 2]
    assert s.metadata["atom_index"].tolist() == [0, 1, 2, 0, 1, 2, 0]
    single = realize_deterministic_schedule(Ensemble.single([2.0, 1.0]), 4)
    np.testing.assert_array_equal(single.rows, np.tile([2.0, 1.0], (4, 1)))
    with pytest.raises(ConfigError):
        realize_deterministic_schedule(ens, 2)


# -- observation files --------------------------------------------------------

def test_observation_round_trip(tmp_path):
    y = np.array([0.1, -3.5, 1e-300, 7.0])
    p = tmp_path / "obs.txt"
    p.write_text(format_observations(y))
    np.testing.assert_array_equal(read_observations(p), y)
    assert parse_observations("1\n\n2.5\n").tolist() == [1.0, 2.5]
    with pytest.raises(ConfigError, match="line 2"):
        parse_observations("1\nabc\n")
    with pytest.raises(ConfigError):
        parse_observations("inf\n")
