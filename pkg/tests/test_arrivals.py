import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blmab.arrivals import (
    ArrivalRateProcess,
    TailModel,
    build_instance,
    build_rate_instance,
    resample_qualities,
    sample_best_arrival,
    truncated_cdf,
)
from blmab.errors import DomainError


def ks_distance(draws, cdf):
    """Max |empirical CDF - cdf| over rounds 1..T, where cdf[t] is F(t)."""
    T = len(cdf) - 1
    counts = np.bincount(draws, minlength=T + 1)[: T + 1]
    ecdf = np.cumsum(counts) / len(draws)
    return float(np.max(np.abs(ecdf[1:] - cdf[1:])))


def test_truncated_cdf_examples():
    assert truncated_cdf(TailModel("uniform", 4), 2) == 0.5
    expected = (1 - math.exp(-1)) / (1 - math.exp(-5))
    assert truncated_cdf(TailModel("subexp", 10, 0.5), 2) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(0.63640, abs=1e-5)
    assert truncated_cdf(TailModel("subpareto", 9, 1.0), 1) == pytest.approx(5 / 9, rel=1e-14)
    for model in (TailModel("subexp", 7, 2.0), TailModel("subpareto", 7, 0.3), TailModel("uniform", 7)):
        assert truncated_cdf(model, 7) == 1.0


@pytest.mark.parametrize("t", [0, 11, 2.5])
def test_truncated_cdf_range(t):
    with pytest.raises(DomainError):
        truncated_cdf(TailModel("uniform", 10), t)


def test_tail_model_validation():
    with pytest.raises(DomainError):
        TailModel("subexp", 10)
    with pytest.raises(DomainError):
        TailModel("subpareto", 10, -1.0)
    with pytest.raises(DomainError):
        TailModel("uniform", 10, 1.0)
    with pytest.raises(DomainError):
        TailModel("weibull", 10, 1.0)
    with pytest.raises(DomainError):
        TailModel("uniform", 0)


@pytest.mark.parametrize(
    "model",
    [TailModel("subexp", 500, 0.01), TailModel("subexp", 50, 3.0), TailModel("subpareto", 500, 0.25),
     TailModel("subpareto", 500, 2.0), TailModel("uniform", 37)],
)
def test_pmf_sums_to_one(model):
    pmf = model.pmf()
    assert len(pmf) == model.horizon
    assert np.all(pmf >= 0)
    assert abs(pmf.sum() - 1) <= 1e-12


@given(st.floats(0.001, 5.0), st.integers(2, 400))
def test_subexp_tail_bound_strict(lam, T):
    table = TailModel("subexp", T, lam).cdf_table()
    t = np.arange(1, T)
    bound = -np.expm1(-lam * t)
    assert np.all(table[1:T] >= bound)
    # the strict margin is about F(t) * exp(-lam T); float64 resolves it only
    # while that tail mass is well above machine epsilon
    if math.exp(-lam * T) > 1e-13:
        assert np.all(table[1:T] > bound)


@given(st.floats(0.05, 5.0), st.integers(3, 400))
def test_subpareto_tail_bound_strict(beta, T):
    table = TailModel("subpareto", T, beta).cdf_table()
    t = np.arange(2, T)
    assert np.all(table[2:T] > 1 - t ** (-beta))


def test_uniform_sampling_probabilities():
    rng = np.random.default_rng(3)
    draws = sample_best_arrival(TailModel("uniform", 4), rng, size=200_000)
    freq = np.bincount(draws, minlength=5)[1:] / len(draws)
    assert set(np.unique(draws)) == {1, 2, 3, 4}
    np.testing.assert_allclose(freq, 0.25, atol=0.005)


def test_large_lambda_arrives_first():
    model = TailModel("subexp", 10_000, 10.0)
    assert model.pmf()[0] >= 1 - math.exp(-10)
    rng = np.random.default_rng(0)
    assert np.mean(sample_best_arrival(model, rng, size=100_000) == 1) > 0.999


@pytest.mark.parametrize(
    "model", [TailModel("subexp", 1000, 0.01), TailModel("subpareto", 1000, 0.5), TailModel("uniform", 1000)]
)
def test_sampler_ks(model):
    rng = np.random.default_rng(11)
    draws = sample_best_arrival(model, rng, size=100_000)
    assert draws.min() >= 1 and draws.max() <= model.horizon
    assert ks_distance(draws, model.cdf_table()) <= 0.02


def test_scalar_sample_is_int():
    t = sample_best_arrival(TailModel("subexp", 100, 0.1), np.random.default_rng(0))
    assert isinstance(t, int) and 1 <= t <= 100


def test_build_instance_degenerate():
    inst = build_instance(TailModel("uniform", 1), np.random.default_rng(1))
    assert inst.n_arms == 1 and inst.best_arm == 0
    assert 0 <= inst.quality[0] <= 1


@settings(max_examples=30)
@given(st.integers(1, 300), st.integers(0, 2**32))
def test_build_instance_invariants(T, seed):
    inst = build_instance(TailModel("subpareto", T, 0.7), np.random.default_rng(seed)).validate()
    assert np.array_equal(inst.arrival, np.arange(1, T + 1))
    assert inst.quality.max() == inst.quality[inst.best_arm]
    assert np.all((inst.quality >= 0) & (inst.quality <= 1))


def test_build_instance_deterministic():
    a = build_instance(TailModel("subexp", 50, 0.2), np.random.default_rng(42))
    b = build_instance(TailModel("subexp", 50, 0.2), np.random.default_rng(42))
    assert a.best_arm == b.best_arm
    assert a.quality.tobytes() == b.quality.tobytes()


def test_resample_keeps_structure():
    rng = np.random.default_rng(5)
    inst = build_instance(TailModel("subexp", 200, 0.05), rng)
    seen = []
    for _ in range(50):
        sub = resample_qualities(inst, rng).validate()
        assert sub.best_arm == inst.best_arm
        assert np.array_equal(sub.arrival, inst.arrival)
        seen.append(sub.quality.tobytes())
    assert len(set(seen)) == 50


def test_epsilon_instance():
    inst = build_instance(TailModel("uniform", 20), np.random.default_rng(0), epsilon=0.1)
    assert inst.quality[inst.best_arm] == pytest.approx(0.6)
    assert np.sum(inst.quality == 0.5) == 19
    sub = resample_qualities(inst, np.random.default_rng(1))
    assert np.array_equal(sub.quality, inst.quality)


def test_rate_instance_linear_is_one_per_round():
    T = 30
    proc = ArrivalRateProcess.from_function(lambda t: t / T, T, T)
    inst = build_rate_instance(proc, np.random.default_rng(0)).validate()
    assert np.array_equal(inst.arrival, np.arange(1, T + 1))
    assert inst.best_arm == int(np.argmax(inst.quality))


def test_rate_instance_single_arm():
    proc = ArrivalRateProcess(np.array([0.0, 0.0, 1.0, 1.0]), 1)
    inst = build_rate_instance(proc, np.random.default_rng(0))
    assert inst.n_arms == 1 and inst.best_arm == 0 and inst.arrival[0] == 2


def test_rate_instance_rejects_bad_processes():
    rng = np.random.default_rng(0)
    with pytest.raises(DomainError):
        build_rate_instance(ArrivalRateProcess(np.array([0.0, 0.6, 0.5, 1.0]), 2), rng)
    with pytest.raises(DomainError):
        build_rate_instance(ArrivalRateProcess(np.array([0.0, 0.5, 0.9]), 2), rng)
    with pytest.raises(DomainError):
        build_rate_instance(ArrivalRateProcess(np.array([0.0, 1.0]), 3), rng)


def test_rate_best_arm_uniform_over_arms():
    from scipy.stats import chisquare

    M = 8
    proc = ArrivalRateProcess.from_function(lambda t: min(t / M, 1.0), 2 * M, M)
    rng = np.random.default_rng(17)
    best = [build_rate_instance(proc, rng).best_arm for _ in range(16_000)]
    counts = np.bincount(best, minlength=M)
    assert chisquare(counts).pvalue > 0.001


def test_rate_resample_moves_best_arm():
    proc = ArrivalRateProcess.from_function(lambda t: t / 10, 10, 10)
    rng = np.random.default_rng(2)
    inst = build_rate_instance(proc, rng)
    bests = {resample_qualities(inst, rng).best_arm for _ in range(50)}
    assert len(bests) > 1
