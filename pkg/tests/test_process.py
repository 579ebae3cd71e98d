import math
from collections import Counter
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from supercoupon import analytic as an
from supercoupon import exact as ex
from supercoupon import process as pr
from supercoupon.errors import CapacityError, NoValidMoveError, SafetyValveError, ValidationError
from supercoupon.process import (
    CollectionState,
    Model,
    ModelParams,
    StopRule,
    mark_round,
    replicate,
    replicate_uncollected,
    run_iid,
    run_rw,
    rw_step,
    sample_N_k,
    sample_N_path,
    trajectory,
)
from supercoupon.stats import summarize


def mean_se(x):
    x = np.asarray(x, dtype=float)
    return x.mean(), x.std(ddof=1) / math.sqrt(x.size)


def test_params_validation():
    ModelParams(5, 3, 2)
    for bad in [(5, 6, 2), (5, 3, 4), (5, 3, 0), (0, 0, 0)]:
        with pytest.raises(ValidationError):
            ModelParams(*bad)
    with pytest.raises(ValidationError):
        ModelParams(5.0, 3, 2)
    assert ModelParams(10, 4, 2).m == 45 and ModelParams(10, 4, 2).per_round == 6


def test_stop_rule():
    assert StopRule.all().target(45) == 45
    assert StopRule.fraction(0.25).target(100) == 75
    assert StopRule.fraction(0.1).target(10) == 9
    assert StopRule.fraction(0.3).target(7) == 5  # ceil(4.9)
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(ValidationError):
            StopRule.fraction(bad)


def test_mark_round_examples():
    state = CollectionState(ModelParams(4, 3, 2))
    assert mark_round(state, (0, 1, 2)) == 3
    assert mark_round(state, (0, 1, 2)) == 0
    assert mark_round(state, (1, 2, 3)) == 2
    assert state.count == 5 == state.popcount()
    assert state.uncollected == 1
    assert not state.is_collected(0 + 3 + 3 - 3)  # {0,3}: C(0,1)+C(3,2) = 3
    with pytest.raises(ValidationError):
        mark_round(state, (0, 1))
    with pytest.raises(ValidationError):
        mark_round(state, (0, 1, 4))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12).flatmap(lambda n: st.integers(1, n).flatmap(
    lambda r: st.tuples(st.just(n), st.just(r), st.integers(1, r)))), st.integers(0, 2**32))
def test_mark_round_invariants(p, seed):
    params = ModelParams(*p)
    state = CollectionState(params)
    rng = np.random.default_rng(seed)
    previous = 0
    for h in trajectory(params, Model.IID, 15, rng):
        gain = mark_round(state, h)
        assert 0 <= gain <= params.per_round
        assert state.count == previous + gain == state.popcount()
        previous = state.count
        for sub in combinations(h, params.s):
            from supercoupon.combinat import rank_colex
            assert state.is_collected(rank_colex(sub, params.n))


def test_run_iid_trivial_cases():
    for n, s in [(5, 2), (7, 7), (1, 1)]:
        for seed in range(5):
            assert run_iid(ModelParams(n, n, s), StopRule.all(), seed).rounds == 1
    assert run_iid(ModelParams(2, 2, 2), StopRule.all(), 0).rounds == 1


def test_run_result_fields():
    res = run_iid(ModelParams(6, 3, 2), StopRule.fraction(0.5), 3, seed=pr.SeedRecord(3, 0))
    assert res.rounds >= 1 and res.model is Model.IID and res.rule.kind == "fraction"
    assert res.seed == pr.SeedRecord(3, 0)


def test_iid_mean_n3_r2_s1():
    rounds = replicate(ModelParams(3, 2, 1), StopRule.all(), Model.IID, 10**5, seed=11)
    mean, se = mean_se(rounds)
    assert abs(mean - 2.5) < 3 * se


def test_rounds_lower_bound():
    params = ModelParams(9, 4, 2)
    rounds = replicate(params, StopRule.all(), Model.IID, 2000, seed=5)
    assert rounds.min() >= math.ceil(params.m / params.per_round)


def test_rw_step_examples():
    for seed in range(5):
        assert rw_step((0,), 2, seed) == (1,)
    with pytest.raises(NoValidMoveError):
        rw_step((0, 1, 2), 3, 0)


def test_rw_step_uniform_over_neighbours():
    rng = np.random.default_rng(77)
    steps = 10**5
    counts = Counter(rw_step((0, 1), 4, rng) for _ in range(steps))
    assert set(counts) == {(0, 2), (0, 3), (1, 2), (1, 3)}
    se = math.sqrt(0.25 * 0.75 / steps)
    for c in counts.values():
        assert abs(c / steps - 0.25) < 5 * se


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 40).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n - 1))),
       st.integers(0, 2**32))
def test_rw_step_keeps_r_minus_one(p, seed):
    n, r = p
    rng = np.random.default_rng(seed)
    h = tuple(sorted(rng.choice(n, r, replace=False).tolist()))
    nxt = rw_step(h, n, rng)
    assert len(nxt) == r and list(nxt) == sorted(nxt)
    assert len(set(nxt) & set(h)) == r - 1


def test_rw_trajectory_validity():
    params = ModelParams(20, 6, 2)
    path = trajectory(params, Model.RW, 500, 9)
    for a, b in zip(path, path[1:]):
        assert len(set(a) & set(b)) == params.r - 1


def test_run_rw_two_state_chain():
    rounds = replicate(ModelParams(2, 1, 1), StopRule.all(), Model.RW, 500, seed=1)
    assert np.all(rounds == 2)


def test_run_rw_requires_outside_coupon():
    with pytest.raises(ValidationError):
        run_rw(ModelParams(4, 4, 2), StopRule.all(), 0)


@pytest.mark.parametrize("model", [Model.IID, Model.RW])
def test_kernel_matches_python_level_replay(model):
    params = ModelParams(12, 4, 2)
    for seed in range(10):
        res = pr.run(params, StopRule.all(), model, seed)
        path = trajectory(params, model, res.rounds, seed)
        state = CollectionState(params)
        done = None
        for t, h in enumerate(path, start=1):
            mark_round(state, h)
            if state.count == params.m and done is None:
                done = t
        assert done == res.rounds


def test_python_rw_step_matches_kernel_stream():
    params = ModelParams(15, 5, 2)
    path = trajectory(params, Model.RW, 50, 4)
    rng = np.random.default_rng(4)
    from supercoupon.combinat import sample_r_subset
    h = sample_r_subset(15, 5, rng)
    replay = [h]
    for _ in range(49):
        h = rw_step(h, 15, rng)
        replay.append(h)
    assert replay == path


def test_sample_N_k_basics():
    params = ModelParams(10, 3, 2)
    assert sample_N_k(params, 0, Model.IID, 1) == 45
    res = run_iid(params, StopRule.all(), 8)
    assert sample_N_k(params, res.rounds, Model.IID, 8) == 0
    assert sample_N_k(params, res.rounds + 10, Model.IID, 8) == 0
    assert sample_N_k(params, res.rounds - 1, Model.IID, 8) > 0
    with pytest.raises(ValidationError):
        sample_N_k(params, -1, Model.IID, 1)


@pytest.mark.parametrize("model", [Model.IID, Model.RW])
def test_sample_N_path_is_monotone_and_consistent(model):
    params = ModelParams(10, 4, 2)
    ks = list(range(0, 60, 3))
    for seed in range(5):
        path = sample_N_path(params, ks, model, seed)
        assert np.all(np.diff(path) <= 0)
        for k, v in zip(ks[::4], path[::4]):
            assert sample_N_k(params, k, model, seed) == v


def test_sample_N_k_mean_n10_r3_s2_k30():
    params = ModelParams(10, 3, 2)
    values = replicate_uncollected(params, [30], Model.IID, 10**5, seed=30)[:, 0]
    mean, se = mean_se(values)
    theta = 8 / 120
    assert abs(mean - 45 * (1 - theta) ** 30) < 4 * se


@pytest.mark.parametrize("n, r, s, ks", [
    (8, 3, 1, [1, 3, 8]),
    (12, 4, 2, [5, 15, 40]),
    (15, 5, 3, [10, 60, 150]),
    (30, 6, 2, [20, 100, 250]),
])
def test_moment_identities_on_grid(n, r, s, ks):
    params = ModelParams(n, r, s)
    draws = replicate_uncollected(params, ks, Model.IID, 20000, seed=n * 100 + r).astype(float)
    for j, k in enumerate(ks):
        mean, se = mean_se(draws[:, j])
        assert abs(mean - an.expected_Nk(n, r, s, k)) <= 4 * se + 1e-9
        sq_mean, sq_se = mean_se(draws[:, j] ** 2)
        bounds = an.moment_bounds(n, r, s, k, 2)
        assert bounds.lower - 4 * sq_se <= sq_mean
        # the upper sandwich side is only asymptotic; check the exact value instead
        assert abs(sq_mean - an.second_moment(n, r, s, k)) <= 4 * sq_se + 1e-9


def test_stochastic_domination():
    n = 8
    big = replicate(ModelParams(n, 4, 2), StopRule.all(), Model.IID, 4000, seed=1)
    small = replicate(ModelParams(n, 2, 2), StopRule.all(), Model.IID, 4000, seed=2)
    a, b = summarize(big), summarize(small)
    assert a.mean <= b.mean + 4 * math.hypot(a.stderr, b.stderr)


def test_rw_r_equals_s_matches_cover_time():
    rounds = replicate(ModelParams(5, 2, 2), StopRule.all(), Model.RW, 20000, seed=3)
    mean, se = mean_se(rounds - 1)
    assert abs(mean - float(ex.exact_cover_time(5, 2))) < 4 * se


def test_cover_time_below_matthews_upper():
    rounds = replicate(ModelParams(6, 2, 2), StopRule.all(), Model.RW, 20000, seed=4)
    mean, se = mean_se(rounds - 1)
    assert mean <= ex.matthews_bounds(6, 2).upper + 4 * se


def test_rw_n20_r10_s2_ratio_recorded():
    params = ModelParams(20, 10, 2)
    rounds = replicate(params, StopRule.all(), Model.RW, 200, seed=20)
    ratio = rounds.mean() / an.predicted_T_rw(20, 10, 2).value
    assert math.isfinite(ratio) and ratio > 0


@pytest.mark.parametrize("model", [Model.IID, Model.RW])
def test_thread_count_does_not_change_results(model):
    params = ModelParams(14, 4, 2)
    rule = StopRule.fraction(0.2)
    serial = replicate(params, rule, model, 300, seed=99, threads=1)
    threaded = replicate(params, rule, model, 300, seed=99, threads=4)
    assert np.array_equal(serial, threaded)
    again = replicate(params, rule, model, 300, seed=99, threads=3)
    assert np.array_equal(serial, again)
    other = replicate(params, rule, model, 300, seed=100, threads=1)
    assert not np.array_equal(serial, other)


def test_replicate_results_carry_seed_records():
    results = pr.replicate_results(ModelParams(6, 3, 2), StopRule.all(), "iid", 5, seed=42)
    assert [r.seed for r in results] == [pr.SeedRecord(42, i) for i in range(5)]
    direct = run_iid(ModelParams(6, 3, 2), StopRule.all(), pr.replication_rng(42, 3))
    assert direct.rounds == results[3].rounds


def test_fraction_rule_stops_no_later_than_all():
    params = ModelParams(16, 4, 2)
    for seed in range(10):
        part = pr.run(params, StopRule.fraction(0.3), Model.IID, seed).rounds
        full = pr.run(params, StopRule.all(), Model.IID, seed).rounds
        assert part <= full
        left = sample_N_k(params, part, Model.IID, seed)
        assert params.m - left >= StopRule.fraction(0.3).target(params.m)
        assert params.m - sample_N_k(params, part - 1, Model.IID, seed) < \
            StopRule.fraction(0.3).target(params.m)


def test_safety_valve(monkeypatch):
    monkeypatch.setattr(pr, "SAFETY_FACTOR", 1e-9)
    with pytest.raises(SafetyValveError):
        run_iid(ModelParams(30, 2, 2), StopRule.all(), 0)


def test_seed_and_thread_validation(monkeypatch):
    params = ModelParams(5, 2, 1)
    with pytest.raises(ValidationError):
        replicate(params, StopRule.all(), "iid", 3, seed=-1)
    with pytest.raises(ValidationError):
        replicate(params, StopRule.all(), "iid", 0, seed=1)
    with pytest.raises(ValidationError):
        replicate(params, StopRule.all(), "iid", 3, seed=1, threads=0)
    monkeypatch.setenv("SUPERCOUPON_THREADS", "3")
    assert pr.default_threads() == 3


def test_capacity_guard(monkeypatch):
    monkeypatch.setattr(pr, "MAX_SUPER_COUPONS", 10)
    with pytest.raises(CapacityError):
        CollectionState(ModelParams(6, 3, 2))
