"""Smoke tests for the python bindings: worked values and basic plumbing."""

import math

import pytest

import seqstop as sq


def test_prior_and_condense():
    prior = sq.Prior.known([0.5, 0.3, 0.2])
    assert len(prior) == 3
    assert prior[0] == 0.5

    state = sq.CountState.from_levels(
        [sq.FrequencyLevel(10, 1), sq.FrequencyLevel(3, 2), sq.FrequencyLevel(2, 1)]
    )
    agg = sq.condense(state, 3)
    assert [(l.count, l.multiplicity) for l in agg.head] == [(10, 1), (3, 1)]
    assert agg.residual == 5


def test_exact_posterior_worked_example():
    prior = sq.Prior.known([0.5, 0.3, 0.2])
    state = sq.CountState.from_levels([sq.FrequencyLevel(3, 1), sq.FrequencyLevel(1, 1)])
    got = sq.exact_posterior(prior, state).p_mode
    assert got == pytest.approx(0.0625 / 0.0878, rel=1e-9)


def test_tail_sums():
    assert sq.tail_sum([0.3, 0.2], cap=2, head_tie_count=1, residual=2) == pytest.approx(0.25)
    assert sq.tilde_tail_sum([0.3, 0.2], cap=2, head_tie_count=1, residual=2) == pytest.approx(
        0.185
    )


def test_aggregated_matches_exact_at_full_aggregation():
    prior = sq.Prior.known([0.4, 0.3, 0.2, 0.1])
    state = sq.CountState.from_counts([5, 3, 2, 1])
    exact = sq.exact_posterior(prior, state).p_mode
    agg = sq.aggregated_posterior(prior, sq.condense(state, 4)).p_mode
    assert agg == pytest.approx(exact, rel=1e-9)


def test_rates_worked_examples():
    truth = sq.Prior.candidate([0.51, 0.10, 0.10, 0.10, 0.10, 0.09])
    other = sq.Prior.candidate([0.49, 0.48, 0.03])
    hyper = sq.HyperPrior([truth, other])
    assert sq.rate_uncertain(truth, hyper, 2).rate == pytest.approx(555.22, rel=0.005)
    assert sq.rate_prior_free(truth).rate == pytest.approx(6.64, rel=0.005)
    assert sq.rate_known(sq.Prior.known([0.5, 0.2, 0.2, 0.1]), 3).rate == pytest.approx(
        1.0 / (0.3 * math.log(2.5)), rel=1e-9
    )


def test_policy_run_on_recorded_tokens():
    prior = sq.Prior.known([0.9, 0.1])
    out = sq.run_policy([7, 7, 7], delta=0.2, aggregation=2, prior=prior)
    assert out.stop_time == 1
    assert out.chosen == 7
    assert not out.truncated


def test_k2_and_asc():
    assert sq.k2_threshold(0.6, 0.05) == 8
    state = sq.CountState.from_levels([sq.FrequencyLevel(1, 1)])
    assert sq.asc_confidence(state) == pytest.approx(0.75)
    assert sq.asc_stop(state, 0.3)


def test_seeded_trial_is_reproducible():
    truth = sq.Prior.known([0.5, 0.2, 0.1, 0.1, 0.05, 0.03, 0.01, 0.01])
    a = sq.run_policy_sampled(truth, delta=0.1, aggregation=3, prior=truth, seed=9)
    b = sq.run_policy_sampled(truth, delta=0.1, aggregation=3, prior=truth, seed=9)
    assert (a.stop_time, a.chosen) == (b.stop_time, b.chosen)


def test_model_violation_raises():
    prior = sq.Prior.known([0.6, 0.4])
    state = sq.CountState.from_counts([1, 1, 1])
    with pytest.raises(sq.ModelViolationError):
        sq.exact_posterior(prior, state)
