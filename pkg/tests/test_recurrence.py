import itertools
import math

import numpy as np
import pytest

from reclab import (
    BernoulliMeasure,
    ConditioningError,
    CylinderContext,
    HorizonCapError,
    InvalidInputError,
    MarkovMeasure,
    PreconditionError,
    RecurrenceSpec,
    SupportExitWarning,
    XorCoupledMeasure,
    count_hits,
    cylinder_context,
    gap_profile,
    gap_profile_general,
    hitting_time,
    horizon_N,
    kappa,
    minimal_feasible_lag,
    principal_period,
    rho,
    thue_morse_prefix,
)
from reclab.recurrence import horizon_cap


def count_hits_oracle(path, word, spec, n_horizon):
    """Literal double loop over k and lag indices."""
    word = tuple(word)
    total = 0
    for k in range(1, n_horizon + 1):
        if all(
            tuple(path[di * k : di * k + len(word)]) == word for di in spec.d
        ):
            total += 1
    return total


def test_spec_validation():
    with pytest.raises(InvalidInputError):
        RecurrenceSpec((2, 1))
    with pytest.raises(InvalidInputError):
        RecurrenceSpec((0, 1))
    with pytest.raises(InvalidInputError):
        RecurrenceSpec((1,), t=0.0)
    spec = RecurrenceSpec.from_config({"d": [1, 2], "t": 1.0})
    assert spec.ell == 2 and spec.d_max == 2


@pytest.mark.parametrize(
    "r, d, expected",
    [(1, (1, 2, 3), 1), (2, (1, 2), 2), (6, (2, 3), 6), (10, (1,), 10)],
)
def test_kappa_examples(r, d, expected):
    k = kappa(r, RecurrenceSpec(d))
    assert k == expected
    assert 1 <= k <= r
    assert all(di * k % r == 0 for di in d)


@pytest.mark.parametrize(
    "word, d, expected",
    [
        ([1] * 8, (1, 2), 1),
        ([1, 0] * 4, (1, 2), 2),
        ([1, 0] * 4, (1, 3), 2),
    ],
)
def test_minimal_feasible_lag_examples(word, d, expected):
    assert minimal_feasible_lag(word, RecurrenceSpec(d)) == expected


def test_minimal_feasible_lag_equals_kappa_exhaustively():
    for d in [(1, 2), (1, 3), (2, 3), (1, 2, 3)]:
        spec = RecurrenceSpec(d)
        for n in range(1, 11):
            for w in itertools.product((0, 1), repeat=n):
                r = principal_period(w)
                if n < r * (spec.d_max + 1):
                    continue
                assert minimal_feasible_lag(w, spec) == kappa(r, spec), (w, d)


def test_minimal_feasible_lag_precondition():
    with pytest.raises(PreconditionError, match="n >= r\\*\\(d_max\\+1\\) = 6"):
        minimal_feasible_lag([1, 0, 1, 0], RecurrenceSpec((1, 2)))


def test_rho_bernoulli_ones():
    m = BernoulliMeasure.binary(0.6)
    assert rho(m, [1] * 10, RecurrenceSpec((1,))) == pytest.approx(0.6, abs=1e-12)


def test_rho_xor_parity():
    m = XorCoupledMeasure(0.75)
    spec = RecurrenceSpec((1,))
    for n in (4, 6, 8, 10):
        assert rho(m, [1] * n, spec) == pytest.approx(2 * 0.75 * 0.25, rel=1e-12)
    for n in (5, 7, 9, 11):
        assert rho(m, [1] * n, spec) == pytest.approx(0.5, rel=1e-12)


def test_rho_product_measure_closed_form():
    # for product measures rho collapses to P(R) ** ((kappa/r) * sum d_i)
    m = BernoulliMeasure.binary(0.55)
    for d in [(1,), (1, 2), (2, 3)]:
        spec = RecurrenceSpec(d)
        for w in [(1, 0, 1, 0), (1, 1, 0), (0, 1, 1, 0, 1, 1), (1, 1, 1)]:
            r = principal_period(w)
            k = kappa(r, spec)
            k0 = (k // r) * sum(d) if k % r == 0 else k * sum(d) / r
            expected = m.cylinder_prob(w[:r]) ** k0
            assert rho(m, w, spec) == pytest.approx(expected, abs=1e-12)
            assert 0.0 <= rho(m, w, spec) <= 1.0


def test_rho_vanishes_along_aperiodic_prefixes():
    # the continuation probability collapses as the prefix period grows
    uniform = BernoulliMeasure.uniform(2)
    markov = MarkovMeasure([[0.9, 0.1], [0.2, 0.8]])
    for model, spec in [
        (uniform, RecurrenceSpec((1, 2))),
        (markov, RecurrenceSpec((1,))),
    ]:
        small = rho(model, thue_morse_prefix(8), spec)
        large = rho(model, thue_morse_prefix(24), spec)
        assert large < small
        r24 = principal_period(thue_morse_prefix(24))
        ceiling = (1 + model.psi(0)) * math.exp(-model.gamma() * r24) * 1.01
        assert large <= ceiling


def test_rho_conditioning_error():
    chain = MarkovMeasure([[0.9, 0.1], [1.0, 0.0]])
    with pytest.raises(ConditioningError):
        rho(chain, [1, 1], RecurrenceSpec((1,)))


def test_rho_support_exit_warning():
    # the word itself is fine but the cyclic wrap of its extension is not:
    # the word ends 0 -> 1 never happens (P[0,1] = 0)
    chain = MarkovMeasure(
        [[0.5, 0.0, 0.5], [0.5, 0.25, 0.25], [0.3, 0.3, 0.4]]
    )
    assert chain.cylinder_prob([1, 0, 0]) > 0
    with pytest.warns(SupportExitWarning):
        value = rho(chain, [1, 0, 0], RecurrenceSpec((1,)))
    assert value == 0.0


@pytest.mark.parametrize(
    "prob, d, t, expected",
    [(0.5, (1, 2), 1.0, 4), (0.1, (1,), 0.5, 5), (2**-12, (1,), 1.0, 4096)],
)
def test_horizon_examples(prob, d, t, expected):
    assert horizon_N(prob, RecurrenceSpec(d, t)) == expected


def test_horizon_guards():
    with pytest.raises(HorizonCapError):
        horizon_N(2**-40, RecurrenceSpec((1, 2), 1.0))
    with pytest.raises(InvalidInputError):
        horizon_N(0.0, RecurrenceSpec((1,)))


def test_horizon_cap_env_override(monkeypatch):
    monkeypatch.setenv("RECLAB_MAX_HORIZON", "1e12")
    assert horizon_cap() == 10**12
    assert horizon_N(2**-19, RecurrenceSpec((1, 2), 1.0)) == 2**38
    monkeypatch.delenv("RECLAB_MAX_HORIZON")
    assert horizon_cap() == 10**8


@pytest.mark.parametrize(
    "d, n, expected",
    [((1, 2), 7, (7, 14)), ((2, 5), 6, (18, 4)), ((1,), 9, (math.inf, 0))],
)
def test_gap_profile_examples(d, n, expected):
    assert gap_profile(RecurrenceSpec(d), n) == expected


def test_gap_profile_general_matches_linear():
    spec = RecurrenceSpec((2, 5))
    qs = [lambda k, di=di: di * k for di in spec.d]
    for n in (1, 3, 6, 10):
        assert gap_profile_general(qs, n, k_max=200) == gap_profile(spec, n)


def test_count_hits_examples():
    spec12 = RecurrenceSpec((1, 2))
    assert count_hits([1] * 10, [1], spec12, 3) == 3
    # recomputed by hand: X_1 = w1*w2 = 1, X_2 = w2*w4 = 1
    assert count_hits([0, 1, 1, 0, 1, 0, 0], [1], spec12, 2) == 2
    assert count_hits([1] * 10, [1], spec12, 0) == 0


def test_count_hits_path_too_short():
    with pytest.raises(InvalidInputError, match="required"):
        count_hits([1, 1, 1], [1], RecurrenceSpec((1, 2)), 3)


def test_count_hits_matches_double_loop_on_random_paths():
    rng = np.random.default_rng(999)
    specs = [RecurrenceSpec(d) for d in [(1,), (1, 2), (2, 3), (1, 3, 4)]]
    for _ in range(250):
        for spec in specs:
            n = int(rng.integers(1, 4))
            word = tuple(int(x) for x in rng.integers(0, 2, n))
            n_horizon = int(rng.integers(0, 8))
            path = tuple(
                int(x) for x in rng.integers(0, 2, spec.d_max * n_horizon + n + 3)
            )
            assert count_hits(path, word, spec, n_horizon) == count_hits_oracle(
                path, word, spec, n_horizon
            )


def test_hitting_time_examples():
    spec = RecurrenceSpec((1,))
    assert hitting_time([1] * 8, [1], spec, 5) == 1
    assert hitting_time([0, 0, 0, 1, 0, 0], [1], spec, 5) == 3
    assert hitting_time([0] * 60, [1], spec, 50) is None
    with pytest.raises(InvalidInputError):
        hitting_time([0, 1], [1], spec, 50)


def test_counting_with_large_symbol_indices():
    # countable alphabets: symbol indices beyond byte range still work
    path = (300, 5, 300, 5, 300, 5, 7, 7)
    assert count_hits(path, [300, 5], RecurrenceSpec((1,)), 3) == 1
    assert hitting_time(path, [5, 300], RecurrenceSpec((1,)), 4) == 1


def test_hitting_time_multi_lag():
    # first k with word at positions k and 2k simultaneously
    path = (0, 1, 0, 1, 1, 0, 1, 0, 1)
    spec = RecurrenceSpec((1, 2))
    ks = [k for k in range(1, 4) if path[k] == 1 and path[2 * k] == 1]
    assert hitting_time(path, [1], spec, 3) == (min(ks) if ks else None)


def test_cylinder_context():
    m = BernoulliMeasure.uniform(2)
    ctx = cylinder_context(m, [1, 0, 1], RecurrenceSpec((1, 2), 1.0))
    assert ctx.r == 2 and ctx.prefix.symbols == (1, 0)
    assert ctx.kappa == 2
    assert ctx.prob == pytest.approx(0.125)
    assert ctx.horizon == 64
    assert 0.0 <= ctx.rho <= 1.0
    with pytest.raises(InvalidInputError):
        CylinderContext(ctx.word, r=2, prefix=ctx.prefix, kappa=3, rho=0.5,
                        prob=0.125, horizon=64)
