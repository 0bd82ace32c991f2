import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from cumadv import distributions as d
from cumadv import urns
from cumadv.rng import make_rng
from oracles import beta_path_probability, multicolor_second_given_first, sum_law, urn_path_law


def within_se(hits: int, n: int, p: float, k: float = 3.0) -> bool:
    return abs(hits / n - p) <= k * math.sqrt(p * (1 - p) / n)


# -- polya_draw ----------------------------------------------------------------

def test_polya_draw_symmetric_two_colors(rng):
    state = urns.UrnState((1, 1))
    hits = sum(urns.polya_draw(state, rng.split(i))[0] == 0 for i in range(20_000))
    assert within_se(hits, 20_000, 0.5)


def test_polya_draw_adds_one_ball_of_drawn_color(rng):
    state = urns.UrnState((1, 1), (1, 1))
    for i in range(50):
        color, new = urns.polya_draw(state, rng.split(i))
        expected = (2.0, 1.0) if color == 0 else (1.0, 2.0)
        assert new.counts == expected


def test_three_color_variable_reinforcement():
    state = urns.UrnState((1, 1, 1), (1, 1, 2))
    assert state.add(2).counts == (1, 1, 3)


@pytest.mark.parametrize("counts,reinf", [((1,), None), ((1, 0), None), ((1, 1), (1,)), ((1, 1), (1, -1))])
def test_urn_state_invariants(counts, reinf):
    with pytest.raises(ValueError):
        urns.UrnState(counts, reinf)


def test_fractional_reinforcement_representable():
    assert urns.UrnState((1, 1), (0.295, 0.295)).add(0).counts == (1.295, 1.0)


# -- binary Pólya ---------------------------------------------------------------

def test_polya_two_step_and_three_step_paths():
    law = urn_path_law(3)
    assert urn_path_law(2)[(1, 1)] == Fraction(1, 3)
    assert law[(1, 0, 1)] == Fraction(1, 12)
    paths = urns.polya_binary_paths(3, 200_000, make_rng(1))
    n = len(paths)
    assert within_se(int(np.all(paths[:, :2] == 1, axis=1).sum()), n, 1 / 3)
    assert within_se(int(np.all(paths == (1, 0, 1), axis=1).sum()), n, 1 / 12)


@pytest.mark.parametrize("n", [1, 4, 10])
def test_polya_count_law_uniform(n):
    exact = sum_law(urn_path_law(n))
    assert all(v == Fraction(1, n + 1) for v in exact.values())
    s = urns.polya_binary_paths(n, 200_000, make_rng(n)).sum(axis=1)
    obs = np.bincount(s, minlength=n + 1)
    assert stats.chisquare(obs).pvalue > 1e-3


def test_polya_exchangeable_paths():
    paths = urns.polya_binary_paths(3, 300_000, make_rng(5))
    n = len(paths)
    p = 1 / 12
    for target in [(1, 0, 1), (0, 1, 1), (1, 1, 0)]:
        assert within_se(int(np.all(paths == target, axis=1).sum()), n, p)


def test_polya_sequence_sample_shape(rng):
    s = urns.polya_binary_sequence(7, rng)
    assert s.n == 7 and s.kind == "integer" and set(s.tolist()) <= {0, 1}


def test_zero_length_is_empty(rng):
    assert urns.polya_binary_sequence(0, rng).n == 0
    assert urns.price_sequence(0, rng).n == 0


def _conditional_check(paths, prob_fn, kmax=6):
    n_checked = 0
    for k in range(1, kmax + 1):
        s = paths[:, : k - 1].sum(axis=1)
        y = paths[:, k - 1]
        for sv in range(k):
            sel = s == sv
            m = int(sel.sum())
            if m < 200:
                continue
            p = prob_fn(k, sv)
            assert within_se(int(y[sel].sum()), m, p, 3.5), (k, sv)
            n_checked += 1
    return n_checked


def test_polya_conditional_law():
    paths = urns.polya_binary_paths(6, 200_000, make_rng(6))
    assert _conditional_check(paths, lambda k, s: (1 + s) / (k + 1)) >= 15


# -- talent binary ---------------------------------------------------------------

def test_point_mass_talent_all_ones(rng):
    s = urns.talent_binary_sequence(urns.TalentBinaryParams(d.Normal(1.0, 0.0)), 20, rng)
    assert s.tolist() == [1] * 20


def test_talent_support_checked():
    with pytest.raises(ValueError):
        urns.TalentBinaryParams(d.Normal(0.5, 1.0))


def test_uniform_talent_two_ones():
    assert beta_path_probability(2, 2) == pytest.approx(1 / 3, abs=1e-12)
    paths = urns.talent_binary_paths(urns.uniform_talent(), 2, 200_000, make_rng(7))
    assert within_se(int(paths.all(axis=1).sum()), len(paths), 1 / 3)


@pytest.mark.parametrize("k", range(6))
def test_uniform_talent_path_law_matches_beta_integral(k):
    m = 5
    exact = math.factorial(k) * math.factorial(m - k) / math.factorial(m + 1)
    assert beta_path_probability(k, m) == pytest.approx(exact, rel=1e-9)
    paths = urns.talent_binary_paths(urns.uniform_talent(), m, 300_000, make_rng(100 + k))
    target = np.array([1] * k + [0] * (m - k))
    assert within_se(int(np.all(paths == target, axis=1).sum()), len(paths), exact)


def test_prop1_pair_close_in_tvd():
    m, reps = 5, 200_000
    law = {p: float(v) for p, v in urn_path_law(m).items()}
    for paths in (urns.polya_binary_paths(m, reps, make_rng(8)),
                  urns.talent_binary_paths(urns.uniform_talent(), m, reps, make_rng(9))):
        keys, counts = np.unique(paths, axis=0, return_counts=True)
        freq = {tuple(int(x) for x in k): c / reps for k, c in zip(keys, counts)}
        tv = 0.5 * sum(abs(freq.get(p, 0) - q) for p, q in law.items())
        assert tv < 0.01


# -- Price ---------------------------------------------------------------------------

def test_price_first_two_steps():
    paths = urns.price_paths(2, 200_000, make_rng(10))
    n = len(paths)
    assert within_se(int(paths[:, 0].sum()), n, 0.5)
    assert within_se(int(paths.all(axis=1).sum()), n, 1 / 3)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32), n=st.integers(1, 30))
def test_price_failure_absorbing(seed, n):
    paths = urns.price_paths(n, 50, make_rng(seed))
    assert not np.any((paths[:, :-1] == 0) & (paths[:, 1:] == 1))


# -- Simon -----------------------------------------------------------------------------

def test_simon_first_step_probabilities():
    assert urns.simon_probability(0.999, 1, 4, 1, 0) == pytest.approx(0.001 * 1 / 4)
    assert urns.simon_probability(0.5, 1, 2, 1, 0) == pytest.approx(0.25)
    paths = urns.simon_paths(0.5, 1, 2, 1, 200_000, make_rng(11))
    assert within_se(int(paths.sum()), len(paths), 0.25)


@given(k=st.integers(1, 50), s=st.integers(0, 48))
def test_simon_monotone_in_past_successes(k, s):
    assert urns.simon_probability(0.3, 1, 5, k, s + 1) >= urns.simon_probability(0.3, 1, 5, k, s)


def test_simon_conditional_law():
    a, nr0, k0 = 0.2, 2, 3
    paths = urns.simon_paths(a, nr0, k0, 6, 200_000, make_rng(12))
    checked = _conditional_check(paths, lambda k, s: urns.simon_probability(a, nr0, k0, k, s))
    assert checked >= 15


def test_simon_rejects_bad_params(rng):
    with pytest.raises(ValueError):
        urns.simon_occurrence_sequence(0.5, 3, 2, 5, rng)
    with pytest.raises(ValueError):
        urns.simon_occurrence_sequence(1.0, 1, 2, 5, rng)


# -- Barabási–Albert focal node ----------------------------------------------------------

def test_ba_degree_path_shape(rng):
    s = urns.ba_degree_sequence(2, 4, 30, rng)
    v = np.asarray(s.values)
    assert np.all(v[:3] == 0) and v[3] == 1
    assert set(np.diff(v).tolist()) <= {0, 1}


def test_ba_gain_probability():
    paths = urns.ba_degree_paths(1, 1, 2, 300_000, make_rng(13))
    assert within_se(int((paths[:, 1] == 2).sum()), len(paths), 1 / 6)


def test_ba_entry_after_end_rejected(rng):
    with pytest.raises(ValueError):
        urns.ba_degree_sequence(1, 5, 4, rng)


# -- Gibrat --------------------------------------------------------------------------------

def test_gibrat_deterministic_growth(rng):
    s = urns.gibrat_sequence(100.0, d.Normal(0.05, 0.0), 2, rng)
    assert s.values == pytest.approx([105.0, 110.25])


def test_gibrat_zero_growth_constant(rng):
    assert urns.gibrat_sequence(3.0, d.Normal(0.0, 0.0), 5, rng).tolist() == [3.0] * 5


def test_gibrat_quantile_growth(rng):
    s = urns.gibrat_sequence(1.0, lambda u: 0.2 * u, 4, rng)
    inc = np.diff(np.log(np.concatenate([[1.0], s.values])))
    assert np.all((inc >= 0) & (inc <= math.log(1.2)))


def test_gibrat_iid_log_increments():
    paths = urns.gibrat_paths(1.0, d.Uniform(-0.3, 0.5), 6, 100_000, make_rng(14))
    inc = np.diff(np.log(np.concatenate([np.ones((len(paths), 1)), paths], axis=1)), axis=1)
    v = inc.var(axis=0, ddof=1)
    assert v.max() / v.min() < 1.05


@pytest.mark.parametrize("growth", [d.Uniform(-1.0, 0.5), d.Normal(0, 1), lambda u: -1.0 + u])
def test_gibrat_rejects_growth_reaching_minus_one(growth, rng):
    with pytest.raises(ValueError):
        urns.gibrat_sequence(1.0, growth, 3, rng)


# -- monkey ------------------------------------------------------------------------------------

def test_monkey_word_probability():
    p = urns.MonkeyParams(0.2, 26, 5)
    assert urns.monkey_word_probability(p, 1) == pytest.approx(0.8 / 26 * 0.2)
    assert urns.monkey_word_probability(p, 1) == pytest.approx(0.0061538, abs=1e-7)


def test_monkey_frequency_and_independence():
    p = urns.MonkeyParams(0.2, 26, 5)
    q = urns.monkey_word_probability(p, 1)
    x = urns.monkey_paths(p, 2, 10 ** 6, make_rng(15), word_length=1)
    assert abs(x[:, 0].mean() - q) < 3 * math.sqrt(q / 10 ** 6)
    assert abs(np.corrcoef(x[:, 0], x[:, 1])[0, 1]) < 0.01


def test_monkey_occurrence_sequence(rng):
    s = urns.monkey_occurrence_sequence(urns.MonkeyParams(0.5, 1, 3), 1, 100, rng)
    assert s.n == 100 and set(s.tolist()) <= {0, 1}


def test_monkey_word_length_weights():
    np.testing.assert_allclose(urns.monkey_length_weights(urns.MonkeyParams(0.2, 1, 3)), [1 / 3] * 3)
    np.testing.assert_allclose(urns.monkey_length_weights(urns.MonkeyParams(0.2, 2, 2)), [1 / 3, 2 / 3])


def test_monkey_random_word_length_law():
    params = urns.MonkeyParams(0.2, 2, 2)
    root = make_rng(16)
    ks = [urns.monkey_random_word_length(params, root.split(i)) for i in range(20_000)]
    assert set(ks) <= {1, 2}
    assert within_se(ks.count(1), len(ks), 1 / 3)


@given(N=st.integers(1, 60), K=st.integers(1, 12), seed=st.integers(0, 1000))
@settings(max_examples=30, deadline=None)
def test_monkey_word_length_support(N, K, seed):
    k = urns.monkey_random_word_length(urns.MonkeyParams(0.3, N, K), make_rng(seed))
    assert 1 <= k <= K


# -- multicolor urn --------------------------------------------------------------------------------

def test_multicolor_one_hot_rows(rng):
    s = urns.multicolor_urn_sequence(urns.UrnState((1, 1, 1), (1, 1, 2)), 12, rng)
    assert s.kind == "vector" and s.values.shape == (12, 3)
    assert np.all(s.values.sum(axis=1) == 1)


def test_multicolor_first_draw_symmetric():
    c = urns.multicolor_color_paths(urns.UrnState((1, 1, 1)), 1, 150_000, make_rng(17))[:, 0]
    for i in range(3):
        assert within_se(int((c == i).sum()), len(c), 1 / 3)


def test_multicolor_second_given_first():
    exact = multicolor_second_given_first((1, 1, 1), (1, 1, 2), 2)
    assert exact == Fraction(3, 5)
    c = urns.multicolor_color_paths(urns.UrnState((1, 1, 1), (1, 1, 2)), 2, 300_000, make_rng(18))
    first2 = c[:, 0] == 2
    assert within_se(int((c[first2, 1] == 2).sum()), int(first2.sum()), 0.6)


def test_categorical_never_picks_zero_weight():
    w = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 2.0]])
    u = np.array([0.0, 1 - 1e-17, 0.999999999])
    assert urns.categorical_rows(w, u).tolist() == [1, 0, 2]
