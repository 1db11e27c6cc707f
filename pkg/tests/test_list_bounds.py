import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polardesign.channel import entropy_table
from polardesign.list_bounds import (
    bound_index, bound_value, construct_set_Q, d_apx_peak, d_apx_profile, d_low_profile,
    d_tight_profile, d_up_profile, default_lambda, flat_entropies, is_admissible_Q, optimal_Q,
    profile,
)
from polardesign.polar_core import complement, compress_index

from oracles import bec_entropy_table, bec_exact_D


def chain(A, H, lam):
    return (d_low_profile(A, H).values, d_tight_profile(A, H).values,
            d_apx_profile(A, H, lam).values, d_up_profile(A, H).values)


def test_construct_Q_examples():
    assert construct_set_Q(2, 3, [1]) == frozenset({1})
    assert construct_set_Q(2, 3, [1, 2]) == frozenset({0, 1})
    assert construct_set_Q(3, 5, []) == frozenset()
    with pytest.raises(ValueError):
        construct_set_Q(2, 3, [3])
    with pytest.raises(ValueError):
        construct_set_Q(2, 0, [])


def test_bound_index_is_compressed_position():
    assert bound_index(3, 7, {1}) == (2, 3)
    assert bound_index(4, 13, {0, 2}) == (2, compress_index(13, {0, 2}))


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.just(n), st.integers(1, (1 << n) - 1), st.integers(0, 2**31 - 1))))
def test_greedy_Q_admissible_and_not_better_than_optimal(args):
    n, m, seed = args
    rng = np.random.default_rng(seed)
    prefix = [i for i in range(m) if rng.random() < 0.5]
    H = entropy_table(n, 0.5, 0.5)
    Qg = construct_set_Q(n, m, prefix)
    assert is_admissible_Q(n, m, prefix, Qg)
    Qo = optimal_Q(n, m, prefix, H)
    assert is_admissible_Q(n, m, prefix, Qo)
    assert bound_value(n, m, Qg, H) >= bound_value(n, m, Qo, H) - 1e-15


def test_profiles_by_hand():
    H = entropy_table(2, 0.5, 0.5)
    h = H.H
    A = [1, 3]
    low = d_low_profile(A, H).values
    assert low[0] == 0.0
    assert low[1] == pytest.approx(h[1])
    assert low[2] == pytest.approx(max(h[1] - (1 - h[2]), 0.0))
    assert low[3] == pytest.approx(low[2] + h[3])
    up = d_up_profile(A, H).values
    assert np.allclose(up, np.cumsum(np.where(np.isin(np.arange(4), A), h, 0.0)))
    # at m=2 the greedy Q is {1} (prefix {1} lacks bit 1), bounding by the level-1 entropy
    tight = d_tight_profile(A, H).values
    Q = construct_set_Q(2, 2, [1])
    assert Q == frozenset({1})
    dec = bound_value(2, 2, Q, H) - h[2]
    assert tight[2] == pytest.approx(max(h[1] - dec, 0.0))


@given(st.integers(0, 2**31 - 1), st.sampled_from([16, 64, 128]))
def test_bound_chain_random_sets(seed, N):
    rng = np.random.default_rng(seed)
    n = N.bit_length() - 1
    H = entropy_table(n, float(rng.uniform(-1, 3)), 0.5)
    A = np.sort(rng.choice(N, int(rng.integers(1, N)), replace=False))
    lam = int(rng.integers(0, N + 1))
    low, tight, apx, up = chain(A, H, lam)
    tol = 1e-12
    assert np.all(low <= tight + tol) and np.all(tight <= apx + tol) and np.all(apx <= up + tol)


def test_apx_limits():
    H = entropy_table(6, 0.5, 0.5)
    A = np.arange(20, 64)
    assert np.allclose(d_apx_profile(A, H, 0).values, d_tight_profile(A, H).values)
    assert np.allclose(d_apx_profile(A, H, 64).values, d_up_profile(A, H).values)
    # min(A) >= lambda makes apx and tight coincide
    assert np.allclose(d_apx_profile(A, H, 20).values, d_tight_profile(A, H).values)
    with pytest.raises(ValueError):
        d_apx_profile(A, H, 65)


def test_profile_dispatch_and_peak():
    H = entropy_table(5, 0.5, 0.5)
    A = np.arange(10, 32)
    assert profile("low", A, H).variant == "low"
    with pytest.raises(ValueError):
        profile("apx", A, H)
    with pytest.raises(ValueError):
        profile("nope", A, H)
    p = profile("apx", A, H, 8)
    mask = np.zeros(32, dtype=np.uint8)
    mask[A] = 1
    assert d_apx_peak(mask, flat_entropies(H), 5, 8) == pytest.approx(p.peak)
    assert p.values[p.argmax] == p.peak
    assert p.to_text().splitlines()[0].startswith("0 ")


def test_all_frozen_and_all_info():
    H = entropy_table(4, 0.5, 0.5)
    assert d_up_profile([], H).peak == 0.0
    up = d_up_profile(np.arange(16), H)
    assert up.values[-1] == pytest.approx(H.H.sum())


def test_default_lambda():
    assert default_lambda(128, 64) == 32 and default_lambda(512, 256) == 96
    assert default_lambda(64, 32) is None


@pytest.mark.parametrize("eps", [0.3, 0.5])
def test_bec_exact_bracketed_n2(eps):
    H = bec_entropy_table(2, eps)
    for k in range(5):
        for F in itertools.combinations(range(4), k):
            D = bec_exact_D(2, F, eps)
            A = complement(F, 4)
            assert np.all(d_tight_profile(A, H).values <= D + 1e-12)
            assert np.all(D <= d_up_profile(A, H).values + 1e-12)


def test_bec_tight_strictly_improves_somewhere():
    # the tightened bound is not just the loose one in disguise
    H = bec_entropy_table(3, 0.5)
    gains = 0
    for F in itertools.combinations(range(8), 4):
        A = complement(F, 8)
        gains += np.any(d_tight_profile(A, H).values > d_low_profile(A, H).values + 1e-9)
    assert gains > 0
