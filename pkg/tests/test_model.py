"""Core model tests: indexing, payoffs, verification, encodings."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nashreduce import (
    BimatrixGame,
    DimensionMismatch,
    NormalFormGame,
    ParameterError,
    PolymatrixGame,
    R,
    iter_profiles,
    profile_index,
    profile_unindex,
    pure_strategy,
    random_normal_form,
    random_polymatrix,
    uniform_strategy,
    validate_mixed,
)


# ---------------------------------------------------------------------------
# indexing


def test_profile_index_first_player_most_significant():
    counts = (2, 3, 2)
    assert profile_index(counts, (0, 0, 0)) == 0
    assert profile_index(counts, (0, 0, 1)) == 1
    assert profile_index(counts, (0, 1, 0)) == 2
    assert profile_index(counts, (1, 0, 0)) == 6
    assert profile_index(counts, (1, 2, 1)) == 11


def test_profile_index_bounds():
    with pytest.raises(ParameterError):
        profile_index((2, 2), (0, 2))
    with pytest.raises(DimensionMismatch):
        profile_index((2, 2), (0,))
    with pytest.raises(ParameterError):
        profile_unindex((2, 2), 4)


def test_iter_profiles_matches_index_order():
    counts = (2, 3, 2)
    profiles = list(iter_profiles(counts))
    assert len(profiles) == 12
    for idx, prof in enumerate(profiles):
        assert profile_index(counts, prof) == idx
        assert profile_unindex(counts, idx) == prof


@given(
    counts=st.lists(st.integers(1, 4), min_size=1, max_size=4).map(tuple),
    data=st.data(),
)
def test_profile_roundtrip(counts, data):
    strategies = tuple(data.draw(st.integers(0, n - 1)) for n in counts)
    idx = profile_index(counts, strategies)
    assert profile_unindex(counts, idx) == strategies


# ---------------------------------------------------------------------------
# mixed strategies


def test_validate_mixed():
    validate_mixed((R(1, 3), R(2, 3)))
    with pytest.raises(ParameterError):
        validate_mixed((R(1, 3), R(1, 3)))
    with pytest.raises(ParameterError):
        validate_mixed((R(-1, 3), R(4, 3)))
    with pytest.raises(DimensionMismatch):
        validate_mixed((R(1),), length=2)


def test_strategy_helpers():
    assert sum(uniform_strategy(3)) == 1
    assert pure_strategy(3, 1) == (0, 1, 0)
    with pytest.raises(ParameterError):
        pure_strategy(2, 2)


# ---------------------------------------------------------------------------
# normal-form games


def two_player_game():
    # row player wants to mismatch, column player wants to match
    return NormalFormGame(
        (2, 2),
        [
            [[R(0), R(1)], [R(1), R(0)]],
            [[R(1), R(0)], [R(0), R(1)]],
        ],
    )


def test_normal_form_expected_payoffs_two_player():
    g = two_player_game()
    u = g.expected_payoffs([(R(1, 2), R(1, 2)), (R(1, 4), R(3, 4))])
    assert u[0] == (R(3, 4), R(1, 4))
    assert u[1] == (R(1, 2), R(1, 2))


def test_normal_form_expected_payoffs_three_player():
    # player 0's columns run over profiles of players (1, 2): 00, 01, 10, 11
    m0 = [[R(0), R(1, 4), R(1, 2), R(3, 4)], [R(1), R(0), R(0), R(1)]]
    ones = [[R(0), R(0), R(0), R(0)], [R(1), R(1), R(1), R(1)]]
    g = NormalFormGame((2, 2, 2), [m0, ones, ones])
    prof = [(R(1), R(0)), (R(1, 2), R(1, 2)), (R(1, 3), R(2, 3))]
    u = g.expected_payoffs(prof)
    assert u[0] == (R(5, 12), R(1, 2))


def test_normal_form_verify_wsne_tolerance():
    g = two_player_game()
    prof = [(R(1, 2), R(1, 2)), (R(1, 4), R(3, 4))]
    assert g.verify_wsne(prof, R(1, 2)).ok
    res = g.verify_wsne(prof, R(1, 4))
    assert not res.ok
    (v,) = res.violations
    assert (v.player, v.strategy, v.best_strategy) == (0, 1, 0)
    assert v.gap == R(1, 2)


def test_normal_form_pure_equilibrium():
    g = NormalFormGame(
        (2, 2),
        [
            [[R(1), R(0)], [R(0), R(1, 2)]],
            [[R(1, 2), R(0)], [R(0), R(1)]],
        ],
    )
    ok = g.verify_wsne([pure_strategy(2, 0), pure_strategy(2, 0)], R(0))
    assert ok.ok
    bad = g.verify_wsne([pure_strategy(2, 0), pure_strategy(2, 1)], R(1, 4))
    assert not bad.ok


def test_normal_form_validation():
    with pytest.raises(ParameterError):
        NormalFormGame((2, 2), [[[R(2), R(0)], [R(0), R(0)]], [[R(0), R(0)], [R(0), R(0)]]])
    with pytest.raises(DimensionMismatch):
        NormalFormGame((2, 2), [[[R(0), R(0)]], [[R(0), R(0)], [R(0), R(0)]]])
    with pytest.raises(DimensionMismatch):
        two_player_game().expected_payoffs([(R(1), R(0))])


@settings(max_examples=30)
@given(seed=st.integers(0, 10**6))
def test_normal_form_eps_one_never_violated(seed):
    """Payoffs live in [0, 1], so no gap can exceed 1."""
    g = random_normal_form(seed, (2, 3))
    prof = [uniform_strategy(2), uniform_strategy(3)]
    assert g.verify_wsne(prof, R(1)).ok


# ---------------------------------------------------------------------------
# polymatrix games


def three_player_poly():
    edges = {
        (0, 1): [[R(0), R(1)], [R(1), R(0)]],
        (1, 2): [[R(0), R(2)], [R(1), R(0)]],
        (2, 0): [[R(-1), R(0)], [R(0), R(1)]],
    }
    return PolymatrixGame((2, 2, 2), edges)


def test_polymatrix_expected_payoffs():
    g = three_player_poly()
    prof = [(R(1, 2), R(1, 2)), (R(1), R(0)), (R(1, 4), R(3, 4))]
    u = g.expected_payoffs(prof)
    assert u[0] == (R(0), R(1))
    assert u[1] == (R(3, 2), R(1, 4))
    assert u[2] == (R(-1, 2), R(1, 2))


def test_polymatrix_verify_clamped():
    g = three_player_poly()
    prof = [(R(1, 2), R(1, 2)), (R(1), R(0)), (R(1, 4), R(3, 4))]
    assert not g.verify_wsne(prof, R(0)).ok
    res = g.verify_wsne(prof, R(0), clamped={0})
    assert [v.player for v in res.violations] == [2]
    assert g.verify_wsne(prof, R(0), clamped={0, 2}).ok


def test_polymatrix_drops_zero_edges():
    g = PolymatrixGame(
        (2, 2),
        {(0, 1): [[R(0), R(0)], [R(0), R(0)]], (1, 0): [[R(1), R(0)], [R(0), R(1)]]},
    )
    assert (0, 1) not in g.edges
    assert (1, 0) in g.edges


def test_polymatrix_validation():
    with pytest.raises(ParameterError):
        PolymatrixGame((2, 2), {(0, 0): [[R(0), R(1)], [R(1), R(0)]]})
    with pytest.raises(ParameterError):
        PolymatrixGame((2, 2), {(0, 1): [[R(3), R(0)], [R(0), R(0)]]})
    with pytest.raises(ParameterError):
        PolymatrixGame((1, 2), {})
    with pytest.raises(DimensionMismatch):
        PolymatrixGame((2, 3), {(0, 1): [[R(1), R(0)], [R(0), R(1)]]})


def test_polymatrix_empty_game():
    g = PolymatrixGame((), {})
    assert g.m == 0
    assert g.expected_payoffs([]) == []
    assert g.verify_wsne([], R(0)).ok


def test_polymatrix_payoff_range():
    g = three_player_poly()
    assert g.payoff_range() == (R(-1), R(2))
    assert PolymatrixGame((), {}).payoff_range() == (0, 0)


# ---------------------------------------------------------------------------
# bimatrix games


def small_structured():
    edges = {
        (0, 1): [[R(0), R(1)], [R(1), R(0)]],
        (1, 0): [[R(1), R(0)], [R(0), R(1)]],
    }
    return BimatrixGame.structured((2, 2), R(10), edges)


def test_structured_entries():
    g = small_structured()
    assert g.n == 4
    assert g.entry(0, 0, 0) == R(-10)
    assert g.entry(0, 1, 1) == R(-10)
    assert g.entry(0, 0, 2) == R(0)
    assert g.entry(0, 0, 3) == R(1)
    assert g.entry(0, 2, 0) == R(1)
    assert g.entry(1, 2, 2) == R(1)
    assert g.entry(1, 2, 1) == R(0)


def test_structured_matches_dense():
    g = small_structured()
    d = g.to_dense()
    x = (R(1, 4), R(1, 4), R(1, 4), R(1, 4))
    y = (R(1, 2), R(0), R(1, 3), R(1, 6))
    u1s, u2s = g.expected_payoffs(x, y)
    u1d, u2d = d.expected_payoffs(x, y)
    assert u1s == u1d
    assert u2s == u2d
    for r in range(4):
        for c in range(4):
            assert g.entry(0, r, c) == d.entry(0, r, c)
            assert g.entry(1, r, c) == d.entry(1, r, c)


def test_normalized_structured_payoffs_affine():
    edges = {
        (0, 1): [[R(0), R(1)], [R(1), R(0)]],
        (1, 0): [[R(1), R(0)], [R(0), R(1)]],
    }
    alpha = R(10)
    div = alpha + 1
    raw = BimatrixGame.structured((2, 2), alpha, edges)
    norm = BimatrixGame.structured((2, 2), alpha, edges, normalized=True, divisor=div)
    x = (R(1, 2), R(0), R(1, 4), R(1, 4))
    y = (R(1, 8), R(3, 8), R(1, 4), R(1, 4))
    u1, u2 = raw.expected_payoffs(x, y)
    v1, v2 = norm.expected_payoffs(x, y)
    assert v1 == tuple((u + alpha) / div for u in u1)
    assert v2 == tuple((u + alpha) / div for u in u2)
    lo, hi = norm.payoff_range()
    assert 0 <= lo <= hi <= 1
    # tolerances scale with the same divisor
    eps = R(1, 5)
    assert raw.verify_wsne(x, y, eps).ok == norm.verify_wsne(x, y, eps / div).ok


def test_dense_verify_wsne():
    # matching pennies, scaled into [0, 1]
    a = [[R(1), R(0)], [R(0), R(1)]]
    b = [[R(0), R(1)], [R(1), R(0)]]
    g = BimatrixGame.dense(a, b)
    half = (R(1, 2), R(1, 2))
    assert g.verify_wsne(half, half, R(0)).ok
    res = g.verify_wsne((R(1), R(0)), half, R(0))
    assert not res.ok
    assert res.violations[0].player == 1


def test_bimatrix_validation():
    with pytest.raises(DimensionMismatch):
        BimatrixGame.dense([[R(0), R(1)]], [[R(0), R(1)]])
    with pytest.raises(ParameterError):
        BimatrixGame.structured((2, 2), R(0), {})
    with pytest.raises(ParameterError):
        BimatrixGame.structured((2, 2), R(4), {}, normalized=True)
    with pytest.raises(ParameterError):
        BimatrixGame.structured((2, 2), R(4), {}, divisor=R(5))
    with pytest.raises(TypeError):
        BimatrixGame()


def test_block_index_helpers():
    g = small_structured()
    assert g.strategy_index(0, 1) == 1
    assert g.strategy_index(1, 0) == 2
    assert g.block_of(3) == (1, 1)
    with pytest.raises(ParameterError):
        g.strategy_index(0, 2)


# ---------------------------------------------------------------------------
# random generators


def test_random_generators_deterministic():
    assert random_normal_form(42, (2, 2)) == random_normal_form(42, (2, 2))
    assert random_polymatrix(42, (2, 2, 2)) == random_polymatrix(42, (2, 2, 2))
    assert random_normal_form(42, (2, 2)) != random_normal_form(43, (2, 2))


def test_random_polymatrix_range():
    g = random_polymatrix(7, (2, 2), lo=R(-1), hi=R(2))
    lo, hi = g.payoff_range()
    assert -1 <= lo <= hi <= 2
    with pytest.raises(ParameterError):
        random_polymatrix(7, (2, 2), lo=R(-2))
