import itertools

import numpy as np
import pytest

from dimwit.bounds import Assignment, fano_bound
from dimwit.errors import NotUnique, NoWinningAnswer, ShapeMismatch
from dimwit.games import (
    Game,
    ObservedStats,
    check_unique,
    chsh_fixture,
    chsh_game,
    game_dim_bound,
    induced_prior,
    induced_table,
    merge_outcomes,
    string_encoding,
    transpose_game,
    winning_answer_map,
)

from conftest import GAMMA, h2

BITS = (0, 1)


def uniform_stats(game, p):
    return ObservedStats(np.full((len(game.T), len(game.B)), 1 / len(game.B)), np.full(len(game.S), p))


def toy_three_answer_game():
    # answers 1 and 2 are interchangeable: both win exactly when a != b
    return Game.from_predicate(BITS, BITS, (0, 1, 2), BITS, np.full((2, 2), 0.25),
                               lambda a, b, s, t: (a == 0) == (b == 0))


def t_blind_game():
    # Alice must echo Bob's answer; t plays no role
    return Game.from_predicate(BITS, BITS, BITS, BITS, np.full((2, 2), 0.25), lambda a, b, s, t: a == b)


class TestUniqueness:
    def test_chsh_unique(self):
        assert check_unique(chsh_game())

    def test_all_answers_win(self):
        g = Game.from_predicate(BITS, BITS, BITS, BITS, np.full((2, 2), 0.25), lambda *_: True)
        assert not check_unique(g)

    def test_missing_winner(self):
        g = Game.from_predicate(BITS, BITS, BITS, BITS, np.full((2, 2), 0.25),
                                lambda a, b, s, t: (s, t) != (1, 1) and a == b)
        assert not check_unique(g)
        with pytest.raises(NoWinningAnswer):
            merge_outcomes(g)


class TestMerge:
    def test_idempotent_on_chsh(self):
        g = chsh_game()
        assert merge_outcomes(g) == g
        assert merge_outcomes(merge_outcomes(g)) == merge_outcomes(g)

    def test_three_answer_toy(self):
        g = toy_three_answer_game()
        merged = merge_outcomes(g)
        assert check_unique(merged)
        assert all(len(s) == 2 for s in merged.answer_sets)
        assert merge_outcomes(merged) == merged
        # enumerate: the merged winner for b=1 is the class {1, 2}, represented by 1
        f = winning_answer_map(merged)
        for s, t in itertools.product(BITS, BITS):
            assert f(0, s, t) == 0
            assert f(1, s, t) == 1
            for a in (0, 1, 2):
                # winning in the original game implies the representative wins in the merged one
                if g.V[a, 1, s, t]:
                    assert merged.V[1, 1, s, t]

    def test_all_win_collapses_to_single_answer(self):
        g = Game.from_predicate(BITS, BITS, BITS, BITS, np.full((2, 2), 0.25), lambda *_: True)
        merged = merge_outcomes(g)
        assert merged.answer_sets == ((0,), (0,))
        rep = game_dim_bound(merged, uniform_stats(merged, 1.0))
        assert rep.exponent <= 1e-12

    def test_answers_outside_set_rejected(self):
        V = np.zeros((2, 2, 1, 1), dtype=bool)
        V[1, :, 0, 0] = True
        with pytest.raises(ShapeMismatch):
            Game((0,), (0,), BITS, BITS, [[1.0]], V, answer_sets=((0,),))


class TestWinningAnswerMap:
    @pytest.mark.parametrize("b,s,t,a", [(1, 1, 1, 0), (0, 0, 0, 0), (0, 1, 1, 1)])
    def test_chsh_values(self, b, s, t, a):
        assert winning_answer_map(chsh_game())(b, s, t) == a

    def test_chsh_formula(self):
        f = winning_answer_map(chsh_game())
        for b, s, t in itertools.product(BITS, repeat=3):
            assert f(b, s, t) == (s * t + b) % 2

    def test_non_unique_rejected(self):
        with pytest.raises(NotUnique):
            winning_answer_map(toy_three_answer_game())


@pytest.mark.parametrize("b,t,x", [(0, 0, (0, 0)), (1, 0, (1, 1)), (0, 1, (0, 1)), (1, 1, (1, 0))])
def test_chsh_string_encoding(b, t, x):
    # x = (f(b,0,t), f(b,1,t)); the last two follow from s*t = a + b mod 2 and
    # agree with the steered-state table, where M_0 reads the first bit
    assert string_encoding(chsh_game(), b, t) == x


def test_chsh_encoding_covers_all_strings():
    strings = {string_encoding(chsh_game(), b, t) for b, t in itertools.product(BITS, BITS)}
    assert strings == set(itertools.product(BITS, BITS))


def test_t_blind_game_strings_collide():
    g = t_blind_game()
    assert string_encoding(g, 0, 0) == string_encoding(g, 0, 1) == (0, 0)
    assert string_encoding(g, 1, 0) == string_encoding(g, 1, 1) == (1, 1)


class TestInducedPrior:
    def test_chsh_uniform(self):
        game, stats, _ = chsh_fixture()
        prior = induced_prior(game, stats)
        assert set(prior.labels) == set(itertools.product(BITS, BITS))
        assert prior.mass == pytest.approx([0.25] * 4)

    def test_deterministic_bob_one_setting(self):
        g = Game.from_predicate(BITS, (0,), BITS, BITS, [[0.5], [0.5]], lambda a, b, s, t: a == b)
        prior = induced_prior(g, ObservedStats([[1.0, 0.0]], [1.0, 1.0]))
        assert prior.labels == ((0, 0),)
        assert prior.mass == pytest.approx([1.0])

    def test_collisions_add(self):
        g = t_blind_game()
        stats = ObservedStats([[0.7, 0.3], [0.1, 0.9]], [0.9, 0.9])
        prior = induced_prior(g, stats)
        # enumerate (t, b): pi_B(t) = 1/2 for both t
        expected = {(0, 0): 0.5 * 0.7 + 0.5 * 0.1, (1, 1): 0.5 * 0.3 + 0.5 * 0.9}
        assert dict(zip(prior.labels, prior.mass)) == pytest.approx(expected)
        assert sum(prior.mass) == pytest.approx(1.0, abs=1e-9)


class TestGameBound:
    def test_chsh(self):
        game, stats, _ = chsh_fixture()
        rep = game_dim_bound(game, stats)
        assert rep.exponent == pytest.approx(2 * (1 - h2(GAMMA)), abs=1e-12)
        assert 0.797 <= rep.exponent <= 0.799
        assert rep.dim_bound == 2

    def test_chsh_guessing(self):
        rep = game_dim_bound(chsh_game(), uniform_stats(chsh_game(), 0.5))
        assert rep.exponent == pytest.approx(0.0, abs=1e-12)
        assert rep.dim_bound == 1

    def test_chsh_perfect(self):
        rep = game_dim_bound(chsh_game(), uniform_stats(chsh_game(), 1.0))
        assert rep.exponent == pytest.approx(2.0, abs=1e-12)
        assert rep.dim_bound == 4

    def test_witness_is_fixed_identity(self):
        game, stats, _ = chsh_fixture()
        asg = game_dim_bound(game, stats).witness
        assert asg.e == (0, 1)
        assert asg.c == ((0, 1), (0, 1))
        assert set(asg.R) == set(itertools.product(BITS, BITS))

    def test_requires_unique(self):
        g = toy_three_answer_game()
        with pytest.raises(NotUnique):
            game_dim_bound(g, uniform_stats(g, 0.9))

    def test_merged_toy_game_is_sound(self):
        merged = merge_outcomes(toy_three_answer_game())
        rep = game_dim_bound(merged, uniform_stats(merged, 0.4))
        # p_s below 1/|A_s| is raised to chance, so the exponent is at most H(X) - 2
        assert rep.exponent <= 1e-12

    @pytest.mark.parametrize("p", [0.5, 0.6, GAMMA, 0.95, 1.0])
    @pytest.mark.parametrize("bob", [[[0.5, 0.5], [0.5, 0.5]], [[0.8, 0.2], [0.3, 0.7]]])
    def test_equals_fano_on_induced_table(self, p, bob):
        game = chsh_game()
        stats = ObservedStats(bob, [p, p])
        rep = game_dim_bound(game, stats)
        table = induced_table(game, stats)
        asg = Assignment.identity(table, strings=list(rep.prior.labels))
        assert fano_bound(table, asg, rep.prior).exponent == pytest.approx(rep.exponent, abs=1e-9)

    def test_three_answer_equals_fano(self):
        game = Game.from_predicate(BITS, (0, 1, 2), (0, 1, 2), (0, 1, 2), np.full((2, 3), 1 / 6),
                                   lambda a, b, s, t: a == (b + s * t) % 3)
        stats = uniform_stats(game, 0.7)
        rep = game_dim_bound(game, stats)
        table = induced_table(game, stats)
        asg = Assignment.identity(table, strings=[tuple(game.A.index(a) for a in x) for x in rep.prior.labels])
        assert fano_bound(table, asg, rep.prior.mass).exponent == pytest.approx(rep.exponent, abs=1e-9)

    def test_chance_level_is_trivial(self):
        game = Game.from_predicate(BITS, (0, 1, 2), (0, 1, 2), (0, 1, 2), np.full((2, 3), 1 / 6),
                                   lambda a, b, s, t: a == (b + s * t) % 3)
        assert game_dim_bound(game, uniform_stats(game, 1 / 3)).exponent <= 1e-9

    def test_transposed_game_bounds_bob(self):
        game, stats, _ = chsh_fixture()
        tg = transpose_game(game)
        assert check_unique(tg)
        assert transpose_game(tg) == game
        rep = game_dim_bound(tg, ObservedStats(np.full((2, 2), 0.5), [GAMMA, GAMMA]))
        assert rep.exponent == pytest.approx(2 * (1 - h2(GAMMA)), abs=1e-12)
        assert sum(rep.prior.mass) == pytest.approx(1.0)


class TestFixture:
    def test_table_entries(self):
        _, _, table = chsh_fixture()
        assert table.p(0, 0, 0) == pytest.approx(GAMMA)
        assert table.p(0, 1, 1) == pytest.approx(1 - GAMMA)
        assert table.probs.sum(axis=2) == pytest.approx(np.ones((2, 4)))

    def test_matches_induced_table(self):
        game, stats, table = chsh_fixture()
        assert np.allclose(induced_table(game, stats).probs, table.probs)


def test_game_json_round_trip():
    for g in (chsh_game(), merge_outcomes(toy_three_answer_game())):
        assert Game.from_json(g.to_json()) == g
    game, stats, _ = chsh_fixture()
    assert np.array_equal(ObservedStats.from_json(stats.to_json()).alice_success, stats.alice_success)


def test_stats_shape_checked():
    with pytest.raises(ShapeMismatch):
        game_dim_bound(chsh_game(), ObservedStats([[0.5, 0.5]], [0.9, 0.9]))
