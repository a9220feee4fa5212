import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from blackwell.examples import match_round, sps, stop_sigma, stopgame
from blackwell.finite import (
    backward_induction, best_response, expected_payoff, state_subgame, stitch_strategies,
    strategy_value, truncate,
)
from blackwell.matrix import solve_matrix
from blackwell.model import (
    FINITE, PLAYER_I, PLAYER_II, FiniteStateStrategy, GameSpec, PayoffAutomaton,
    StateLabel, TableStrategy, finite_game_from_table, subgame,
)

from oracles import (
    ALPH22, brute_force_expected, explicit_value, finite_payoff, normal_form_value,
    random_dfa_game, random_table_game, random_table_strategy,
)

SPS_ALPH = sps().alphabets


def sps_finite():
    g = sps()
    table = {(SPS_ALPH.joint(i, j),): g.matrix[i][j] for i in range(3) for j in range(3)}
    return finite_game_from_table(SPS_ALPH, 1, table, bounds=(-1, 1), name="sps1")


def pure(owner, move, alph=SPS_ALPH):
    return FiniteStateStrategy.pure(owner, alph, move)


class TestBackwardInduction:
    def test_sps_as_finite_game(self):
        rep = backward_induction(sps_finite(), exact=True)
        assert rep.value == 0
        assert rep.strategy_I.at(()) == (Fraction(1, 3),) * 3
        assert rep.horizon == 1

    def test_matrix_kind(self):
        assert backward_induction(sps(), exact=True).value == 0

    def test_history_independent_second_round(self):
        g = sps()
        table = {p: g.matrix[SPS_ALPH.split(p[1])[0]][SPS_ALPH.split(p[1])[1]]
                 for p in SPS_ALPH.all_positions(2)}
        spec = finite_game_from_table(SPS_ALPH, 2, table, bounds=(-1, 1))
        assert backward_induction(spec, exact=True).value == 0

    def test_value_table_invariants(self):
        spec = random_dfa_game(random.Random(4), 3, ALPH22, 4)
        rep = backward_induction(spec, exact=True)
        aut = spec.automaton
        for (q, r), v in rep.value_at.items():
            if r == 0 or aut.labels[q].terminal:
                assert v == aut.labels[q].u
            else:
                M = [[rep.value_at[(aut.delta[q][ALPH22.joint(i, j)], r - 1)] for j in range(2)]
                     for i in range(2)]
                assert v == solve_matrix(M, exact=True).value

    def test_missing_label_raises(self):
        aut = PayoffAutomaton("s", {"s": ("t",) * 4, "t": ("t",) * 4},
                              {"s": StateLabel(u=0), "t": StateLabel(u=1)})
        spec = GameSpec(ALPH22, FINITE, (0, 1), automata=(aut,), horizon=1)
        object.__setattr__(spec, "automata", (PayoffAutomaton(
            "s", {"s": ("t",) * 4, "t": ("t",) * 4}, {"s": StateLabel(u=0), "t": StateLabel()}),))
        with pytest.raises(ValueError, match="missing payoff label at horizon"):
            backward_induction(spec)

    def test_infinite_kind_rejected(self):
        with pytest.raises(ValueError, match="finite or matrix"):
            backward_induction(stopgame())

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6))
    def test_normal_form_oracle(self, seed):
        spec = random_table_game(random.Random(seed), 2)
        assert backward_induction(spec, exact=True).value == normal_form_value(spec)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6))
    def test_explicit_position_oracle(self, seed):
        rng = random.Random(seed)
        spec = random_dfa_game(rng, rng.randint(0, 3))
        v = explicit_value(spec.alphabets, spec.horizon, lambda p: finite_payoff(spec, p))
        assert backward_induction(spec, exact=True).value == v

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6), st.booleans())
    def test_optimality_certificates(self, seed, exact):
        rng = random.Random(seed)
        spec = random_dfa_game(rng, rng.randint(1, 3))
        rep = backward_induction(spec, exact=exact)
        assert strategy_value(spec, rep.strategy_I) == pytest.approx(rep.value, abs=1e-7)
        assert strategy_value(spec, rep.strategy_II) == pytest.approx(rep.value, abs=1e-7)

    def test_start_position_subgame(self):
        spec = random_table_game(random.Random(2), 2)
        rep = backward_induction(spec, exact=True)
        sub = backward_induction(subgame(spec, (1,)), exact=True)
        assert sub.horizon == 1
        assert sub.value == rep.value_at[("a.d", 1)]


class TestExpectedPayoff:
    def test_sps_uniform(self):
        u1 = FiniteStateStrategy.uniform_strategy(PLAYER_I, SPS_ALPH)
        u2 = FiniteStateStrategy.uniform_strategy(PLAYER_II, SPS_ALPH)
        assert expected_payoff(sps(), u1, u2) == 0

    def test_stone_loses_to_paper(self):
        assert expected_payoff(sps(), pure(PLAYER_I, "stone"), pure(PLAYER_II, "paper")) == -1

    @pytest.mark.parametrize("n", [2, 3, 6])
    def test_stop_sigma_against_matching(self, n):
        for j in range(1, n + 1):
            assert expected_payoff(stopgame(), stop_sigma(n), match_round(j), depth=n) == 1 - Fraction(1, n)

    def test_owner_checked(self):
        u = FiniteStateStrategy.uniform_strategy(PLAYER_I, SPS_ALPH)
        with pytest.raises(ValueError, match="player II"):
            expected_payoff(sps(), u, u)

    def test_infinite_kind_needs_depth(self):
        with pytest.raises(ValueError, match="depth"):
            expected_payoff(stopgame(), stop_sigma(2), match_round(1))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_matches_position_sum(self, seed):
        rng = random.Random(seed)
        spec = random_dfa_game(rng, rng.randint(0, 3))
        sigma = random_table_strategy(rng, PLAYER_I, spec.alphabets, spec.horizon)
        tau = random_table_strategy(rng, PLAYER_II, spec.alphabets, spec.horizon)
        assert expected_payoff(spec, sigma, tau) == brute_force_expected(spec, sigma, tau)


class TestBestResponse:
    def test_optimal_sps_strategy(self):
        rep = backward_induction(sps(), exact=True)
        _, v = best_response(sps(), rep.strategy_I)
        assert v == 0

    def test_pure_stone(self):
        resp, v = best_response(sps(), pure(PLAYER_I, "stone"))
        assert v == -1
        assert resp.at(()) == (0, 1, 0)  # paper

    def test_tie_break_lowest_index(self):
        u = FiniteStateStrategy.uniform_strategy(PLAYER_I, SPS_ALPH)
        resp, v = best_response(sps(), u)
        assert v == 0 and resp.at(()) == (1, 0, 0)

    @pytest.mark.parametrize("n", [2, 5, 9])
    def test_stop_sigma_value(self, n):
        resp, v = best_response(stopgame(), stop_sigma(n), depth=n)
        assert v == 1 - Fraction(1, n)
        assert expected_payoff(stopgame(), stop_sigma(n), resp, depth=n) == v

    def test_stop_sigma_beyond_its_depth(self):
        # after round n the table is exhausted and play is uniform; the guarantee stays put
        _, v = best_response(stopgame(), stop_sigma(3), depth=8)
        assert v == Fraction(2, 3)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10**6))
    def test_no_sampled_pure_strategy_does_better(self, seed):
        rng = random.Random(seed)
        spec = random_table_game(rng, 2)
        sigma = random_table_strategy(rng, PLAYER_I, ALPH22, 2)
        resp, v = best_response(spec, sigma)
        assert expected_payoff(spec, sigma, resp) == v
        for _ in range(10):
            table = {p: (1, 0) if rng.random() < 0.5 else (0, 1) for k in range(2) for p in ALPH22.all_positions(k)}
            tau = TableStrategy(PLAYER_II, ALPH22, table, 2)
            assert expected_payoff(spec, sigma, tau) >= v


def _depth_values(spec, rep, k):
    return {q: rep.value_at[(q, spec.horizon - k)] for q in spec.automaton.layer(k)}


class TestTruncate:
    def test_exact_boundary_values_keep_value(self):
        spec = random_table_game(random.Random(7), 2)
        rep = backward_induction(spec, exact=True)
        cut = truncate(spec, 1, _depth_values(spec, rep, 1))
        assert cut.horizon == 2
        assert backward_induction(cut, exact=True).value == rep.value

    def test_depth_zero_is_constant(self):
        spec = random_table_game(random.Random(8), 2)
        cut = truncate(spec, 0, {"e": Fraction(3, 4)})
        assert backward_induction(cut, exact=True).value == Fraction(3, 4)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 2))
    def test_lowered_boundary_lowers_value(self, seed, k):
        rng = random.Random(seed)
        spec = random_dfa_game(rng, 3, ALPH22, rng.randint(2, 6))
        rep = backward_induction(spec, exact=True)
        values = {q: v - Fraction(rng.randint(0, 4), 4) for q, v in _depth_values(spec, rep, k).items()}
        spec = GameSpec(spec.alphabets, spec.kind, (-6, 4), automata=spec.automata, horizon=3)
        assert backward_induction(truncate(spec, k, values), exact=True).value <= rep.value

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10**6))
    def test_nested_truncations_agree(self, seed):
        rng = random.Random(seed)
        spec = random_dfa_game(rng, 3, ALPH22, rng.randint(2, 6))
        rep = backward_induction(spec, exact=True)
        cut2 = truncate(spec, 2, _depth_values(spec, rep, 2))
        rep2 = backward_induction(cut2, exact=True)
        cut1 = truncate(cut2, 1, _depth_values(cut2, rep2, 1))
        assert rep.value == rep2.value == backward_induction(cut1, exact=True).value

    def test_position_boundary(self):
        spec = random_table_game(random.Random(11), 2)
        rep = backward_induction(spec, exact=True)
        boundary = [(0,), (1,), (2, 0), (2, 1), (2, 2), (2, 3), (3,)]
        values = {p: backward_induction(
            GameSpec(spec.alphabets, FINITE, spec.bounds, automata=spec.automata, horizon=2, start_position=p),
            exact=True).value for p in boundary}
        assert backward_induction(truncate(spec, boundary, values), exact=True).value == rep.value

    def test_non_antichain_rejected(self):
        spec = random_table_game(random.Random(1), 2)
        with pytest.raises(ValueError, match="antichain"):
            truncate(spec, [(0,), (0, 1)], {(0,): 0, (0, 1): 0})

    def test_values_checked(self):
        spec = random_table_game(random.Random(1), 2)
        with pytest.raises(ValueError, match="no boundary value"):
            truncate(spec, 1, {})
        with pytest.raises(ValueError, match="outside bounds"):
            truncate(spec, 0, {"e": 10})

    def test_infinite_kind_rejected(self):
        with pytest.raises(ValueError, match="finite and matrix"):
            truncate(stopgame(), 1, {"live": 0})


class TestStitch:
    def test_uniform_everywhere(self):
        spec = random_table_game(random.Random(3), 2)
        u = FiniteStateStrategy.uniform_strategy(PLAYER_I, ALPH22)
        s = stitch_strategies(u, {"a.c": u}, spec, 1)
        half = (Fraction(1, 2), Fraction(1, 2))
        assert all(s.at(p) == half for k in range(3) for p in ALPH22.all_positions(k))

    def test_follows_outer_then_inner(self):
        spec = random_table_game(random.Random(3), 2)
        outer = FiniteStateStrategy.pure(PLAYER_I, ALPH22, "a")
        inner = FiniteStateStrategy.pure(PLAYER_I, ALPH22, "b")
        s = stitch_strategies(outer, {q: inner for q in ("a.c", "a.d", "b.c", "b.d")}, spec, 1)
        assert s.at(()) == (1, 0)
        assert s.at((2,)) == (0, 1)
        assert s.at((2, 1)) == (0, 1)

    def test_overlapping_domains_rejected(self):
        spec = random_table_game(random.Random(3), 2)
        outer = TableStrategy(PLAYER_I, ALPH22, {(): (1, 0), (0,): (1, 0)})
        with pytest.raises(ValueError, match="overlapping domains"):
            stitch_strategies(outer, {}, spec, 1)

    def test_owner_mismatch(self):
        spec = random_table_game(random.Random(3), 2)
        with pytest.raises(ValueError, match="different players"):
            stitch_strategies(FiniteStateStrategy.uniform_strategy(PLAYER_I, ALPH22),
                              {"a.c": FiniteStateStrategy.uniform_strategy(PLAYER_II, ALPH22)}, spec, 1)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10**6))
    def test_suboptimal_inner_costs_at_most_its_gap(self, seed):
        rng = random.Random(seed)
        spec = random_dfa_game(rng, 3, ALPH22, rng.randint(2, 5))
        rep = backward_induction(spec, exact=True)
        states = spec.automaton.layer(1)
        cut = truncate(spec, 1, _depth_values(spec, rep, 1))
        outer = backward_induction(cut, exact=True).strategy_I
        inner, gap = {}, Fraction(0)
        for q in states:
            sub = state_subgame(spec, q, 1)
            strat = random_table_strategy(rng, PLAYER_I, ALPH22, 2)
            gap = max(gap, backward_induction(sub, exact=True).value - strategy_value(sub, strat))
            inner[q] = strat
        stitched = stitch_strategies(outer, inner, spec, 1)
        assert strategy_value(spec, stitched) >= rep.value - gap
