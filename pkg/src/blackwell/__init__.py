"""Solver and simulator for zero-sum simultaneous-move infinite games.

Payoffs are described by finite automata over joint moves. Finite games are
solved exactly by backward induction; open and G-delta objectives get value
brackets from lower and upper truncations.
"""
from .finite import (
    SolveReport, backward_induction, best_response, expected_payoff, state_subgame,
    stitch_strategies, strategy_value, truncate,
)
from .limits import (
    BracketTrace, gdelta_value_bracket, locally_optimal_strategy, open_value_bracket,
    union_value_limit, value_bracket, value_table,
)
from .matrix import INSIDE, MatrixSolution, separating_hyperplane, solve_matrix
from .model import (
    PLAYER_I, PLAYER_II, FiniteStateStrategy, GameSpec, MoveAlphabets, PayoffAutomaton,
    StateLabel, TableStrategy, ValueBracket, finite_game_from_table, matrix_game,
    measure_of_position, scale_shift_payoff, subgame, switch_players,
)
from .simulate import simulate
from .spec_format import SpecError, parse_game, parse_strategy, serialize

__version__ = "0.1.0"

__all__ = [
    "SolveReport",
    "backward_induction",
    "best_response",
    "expected_payoff",
    "state_subgame",
    "stitch_strategies",
    "strategy_value",
    "truncate",
    "BracketTrace",
    "gdelta_value_bracket",
    "locally_optimal_strategy",
    "open_value_bracket",
    "union_value_limit",
    "value_bracket",
    "value_table",
    "INSIDE",
    "MatrixSolution",
    "separating_hyperplane",
    "solve_matrix",
    "PLAYER_I",
    "PLAYER_II",
    "FiniteStateStrategy",
    "GameSpec",
    "MoveAlphabets",
    "PayoffAutomaton",
    "StateLabel",
    "TableStrategy",
    "ValueBracket",
    "finite_game_from_table",
    "matrix_game",
    "measure_of_position",
    "scale_shift_payoff",
    "subgame",
    "switch_players",
    "simulate",
    "SpecError",
    "parse_game",
    "parse_strategy",
    "serialize",
]
