"""Built-in example games and strategies."""
from __future__ import annotations

from fractions import Fraction

from .model import (
    GDELTA, GENERALIZED_OPEN, PLAYER_I, PLAYER_II,
    FiniteStateStrategy, GameSpec, MoveAlphabets, PayoffAutomaton, StateLabel, TableStrategy,
    matrix_game,
)

STOP, CONTINUE = "stop", "continue"
STOP_MOVES = (STOP, CONTINUE)


def sps() -> GameSpec:
    """Scissors-paper-stone: the loser pays the winner one unit."""
    moves = ("scissors", "paper", "stone")
    beats = {("scissors", "paper"), ("paper", "stone"), ("stone", "scissors")}
    M = [[1 if (a, b) in beats else -1 if (b, a) in beats else 0 for b in moves] for a in moves]
    return matrix_game(M, moves, moves, bounds=(-1, 1), name="sps")


def stopgame() -> GameSpec:
    """Each round both players say stop or continue.

    Player I wins (payoff 1) once exactly one of them says stop; if both stop
    at once, or play continues forever, player I gets 0.
    """
    alph = MoveAlphabets(STOP_MOVES, STOP_MOVES)
    live = []
    for z in range(alph.n_joint):
        x, y = alph.joint_labels(z)
        if x == STOP and y == STOP:
            live.append("II-won")
        elif STOP in (x, y):
            live.append("I-won")
        else:
            live.append("live")
    delta = {
        "live": tuple(live),
        "I-won": ("I-won",) * alph.n_joint,
        "II-won": ("II-won",) * alph.n_joint,
    }
    labels = {
        "live": StateLabel(u=Fraction(0)),
        "I-won": StateLabel(u=Fraction(1), terminal=True),
        "II-won": StateLabel(u=Fraction(0), terminal=True),
    }
    aut = PayoffAutomaton("live", delta, labels, name="stop")
    return GameSpec(alph, GENERALIZED_OPEN, (Fraction(0), Fraction(1)), automata=(aut,), name="stopgame")


def _ones_automaton(alph: MoveAlphabets) -> PayoffAutomaton:
    row = tuple("one" if alph.joint_labels(z)[1] == "1" else "wait" for z in range(alph.n_joint))
    delta = {"wait": row, "one": row}
    labels = {"wait": StateLabel(), "one": StateLabel(accepting=True)}
    return PayoffAutomaton("wait", delta, labels, name="ones")


def inf_ones() -> GameSpec:
    """Player I wins when player II plays 1 infinitely often (II can always avoid it)."""
    alph = MoveAlphabets(("0", "1"), ("0", "1"))
    return GameSpec(alph, GDELTA, (Fraction(0), Fraction(1)), automata=(_ones_automaton(alph),),
                    name="inf-ones")


def fin_ones() -> GameSpec:
    """Complement of :func:`inf_ones`: player I wins when II plays 1 only finitely often."""
    alph = MoveAlphabets(("0", "1"), ("0", "1"))
    return GameSpec(alph, GDELTA, (Fraction(0), Fraction(1)), automata=(_ones_automaton(alph),),
                    name="fin-ones", scale=Fraction(-1), offset=Fraction(1))


GAMES = {"sps": sps, "stopgame": stopgame, "inf-ones": inf_ones, "fin-ones": fin_ones}


def stop_sigma(n: int) -> TableStrategy:
    """Player I says stop with probability ``1/(n-k+1)`` in round ``k`` while play is live.

    Whatever player II does, I wins with probability at least ``1 - 1/n``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    alph = stopgame().alphabets
    cc = alph.joint(STOP_MOVES.index(CONTINUE), STOP_MOVES.index(CONTINUE))
    table = {}
    for k in range(1, n + 1):
        p = Fraction(1, n - k + 1)
        table[(cc,) * (k - 1)] = (p, 1 - p)
    return TableStrategy(PLAYER_I, alph, table, depth=n)


def never_stop(owner: str = PLAYER_II) -> FiniteStateStrategy:
    return FiniteStateStrategy.pure(owner, stopgame().alphabets, CONTINUE)


def match_round(j: int) -> TableStrategy:
    """Player II continues until round ``j`` and stops there."""
    alph = stopgame().alphabets
    cc = alph.joint(1, 1)
    table = {(cc,) * (k - 1): (Fraction(int(k == j)), Fraction(int(k != j))) for k in range(1, j + 1)}
    return TableStrategy(PLAYER_II, alph, table, depth=j)
