"""Independent reference computations and random instance generators for the tests.

The oracles work on explicit positions and never touch the arena engine.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from blackwell.matrix import solve_matrix
from blackwell.model import (
    FINITE, OPEN_SET, GameSpec, MoveAlphabets, PayoffAutomaton, StateLabel, TableStrategy,
    finite_game_from_table, measure_of_position,
)

ALPH22 = MoveAlphabets(("a", "b"), ("c", "d"))


def rand_fraction(rng: random.Random, lo: int = -4, hi: int = 4, denom: int = 4) -> Fraction:
    return Fraction(rng.randint(lo * denom, hi * denom), denom)


def rand_row(rng: random.Random, n: int, denom: int = 6) -> tuple:
    cuts = sorted(rng.randint(0, denom) for _ in range(n - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [denom])]
    return tuple(Fraction(p, denom) for p in parts)


def random_alphabets(rng: random.Random, max_moves: int = 3) -> MoveAlphabets:
    nx, ny = rng.randint(1, max_moves), rng.randint(1, max_moves)
    return MoveAlphabets(tuple(f"x{i}" for i in range(nx)), tuple(f"y{j}" for j in range(ny)))


def random_table_game(rng: random.Random, horizon: int, alph: MoveAlphabets = ALPH22) -> GameSpec:
    payoff = {p: rand_fraction(rng) for p in alph.all_positions(horizon)}
    return finite_game_from_table(alph, horizon, payoff, bounds=(-4, 4))


def random_dfa(rng: random.Random, alph: MoveAlphabets, n_states: int, labelled: bool = True,
               terminal_rate: float = 0.15, accept_rate: float = 0.3) -> PayoffAutomaton:
    names = [f"q{i}" for i in range(n_states)]
    delta, labels = {}, {}
    for q in names:
        terminal = q != "q0" and rng.random() < terminal_rate
        if terminal:
            delta[q] = (q,) * alph.n_joint
        else:
            delta[q] = tuple(rng.choice(names) for _ in range(alph.n_joint))
        u = rand_fraction(rng) if labelled else None
        labels[q] = StateLabel(u=u, accepting=rng.random() < accept_rate, terminal=terminal)
    return PayoffAutomaton("q0", delta, labels, name="rand")


def random_dfa_game(rng: random.Random, horizon: int, alph: MoveAlphabets | None = None,
                    n_states: int | None = None) -> GameSpec:
    alph = alph or random_alphabets(rng)
    aut = random_dfa(rng, alph, n_states or rng.randint(1, 5))
    return GameSpec(alph, FINITE, (-4, 4), automata=(aut,), horizon=horizon, name="rand")


def random_open_set(rng: random.Random, alph: MoveAlphabets = ALPH22, n_states: int = 3) -> GameSpec:
    aut = random_dfa(rng, alph, n_states, labelled=False, terminal_rate=0.0, accept_rate=0.25)
    return GameSpec(alph, OPEN_SET, (0, 1), automata=(aut,), name="open")


def random_table_strategy(rng: random.Random, owner: str, alph: MoveAlphabets, depth: int) -> TableStrategy:
    n = len(alph.moves_of(owner))
    table = {p: rand_row(rng, n) for k in range(depth) for p in alph.all_positions(k)}
    return TableStrategy(owner, alph, table, depth)


# ---------------------------------------------------------------------------
# explicit-position oracles

def finite_payoff(spec: GameSpec, p) -> Fraction:
    """Payoff of a full-length position of a finite game, read off the automaton."""
    aut = spec.automaton
    q = aut.run(tuple(spec.start_position) + tuple(p))
    return spec.scale * aut.labels[q].u + spec.offset


def running_max_payoff(spec: GameSpec, p) -> Fraction:
    """Lower truncated payoff of a generalized-open game: best ``u`` seen along ``p``."""
    aut = spec.automaton
    q = aut.start
    best = aut.labels[q].u
    for z in p:
        q = aut.delta[q][z]
        best = max(best, aut.labels[q].u)
    return spec.scale * best + spec.offset


def explicit_value(alph: MoveAlphabets, depth: int, payoff, p=()) -> Fraction:
    """Backward induction over every position up to ``depth`` with exact one-round solves."""
    if len(p) == depth:
        return payoff(p)
    ny = len(alph.y_moves)
    M = [[explicit_value(alph, depth, payoff, p + (i * ny + j,)) for j in range(ny)]
         for i in range(len(alph.x_moves))]
    return solve_matrix(M, exact=True).value


def _pure_strategies(alph: MoveAlphabets, owner_is_I: bool):
    """All pure strategies of a two-round game: a first move plus a reply per first position."""
    n = len(alph.x_moves) if owner_is_I else len(alph.y_moves)
    for first in range(n):
        for replies in itertools.product(range(n), repeat=alph.n_joint):
            yield first, replies


def _dedupe(rows):
    seen, out = set(), []
    for r in rows:
        key = tuple(r)
        if key not in seen:
            seen.add(key)
            out.append(list(r))
    return out


def normal_form_value(spec: GameSpec) -> Fraction:
    """Value of a finite(2) game through its normal form.

    Every pure behavioral strategy pair is played out; identical rows and
    columns are merged (this keeps the value) before the exact solve.
    """
    alph = spec.alphabets
    ny = len(alph.y_moves)
    rows = []
    for x0, xr in _pure_strategies(alph, True):
        row = []
        for y0, yr in _pure_strategies(alph, False):
            z0 = x0 * ny + y0
            z1 = xr[z0] * ny + yr[z0]
            row.append(finite_payoff(spec, (z0, z1)))
        rows.append(row)
    rows = _dedupe(rows)
    cols = _dedupe(list(zip(*rows)))
    M = [list(r) for r in zip(*cols)]
    return solve_matrix(M, exact=True).value


def brute_force_expected(spec: GameSpec, sigma, tau) -> Fraction:
    n = spec.horizon - len(spec.start_position)
    return sum(measure_of_position(sigma, tau, p) * finite_payoff(spec, p)
               for p in spec.alphabets.all_positions(n))
