"""Value brackets for infinite games and the locally optimal strategy.

Lower bounds come from truncations ``f_d`` of the payoff that never exceed
it on any continuation; upper bounds from truncations that never fall below
it. Both are finite games on an arena and are solved layer by layer, so a
whole trace of depths costs one sweep.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .arena import (
    Arena, counting_automaton, effective_start, explore, game_arena, gdelta_lower_arena,
    indicator, open_view,
)
from .finite import _finite_setup, markov_strategy, value_sweep
from .matrix import solve_matrix
from .model import (
    FINITE, GDELTA, GENERALIZED_OPEN, MATRIX, OPEN_SET, PLAYER_I, PLAYER_II, UNION,
    FiniteStateStrategy, GameSpec, PayoffAutomaton, ValueBracket,
)

CERTIFIED = "certified"
ESTIMATE = "estimate"
OPEN = "open"

STABLE_DEPTHS = 3


@dataclass
class BracketTrace:
    """Per-depth brackets ``[lower_d, upper_d]`` and a convergence verdict.

    ``estimates`` equals ``lower`` for open games; for G-delta games it holds
    the (upper-side) estimate from the open supersets. ``per_k`` maps each
    superset index to its final-depth ``(estimate, certified upper)``.
    """

    brackets: list
    verdict: str
    estimates: list
    k: int | None = None
    per_k: dict = field(default_factory=dict)

    @property
    def lower(self) -> list:
        return [b.lower for b in self.brackets]

    @property
    def upper(self) -> list:
        return [b.upper for b in self.brackets]

    @property
    def final(self) -> ValueBracket:
        return self.brackets[-1]


def _verdict(lower: Sequence, upper: Sequence, tol: float) -> str:
    if upper[-1] - lower[-1] <= tol:
        return CERTIFIED
    if len(lower) > STABLE_DEPTHS and all(
            abs(lower[-i] - lower[-i - 1]) < tol for i in range(1, STABLE_DEPTHS + 1)):
        return ESTIMATE
    return OPEN


def _sweep_from_start(spec: GameSpec, arena: Arena, depth: int, exact: bool, tol: float) -> list:
    s0, _ = effective_start(spec, arena)
    V = value_sweep(arena, spec.alphabets, depth, exact, tol)
    return [row[s0] for row in V]


def _check_depth(depth: int):
    if depth < 0:
        raise ValueError("depth must be >= 0")


def open_value_bracket(spec: GameSpec, max_depth: int, tol: float = 1e-6,
                       exact: bool = False) -> BracketTrace:
    """Brackets of a generalized-open, open-set or union game for depths ``0..max_depth``.

    ``lower_d`` is the value of the game paying the running maximum of ``u``
    after ``d`` rounds; ``upper_d`` additionally credits the best ``u`` still
    reachable. The lower sequence converges to the value; the upper one only
    certifies and may stay put.
    """
    if spec.kind not in (GENERALIZED_OPEN, OPEN_SET, UNION):
        raise ValueError(f"open brackets need an open-type game, not {spec.kind}")
    _check_depth(max_depth)
    lo_arena, _ = game_arena(spec, "lower")
    hi_arena, _ = game_arena(spec, "upper")
    lower = _sweep_from_start(spec, lo_arena, max_depth, exact, tol)
    upper = _sweep_from_start(spec, hi_arena, max_depth, exact, tol)
    brackets = [ValueBracket(lo, hi, d, tol) for d, (lo, hi) in enumerate(zip(lower, upper))]
    return BracketTrace(brackets, _verdict(lower, upper, tol), list(lower))


def _check_union_family(specs: Sequence[GameSpec]):
    if not specs:
        raise ValueError("need at least one open-set game")
    alph = specs[0].alphabets
    for s in specs:
        if s.kind != OPEN_SET:
            raise ValueError(f"union members must be open-set games, not {s.kind}")
        if s.alphabets != alph:
            raise ValueError(f"alphabet mismatch in union member {s.name!r}")
        if s.scale != 1 or s.offset != 0 or s.start_position:
            raise ValueError(f"union member {s.name!r} must be a plain indicator game")


def union_spec(specs: Sequence[GameSpec], name: str = "union") -> GameSpec:
    _check_union_family(specs)
    return GameSpec(specs[0].alphabets, UNION, (Fraction(0), Fraction(1)),
                    automata=tuple(s.automaton for s in specs), name=name)


def union_bracket_traces(specs: Sequence[GameSpec], n: int | None = None, depth: int = 8,
                         tol: float = 1e-6, exact: bool = False) -> list[BracketTrace]:
    """Bracket trace of the union of the first ``j`` open sets, for ``j = 1..n``."""
    _check_union_family(specs)
    n = len(specs) if n is None else n
    if not 1 <= n <= len(specs):
        raise ValueError(f"n must lie in [1, {len(specs)}]")
    return [open_value_bracket(union_spec(specs[:j]), depth, tol, exact) for j in range(1, n + 1)]


def union_value_limit(specs: Sequence[GameSpec], n: int | None = None, depth: int = 8,
                      tol: float = 1e-6, exact: bool = False) -> list:
    """Depth-``depth`` lower estimates for the growing unions; nondecreasing in ``j``."""
    return [t.final.lower for t in union_bracket_traces(specs, n, depth, tol, exact)]


def _avoiders(aut: PayoffAutomaton) -> set:
    """States with an infinite continuation that never accepts."""
    stay = {q for q, lab in aut.labels.items() if not lab.accepting}
    changed = True
    while changed:
        changed = False
        for q in list(stay):
            if not any(t in stay for t in aut.delta[q]):
                stay.discard(q)
                changed = True
    return stay


def hits_covered(inner: PayoffAutomaton, outer: PayoffAutomaton) -> bool:
    """Whether every position at which ``inner`` has accepted is one where ``outer`` has.

    Acceptance is sticky: a play has accepted at a position once some prefix
    reached an accepting state.
    """
    if inner.width != outer.width:
        raise ValueError("automata over different joint alphabets")

    def flag(aut, q, seen):
        return seen or aut.labels[q].accepting

    start = (inner.start, outer.start, flag(inner, inner.start, False), flag(outer, outer.start, False))

    def step(c, z):
        a, b, fa, fb = c
        a2, b2 = inner.delta[a][z], outer.delta[b][z]
        return (a2, b2, flag(inner, a2, fa), flag(outer, b2, fb))

    order, _, _ = explore(start, step, inner.width)
    return not any(fa and not fb for _, _, fa, fb in order)


def open_set_contained(inner: PayoffAutomaton, outer: PayoffAutomaton) -> bool:
    """Whether the open set of plays ``inner`` accepts lies inside ``outer``'s."""
    avoid = _avoiders(outer)
    start = (inner.start, outer.start, inner.labels[inner.start].accepting,
             outer.labels[outer.start].accepting)

    def step(c, z):
        a, b, fa, fb = c
        a2, b2 = inner.delta[a][z], outer.delta[b][z]
        return (a2, b2, fa or inner.labels[a2].accepting, fb or outer.labels[b2].accepting)

    order, _, _ = explore(start, step, inner.width)
    return not any(fa and not fb and b in avoid for _, b, fa, fb in order)


def gdelta_value_bracket(spec: GameSpec, k_max: int = 8, depth: int = 8, tol: float = 1e-6,
                         exact: bool = False) -> BracketTrace:
    """Brackets for a game paying on plays that visit accepting states infinitely often.

    For each ``k <= k_max`` the open set "accepting visited at least ``k``
    times" contains the target set, so its certified upper bound and its
    depth-``d`` lower value both sit above the target value. The lower bound
    credits only states from which every continuation keeps accepting.

    With a negative payoff scale the two constructions trade places: the
    supersets give the lower bound and ``estimates`` repeats it.
    """
    if spec.kind != GDELTA:
        raise ValueError(f"G-delta brackets need a gdelta game, not {spec.kind}")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    _check_depth(depth)
    aut = spec.automaton
    a, c = spec.scale, spec.offset

    def sweep(arena):
        arena = arena.affine(a, c)
        s0 = arena.run(spec.start_position)
        return [row[s0] for row in value_sweep(arena, spec.alphabets, depth, exact, tol)]

    sure = sweep(gdelta_lower_arena(aut))
    sup_lo, sup_hi = [], []
    for k in range(1, k_max + 1):
        ck = counting_automaton(aut, k)
        view = open_view(ck, indicator(ck))
        sup_lo.append(sweep(view.arena))
        sup_hi.append(sweep(view.arena.relabel(view.upper)))
    steps = range(depth + 1)
    if a >= 0:
        lower = sure
        upper = [min(s[d] for s in sup_hi) for d in steps]
        estimates = [min(s[d] for s in sup_lo) for d in steps]
    else:
        # the supersets now bound from below; no separate estimate
        lower = [max(s[d] for s in sup_hi) for d in steps]
        upper = sure
        estimates = list(lower)
    brackets = [ValueBracket(lo, hi, d, tol) for d, (lo, hi) in enumerate(zip(lower, upper))]
    per_k = {k: (sup_lo[k - 1][-1], sup_hi[k - 1][-1]) for k in range(1, k_max + 1)}
    return BracketTrace(brackets, _verdict(lower, upper, tol), estimates, k=k_max, per_k=per_k)


def value_bracket(spec: GameSpec, depth: int, k_max: int = 8, tol: float = 1e-6,
                  exact: bool = False) -> BracketTrace:
    """Dispatch on the payoff kind; finite kinds give a degenerate certified trace."""
    if spec.kind == GDELTA:
        return gdelta_value_bracket(spec, k_max, depth, tol, exact)
    if spec.kind in (FINITE, MATRIX):
        from .finite import backward_induction
        v = backward_induction(spec, exact, min(tol, 1e-9)).value
        return BracketTrace([ValueBracket(v, v, 0, tol)], CERTIFIED, [v])
    return open_value_bracket(spec, depth, tol, exact)


def value_table(spec: GameSpec, depth: int, which: str = "lower", exact: bool = False,
                tol: float = 1e-9) -> dict:
    """``{(state name, remaining): value}`` for the lower or upper truncation."""
    if spec.kind in (FINITE, MATRIX):
        from .finite import backward_induction
        return backward_induction(spec, exact, tol).value_at
    arena, _ = game_arena(spec, which)
    V = value_sweep(arena, spec.alphabets, depth, exact, tol)
    return {(arena.names[s], r): V[r][s] for r in range(depth + 1) for s in range(len(arena.names))}


def locally_optimal_strategy(spec: GameSpec, value_oracle: Mapping | Callable, depth: int | None = None,
                             player: str = PLAYER_I, which: str = "lower", exact: bool = False,
                             tol: float = 1e-9) -> FiniteStateStrategy:
    """Play, in every round, the one-round optimal mix against the oracle's child values.

    ``value_oracle`` maps ``(state name, remaining rounds)`` to a value, as a
    mapping or a callable. Stopped children fall back to their own payoff when
    the oracle has no entry. The strategy covers ``depth`` rounds (the horizon
    for finite games) and plays uniformly afterwards.
    """
    if player not in (PLAYER_I, PLAYER_II):
        raise ValueError(f"unknown player {player!r}")
    arena, s0, horizon = _finite_setup(spec, depth, which)
    lookup = value_oracle if callable(value_oracle) else None

    def oracle(s, r):
        name = arena.names[s]
        if lookup is not None:
            v = lookup(name, r)
        else:
            v = value_oracle.get((name, r))
        if v is None:
            if arena.stop[s] and arena.label[s] is not None:
                return arena.label[s]
            raise ValueError(f"value oracle has no entry for state {name!r} with {r} rounds left")
        return v

    alph = spec.alphabets
    nx, ny = len(alph.x_moves), len(alph.y_moves)

    def dist(s, t):
        r = horizon - t
        row = arena.succ[s]
        M = [[oracle(row[i * ny + j], r - 1) for j in range(ny)] for i in range(nx)]
        sol = solve_matrix(M, tol=tol, exact=exact)
        return sol.row_strategy if player == PLAYER_I else sol.col_strategy

    return markov_strategy(player, alph, arena, s0, horizon, dist)
