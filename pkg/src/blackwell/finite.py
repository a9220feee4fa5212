"""Finite games: backward induction, exact evaluation, best response, truncation.

All routines work on the arena of a spec (see :mod:`blackwell.arena`), so
their cost is governed by (automaton state, remaining rounds) rather than by
the number of positions. Infinite kinds can be evaluated at a cut-off
``depth`` using their lower or upper truncated payoff.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping

from .arena import Arena, BoundaryTracker, _unique_names, explore, game_arena, effective_start
from .matrix import solve_matrix
from .model import (
    FINITE, MATRIX, PLAYER_I, PLAYER_II,
    BehavioralStrategy, FiniteStateStrategy, GameSpec, MoveAlphabets, PayoffAutomaton,
    StateLabel, StitchedStrategy, TableStrategy,
)


@dataclass
class SolveReport:
    value: object
    value_at: dict          # (arena state name, remaining rounds) -> value
    strategy_I: FiniteStateStrategy
    strategy_II: FiniteStateStrategy
    horizon: int
    solutions: dict = field(default_factory=dict, repr=False)


def _convert(v, exact: bool):
    return v if exact else float(v)


def _label(arena: Arena, s: int, exact: bool):
    v = arena.label[s]
    if v is None:
        raise ValueError(f"missing payoff label at horizon: state {arena.names[s]!r}")
    return _convert(v, exact)


def _one_step_matrix(arena: Arena, alph: MoveAlphabets, s: int, value) -> list[list]:
    nx, ny = len(alph.x_moves), len(alph.y_moves)
    row = arena.succ[s]
    return [[value(row[i * ny + j]) for j in range(ny)] for i in range(nx)]


def solve_arena(arena: Arena, alph: MoveAlphabets, horizon: int, start: int | None = None,
                exact: bool = False, tol: float = 1e-9):
    """Values and one-round solutions on every (state, remaining) pair reachable from ``start``."""
    layers = arena.layers(horizon, start)
    values, sols = {}, {}
    for t in range(horizon, -1, -1):
        r = horizon - t
        for s in layers[t]:
            if arena.stop[s] or r == 0:
                values[s, r] = _label(arena, s, exact)
                continue
            M = _one_step_matrix(arena, alph, s, lambda c: values[c, r - 1])
            sol = solve_matrix(M, tol=tol, exact=exact)
            sols[s, r] = sol
            values[s, r] = sol.value
    return values, sols


def value_sweep(arena: Arena, alph: MoveAlphabets, depth: int, exact: bool = False,
                tol: float = 1e-9) -> list[list]:
    """``V[r][s]``: value with ``r`` rounds left, for every arena state and r <= depth."""
    V = [[_label(arena, s, exact) for s in range(len(arena.names))]]
    for r in range(1, depth + 1):
        prev = V[-1]
        cur = []
        for s in range(len(arena.names)):
            if arena.stop[s]:
                cur.append(prev[s])
            else:
                cur.append(solve_matrix(_one_step_matrix(arena, alph, s, prev.__getitem__),
                                        tol=tol, exact=exact).value)
        V.append(cur)
    return V


def markov_strategy(owner: str, alph: MoveAlphabets, arena: Arena, start: int, horizon: int,
                    dist, stationary: bool = False) -> FiniteStateStrategy:
    """Strategy whose distribution depends on (arena state, round).

    ``dist(s, t)`` gives the distribution at live state ``s`` in round ``t``.
    Past the horizon play is uniform, or keeps using round ``horizon`` when
    ``stationary``; stopped states also play uniformly.
    """
    moves = alph.moves_of(owner)
    uniform = (Fraction(1, len(moves)),) * len(moves)
    end = "end"

    def live(c):
        return not arena.stop[c[0]] and (c[1] < horizon or stationary)

    def step(c, z):
        nxt = (arena.succ[c[0]][z], min(c[1] + 1, horizon))
        return nxt if live(nxt) else end

    start_c = (start, 0)
    if not live(start_c):
        start_c = end
    order, _, succ = explore(start_c, step, alph.n_joint, lambda c: c == end)
    names = [end if c == end else f"{arena.names[c[0]]}@{c[1]}" for c in order]
    delta = {names[i]: tuple(names[t] for t in succ[i]) for i in range(len(order))}
    rows = {names[i]: (uniform if c == end else tuple(dist(*c))) for i, c in enumerate(order)}
    return FiniteStateStrategy(owner, alph, names[0], delta, rows)


def _finite_setup(spec: GameSpec, depth, which):
    arena, horizon = game_arena(spec, which)
    s0, used = effective_start(spec, arena)
    if horizon is None:
        if depth is None:
            raise ValueError(f"{spec.kind} games need an evaluation depth")
        return arena, s0, depth
    return arena, s0, horizon - used


def backward_induction(spec: GameSpec, exact: bool = False, tol: float = 1e-9) -> SolveReport:
    """Value and optimal Markov strategies of a finite (or matrix) game."""
    if spec.kind not in (FINITE, MATRIX):
        raise ValueError(f"backward induction needs a finite or matrix game, not {spec.kind}")
    arena, s0, horizon = _finite_setup(spec, None, "lower")
    values, sols = solve_arena(arena, spec.alphabets, horizon, s0, exact, tol)

    def dist_for(owner):
        def dist(s, t):
            sol = sols.get((s, horizon - t))
            if sol is None:
                n = len(spec.alphabets.moves_of(owner))
                return (Fraction(1, n),) * n
            return sol.row_strategy if owner == PLAYER_I else sol.col_strategy
        return dist

    sI = markov_strategy(PLAYER_I, spec.alphabets, arena, s0, horizon, dist_for(PLAYER_I))
    sII = markov_strategy(PLAYER_II, spec.alphabets, arena, s0, horizon, dist_for(PLAYER_II))
    value_at = {(arena.names[s], r): v for (s, r), v in values.items()}
    named = {(arena.names[s], r): sol for (s, r), sol in sols.items()}
    return SolveReport(values[s0, horizon], value_at, sI, sII, horizon, named)


def _check_owned(spec: GameSpec, strat: BehavioralStrategy, owner: str):
    if strat.owner != owner:
        raise ValueError(f"expected a strategy for player {owner}, got player {strat.owner}")
    if strat.alphabets != spec.alphabets:
        raise ValueError("strategy and game use different move alphabets")


def expected_payoff(spec: GameSpec, sigma: BehavioralStrategy, tau: BehavioralStrategy,
                    depth: int | None = None, which: str = "lower"):
    """Exact expected payoff of ``(sigma, tau)``.

    Finite kinds use their own horizon; infinite kinds are cut at ``depth``
    with the lower (default) or upper truncated payoff. Arithmetic follows the
    inputs: rational strategies give a ``Fraction``.
    """
    _check_owned(spec, sigma, PLAYER_I)
    _check_owned(spec, tau, PLAYER_II)
    arena, s0, horizon = _finite_setup(spec, depth, which)
    alph = spec.alphabets
    ny = len(alph.y_moves)
    memo = {}

    def E(ks, kt, s, r):
        if arena.stop[s] or r == 0:
            return _label(arena, s, True)
        key = (ks, kt, s, r)
        if key in memo:
            return memo[key]
        ps, pt = sigma.distribution(ks), tau.distribution(kt)
        total = 0
        for i, a in enumerate(ps):
            if a == 0:
                continue
            for j, b in enumerate(pt):
                if b == 0:
                    continue
                z = i * ny + j
                total += a * b * E(sigma.advance(ks, z), tau.advance(kt, z), arena.succ[s][z], r - 1)
        memo[key] = total
        return total

    return E(sigma.initial(), tau.initial(), s0, horizon)


def best_response(spec: GameSpec, fixed: BehavioralStrategy, depth: int | None = None,
                  which: str = "lower", tol: float = 1e-9):
    """Pure counterstrategy against ``fixed`` and the value it holds ``fixed`` to.

    The returned value is ``val(fixed)``: the infimum (for a player I strategy)
    or supremum (player II) of the expected payoff over all counterstrategies.
    Ties go to the lowest-index move.
    """
    if fixed.alphabets != spec.alphabets:
        raise ValueError("strategy and game use different move alphabets")
    arena, s0, horizon = _finite_setup(spec, depth, which)
    alph = spec.alphabets
    nx, ny = len(alph.x_moves), len(alph.y_moves)
    fixed_is_I = fixed.owner == PLAYER_I
    n_resp = ny if fixed_is_I else nx
    memo, choice = {}, {}

    def W(k, s, r):
        if arena.stop[s] or r == 0:
            return _label(arena, s, True)
        key = (k, s, r)
        if key in memo:
            return memo[key]
        p = fixed.distribution(k)
        scores = []
        for m in range(n_resp):
            total = 0
            for f, a in enumerate(p):
                if a == 0:
                    continue
                z = f * ny + m if fixed_is_I else m * ny + f
                total += a * W(fixed.advance(k, z), arena.succ[s][z], r - 1)
            scores.append(total)
        best = min(scores) if fixed_is_I else max(scores)
        pick = next(m for m, v in enumerate(scores) if abs(v - best) <= (tol if isinstance(v, float) else 0))
        memo[key], choice[key] = best, pick
        return best

    value = W(fixed.initial(), s0, horizon)

    resp_owner = PLAYER_II if fixed_is_I else PLAYER_I
    end = "end"

    def live(c):
        return c != end and not arena.stop[c[1]] and c[2] < horizon

    def step(c, z):
        nxt = (fixed.advance(c[0], z), arena.succ[c[1]][z], c[2] + 1)
        return nxt if live(nxt) else end

    start_c = (fixed.initial(), s0, 0)
    if not live(start_c):
        start_c = end
    order, _, succ = explore(start_c, step, alph.n_joint, lambda c: c == end)
    live_ids = iter(range(len(order)))
    names = [end if c == end else f"r{next(live_ids)}" for c in order]
    delta = {names[i]: tuple(names[t] for t in succ[i]) for i in range(len(order))}
    rows = {}
    for i, c in enumerate(order):
        if c == end:
            m = 0
        else:
            key = (c[0], c[1], horizon - c[2])
            if key not in choice:
                W(*key)
            m = choice[key]
        rows[names[i]] = tuple(Fraction(int(k == m)) for k in range(n_resp))
    return FiniteStateStrategy(resp_owner, alph, names[0], delta, rows), value


def strategy_value(spec: GameSpec, strat: BehavioralStrategy, depth: int | None = None,
                   which: str = "lower"):
    return best_response(spec, strat, depth, which)[1]


# ---------------------------------------------------------------------------
# truncation and stitching

def truncate(spec: GameSpec, boundary, boundary_values: Mapping) -> GameSpec:
    """The game cut off at the first boundary position, paying ``boundary_values`` there.

    ``boundary`` is a depth, a set of automaton state names (first visit), or
    an antichain of positions. Values are keyed by the automaton state name
    reached (depth/state boundaries) or by the position. Positions are counted
    from the spec's start position; the result starts there too.
    """
    if spec.kind not in (FINITE, MATRIX):
        raise ValueError(f"truncation supports finite and matrix games, not {spec.kind}")
    arena, s0, horizon = _finite_setup(spec, None, "lower")
    tracker = BoundaryTracker(arena, boundary, s0)
    lo, hi = spec.bounds
    order, _, succ = explore(tracker.start, tracker.step, spec.alphabets.n_joint,
                             lambda t: tracker.hit(t) is not None or arena.stop[t[0]])
    # composite states reachable within the horizon
    within, frontier = {0}, {0}
    for _ in range(horizon):
        frontier = {d for c in frontier for d in succ[c]} - within
        within |= frontier
    keys = sorted({tracker.hit(t) for t in order if tracker.hit(t) is not None}, key=str)
    key_names = {k: f"stop.{k}" if isinstance(k, str) else f"stop.{i}" for i, k in enumerate(keys)}
    base = _unique_names(order, lambda t: arena.names[t[0]], lambda t: "@" + "/".join(map(str, t[1:])))
    names, labels = [], {}
    for i, t in enumerate(order):
        key = tracker.hit(t)
        if key is None:
            names.append(base[i])
            labels[base[i]] = StateLabel(u=arena.label[t[0]], terminal=arena.stop[t[0]])
            continue
        name = key_names[key]
        names.append(name)
        if key in boundary_values:
            v = Fraction(boundary_values[key]) if not isinstance(boundary_values[key], float) \
                else Fraction(repr(boundary_values[key]))
        elif i in within:
            raise ValueError(f"no boundary value for {key!r}")
        else:
            v = lo
        if not lo <= v <= hi:
            raise ValueError(f"boundary value {v} for {key!r} outside bounds [{lo}, {hi}]")
        labels[name] = StateLabel(u=v, terminal=True)
    delta = {}
    for i, name in enumerate(names):
        row = tuple(names[t] for t in succ[i])
        if labels[name].terminal:
            row = (name,) * len(row)
        delta[name] = row
    aut = PayoffAutomaton(names[0], delta, labels, name="truncated")
    return GameSpec(spec.alphabets, FINITE, spec.bounds, automata=(aut,), horizon=horizon,
                    name=f"{spec.name}-truncated")


def state_subgame(spec: GameSpec, state: str, rounds_played: int) -> GameSpec:
    """Finite subgame starting from automaton ``state`` after ``rounds_played`` rounds."""
    if spec.kind == MATRIX:
        raise ValueError("use a finite(1) spec for matrix subgames")
    if spec.kind != FINITE:
        raise ValueError("state subgames are defined for finite games")
    aut = replace(spec.automaton, start=state)
    return replace(spec, automata=(aut,), horizon=spec.horizon - rounds_played, start_position=())


def stitch_strategies(outer: BehavioralStrategy, at_boundary: Mapping, spec: GameSpec,
                      boundary) -> StitchedStrategy:
    """Play ``outer`` until the boundary, then the inner strategy of the boundary reached.

    Inner strategies see positions relative to the boundary position.
    """
    for inner in at_boundary.values():
        if inner.owner != outer.owner:
            raise ValueError("inner and outer strategies belong to different players")
        if inner.alphabets != outer.alphabets:
            raise ValueError("inner and outer strategies use different alphabets")
    arena, s0, _ = _finite_setup(spec, 0, "lower")
    tracker = BoundaryTracker(arena, boundary, s0)
    if isinstance(outer, TableStrategy):
        for p in outer.table:
            if tracker.covers(p):
                raise ValueError(
                    "overlapping domains: outer strategy defined at or after boundary position "
                    + outer.alphabets.format_position(p))
    return StitchedStrategy(outer, at_boundary, tracker)
