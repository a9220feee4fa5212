"""Finite views of a game used by every solver.

An :class:`Arena` is an integer-indexed deterministic automaton over joint
moves whose state label is the payoff collected when play is cut off there.
Stopped states are payoff-decided: no move made there changes the outcome,
so engines never consult strategies at them.

Infinite payoff kinds are turned into arenas by product constructions:

* running maximum ``(q, m)`` for generalized-open and open-set payoffs,
* visit counting ``(q, c)`` for the open supersets of a Buchi (G-delta) set,
* tuple products for unions of open sets.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Sequence

from .model import (
    FINITE, GDELTA, GENERALIZED_OPEN, MATRIX, OPEN_SET, UNION,
    GameSpec, PayoffAutomaton, Position, StateLabel, is_prefix,
)


@dataclass
class Arena:
    names: list
    start: int
    succ: list          # succ[s][z] -> state index
    stop: list          # payoff decided at s
    label: list         # payoff if play is cut at s (Fraction or None)
    n_joint: int

    def index(self, name: str) -> int:
        return self.names.index(name)

    def relabel(self, label: Sequence) -> "Arena":
        return Arena(self.names, self.start, self.succ, self.stop, list(label), self.n_joint)

    def affine(self, scale: Fraction, offset: Fraction) -> "Arena":
        if scale == 1 and offset == 0:
            return self
        return self.relabel([None if v is None else scale * v + offset for v in self.label])

    def layers(self, horizon: int, start: int | None = None) -> list[list[int]]:
        """Live (non-stopped) states reachable at each time < horizon, plus the final layer."""
        cur = {self.start if start is None else start}
        out = []
        for t in range(horizon + 1):
            out.append(sorted(cur))
            if t == horizon:
                break
            cur = {self.succ[s][z] if not self.stop[s] else s
                   for s in cur for z in range(self.n_joint)}
        return out

    def run(self, p: Position, start: int | None = None) -> int:
        s = self.start if start is None else start
        for z in p:
            s = self.succ[s][z]
        return s


def explore(start: Hashable, step: Callable, n_joint: int, halt: Callable = lambda c: False):
    """Breadth-first enumeration of a composite state space.

    Returns (order, index, succ); states for which ``halt`` holds self-loop.
    """
    order = [start]
    index = {start: 0}
    succ = []
    i = 0
    while i < len(order):
        c = order[i]
        if halt(c):
            succ.append((i,) * n_joint)
        else:
            row = []
            for z in range(n_joint):
                d = step(c, z)
                if d not in index:
                    index[d] = len(order)
                    order.append(d)
                row.append(index[d])
            succ.append(tuple(row))
        i += 1
    return order, index, succ


def _unique_names(order, base: Callable, detail: Callable) -> list[str]:
    """Name composite states by their base state when that is unambiguous."""
    counts = {}
    for c in order:
        counts[base(c)] = counts.get(base(c), 0) + 1
    return [base(c) if counts[base(c)] == 1 else f"{base(c)}{detail(c)}" for c in order]


def arena_from_automaton(aut: PayoffAutomaton) -> Arena:
    names = aut.states
    idx = {q: i for i, q in enumerate(names)}
    succ = [tuple(idx[t] for t in aut.delta[q]) for q in names]
    stop = [aut.labels[q].terminal for q in names]
    label = [aut.labels[q].u for q in names]
    return Arena(names, idx[aut.start], succ, stop, label, aut.width)


def matrix_arena(spec: GameSpec) -> Arena:
    alph = spec.alphabets
    names = ["e"] + ["{}.{}".format(*alph.joint_labels(z)) for z in range(alph.n_joint)]
    succ = [tuple(range(1, alph.n_joint + 1))] + [(s,) * alph.n_joint for s in range(1, alph.n_joint + 1)]
    label = [None] + [spec.matrix[i][j] for i in range(len(alph.x_moves)) for j in range(len(alph.y_moves))]
    return Arena(names, 0, succ, [False] + [True] * alph.n_joint, label, alph.n_joint)


def reach_sup(aut: PayoffAutomaton, value: Callable[[str], Fraction]) -> dict:
    """Maximum of ``value`` over states reachable from each state (inclusive)."""
    best = {q: value(q) for q in aut.delta}
    changed = True
    while changed:
        changed = False
        for q, row in aut.delta.items():
            m = max(best[t] for t in row)
            if m > best[q]:
                best[q] = m
                changed = True
    return best


@dataclass
class OpenView:
    """Running-max product with lower (``f_d``) and upper (``max(f_d, R)``) labels."""

    arena: Arena
    lower: list
    upper: list


def open_view(aut: PayoffAutomaton, u: Callable[[str], Fraction]) -> OpenView:
    """Product tracking the running maximum of ``u`` along the play.

    A composite ``(q, m)`` is decided once ``m`` dominates everything still
    reachable from ``q``; it is then made absorbing.
    """
    sup = reach_sup(aut, u)
    start = (aut.start, u(aut.start))

    def step(c, z):
        q, m = c
        t = aut.delta[q][z]
        return (t, max(m, u(t)))

    def halt(c):
        q, m = c
        return m >= sup[q] or aut.labels[q].terminal

    order, _, succ = explore(start, step, aut.width, halt)
    names = _unique_names(order, lambda c: c[0], lambda c: f"|{c[1]}")
    stop = [halt(c) for c in order]
    lower = [c[1] for c in order]
    upper = [max(c[1], sup[c[0]]) for c in order]
    arena = Arena(names, 0, succ, stop, lower, aut.width)
    return OpenView(arena, lower, upper)


def indicator(aut: PayoffAutomaton) -> Callable[[str], Fraction]:
    return lambda q: Fraction(1) if aut.labels[q].accepting else Fraction(0)


def union_automaton(automata: Sequence[PayoffAutomaton]) -> PayoffAutomaton:
    """Product automaton accepting as soon as any component accepts (then absorbing)."""
    width = automata[0].width
    start = tuple(a.start for a in automata)

    def accepting(c):
        return any(a.labels[q].accepting for a, q in zip(automata, c))

    def step(c, z):
        return tuple(a.delta[q][z] for a, q in zip(automata, c))

    order, _, succ = explore(start, step, width, accepting)
    names = ["&".join(c) for c in order]
    delta = {names[i]: tuple(names[t] for t in succ[i]) for i in range(len(order))}
    labels = {names[i]: StateLabel(u=Fraction(int(accepting(c))), accepting=accepting(c),
                                   terminal=accepting(c))
              for i, c in enumerate(order)}
    return PayoffAutomaton(names[0], delta, labels, name="union")


def counting_automaton(aut: PayoffAutomaton, k: int) -> PayoffAutomaton:
    """Accepts once ``k`` positions (the empty one included) have hit accepting states.

    Its open set contains every play that hits accepting states infinitely often.
    """
    acc = lambda q: int(aut.labels[q].accepting)
    start = (aut.start, min(k, acc(aut.start)))

    def step(c, z):
        q, n = c
        t = aut.delta[q][z]
        return (t, min(k, n + acc(t)))

    order, _, succ = explore(start, step, aut.width, lambda c: c[1] >= k)
    names = _unique_names(order, lambda c: c[0], lambda c: f"~{c[1]}")
    delta = {names[i]: tuple(names[t] for t in succ[i]) for i in range(len(order))}
    labels = {names[i]: StateLabel(u=Fraction(int(c[1] >= k)), accepting=c[1] >= k, terminal=c[1] >= k)
              for i, c in enumerate(order)}
    return PayoffAutomaton(names[0], delta, labels, name=f"{aut.name}~{k}")


def inevitably_recurrent(aut: PayoffAutomaton) -> set[str]:
    """States from which every reachable cycle passes through an accepting state.

    From such a state every continuation hits accepting states infinitely often.
    """
    stay = {q for q, lab in aut.labels.items() if not lab.accepting}
    changed = True
    while changed:
        changed = False
        for q in list(stay):
            if not any(t in stay for t in aut.delta[q]):
                stay.discard(q)
                changed = True
    # states that can reach a non-accepting cycle
    bad = set(stay)
    changed = True
    while changed:
        changed = False
        for q, row in aut.delta.items():
            if q not in bad and any(t in bad for t in row):
                bad.add(q)
                changed = True
    return set(aut.delta) - bad


def gdelta_lower_arena(aut: PayoffAutomaton) -> Arena:
    good = inevitably_recurrent(aut)
    arena = arena_from_automaton(aut)
    label = [Fraction(int(q in good)) for q in arena.names]
    stop = [q in good or aut.labels[q].terminal for q in arena.names]
    return Arena(arena.names, arena.start, arena.succ, stop, label, arena.n_joint)


def open_automaton(spec: GameSpec) -> tuple[PayoffAutomaton, Callable]:
    """The automaton and position-value function ``u`` of an open-type spec."""
    if spec.kind == GENERALIZED_OPEN:
        aut = spec.automaton
        return aut, lambda q: aut.labels[q].u
    if spec.kind == OPEN_SET:
        return spec.automaton, indicator(spec.automaton)
    if spec.kind == UNION:
        aut = union_automaton(spec.automata)
        return aut, indicator(aut)
    raise ValueError(f"{spec.kind} is not an open-type game")


def _oriented(spec: GameSpec, lo: Arena, hi: Arena, which: str) -> Arena:
    """Apply the spec's affine map; a negative scale swaps the roles of the bounds."""
    if spec.scale < 0:
        lo, hi = hi, lo
    chosen = lo if which == "lower" else hi
    return chosen.affine(spec.scale, spec.offset)


def game_arena(spec: GameSpec, which: str = "lower", k: int | None = None) -> tuple[Arena, int | None]:
    """Arena for ``spec`` plus its fixed horizon (``None`` for infinite kinds).

    ``which`` selects the pointwise lower or upper truncation of the payoff for
    infinite kinds; finite kinds ignore it. ``k`` picks the open superset used
    as the upper bound of a G-delta game (default 1).
    """
    if which not in ("lower", "upper"):
        raise ValueError("which must be 'lower' or 'upper'")
    if spec.kind == MATRIX:
        return matrix_arena(spec), 1
    if spec.kind == FINITE:
        return arena_from_automaton(spec.automaton), spec.horizon
    if spec.kind == GDELTA:
        lo = gdelta_lower_arena(spec.automaton)
        view = open_view(counting_automaton(spec.automaton, k or 1),
                         indicator(counting_automaton(spec.automaton, k or 1)))
        return _oriented(spec, lo, view.arena.relabel(view.upper), which), None
    aut, u = open_automaton(spec)
    view = open_view(aut, u)
    return _oriented(spec, view.arena, view.arena.relabel(view.upper), which), None


def effective_start(spec: GameSpec, arena: Arena) -> tuple[int, int]:
    """Arena state after the spec's start position and the rounds already used."""
    return arena.run(spec.start_position), len(spec.start_position)


# ---------------------------------------------------------------------------
# boundary tracking for truncation and strategy stitching

class BoundaryTracker:
    """Follows play and reports the first boundary position hit.

    ``boundary`` is an int (a depth), a set of automaton state names, or a
    collection of positions (tuples). ``hit`` returns the boundary key: the
    automaton state name for depth/state boundaries, the position otherwise.
    """

    def __init__(self, arena: Arena, boundary, start: int | None = None):
        self.arena = arena
        s0 = arena.start if start is None else start
        if isinstance(boundary, int) and not isinstance(boundary, bool):
            if boundary < 0:
                raise ValueError("boundary depth must be >= 0")
            self.mode, self.depth = "depth", boundary
            self.start = (s0, 0)
        else:
            items = list(boundary)
            if items and all(isinstance(b, str) for b in items):
                self.mode, self.states = "states", set(items)
                unknown = self.states - set(arena.names)
                if unknown:
                    raise ValueError(f"unknown boundary states {sorted(unknown)}")
                self.start = (s0,)
            else:
                positions = [tuple(b) for b in items]
                for a in positions:
                    for b in positions:
                        if a != b and is_prefix(a, b):
                            raise ValueError("boundary positions are not an antichain")
                self.mode, self.positions = "positions", set(positions)
                self.prefixes = {p[:n] for p in positions for n in range(len(p) + 1)}
                self.start = (s0, ())

    def step(self, t, z):
        s = self.arena.succ[t[0]][z]
        if self.mode == "depth":
            return (s, t[1] + 1)
        if self.mode == "states":
            return (s,)
        p = t[1]
        nxt = None if p is None else p + (z,)
        return (s, nxt if nxt in self.prefixes else None)

    def hit(self, t):
        name = self.arena.names[t[0]]
        if self.mode == "depth":
            return name if t[1] == self.depth else None
        if self.mode == "states":
            return name if name in self.states else None
        return t[1] if t[1] in self.positions else None

    def covers(self, p: Position) -> bool:
        """Whether ``p`` is at or after a boundary position."""
        t = self.start
        if self.hit(t) is not None:
            return True
        for z in p:
            t = self.step(t, z)
            if self.hit(t) is not None:
                return True
        return False


def tracker_for(spec: GameSpec, boundary) -> BoundaryTracker:
    arena, _ = game_arena(spec)
    s0, _ = effective_start(spec, arena)
    return BoundaryTracker(arena, boundary, s0)

