"""Core domain types: alphabets, positions, payoff automata, game specs, strategies.

Numbers stored in specs and parsed strategies are :class:`fractions.Fraction`
so that exact (rational) solving is always available. Floats handed to the
constructors are converted through their shortest decimal ``repr``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence, Union

Number = Union[Fraction, float]
Position = tuple  # tuple of joint-move indices into Z = X x Y, row-major

PLAYER_I = "I"
PLAYER_II = "II"

MATRIX = "matrix"
FINITE = "finite"
GENERALIZED_OPEN = "generalized-open"
OPEN_SET = "open-set"
GDELTA = "gdelta"
UNION = "union"

KINDS = (MATRIX, FINITE, GENERALIZED_OPEN, OPEN_SET, GDELTA, UNION)
AUTOMATON_KINDS = (FINITE, GENERALIZED_OPEN, OPEN_SET, GDELTA, UNION)
INDICATOR_KINDS = (OPEN_SET, GDELTA, UNION)

PROB_TOL = 1e-12


def as_fraction(value) -> Fraction:
    """Convert an int/Fraction/float/str to an exact Fraction.

    Floats go through ``repr`` so that ``0.1`` becomes ``1/10``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite number {value!r}")
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class MoveAlphabets:
    """Move labels of player I (``x_moves``) and player II (``y_moves``)."""

    x_moves: tuple
    y_moves: tuple

    def __post_init__(self):
        object.__setattr__(self, "x_moves", tuple(self.x_moves))
        object.__setattr__(self, "y_moves", tuple(self.y_moves))
        for who, moves in (("I", self.x_moves), ("II", self.y_moves)):
            if not moves:
                raise ValueError(f"alphabet empty for player {who}")
            if len(set(moves)) != len(moves):
                raise ValueError(f"duplicate move label for player {who}")

    @property
    def n_joint(self) -> int:
        return len(self.x_moves) * len(self.y_moves)

    def joint(self, i: int, j: int) -> int:
        return i * len(self.y_moves) + j

    def split(self, z: int) -> tuple[int, int]:
        return divmod(z, len(self.y_moves))

    def moves_of(self, player: str) -> tuple:
        return self.x_moves if player == PLAYER_I else self.y_moves

    def joint_labels(self, z: int) -> tuple[str, str]:
        i, j = self.split(z)
        return self.x_moves[i], self.y_moves[j]

    def swapped(self) -> "MoveAlphabets":
        return MoveAlphabets(self.y_moves, self.x_moves)

    def position(self, pairs: Iterable[tuple[str, str]]) -> Position:
        """Build a position from ``(x_label, y_label)`` pairs."""
        out = []
        for x, y in pairs:
            try:
                out.append(self.joint(self.x_moves.index(x), self.y_moves.index(y)))
            except ValueError:
                raise ValueError(f"unknown move label in pair ({x}, {y})") from None
        return tuple(out)

    def format_position(self, p: Position) -> str:
        if not p:
            return "e"
        return "".join("({},{})".format(*self.joint_labels(z)) for z in p)

    def check_position(self, p: Position) -> None:
        for z in p:
            if not (isinstance(z, int) and 0 <= z < self.n_joint):
                raise ValueError(f"joint move {z!r} outside alphabet of size {self.n_joint}")

    def all_positions(self, length: int):
        """Yield every position of the given length (lexicographic order)."""
        if length == 0:
            yield ()
            return
        for p in self.all_positions(length - 1):
            for z in range(self.n_joint):
                yield p + (z,)


def is_prefix(p: Position, q: Position) -> bool:
    """``p`` precedes or equals ``q``."""
    return len(p) <= len(q) and tuple(q[: len(p)]) == tuple(p)


@dataclass(frozen=True)
class StateLabel:
    u: Fraction | None = None
    accepting: bool = False
    terminal: bool = False

    def __post_init__(self):
        if self.u is not None:
            object.__setattr__(self, "u", as_fraction(self.u))


@dataclass(frozen=True)
class PayoffAutomaton:
    """Deterministic automaton over joint moves.

    ``delta[q][z]`` is the successor of state ``q`` under joint move ``z``.
    Terminal states must be absorbing.
    """

    start: str
    delta: Mapping[str, tuple]
    labels: Mapping[str, StateLabel]
    name: str = "payoff"

    def __post_init__(self):
        object.__setattr__(self, "delta", {q: tuple(t) for q, t in self.delta.items()})
        object.__setattr__(self, "labels", dict(self.labels))
        if set(self.delta) != set(self.labels):
            missing = set(self.delta) ^ set(self.labels)
            raise ValueError(f"states without both label and transitions: {sorted(missing)}")
        if self.start not in self.delta:
            raise ValueError(f"start state {self.start!r} undefined")
        widths = {len(t) for t in self.delta.values()}
        if len(widths) != 1:
            raise ValueError("transition rows differ in width")
        for q, row in self.delta.items():
            for target in row:
                if target not in self.delta:
                    raise ValueError(f"transition from {q!r} to undefined state {target!r}")
            if self.labels[q].terminal and any(t != q for t in row):
                raise ValueError(f"terminal state {q!r} has an outgoing non-self transition")

    @property
    def states(self) -> list[str]:
        return sorted(self.delta)

    @property
    def width(self) -> int:
        return len(next(iter(self.delta.values())))

    def run(self, p: Position, state: str | None = None) -> str:
        q = self.start if state is None else state
        for z in p:
            q = self.delta[q][z]
        return q

    def reachable(self, start: str | None = None) -> set[str]:
        seen = {self.start if start is None else start}
        stack = list(seen)
        while stack:
            q = stack.pop()
            for t in self.delta[q]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return seen

    def layer(self, steps: int, start: str | None = None) -> set[str]:
        """States reachable in exactly ``steps`` moves."""
        cur = {self.start if start is None else start}
        for _ in range(steps):
            cur = {t for q in cur for t in self.delta[q]}
        return cur

    def swapped(self, alphabets: MoveAlphabets) -> "PayoffAutomaton":
        nx, ny = len(alphabets.x_moves), len(alphabets.y_moves)
        delta = {}
        for q, row in self.delta.items():
            # new joint index j*nx + i holds old i*ny + j
            delta[q] = tuple(row[i * ny + j] for j in range(ny) for i in range(nx))
        return replace(self, delta=delta)

    def map_u(self, fn) -> "PayoffAutomaton":
        labels = {
            q: replace(lab, u=None if lab.u is None else fn(lab.u))
            for q, lab in self.labels.items()
        }
        return replace(self, labels=labels)


@dataclass(frozen=True)
class GameSpec:
    """A Blackwell game: alphabets plus a payoff descriptor.

    The payoff of a play is ``scale * descriptor_payoff + offset``. For
    ``matrix``, ``finite`` and nonnegative-scale ``generalized-open`` specs the
    affine map is folded into the numbers themselves, so scale/offset stay at
    1/0 there.
    """

    alphabets: MoveAlphabets
    kind: str
    bounds: tuple
    automata: tuple = ()
    matrix: tuple | None = None
    horizon: int | None = None
    name: str = "game"
    scale: Fraction = Fraction(1)
    offset: Fraction = Fraction(0)
    start_position: Position = ()

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)
        if self.kind not in KINDS:
            raise ValueError(f"unknown game kind {self.kind!r}")
        lo, hi = (as_fraction(b) for b in self.bounds)
        if lo > hi:
            raise ValueError(f"empty payoff bounds [{lo}, {hi}]")
        set_("bounds", (lo, hi))
        set_("scale", as_fraction(self.scale))
        set_("offset", as_fraction(self.offset))
        set_("automata", tuple(self.automata))
        set_("start_position", tuple(self.start_position))
        self.alphabets.check_position(self.start_position)
        if self.matrix is not None:
            set_("matrix", tuple(tuple(as_fraction(v) for v in row) for row in self.matrix))
        if self.kind == MATRIX:
            self._check_matrix()
        else:
            self._check_automata()

    def _check_matrix(self):
        m = self.matrix
        nx, ny = len(self.alphabets.x_moves), len(self.alphabets.y_moves)
        if m is None or len(m) != nx or any(len(row) != ny for row in m):
            raise ValueError(f"matrix dimension mismatch: expected {nx}x{ny}")
        if self.automata:
            raise ValueError("matrix games take no automaton")
        if self.start_position:
            raise ValueError("matrix games start at the empty position")
        if self.scale != 1 or self.offset != 0:
            raise ValueError("matrix games carry their payoffs directly")
        for row in m:
            for v in row:
                self._check_in_bounds(v, "matrix entry")

    def _check_automata(self):
        if self.matrix is not None:
            raise ValueError(f"{self.kind} games take no matrix")
        if not self.automata:
            raise ValueError(f"{self.kind} game needs an automaton")
        if self.kind != UNION and len(self.automata) != 1:
            raise ValueError(f"{self.kind} game takes exactly one automaton")
        for a in self.automata:
            if a.width != self.alphabets.n_joint:
                raise ValueError(
                    f"automaton {a.name!r} has {a.width} columns, alphabet has "
                    f"{self.alphabets.n_joint} joint moves"
                )
        aut = self.automata[0]
        if self.kind == FINITE:
            if self.horizon is None or self.horizon < 0:
                raise ValueError("finite game needs a horizon n >= 0")
            if len(self.start_position) > self.horizon:
                raise ValueError("start position lies beyond the horizon")
            for q in aut.layer(self.horizon):
                u = aut.labels[q].u
                if u is None:
                    raise ValueError(f"missing payoff label at horizon: state {q!r}")
                self._check_in_bounds(self.scale * u + self.offset, f"payoff of state {q!r}")
        elif self.horizon is not None:
            raise ValueError(f"{self.kind} games have no horizon")
        if self.kind == GENERALIZED_OPEN:
            for q in aut.reachable():
                u = aut.labels[q].u
                if u is None:
                    raise ValueError(f"state {q!r} lacks a u value")
                self._check_in_bounds(self.scale * u + self.offset, f"u value of state {q!r}")
        if self.kind in INDICATOR_KINDS:
            for v in (self.offset, self.scale + self.offset):
                self._check_in_bounds(v, "indicator payoff")

    def _check_in_bounds(self, v, what):
        lo, hi = self.bounds
        if not lo <= v <= hi:
            raise ValueError(f"{what} {v} outside payoff bounds [{lo}, {hi}]")

    @property
    def automaton(self) -> PayoffAutomaton:
        return self.automata[0]


def matrix_game(matrix: Sequence[Sequence], x_moves=None, y_moves=None, bounds=None,
                name: str = "game") -> GameSpec:
    rows = [[as_fraction(v) for v in row] for row in matrix]
    x_moves = tuple(x_moves) if x_moves else tuple(str(i) for i in range(len(rows)))
    y_moves = tuple(y_moves) if y_moves else tuple(str(j) for j in range(len(rows[0])))
    if bounds is None:
        flat = [v for row in rows for v in row]
        bounds = (min(flat), max(flat))
    return GameSpec(MoveAlphabets(x_moves, y_moves), MATRIX, bounds, matrix=rows, name=name)


def finite_game_from_table(alphabets: MoveAlphabets, horizon: int, payoff: Mapping,
                           bounds=None, name: str = "game") -> GameSpec:
    """Finite game whose payoff is an explicit table over positions of length ``horizon``.

    The automaton is the position tree; state names are formatted positions.
    """
    delta, labels = {}, {}
    for n in range(horizon + 1):
        for p in alphabets.all_positions(n):
            q = _tree_name(alphabets, p)
            if n < horizon:
                delta[q] = tuple(_tree_name(alphabets, p + (z,)) for z in range(alphabets.n_joint))
                labels[q] = StateLabel()
            else:
                delta[q] = (q,) * alphabets.n_joint
                labels[q] = StateLabel(u=as_fraction(payoff[p]), terminal=True)
    if bounds is None:
        vals = [as_fraction(v) for v in payoff.values()]
        bounds = (min(vals), max(vals))
    aut = PayoffAutomaton(_tree_name(alphabets, ()), delta, labels, name="table")
    return GameSpec(alphabets, FINITE, bounds, automata=(aut,), horizon=horizon, name=name)


def _tree_name(alphabets: MoveAlphabets, p: Position) -> str:
    if not p:
        return "e"
    return "".join("{}.{}".format(*alphabets.joint_labels(z)) + "/" for z in p).rstrip("/")


# ---------------------------------------------------------------------------
# strategies

_PAST = "<past>"


class BehavioralStrategy:
    """A behavioral strategy as a deterministic observer of joint moves.

    Subclasses expose ``initial()``, ``advance(key, z)`` and ``distribution(key)``;
    the key summarises whatever the strategy remembers about the position.
    """

    owner: str
    alphabets: MoveAlphabets

    @property
    def moves(self) -> tuple:
        return self.alphabets.moves_of(self.owner)

    def initial(self) -> Hashable:
        raise NotImplementedError

    def advance(self, key: Hashable, z: int) -> Hashable:
        raise NotImplementedError

    def distribution(self, key: Hashable) -> tuple:
        raise NotImplementedError

    def key_at(self, p: Position) -> Hashable:
        key = self.initial()
        for z in p:
            key = self.advance(key, z)
        return key

    def at(self, p: Position) -> tuple:
        return self.distribution(self.key_at(p))

    def uniform(self) -> tuple:
        n = len(self.moves)
        return (Fraction(1, n),) * n


def _check_row(row, n: int, where: str) -> tuple:
    row = tuple(row)
    if len(row) != n:
        raise ValueError(f"{where}: expected {n} probabilities, got {len(row)}")
    if any(v < 0 for v in row):
        raise ValueError(f"{where}: negative probability")
    if abs(sum(row) - 1) > PROB_TOL:
        raise ValueError(f"{where}: non-stochastic row (sums to {sum(row)})")
    return row


class TableStrategy(BehavioralStrategy):
    """Per-position distributions up to ``depth``; uniform elsewhere."""

    def __init__(self, owner: str, alphabets: MoveAlphabets, table: Mapping, depth: int | None = None):
        self.owner = owner
        self.alphabets = alphabets
        n = len(self.moves)
        self.table = {}
        for p, row in table.items():
            p = tuple(p)
            alphabets.check_position(p)
            self.table[p] = _check_row(row, n, f"row at {alphabets.format_position(p)}")
        longest = max((len(p) for p in self.table), default=-1)
        self.depth = longest + 1 if depth is None else depth
        if longest >= self.depth:
            raise ValueError(f"table entry at length {longest} beyond declared depth {self.depth}")

    def initial(self):
        return () if self.depth > 0 else _PAST

    def advance(self, key, z):
        if key == _PAST:
            return _PAST
        nxt = key + (z,)
        return nxt if len(nxt) < self.depth else _PAST

    def distribution(self, key):
        if key == _PAST:
            return self.uniform()
        return self.table.get(key) or self.uniform()

    def __eq__(self, other):
        return (isinstance(other, TableStrategy) and self.owner == other.owner
                and self.alphabets == other.alphabets and self.depth == other.depth
                and self.table == other.table)

    def __repr__(self):
        return f"TableStrategy(owner={self.owner!r}, depth={self.depth}, entries={len(self.table)})"


class FiniteStateStrategy(BehavioralStrategy):
    """Observation automaton over joint moves with one distribution per state."""

    def __init__(self, owner: str, alphabets: MoveAlphabets, start: str,
                 delta: Mapping[str, Sequence[str]], rows: Mapping[str, Sequence]):
        self.owner = owner
        self.alphabets = alphabets
        self.start = start
        self.delta = {q: tuple(t) for q, t in delta.items()}
        n = len(self.moves)
        self.rows = {q: _check_row(r, n, f"row of state {q}") for q, r in rows.items()}
        if set(self.delta) != set(self.rows):
            raise ValueError("every strategy state needs both a row and transitions")
        if start not in self.delta:
            raise ValueError(f"start state {start!r} undefined")
        for q, row in self.delta.items():
            if len(row) != alphabets.n_joint:
                raise ValueError(f"non-total transition function at state {q!r}")
            for t in row:
                if t not in self.delta:
                    raise ValueError(f"transition to undefined state {t!r}")

    @classmethod
    def uniform_strategy(cls, owner: str, alphabets: MoveAlphabets) -> "FiniteStateStrategy":
        n = len(alphabets.moves_of(owner))
        return cls(owner, alphabets, "s0", {"s0": ("s0",) * alphabets.n_joint},
                   {"s0": (Fraction(1, n),) * n})

    @classmethod
    def pure(cls, owner: str, alphabets: MoveAlphabets, move) -> "FiniteStateStrategy":
        """Always play ``move`` (label)."""
        moves = alphabets.moves_of(owner)
        row = tuple(Fraction(int(m == move)) for m in moves)
        return cls(owner, alphabets, "s0", {"s0": ("s0",) * alphabets.n_joint}, {"s0": row})

    def initial(self):
        return self.start

    def advance(self, key, z):
        return self.delta[key][z]

    def distribution(self, key):
        return self.rows[key]

    def __eq__(self, other):
        return (isinstance(other, FiniteStateStrategy) and self.owner == other.owner
                and self.alphabets == other.alphabets and self.start == other.start
                and self.delta == other.delta and self.rows == other.rows)

    def __repr__(self):
        return f"FiniteStateStrategy(owner={self.owner!r}, states={len(self.delta)})"


class StitchedStrategy(BehavioralStrategy):
    """Outer strategy before a boundary, per-boundary inner strategies after it.

    Inner strategies see positions relative to the boundary position. A
    boundary key without an inner strategy falls back to uniform play.
    """

    def __init__(self, outer: BehavioralStrategy, inner: Mapping, tracker):
        self.owner = outer.owner
        self.alphabets = outer.alphabets
        self.outer = outer
        self.inner = dict(inner)
        self.tracker = tracker
        self._fallback = FiniteStateStrategy.uniform_strategy(self.owner, self.alphabets)

    def _enter(self, t, okey):
        hit = self.tracker.hit(t)
        if hit is None:
            return ("out", okey, t)
        strat = self.inner.get(hit, self._fallback)
        return ("in", hit, strat.initial())

    def initial(self):
        return self._enter(self.tracker.start, self.outer.initial())

    def advance(self, key, z):
        if key[0] == "in":
            strat = self.inner.get(key[1], self._fallback)
            return ("in", key[1], strat.advance(key[2], z))
        _, okey, t = key
        return self._enter(self.tracker.step(t, z), self.outer.advance(okey, z))

    def distribution(self, key):
        if key[0] == "in":
            return self.inner.get(key[1], self._fallback).distribution(key[2])
        return self.outer.distribution(key[1])


# ---------------------------------------------------------------------------
# brackets

@dataclass(frozen=True)
class ValueBracket:
    lower: Number
    upper: Number
    depth: int
    tol: float = 1e-6

    def __post_init__(self):
        if self.lower > self.upper + 1e-12:
            raise ValueError(f"inverted bracket [{self.lower}, {self.upper}] at depth {self.depth}")

    @property
    def converged(self) -> bool:
        return abs(self.upper - self.lower) <= self.tol

    @property
    def width(self) -> Number:
        return self.upper - self.lower


# ---------------------------------------------------------------------------
# operations

def _check_pair(sigma: BehavioralStrategy, tau: BehavioralStrategy) -> MoveAlphabets:
    if sigma.owner != PLAYER_I or tau.owner != PLAYER_II:
        raise ValueError("expected a player I strategy and a player II strategy")
    if sigma.alphabets != tau.alphabets:
        raise ValueError("strategies are over different move alphabets")
    return sigma.alphabets


def measure_of_position(sigma: BehavioralStrategy, tau: BehavioralStrategy, p: Position) -> Number:
    """Probability that play under ``(sigma, tau)`` passes through ``p``."""
    alph = _check_pair(sigma, tau)
    alph.check_position(p)
    prob = Fraction(1)
    ks, kt = sigma.initial(), tau.initial()
    for z in p:
        i, j = alph.split(z)
        prob = prob * sigma.distribution(ks)[i] * tau.distribution(kt)[j]
        if prob == 0:
            return prob
        ks, kt = sigma.advance(ks, z), tau.advance(kt, z)
    return prob


def scale_shift_payoff(spec: GameSpec, a, c) -> GameSpec:
    """The game with payoff ``a*f + c`` for ``a >= 0``."""
    a, c = as_fraction(a), as_fraction(c)
    if a < 0:
        raise ValueError("scale factor must be nonnegative")
    lo, hi = spec.bounds
    bounds = (a * lo + c, a * hi + c)
    if spec.kind == MATRIX:
        rows = tuple(tuple(a * v + c for v in row) for row in spec.matrix)
        return replace(spec, matrix=rows, bounds=bounds)
    if spec.kind == FINITE:
        return replace(spec, automata=(spec.automaton.map_u(lambda u: a * u + c),), bounds=bounds)
    return _normalized(replace(spec, scale=a * spec.scale, offset=a * spec.offset + c, bounds=bounds))


def _normalized(spec: GameSpec) -> GameSpec:
    # sup(s*u + o) = s*sup(u) + o only when s >= 0
    if spec.kind == GENERALIZED_OPEN and spec.scale >= 0 and (spec.scale, spec.offset) != (1, 0):
        s, o = spec.scale, spec.offset
        return replace(spec, automata=(spec.automaton.map_u(lambda u: s * u + o),),
                       scale=Fraction(1), offset=Fraction(0))
    return spec


def switch_players(spec: GameSpec) -> GameSpec:
    """Exchange the players' roles; the new payoff is the negated, re-indexed one."""
    alph = spec.alphabets
    swapped = alph.swapped()
    lo, hi = spec.bounds
    start = tuple(swapped.joint(j, i) for i, j in map(alph.split, spec.start_position))
    if spec.kind == MATRIX:
        rows = tuple(tuple(-spec.matrix[i][j] for i in range(len(alph.x_moves)))
                     for j in range(len(alph.y_moves)))
        return replace(spec, alphabets=swapped, matrix=rows, bounds=(-hi, -lo))
    automata = tuple(a.swapped(alph) for a in spec.automata)
    if spec.kind == FINITE:
        automata = (automata[0].map_u(lambda u: -u),)
        return replace(spec, alphabets=swapped, automata=automata, bounds=(-hi, -lo),
                       start_position=start)
    return _normalized(replace(spec, alphabets=swapped, automata=automata, bounds=(-hi, -lo),
                               scale=-spec.scale, offset=-spec.offset, start_position=start))


def subgame(spec: GameSpec, p: Position) -> GameSpec:
    """The game starting from position ``p`` (appended to the current start)."""
    if spec.kind == MATRIX:
        raise ValueError("matrix games have no proper subgames; use a finite(1) spec")
    return replace(spec, start_position=tuple(spec.start_position) + tuple(p))
