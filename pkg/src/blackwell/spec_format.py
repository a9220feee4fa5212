"""Text formats for games (``.bwg``) and strategies (``.bws``).

Both formats are line oriented; ``#`` starts a comment and ``;`` separates
statements on one line. A game document looks like::

    game "stopgame"
    moves I = {stop, continue}
    moves II = {stop, continue}
    kind = generalized-open
    bounds = [0, 1]
    dfa "stop" {
      start live
      state live u=0
      state I-won u=1 terminal
      state II-won u=0 terminal
      live (stop,stop) -> II-won
      live (stop,*) -> I-won
      live (*,stop) -> I-won
      live (*,*) -> live
    }

Transitions may use ``*`` for either move; a more specific pattern wins over
a less specific one. Terminal states need no transitions. Optional lines
``payoff = a * f + c`` (an affine map of the descriptor payoff) and
``start = (x,y)(x,y)`` (a start position) follow ``bounds``. Matrix games
list their rows after ``matrix:``.

A strategy document starts with ``strategy I`` or ``strategy II``,
optionally repeats the ``moves`` lines, and then holds one of ``uniform``,
a state machine (``start``/``state s play {...}``/transitions) or a table
(``depth n`` plus ``at <position> play {...}`` entries).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction

from .model import (
    FINITE, GDELTA, KINDS, MATRIX, PLAYER_I, PLAYER_II, UNION,
    BehavioralStrategy, FiniteStateStrategy, GameSpec, MoveAlphabets, PayoffAutomaton,
    StateLabel, TableStrategy,
)

ROW_TOL = 1e-9

_KIND_ALIASES = {"g-delta": GDELTA, "union-of-open": UNION}
_LABEL = r"[A-Za-z0-9_.+\-]+"
_STATE = r"[A-Za-z0-9_.+/|&~@\-]+"
_NUMBER = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?(?:/\d+)?"
_NAME = r'"([^"\n]*)"'


class SpecError(ValueError):
    """A document error with its 1-based line and column."""

    def __init__(self, message: str, line: int, col: int = 1):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass
class _Stmt:
    text: str
    line: int
    col: int

    def error(self, message: str, offset: int = 0) -> SpecError:
        return SpecError(message, self.line, self.col + offset)


def _statements(text: str) -> list[_Stmt]:
    out = []
    for ln, raw in enumerate(text.replace("\r\n", "\n").replace("\r", "\n").split("\n"), start=1):
        line = raw.split("#", 1)[0]
        pos = 0
        for piece in line.split(";"):
            stripped = piece.strip()
            if stripped:
                col = pos + len(piece) - len(piece.lstrip()) + 1
                # a closing brace glued to a statement becomes its own statement
                if stripped != "}" and stripped.endswith("}") and stripped.count("}") > stripped.count("{"):
                    body = stripped[:-1].rstrip()
                    out.append(_Stmt(body, ln, col))
                    out.append(_Stmt("}", ln, col + len(stripped) - 1))
                else:
                    out.append(_Stmt(stripped, ln, col))
            pos += len(piece) + 1
    return out


def _number(s: str, stmt: _Stmt, offset: int = 0) -> Fraction:
    if not re.fullmatch(_NUMBER, s):
        raise stmt.error(f"not a number: {s!r}", offset)
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise stmt.error(f"not a number: {s!r}", offset) from None


def _label_set(stmt: _Stmt, body: str, offset: int) -> tuple:
    items = [x.strip() for x in body.split(",")] if body.strip() else []
    if not items:
        raise stmt.error("alphabet empty", offset)
    for x in items:
        if not re.fullmatch(_LABEL, x):
            raise stmt.error(f"bad move label {x!r}", offset)
    if len(set(items)) != len(items):
        raise stmt.error("duplicate move label", offset)
    return tuple(items)


def _moves_stmt(stmt: _Stmt, moves: dict):
    m = re.fullmatch(r"moves\s+(I|II)\s*=\s*\{(.*)\}", stmt.text)
    if not m:
        raise stmt.error("expected 'moves I|II = {a, b, ...}'")
    if m.group(1) in moves:
        raise stmt.error(f"moves of player {m.group(1)} declared twice")
    moves[m.group(1)] = _label_set(stmt, m.group(2), m.start(2))


def _alphabets(moves: dict, at: _Stmt) -> MoveAlphabets:
    for p in (PLAYER_I, PLAYER_II):
        if p not in moves:
            raise at.error(f"missing 'moves {p}' line")
    return MoveAlphabets(moves[PLAYER_I], moves[PLAYER_II])


def _parse_position(s: str, alph: MoveAlphabets, stmt: _Stmt, offset: int = 0) -> tuple:
    s = s.strip()
    if s == "e":
        return ()
    pairs = re.findall(r"\(\s*(" + _LABEL + r")\s*,\s*(" + _LABEL + r")\s*\)", s)
    if not pairs or re.sub(r"\s", "", s) != "".join(f"({x},{y})" for x, y in pairs):
        raise stmt.error(f"bad position {s!r}", offset)
    try:
        return alph.position(pairs)
    except ValueError as e:
        raise stmt.error(str(e), offset) from None


# ---------------------------------------------------------------------------
# games

def _parse_dfa(stmts: list[_Stmt], i: int, header: _Stmt, name: str, alph: MoveAlphabets):
    start = None
    labels, decl = {}, {}
    rules = []  # (state, x or None, y or None, target, stmt)
    while True:
        if i >= len(stmts):
            raise header.error("unterminated dfa block")
        st = stmts[i]
        i += 1
        t = st.text
        if t == "}":
            break
        if m := re.fullmatch(r"start\s+(" + _STATE + r")", t):
            if start is not None:
                raise st.error("start declared twice")
            start = m.group(1)
        elif m := re.fullmatch(r"state\s+(" + _STATE + r")((?:\s+\S+)*)", t):
            q = m.group(1)
            if q in labels:
                raise st.error(f"duplicate state {q!r}")
            u, acc, term = None, False, False
            for tok in m.group(2).split():
                if tok.startswith("u="):
                    u = _number(tok[2:], st, t.index(tok) + 2)
                elif tok == "accepting":
                    acc = True
                elif tok == "terminal":
                    term = True
                else:
                    raise st.error(f"unknown state attribute {tok!r}", t.index(tok))
            labels[q] = StateLabel(u=u, accepting=acc, terminal=term)
            decl[q] = st
        elif m := re.fullmatch(r"(" + _STATE + r")\s*\(\s*(\S+?)\s*,\s*(\S+?)\s*\)\s*->\s*(" + _STATE + r")", t):
            q, x, y, r = m.groups()
            if x != "*" and x not in alph.x_moves:
                raise st.error(f"unknown move label {x!r} for player I", m.start(2))
            if y != "*" and y not in alph.y_moves:
                raise st.error(f"unknown move label {y!r} for player II", m.start(3))
            rules.append((q, None if x == "*" else x, None if y == "*" else y, r, st))
        else:
            raise st.error(f"cannot parse dfa statement {t!r}")
    if start is None:
        raise header.error("dfa has no start state")
    if start not in labels:
        raise header.error(f"start state {start!r} undefined")
    chosen = {}  # (q, z) -> (rank, target, stmt)
    for q, x, y, r, st in rules:
        if q not in labels:
            raise st.error(f"transition from undeclared state {q!r}")
        if r not in labels:
            raise st.error(f"transition to undeclared state {r!r}")
        if labels[q].terminal and r != q:
            raise st.error(f"terminal state {q!r} has an outgoing non-self transition")
        rank = (x is None) + (y is None)
        for z in range(alph.n_joint):
            a, b = alph.joint_labels(z)
            if (x is None or x == a) and (y is None or y == b):
                prev = chosen.get((q, z))
                if prev is None or rank < prev[0]:
                    chosen[q, z] = (rank, r, st)
                elif rank == prev[0]:
                    if rank == 0:
                        raise st.error(f"duplicate transition for {q!r} on ({a},{b})")
                    if prev[1] != r:
                        raise st.error(f"conflicting transitions for {q!r} on ({a},{b})")
    delta = {}
    for q in labels:
        row = []
        for z in range(alph.n_joint):
            if (q, z) in chosen:
                row.append(chosen[q, z][1])
            elif labels[q].terminal:
                row.append(q)
            else:
                a, b = alph.joint_labels(z)
                raise decl[q].error(f"non-total transition function: state {q!r} has no move for ({a},{b})")
        delta[q] = tuple(row)
    try:
        aut = PayoffAutomaton(start, delta, labels, name=name)
    except ValueError as e:
        raise header.error(str(e)) from None
    return aut, i


def parse_game(text: str) -> GameSpec:
    """Parse a ``.bwg`` document into a validated :class:`GameSpec`."""
    stmts = _statements(text)
    if not stmts:
        raise SpecError("empty document", 1)
    fields = {}
    moves = {}
    automata = []
    matrix_rows, matrix_stmt = None, None
    i = 0
    while i < len(stmts):
        st = stmts[i]
        i += 1
        t = st.text
        if matrix_rows is not None and re.fullmatch(r"(" + _NUMBER + r")([\s,]+" + _NUMBER + r")*", t):
            matrix_rows.append([_number(v, st) for v in re.split(r"[\s,]+", t)])
            continue
        if t.startswith("game"):
            m = re.fullmatch(r"game\s+" + _NAME, t)
            if not m or "game" in fields:
                raise st.error("expected a single 'game \"<name>\"' line")
            fields["game"] = (m.group(1), st)
        elif t.startswith("moves"):
            _moves_stmt(st, moves)
        elif t.startswith("kind"):
            m = re.fullmatch(r"kind\s*=\s*(\S+)(?:\s+(\S+))?", t)
            if not m or "kind" in fields:
                raise st.error("expected a single 'kind = ...' line")
            kind = _KIND_ALIASES.get(m.group(1), m.group(1))
            if kind not in KINDS:
                raise st.error(f"unknown game kind {m.group(1)!r}", m.start(1))
            horizon = None
            if kind == FINITE:
                if not m.group(2) or not m.group(2).isdigit():
                    raise st.error("finite games need a horizon: 'kind = finite <n>'")
                horizon = int(m.group(2))
            elif m.group(2):
                raise st.error(f"unexpected {m.group(2)!r} after kind", m.start(2))
            fields["kind"] = (kind, horizon, st)
        elif t.startswith("bounds"):
            m = re.fullmatch(r"bounds\s*=\s*\[\s*(\S+?)\s*,\s*(\S+?)\s*\]", t)
            if not m or "bounds" in fields:
                raise st.error("expected a single 'bounds = [lo, hi]' line")
            lo, hi = _number(m.group(1), st, m.start(1)), _number(m.group(2), st, m.start(2))
            if lo > hi:
                raise st.error(f"empty payoff bounds [{lo}, {hi}]")
            fields["bounds"] = ((lo, hi), st)
        elif t.startswith("payoff"):
            m = re.fullmatch(r"payoff\s*=\s*(\S+)\s*\*\s*f\s*([-+])\s*(\S+)", t)
            if not m or "payoff" in fields:
                raise st.error("expected a single 'payoff = <a> * f + <c>' line")
            a = _number(m.group(1), st, m.start(1))
            c = _number(m.group(3), st, m.start(3))
            fields["payoff"] = ((a, c if m.group(2) == "+" else -c), st)
        elif t.startswith("start"):
            m = re.fullmatch(r"start\s*=\s*(.+)", t)
            if not m or "start" in fields:
                raise st.error("expected a single 'start = <position>' line")
            fields["start"] = (m.group(1), st, m.start(1))
        elif t.startswith("matrix"):
            if not re.fullmatch(r"matrix\s*:", t) or matrix_stmt is not None:
                raise st.error("expected a single 'matrix:' line")
            matrix_rows, matrix_stmt = [], st
        elif t.startswith("dfa"):
            m = re.fullmatch(r"dfa\s+" + _NAME + r"\s*\{", t)
            if not m:
                raise st.error("expected 'dfa \"<name>\" {'")
            alph = _alphabets(moves, st)
            aut, i = _parse_dfa(stmts, i, st, m.group(1), alph)
            automata.append(aut)
        else:
            raise st.error(f"cannot parse statement {t!r}")

    last = stmts[-1]
    for key in ("game", "kind", "bounds"):
        if key not in fields:
            raise last.error(f"missing '{key}' line")
    alph = _alphabets(moves, last)
    kind, horizon, kind_stmt = fields["kind"]
    scale, offset = fields.get("payoff", ((Fraction(1), Fraction(0)), None))[0]
    start = ()
    if "start" in fields:
        text_, st, off = fields["start"]
        start = _parse_position(text_, alph, st, off)
    matrix = None
    if kind == MATRIX:
        if matrix_stmt is None:
            raise kind_stmt.error("matrix game without a 'matrix:' block")
        nx, ny = len(alph.x_moves), len(alph.y_moves)
        if len(matrix_rows) != nx or any(len(r) != ny for r in matrix_rows):
            raise matrix_stmt.error(f"matrix dimension mismatch: expected {nx}x{ny}")
        matrix = matrix_rows
    elif matrix_stmt is not None:
        raise matrix_stmt.error(f"{kind} games take no matrix")
    try:
        return GameSpec(alph, kind, fields["bounds"][0], automata=tuple(automata), matrix=matrix,
                        horizon=horizon, name=fields["game"][0], scale=scale, offset=offset,
                        start_position=start)
    except ValueError as e:
        raise kind_stmt.error(str(e)) from None


# ---------------------------------------------------------------------------
# strategies

def _parse_row(stmt: _Stmt, body: str, offset: int, moves: tuple) -> tuple:
    probs = {}
    for item in body.split(","):
        if not item.strip():
            continue
        m = re.fullmatch(r"\s*(" + _LABEL + r")\s*:\s*(\S+)\s*", item)
        if not m:
            raise stmt.error(f"bad distribution entry {item.strip()!r}", offset)
        label, value = m.groups()
        if label not in moves:
            raise stmt.error(f"unknown move label {label!r}", offset)
        if label in probs:
            raise stmt.error(f"move {label!r} listed twice", offset)
        p = _number(value, stmt, offset)
        if p < 0:
            raise stmt.error(f"negative probability for {label!r}", offset)
        probs[label] = p
    total = sum(probs.values())
    if abs(total - 1) > ROW_TOL:
        raise stmt.error(f"non-stochastic row (sums to {total})", offset)
    return tuple(probs.get(m, Fraction(0)) for m in moves)


def parse_strategy(text: str, alphabets: MoveAlphabets | None = None) -> BehavioralStrategy:
    """Parse a ``.bws`` document.

    The move alphabets come from ``moves`` lines in the document or from
    ``alphabets`` (for instance those of the game it will be played in).
    """
    stmts = _statements(text)
    if not stmts:
        raise SpecError("empty document", 1)
    head = stmts[0]
    m = re.fullmatch(r"strategy\s+(I|II)", head.text)
    if not m:
        raise head.error("expected 'strategy I' or 'strategy II'")
    owner = m.group(1)
    moves = {}
    i = 1
    while i < len(stmts) and stmts[i].text.startswith("moves"):
        _moves_stmt(stmts[i], moves)
        i += 1
    if moves:
        alph = _alphabets(moves, stmts[i - 1])
        if alphabets is not None and alph != alphabets:
            raise stmts[1].error("strategy moves differ from the game's")
    elif alphabets is not None:
        alph = alphabets
    else:
        raise head.error("strategy needs 'moves' lines or a game to take them from")
    own = alph.moves_of(owner)
    body = stmts[i:]
    if not body:
        raise head.error("strategy has no body")

    if len(body) == 1 and body[0].text == "uniform":
        return FiniteStateStrategy.uniform_strategy(owner, alph)

    if body[0].text.startswith("depth") or body[0].text.startswith("at "):
        depth, table = None, {}
        for st in body:
            if dm := re.fullmatch(r"depth\s+(\d+)", st.text):
                if depth is not None:
                    raise st.error("depth declared twice")
                depth = int(dm.group(1))
            elif am := re.fullmatch(r"at\s+(.+?)\s+play\s*\{(.*)\}", st.text):
                p = _parse_position(am.group(1), alph, st, am.start(1))
                if p in table:
                    raise st.error(f"duplicate entry at {am.group(1)}")
                if depth is not None and len(p) >= depth:
                    raise st.error(f"entry at length {len(p)} beyond depth {depth}")
                table[p] = _parse_row(st, am.group(2), am.start(2), own)
            else:
                raise st.error(f"cannot parse table statement {st.text!r}")
        try:
            return TableStrategy(owner, alph, table, depth)
        except ValueError as e:
            raise body[0].error(str(e)) from None

    start, rows, decl, rules = None, {}, {}, []
    for st in body:
        t = st.text
        if sm := re.fullmatch(r"start\s+(" + _STATE + r")", t):
            if start is not None:
                raise st.error("start declared twice")
            start = sm.group(1)
        elif sm := re.fullmatch(r"state\s+(" + _STATE + r")\s+play\s*\{(.*)\}", t):
            q = sm.group(1)
            if q in rows:
                raise st.error(f"duplicate state {q!r}")
            rows[q] = _parse_row(st, sm.group(2), sm.start(2), own)
            decl[q] = st
        elif sm := re.fullmatch(r"(" + _STATE + r")\s*\(\s*(\S+?)\s*,\s*(\S+?)\s*\)\s*->\s*(" + _STATE + r")", t):
            q, x, y, r = sm.groups()
            if x != "*" and x not in alph.x_moves:
                raise st.error(f"unknown move label {x!r} for player I", sm.start(2))
            if y != "*" and y not in alph.y_moves:
                raise st.error(f"unknown move label {y!r} for player II", sm.start(3))
            rules.append((q, None if x == "*" else x, None if y == "*" else y, r, st))
        else:
            raise st.error(f"cannot parse strategy statement {t!r}")
    if start is None:
        raise body[0].error("strategy has no start state")
    if start not in rows:
        raise body[0].error(f"start state {start!r} undefined")
    chosen = {}
    for q, x, y, r, st in rules:
        if q not in rows:
            raise st.error(f"transition from undeclared state {q!r}")
        if r not in rows:
            raise st.error(f"transition to undeclared state {r!r}")
        rank = (x is None) + (y is None)
        for z in range(alph.n_joint):
            a, b = alph.joint_labels(z)
            if (x is None or x == a) and (y is None or y == b):
                prev = chosen.get((q, z))
                if prev is None or rank < prev[0]:
                    chosen[q, z] = (rank, r)
                elif rank == prev[0] and (rank == 0 or prev[1] != r):
                    raise st.error(f"conflicting transitions for {q!r} on ({a},{b})")
    delta = {}
    for q in rows:
        row = []
        for z in range(alph.n_joint):
            if (q, z) not in chosen:
                a, b = alph.joint_labels(z)
                raise decl[q].error(f"non-total transition function: state {q!r} has no move for ({a},{b})")
            row.append(chosen[q, z][1])
        delta[q] = tuple(row)
    return FiniteStateStrategy(owner, alph, start, delta, rows)


# ---------------------------------------------------------------------------
# serialization

def format_number(v) -> str:
    """Exact decimal when the value has one, ``p/q`` otherwise."""
    v = Fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    d = v.denominator
    for f in (2, 5):
        while d % f == 0:
            d //= f
    if d != 1:
        return f"{v.numerator}/{v.denominator}"
    with localcontext() as ctx:
        ctx.prec = len(str(v.numerator)) + 2 * len(str(v.denominator)) + 10
        s = format(Decimal(v.numerator) / Decimal(v.denominator), "f")
    return s.rstrip("0") if "." in s else s


def _moves_lines(alph: MoveAlphabets) -> list[str]:
    return [f"moves I = {{{', '.join(alph.x_moves)}}}", f"moves II = {{{', '.join(alph.y_moves)}}}"]


def _row_text(moves: tuple, row: tuple) -> str:
    return "{" + ", ".join(f"{m}: {format_number(p)}" for m, p in zip(moves, row)) + "}"


def _serialize_game(spec: GameSpec) -> str:
    alph = spec.alphabets
    kind = f"finite {spec.horizon}" if spec.kind == FINITE else spec.kind
    lines = [f'game "{spec.name}"', *_moves_lines(alph), f"kind = {kind}",
             f"bounds = [{format_number(spec.bounds[0])}, {format_number(spec.bounds[1])}]"]
    if spec.scale != 1 or spec.offset != 0:
        sign = "-" if spec.offset < 0 else "+"
        lines.append(f"payoff = {format_number(spec.scale)} * f {sign} {format_number(abs(spec.offset))}")
    if spec.start_position:
        lines.append(f"start = {alph.format_position(spec.start_position)}")
    if spec.kind == MATRIX:
        lines.append("matrix:")
        lines += ["  " + " ".join(format_number(v) for v in row) for row in spec.matrix]
    for aut in spec.automata:
        lines.append(f'dfa "{aut.name}" {{')
        lines.append(f"  start {aut.start}")
        for q in aut.states:
            lab = aut.labels[q]
            attrs = ([f"u={format_number(lab.u)}"] if lab.u is not None else []) \
                + (["accepting"] if lab.accepting else []) + (["terminal"] if lab.terminal else [])
            lines.append("  " + " ".join([f"state {q}"] + attrs))
        for q in aut.states:
            if aut.labels[q].terminal:
                continue
            for z, r in enumerate(aut.delta[q]):
                lines.append("  {} ({},{}) -> {}".format(q, *alph.joint_labels(z), r))
        lines.append("}")
    return "\n".join(lines) + "\n"


def _serialize_strategy(s: BehavioralStrategy) -> str:
    alph = s.alphabets
    lines = [f"strategy {s.owner}", *_moves_lines(alph)]
    own = alph.moves_of(s.owner)
    if isinstance(s, TableStrategy):
        lines.append(f"depth {s.depth}")
        for p in sorted(s.table, key=lambda p: (len(p), p)):
            lines.append(f"at {alph.format_position(p)} play {_row_text(own, s.table[p])}")
    elif isinstance(s, FiniteStateStrategy):
        lines.append(f"start {s.start}")
        for q in sorted(s.rows):
            lines.append(f"state {q} play {_row_text(own, s.rows[q])}")
        for q in sorted(s.delta):
            for z, r in enumerate(s.delta[q]):
                lines.append("{} ({},{}) -> {}".format(q, *alph.joint_labels(z), r))
    else:
        raise TypeError(f"cannot serialize {type(s).__name__}")
    return "\n".join(lines) + "\n"


def serialize(value) -> str:
    """Canonical text of a game or strategy."""
    if isinstance(value, GameSpec):
        return _serialize_game(value)
    if isinstance(value, BehavioralStrategy):
        return _serialize_strategy(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def load_game(path) -> GameSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_game(fh.read())


def load_strategy(path, alphabets: MoveAlphabets | None = None) -> BehavioralStrategy:
    with open(path, encoding="utf-8") as fh:
        return parse_strategy(fh.read(), alphabets)
