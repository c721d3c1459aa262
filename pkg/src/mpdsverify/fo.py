"""FO(<) over the naturals and its compilation into a two-stack bounded-phase game.

The first stack holds the current valuation as a word over the variables and
the filler ``a``: each variable letter has as many ``a`` below it as its value.
Quantifiers rewrite that word; atoms are decided by popping it.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .explorer import ExplorationBounds
from .mpds import (BOTTOM, FILLER, PLAYER0, PLAYER1, WILDCARD, Configuration, MpdsError,
                   MpdsSystem, SystemBuilder, is_reserved, phase_count)

LT, EQ, NOT, AND, OR, EXISTS, FORALL = "lt", "eq", "not", "and", "or", "exists", "forall"
QUANTIFIERS = (EXISTS, FORALL)


class FoFormula:
    __slots__ = ("op", "args", "_hash")

    def __init__(self, op, *args):
        self.op = op
        self.args = args
        self._hash = hash((op, args))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, FoFormula) and self._hash == other._hash and (
            self.op == other.op and self.args == other.args)

    def __repr__(self):
        return f"FoFormula({self})"

    def __str__(self):
        op, a = self.op, self.args
        if op == LT:
            return f"{a[0]}<{a[1]}"
        if op == EQ:
            return f"{a[0]}={a[1]}"
        if op == NOT:
            return f"!{_paren(a[0])}"
        if op in QUANTIFIERS:
            return f"{'E' if op == EXISTS else 'A'} {a[0]}. {a[1]}"
        sym = " & " if op == AND else " | "
        return sym.join(_paren(x) for x in a)

    def free(self) -> set:
        op, a = self.op, self.args
        if op in (LT, EQ):
            return set(a)
        if op in QUANTIFIERS:
            return a[1].free() - {a[0]}
        out = set()
        for x in a:
            out |= x.free()
        return out

    def quantifiers(self) -> int:
        if self.op in (LT, EQ):
            return 0
        own = 1 if self.op in QUANTIFIERS else 0
        return own + sum(x.quantifiers() for x in self.args if isinstance(x, FoFormula))

    def depth(self) -> int:
        if self.op in (LT, EQ):
            return 0
        own = 1 if self.op in QUANTIFIERS else 0
        return own + max(x.depth() for x in self.args if isinstance(x, FoFormula))

    def size(self) -> int:
        if self.op in (LT, EQ):
            return 1
        return 1 + sum(x.size() for x in self.args if isinstance(x, FoFormula))

    def variables(self) -> list:
        """Bound and free variables in first-occurrence order."""
        out: list = []

        def walk(f):
            if f.op in (LT, EQ):
                names = f.args
            elif f.op in QUANTIFIERS:
                names = (f.args[0],)
            else:
                names = ()
            for v in names:
                if v not in out:
                    out.append(v)
            for x in f.args:
                if isinstance(x, FoFormula):
                    walk(x)

        walk(self)
        return out

    def subformulas(self) -> list:
        """Distinct subformulas, parents before children."""
        out, seen = [], set()
        stack = [self]
        while stack:
            f = stack.pop()
            if f in seen:
                continue
            seen.add(f)
            out.append(f)
            for x in reversed(f.args):
                if isinstance(x, FoFormula):
                    stack.append(x)
        return out


def _paren(f):
    s = str(f)
    return s if f.op in (LT, EQ, NOT) else f"({s})"


def Lt(x, y):
    return FoFormula(LT, x, y)


def Eq(x, y):
    return FoFormula(EQ, x, y)


def Exists(x, f):
    return FoFormula(EXISTS, x, f)


def Forall(x, f):
    return FoFormula(FORALL, x, f)


def FAnd(a, b):
    return FoFormula(AND, a, b)


def FOr(a, b):
    return FoFormula(OR, a, b)


def FNot(a):
    return FoFormula(NOT, a)


# -- parsing ------------------------------------------------------------------

class FoSyntaxError(ValueError):
    def __init__(self, msg, pos):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


_TOK = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|([.&|!<=()]))")


def _tokens(text):
    out, pos = [], 0
    while text[pos:].strip():
        m = _TOK.match(text, pos)
        if not m:
            raise FoSyntaxError(f"unexpected character {text[pos:].lstrip()[:1]!r}", pos)
        start = m.start(m.lastindex)
        if m.group(1):
            word = m.group(1)
            out.append((word if word in ("E", "A") else "VAR", word, start))
        else:
            out.append((m.group(2), None, start))
        pos = m.end()
    out.append(("EOF", None, len(text)))
    return out


class _FoParser:
    def __init__(self, text):
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i][0]

    def take(self, kind):
        tok = self.toks[self.i]
        if tok[0] != kind:
            raise FoSyntaxError(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        self.i += 1
        return tok

    def disj(self):
        f = self.conj()
        while self.peek() == "|":
            self.i += 1
            f = FOr(f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.peek() == "&":
            self.i += 1
            f = FAnd(f, self.unary())
        return f

    def unary(self):
        k = self.peek()
        if k in ("E", "A"):
            self.i += 1
            var = self.take("VAR")[1]
            self.take(".")
            body = self.disj()
            return FoFormula(EXISTS if k == "E" else FORALL, var, body)
        if k == "!":
            self.i += 1
            return FNot(self.unary())
        if k == "(":
            self.i += 1
            f = self.disj()
            self.take(")")
            return f
        if k == "VAR":
            x = self.take("VAR")[1]
            tok = self.toks[self.i]
            if tok[0] not in ("<", "="):
                raise FoSyntaxError(f"expected '<' or '=', found {tok[0]!r}", tok[2])
            self.i += 1
            y = self.take("VAR")[1]
            return FoFormula(LT if tok[0] == "<" else EQ, x, y)
        tok = self.toks[self.i]
        raise FoSyntaxError(f"unexpected token {tok[0]!r}", tok[2])


def parse_fo(text: str, sentence: bool = False) -> FoFormula:
    """Parse and rename bound variables apart.  With ``sentence=True`` free
    variables are rejected."""
    p = _FoParser(text)
    f = p.disj()
    if p.peek() != "EOF":
        tok = p.toks[p.i]
        raise FoSyntaxError(f"trailing input {tok[0]!r}", tok[2])
    f = rename_apart(f)
    if sentence and f.free():
        raise ValueError(f"unbound variables: {', '.join(sorted(f.free()))}")
    return f


def rename_apart(f: FoFormula) -> FoFormula:
    """Give every quantifier its own variable name, never a reserved stack symbol."""
    used = set()

    def fresh(name):
        cand, k = name, 0
        while cand in used or is_reserved(cand) or cand in ("E", "A"):
            k += 1
            cand = f"{name}_{k}"
        used.add(cand)
        return cand

    for v in sorted(f.free()):
        if is_reserved(v):
            raise ValueError(f"free variable {v!r} clashes with a reserved stack symbol")
        used.add(v)

    def walk(g, env):
        op, a = g.op, g.args
        if op in (LT, EQ):
            return FoFormula(op, env.get(a[0], a[0]), env.get(a[1], a[1]))
        if op in QUANTIFIERS:
            new = fresh(a[0])
            return FoFormula(op, new, walk(a[1], {**env, a[0]: new}))
        return FoFormula(op, *(walk(x, env) for x in a))

    return walk(f, {})


def to_nnf(f: FoFormula, negate: bool = False) -> FoFormula:
    op, a = f.op, f.args
    if op == NOT:
        return to_nnf(a[0], not negate)
    if op in (AND, OR):
        flip = {AND: OR, OR: AND}[op] if negate else op
        return FoFormula(flip, to_nnf(a[0], negate), to_nnf(a[1], negate))
    if op in QUANTIFIERS:
        flip = {EXISTS: FORALL, FORALL: EXISTS}[op] if negate else op
        return FoFormula(flip, a[0], to_nnf(a[1], negate))
    if not negate:
        return f
    x, y = a
    if op == LT:
        return FOr(Eq(x, y), Lt(y, x))
    return FOr(Lt(x, y), Lt(y, x))


def is_nnf(f: FoFormula) -> bool:
    if f.op == NOT:
        return False
    return all(is_nnf(x) for x in f.args if isinstance(x, FoFormula))


# -- valuations -----------------------------------------------------------------

def encode_valuation(rho: dict, order=None) -> tuple:
    """Top-first stack word for ``rho``; larger values nearer the top, ties kept in ``order``."""
    order = list(order) if order is not None else sorted(rho)
    missing = set(rho) - set(order)
    if missing:
        raise ValueError(f"order misses {sorted(missing)}")
    names = sorted((v for v in order if v in rho), key=lambda v: -rho[v])
    word = []
    for i, v in enumerate(names):
        below = rho[names[i + 1]] if i + 1 < len(names) else 0
        word.append(v)
        word.extend([FILLER] * (rho[v] - below))
    return tuple(word) + (BOTTOM,)


def decode_valuation(word) -> dict:
    word = list(word)
    if not word or word[-1] != BOTTOM or BOTTOM in word[:-1]:
        raise ValueError("valuation word must end with a single bottom")
    body = word[:-1]
    if body and body[0] == FILLER:
        raise ValueError("valuation word must start with a variable")
    rho = {}
    for i, s in enumerate(body):
        if s == FILLER:
            continue
        if s in rho:
            raise ValueError(f"variable {s} occurs twice")
        rho[s] = body[i + 1:].count(FILLER)
    return rho


# -- compilation ------------------------------------------------------------------

T_STATE, F_STATE = "fo:T", "fo:F"


@dataclass
class CompiledGame:
    system: MpdsSystem
    formula: FoFormula
    entry: str
    variables: list
    names: dict = field(default_factory=dict)  # subformula -> state id
    report: dict = field(default_factory=dict)

    @property
    def quantifiers(self) -> int:
        return self.formula.quantifiers()

    @property
    def phase_bound(self) -> int:
        return 2 * self.quantifiers + 1

    def initial(self, rho: Optional[dict] = None) -> Configuration:
        return Configuration.make(self.entry, encode_valuation(rho or {}, self.variables), ())

    def bounds(self, stack_cap: int, node_cap: int = 10**6) -> ExplorationBounds:
        """Caps under which every quantifier ranges over {0..domain_max(stack_cap)}."""
        room = stack_cap - len(self.variables)
        if room < 1:
            raise ValueError(f"stack cap {stack_cap} leaves no room for values")
        return ExplorationBounds(context_bound=10**9, stack_cap=stack_cap,
                                 node_cap=node_cap, symbol_caps={FILLER: room})

    def domain_max(self, stack_cap: int) -> int:
        # an owner stuck at the filler cap loses, so the cap itself is never chosen
        return stack_cap - len(self.variables) - 1


def compile_fo(phi: FoFormula) -> CompiledGame:
    if not is_nnf(phi):
        raise ValueError("compile_fo needs a negation-free formula; apply to_nnf first")
    variables = phi.variables()
    if len(set(variables)) != len(variables):
        raise ValueError("variables must be renamed apart")
    b = SystemBuilder(stacks=2)
    b.symbols([FILLER, *variables])
    subs = phi.subformulas()
    names = {f: f"fo:{i}" for i, f in enumerate(subs)}
    letters = [FILLER, *variables]
    helpers: set = set()

    for f in subs:
        q = names[f]
        b.state(q)
        op, a = f.op, f.args
        if op in (AND, FORALL):
            b.owner[q] = PLAYER1
        if op in (AND, OR):
            b.internal(q, names[a[0]])
            b.internal(q, names[a[1]])
        elif op in QUANTIFIERS:
            x, body = a
            who = PLAYER1 if op == FORALL else PLAYER0
            right, left, t12, t21 = (f"{q}:{tag}" for tag in (">", "<", "1t2", "2t1"))
            for s in (right, left, t12, t21):
                b.state(s)
                b.owner[s] = who
            b.priority[right] = 0 if op == FORALL else 1
            b.internal(q, left)
            b.internal(q, right)
            b.push(right, WILDCARD, right, 1, FILLER)
            b.push(right, WILDCARD, names[body], 1, x)
            b.internal(left, t12)
            for c in letters:
                s12, s21 = f"{t12}:{c}", f"{t21}:{c}"
                b.state(s12, s21)
                b.owner[s12] = b.owner[s21] = who
                b.pop(t12, c, s12, 1)
                b.push(s12, WILDCARD, t12, 2, c)
                b.pop(t21, c, s21, 2)
                b.push(s21, WILDCARD, t21, 1, c)
            b.push(t12, WILDCARD, t21, 1, x)
            b.noop(t21, BOTTOM, 2, names[body])
        else:
            _atomic(b, f, q, variables, helpers)

    b.state(T_STATE, F_STATE)
    b.priority[F_STATE] = 1
    b.internal(T_STATE, T_STATE)
    b.internal(F_STATE, F_STATE)
    sys = b.build(names[phi], game=True)
    q = phi.quantifiers()
    report = {
        "states": len(sys.states),
        "transitions": len(sys.transitions),
        "quantifiers": q,
        "phase_bound": 2 * q + 1,
        "subformulas": len(subs),
        "variables": len(variables),
    }
    return CompiledGame(sys, phi, names[phi], variables, names, report)


def _atomic(b: SystemBuilder, f: FoFormula, q: str, variables: list, helpers: set) -> None:
    x, y = f.args
    others = [z for z in variables if z not in (x, y)]
    if f.op == EQ:
        b.pop(q, FILLER, q, 1)
        for z in others:
            b.pop(q, z, q, 1)
        if x == y:
            b.pop(q, x, T_STATE, 1)
            return
        b.pop(q, x, _seek(y), 1)
        b.pop(q, y, _seek(x), 1)
        for v in (x, y):
            s = _seek(v)
            if s in helpers:
                continue
            helpers.add(s)
            for z in variables:
                if z != v:
                    b.pop(s, z, s, 1)
            b.pop(s, FILLER, F_STATE, 1)
            b.pop(s, v, T_STATE, 1)
        return
    # larger values sit nearer the top: x<y needs y first, then an `a` before x
    b.pop(q, FILLER, q, 1)
    for z in others:
        b.pop(q, z, q, 1)
    b.pop(q, x, F_STATE, 1)
    if x == y:
        return
    s = f"fo:gap:{x}"
    b.pop(q, y, s, 1)
    if s not in helpers:
        helpers.add(s)
        for z in variables:
            if z != x:
                b.pop(s, z, s, 1)
        b.pop(s, FILLER, T_STATE, 1)
        b.pop(s, x, F_STATE, 1)


def _seek(v):
    return f"fo:seek:{v}"


def atomic_verdict_trace(game: CompiledGame, c: Configuration, trace: Optional[list] = None) -> str:
    """Follow the unique play from an atomic state to T or F.

    ``trace`` (if given) receives the transitions taken; the run never needs a
    second phase.
    """
    from .mpds import step, successors

    f = next((g for g, s in game.names.items() if s == c.state), None)
    if f is None or f.op not in (LT, EQ):
        raise MpdsError(f"{c.state} is not an atomic state")
    rho = decode_valuation(c.stacks[0])
    if not set(f.args) <= set(rho):
        raise ValueError(f"valuation {rho} does not define {f}")
    run = []
    while c.state not in (T_STATE, F_STATE):
        moves = successors(game.system, c)
        if not moves:
            break
        if len(moves) != 1:
            raise MpdsError(f"atomic check is not deterministic at {c}")
        t, c = moves[0]
        run.append(t)
    if phase_count(game.system, run) > 1:
        raise MpdsError("atomic check changed phase")
    if trace is not None:
        trace.extend(run)
    return "T" if c.state == T_STATE else "F"
