"""CTL over control-state propositions: syntax, parser, and two model checkers.

``check`` labels an explicit finite graph bottom-up with fixpoint kernels.
``LocalChecker`` decides a formula at one configuration on the fly, expanding
only the part of the truncated configuration graph the formula needs.
"""
from __future__ import annotations

import re
from typing import Optional

import numpy as np

from . import kernels
from .engine import K_INTERNAL, K_NOOP, K_PUSH, Engine
from .explorer import NONE_STACK, ConfigGraph, ExplorationBounds, Limits
from .mpds import Configuration, MpdsSystem

PROP, NOT, AND, OR, EX, EF, EG, EU = "prop", "not", "and", "or", "EX", "EF", "EG", "EU"


class Formula:
    __slots__ = ("op", "args", "_hash")

    def __init__(self, op: str, *args):
        self.op = op
        self.args = args
        self._hash = hash((op, args))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, Formula)
            and self._hash == other._hash
            and self.op == other.op
            and self.args == other.args
        )

    def __repr__(self):
        if self.op == PROP:
            return f"prop({self.args[0]})"
        return f"{self.op}({', '.join(map(repr, self.args))})"

    def __str__(self):
        return to_text(self)

    def size(self) -> int:
        if self.op == PROP:
            return 1
        return 1 + sum(a.size() for a in self.args)

    def depth(self) -> int:
        if self.op == PROP:
            return 0
        return 1 + max(a.depth() for a in self.args)

    def props(self) -> set:
        if self.op == PROP:
            return {self.args[0]}
        out = set()
        for a in self.args:
            out |= a.props()
        return out


def Prop(name: str) -> Formula:
    return Formula(PROP, name)


def Not(f: Formula) -> Formula:
    return Formula(NOT, f)


def And(*fs: Formula) -> Formula:
    out = fs[0]
    for f in fs[1:]:
        out = Formula(AND, out, f)
    return out


def Or(*fs: Formula) -> Formula:
    out = fs[0]
    for f in fs[1:]:
        out = Formula(OR, out, f)
    return out


def EXf(f):
    return Formula(EX, f)


def EFf(f):
    return Formula(EF, f)


def EGf(f):
    return Formula(EG, f)


def EUf(a, b):
    return Formula(EU, a, b)


def true_formula(p: str = "true") -> Formula:
    return Or(Prop(p), Not(Prop(p)))


def implies(a: Formula, b: Formula) -> Formula:
    return Or(Not(a), b)


def to_text(f: Formula) -> str:
    op = f.op
    if op == PROP:
        name = f.args[0]
        return name if _ATOM_FULL.fullmatch(name) and name not in _KEYWORDS else f'"{name}"'
    if op == NOT:
        return "!" + _wrap(f.args[0])
    if op in (EX, EF, EG):
        return f"{op} " + _wrap(f.args[0])
    if op == EU:
        return f"E[{to_text(f.args[0])} U {to_text(f.args[1])}]"
    sym = " & " if op == AND else " | "
    return "(" + sym.join(_wrap(a) for a in f.args) + ")"


def _wrap(f):
    s = to_text(f)
    return s if f.op in (PROP, NOT, EX, EF, EG, EU) or s.startswith("(") else f"({s})"


# -- parser -------------------------------------------------------------------

class CtlSyntaxError(ValueError):
    def __init__(self, msg, pos):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


_ATOM_FULL = re.compile(r"[A-Za-z0-9_.:$#@'\-]+")
_TOKEN = re.compile(r'\s*(?:(E\[)|([!&|()\]])|("(?:[^"\\]|\\.)*")|([A-Za-z0-9_.:$#@\'\-]+))')
_KEYWORDS = {"EX", "EF", "EG", "U"}


def _tokenize(text):
    pos = 0
    toks = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise CtlSyntaxError(f"unexpected character {text[pos:].lstrip()[:1]!r}", pos)
        start = m.start(m.lastindex)
        if m.group(1):
            toks.append(("E[", None, start))
        elif m.group(2):
            toks.append((m.group(2), None, start))
        elif m.group(3):
            toks.append(("ATOM", m.group(3)[1:-1].replace('\\"', '"'), start))
        else:
            word = m.group(4)
            toks.append((word, None, start) if word in _KEYWORDS else ("ATOM", word, start))
        pos = m.end()
    toks.append(("EOF", None, len(text)))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i][0]

    def take(self, kind=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            raise CtlSyntaxError(f"expected {kind!r}, found {tok[0]!r}", tok[2])
        self.i += 1
        return tok

    def disj(self):
        f = self.conj()
        while self.peek() == "|":
            self.take()
            f = Formula(OR, f, self.conj())
        return f

    def conj(self):
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = Formula(AND, f, self.unary())
        return f

    def unary(self):
        k = self.peek()
        if k == "!":
            self.take()
            return Not(self.unary())
        if k in ("EX", "EF", "EG"):
            self.take()
            return Formula(k, self.unary())
        if k == "E[":
            self.take()
            a = self.disj()
            self.take("U")
            b = self.disj()
            self.take("]")
            return EUf(a, b)
        if k == "(":
            self.take()
            f = self.disj()
            self.take(")")
            return f
        if k == "ATOM":
            return Prop(self.take()[1])
        tok = self.toks[self.i]
        raise CtlSyntaxError(f"unexpected token {tok[0]!r}", tok[2])


def parse_ctl(text: str) -> Formula:
    p = _Parser(text)
    f = p.disj()
    if p.peek() != "EOF":
        tok = p.toks[p.i]
        raise CtlSyntaxError(f"trailing input {tok[0]!r}", tok[2])
    return f


# -- global labelling ---------------------------------------------------------

class LabeledGraph:
    """Plain finite graph; each node carries one label or a set of labels."""

    def __init__(self, labels, succ, truncated: bool = False):
        self.labels_ = list(labels)
        self.succ = [list(s) for s in succ]
        self.truncated = truncated

    def __len__(self):
        return len(self.labels_)

    def labels(self):
        return self.labels_

    def successors(self, i):
        return self.succ[i]


def _prop_mask(labels, name):
    return np.fromiter(
        (lab == name or (isinstance(lab, (set, frozenset)) and name in lab) for lab in labels),
        dtype=np.uint8,
        count=len(labels),
    )


class _Labeller:
    def __init__(self, g):
        n = len(g)
        self.n = n
        self.labels = g.labels()
        self.csr = kernels.Csr(n, (g.successors(i) for i in range(n)))
        self.memo: dict = {}

    def sat(self, f: Formula) -> np.ndarray:
        hit = self.memo.get(f)
        if hit is not None:
            return hit
        op, a, c = f.op, f.args, self.csr
        if op == PROP:
            out = _prop_mask(self.labels, a[0])
        elif op == NOT:
            out = (1 - self.sat(a[0])).astype(np.uint8)
        elif op == AND:
            out = self.sat(a[0]) & self.sat(a[1])
        elif op == OR:
            out = self.sat(a[0]) | self.sat(a[1])
        elif op == EX:
            out = kernels.ex_image(c.pred_ptr, c.pred_idx, self.sat(a[0]))
        elif op == EF:
            out = kernels.eu_fix(c.pred_ptr, c.pred_idx, np.ones(self.n, np.uint8), self.sat(a[0]))
        elif op == EU:
            out = kernels.eu_fix(c.pred_ptr, c.pred_idx, self.sat(a[0]), self.sat(a[1]))
        elif op == EG:
            out = kernels.eg_fix(c.succ_ptr, c.succ_idx, c.pred_ptr, c.pred_idx, self.sat(a[0]))
        else:
            raise ValueError(f"unknown operator {op}")
        out = np.ascontiguousarray(out, dtype=np.uint8)
        self.memo[f] = out
        return out


def check_mask(g, phi: Formula) -> np.ndarray:
    return _Labeller(g).sat(phi)


def check(g, phi: Formula) -> list:
    """Sorted ids of the nodes of ``g`` satisfying ``phi``."""
    return [int(i) for i in np.flatnonzero(check_mask(g, phi))]


def holds(g, node: int, phi: Formula) -> bool:
    if not 0 <= node < len(g):
        raise IndexError(f"unknown node {node}")
    return bool(check_mask(g, phi)[node])


# -- on-the-fly checking ------------------------------------------------------

class NodeBudgetExceeded(RuntimeError):
    pass


class LocalChecker:
    """Memoised top-down evaluation over the lazily expanded truncated graph.

    Node identity and truncation rules are those of ``explore``: a node whose
    expansion lost any successor to a cap is a frontier node and is treated as
    having no successors.
    """

    def __init__(self, sys: MpdsSystem, bounds: ExplorationBounds, engine: Optional[Engine] = None):
        self.engine = engine or Engine(sys)
        self.bounds = bounds
        self.limits = Limits(self.engine, bounds)
        self.ids: dict = {}
        self.keys: list = []
        self.succ: list = []
        self.frontier_hit = False
        self.max_contexts = 0
        self.memo: dict = {}
        self._anchors: dict = {}
        self._pred = None

    def node(self, c: Configuration) -> int:
        return self._intern((self.engine.pack(c), 0, NONE_STACK))

    def _intern(self, key) -> int:
        i = self.ids.get(key)
        if i is None:
            if len(self.keys) >= self.bounds.node_cap:
                raise NodeBudgetExceeded(f"more than {self.bounds.node_cap} nodes")
            i = len(self.keys)
            self.ids[key] = i
            self.keys.append(key)
            self.succ.append(None)
            if key[1] > self.max_contexts:
                self.max_contexts = key[1]
        return i

    def state(self, i: int) -> str:
        return self.engine.states[self.keys[i][0][0]]

    def configuration(self, i: int) -> Configuration:
        return self.engine.unpack(self.keys[i][0])

    def successors(self, i: int) -> list:
        out = self.succ[i]
        if out is not None:
            return out
        p, ctx, cur = self.keys[i]
        b = self.bounds
        keys = []
        suppressed = False
        for mv in self.engine.moves(p):
            kind, j = mv[1], mv[2]
            if kind == K_INTERNAL or kind == K_NOOP:
                nctx, ncur = ctx, cur
            else:
                if kind == K_PUSH and not self.limits.push_ok(p[j + 1], j, mv[3]):
                    suppressed = True
                    break
                if j != cur:
                    nctx, ncur = ctx + 1, j
                    if nctx > b.context_bound:
                        suppressed = True
                        break
                else:
                    nctx, ncur = ctx, cur
            keys.append((self.engine.apply(p, mv), nctx, ncur))
        if suppressed:
            self.frontier_hit = True
            out = []
        else:
            out = []
            seen = set()
            for k in keys:
                d = self._intern(k)
                if d not in seen:
                    seen.add(d)
                    out.append(d)
        self.succ[i] = out
        return out

    def holds(self, c: Configuration, phi: Formula) -> bool:
        return self.sat(phi, self.node(c))

    def sat(self, f: Formula, n: int) -> bool:
        memo = self.memo.get(f)
        if memo is None:
            memo = self.memo[f] = {}
        v = memo.get(n)
        if v is not None:
            return v
        op = f.op
        if op == PROP:
            v = self.state(n) == f.args[0]
        elif op == NOT:
            v = not self.sat(f.args[0], n)
        elif op == AND:
            v = all(self.sat(g, n) for g in _conjuncts(f))
        elif op == OR:
            v = self.sat(f.args[0], n) or self.sat(f.args[1], n)
        elif op == EX:
            v = any(self.sat(f.args[0], s) for s in self.successors(n))
        elif op == EF:
            return self._until(None, f.args[0], n, memo)
        elif op == EU:
            return self._until(f.args[0], f.args[1], n, memo)
        elif op == EG:
            return self._globally(f.args[0], n, memo)
        else:
            raise ValueError(f"unknown operator {op}")
        memo[n] = v
        return v

    def _anchor(self, goal: Formula):
        """State ids that can reach a state the goal requires, or None."""
        if goal in self._anchors:
            return self._anchors[goal]
        props = [g.args[0] for g in _conjuncts(goal) if g.op == PROP]
        out = None
        if props:
            if self._pred is None:
                self._pred = [set() for _ in self.engine.states]
                for t in self.engine.transitions:
                    self._pred[self.engine.state_id[t.dst]].add(self.engine.state_id[t.src])
            q = self.engine.state_id.get(props[0])
            out = set()
            if q is not None:
                out.add(q)
                todo = [q]
                while todo:
                    for u in self._pred[todo.pop()]:
                        if u not in out:
                            out.add(u)
                            todo.append(u)
        self._anchors[goal] = out
        return out

    def _until(self, hold, goal, n, memo) -> bool:
        # successors whose control state cannot reach the goal's state are skipped
        allowed = self._anchor(goal)
        keys = self.keys
        parent = {n: None}
        stack = [n]
        found = None
        while stack:
            v = stack.pop()
            known = memo.get(v)
            if known is True or (known is None and self.sat(goal, v)):
                found = v
                break
            if known is False or (hold is not None and not self.sat(hold, v)):
                continue
            for s in self.successors(v):
                if s not in parent and (allowed is None or keys[s][0][0] in allowed):
                    parent[s] = v
                    stack.append(s)
        if found is None:
            for v in parent:
                memo[v] = False
            return False
        while found is not None:
            memo[found] = True
            found = parent[found]
        return True

    def _globally(self, hold, n, memo) -> bool:
        if not self.sat(hold, n):
            memo[n] = False
            return False
        region = [n]
        inside = {n}
        k = 0
        while k < len(region):
            v = region[k]
            k += 1
            for s in self.successors(v):
                if s not in inside and self.sat(hold, s):
                    inside.add(s)
                    region.append(s)
        alive = set(region)
        changed = True
        while changed:
            changed = False
            for v in region:
                if v in alive:
                    succ = self.successors(v)
                    if succ and not any(s in alive for s in succ):
                        alive.discard(v)
                        changed = True
        for v in region:
            memo[v] = v in alive
        return n in alive


def _conjuncts(f: Formula) -> list:
    """Flattened conjuncts, propositional ones first so they can short-circuit."""
    out = []
    stack = [f]
    while stack:
        g = stack.pop()
        if g.op == AND:
            stack.append(g.args[1])
            stack.append(g.args[0])
        else:
            out.append(g)
    cheap = [g for g in out if g.op == PROP or (g.op == NOT and g.args[0].op == PROP)]
    return cheap + [g for g in out if not (g.op == PROP or (g.op == NOT and g.args[0].op == PROP))]
