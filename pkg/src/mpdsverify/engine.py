"""Integer-coded successor generation shared by the explorer, game builder and local checker.

A packed configuration is ``(state_id, s_1, ..., s_l)`` where each ``s_j`` is a
``bytes`` object holding the stack bottom-first, without the bottom sentinel.
"""
from __future__ import annotations

from .mpds import BOTTOM, INTERNAL, NOOP, POP, PUSH, WILDCARD, Configuration, MpdsSystem

K_INTERNAL, K_PUSH, K_POP, K_NOOP = 0, 1, 2, 3
_KIND = {INTERNAL: K_INTERNAL, PUSH: K_PUSH, POP: K_POP, NOOP: K_NOOP}


class Engine:
    def __init__(self, sys: MpdsSystem):
        self.sys = sys
        self.states = list(sys.states)
        self.state_id = {q: i for i, q in enumerate(self.states)}
        self.symbols = [BOTTOM] + [s for s in sys.alphabet if s != BOTTOM]
        if len(self.symbols) > 255:
            raise ValueError("alphabet too large for the packed representation")
        self.symbol_id = {s: i for i, s in enumerate(self.symbols)}
        self.stacks = sys.stacks
        self.transitions = list(sys.transitions)
        # per state: list of (tidx, kind, stack0, guard_id|-1, sym_id, dst)
        self._by_state: list = [[] for _ in self.states]
        for idx, t in enumerate(self.transitions):
            guard = -1
            if t.kind in (PUSH, NOOP) and t.guard not in (None, WILDCARD):
                guard = self.symbol_id[t.guard]
            sym = self.symbol_id[t.symbol] if t.symbol is not None else 0
            self._by_state[self.state_id[t.src]].append(
                (idx, _KIND[t.kind], t.stack - 1, guard, sym, self.state_id[t.dst])
            )
        self._cache: dict = {}

    # -- conversions ---------------------------------------------------------
    def pack(self, c: Configuration) -> tuple:
        packed = [self.state_id[c.state]]
        for w in c.stacks:
            packed.append(bytes(self.symbol_id[s] for s in reversed(w[:-1])))
        return tuple(packed)

    def unpack(self, p: tuple) -> Configuration:
        stacks = tuple(
            tuple(self.symbols[b] for b in reversed(s)) + (BOTTOM,) for s in p[1:]
        )
        return Configuration(self.states[p[0]], stacks)

    def word(self, s: bytes) -> tuple:
        return tuple(self.symbols[b] for b in reversed(s)) + (BOTTOM,)

    # -- moves ---------------------------------------------------------------
    def moves(self, p: tuple) -> list:
        """Enabled moves at ``p`` as (tidx, kind, stack0, sym, dst), declaration order."""
        tops = tuple(s[-1] if s else 0 for s in p[1:])
        key = (p[0], tops)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        out = []
        for idx, kind, j, guard, sym, dst in self._by_state[p[0]]:
            if kind == K_INTERNAL:
                out.append((idx, kind, -1, 0, dst))
                continue
            top = tops[j]
            if kind == K_POP:
                if top == sym and top != 0:
                    out.append((idx, kind, j, sym, dst))
            elif guard < 0 or guard == top:
                out.append((idx, kind, j, sym, dst))
        self._cache[key] = out
        return out

    @staticmethod
    def apply(p: tuple, move: tuple) -> tuple:
        _, kind, j, sym, dst = move
        if kind == K_INTERNAL or kind == K_NOOP:
            return (dst,) + p[1:]
        s = p[j + 1]
        s = s + bytes((sym,)) if kind == K_PUSH else s[:-1]
        return (dst,) + p[1:j + 1] + (s,) + p[j + 2:]
