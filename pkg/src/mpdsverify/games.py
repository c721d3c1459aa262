"""Bounded-phase parity games over truncated MPDS configuration spaces."""
from __future__ import annotations

import sys as _sys
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .engine import K_POP, K_PUSH, Engine
from .explorer import ExplorationBounds, Limits
from .mpds import Configuration, MpdsError, MpdsSystem, validate

NO_POP = -1


@dataclass
class GameGraph:
    engine: Engine
    phase_bound: int
    positions: list = field(default_factory=list)  # (packed, pop_stack0 | -1, phases_left)
    succ: list = field(default_factory=list)  # [(tidx, dst)]
    owner: Optional[np.ndarray] = None
    priority: Optional[np.ndarray] = None
    frontier: set = field(default_factory=set)
    capped: bool = False
    phase_blocked: int = 0  # pops refused because no phase was left
    initial: int = 0

    def __len__(self):
        return len(self.positions)

    @property
    def truncated(self) -> bool:
        return self.capped or bool(self.frontier)

    @property
    def edge_count(self) -> int:
        return sum(len(s) for s in self.succ)

    def successors(self, v: int) -> list:
        if v in self.frontier:
            return []
        return [d for _, d in self.succ[v]]

    def state(self, v: int) -> str:
        return self.engine.states[self.positions[v][0][0]]

    def position(self, v: int):
        """``(configuration, current stack (0 = no pop yet), phases left)``."""
        p, i, k = self.positions[v]
        return self.engine.unpack(p), i + 1, k

    def find(self, c: Configuration, i: int, k: int) -> int:
        key = (self.engine.pack(c), i - 1, k)
        for v, pos in enumerate(self.positions):
            if pos == key:
                return v
        raise KeyError(f"unknown position ({c}, {i}, {k})")

    def max_phases_seen(self) -> int:
        used = [self.phase_bound - k + (1 if i != NO_POP else 0) for _, i, k in self.positions]
        return max(used, default=0)


def build_phase_game(sys: MpdsSystem, init: Configuration, phase_bound: int,
                     caps: ExplorationBounds, engine: Optional[Engine] = None) -> GameGraph:
    if not sys.game_mode or sys.priority is None:
        raise MpdsError("game construction needs owner and priority maps")
    diags = validate(sys)
    if diags:
        raise MpdsError("invalid system: " + "; ".join(diags[:3]))
    if phase_bound < 1:
        raise ValueError("phase bound must be at least 1")
    engine = engine or Engine(sys)
    limits = Limits(engine, caps)
    g = GameGraph(engine, phase_bound)
    start = (engine.pack(init), NO_POP, phase_bound)
    ids = {start: 0}
    g.positions.append(start)
    g.succ.append([])
    depth = [0]
    queue = deque([0])
    while queue:
        v = queue.popleft()
        p, i, k = g.positions[v]
        out = g.succ[v]
        suppressed = False
        for mv in engine.moves(p):
            kind, j = mv[1], mv[2]
            ni, nk = i, k
            if kind == K_POP:
                if i == NO_POP:
                    ni = j
                elif j != i:
                    if k == 1:
                        g.phase_blocked += 1
                        continue
                    ni, nk = j, k - 1
            elif kind == K_PUSH and not limits.push_ok(p[j + 1], j, mv[3]):
                suppressed = True
                continue
            if depth[v] + 1 > caps.step_cap:
                suppressed = True
                continue
            key = (engine.apply(p, mv), ni, nk)
            d = ids.get(key)
            if d is None:
                if len(g.positions) >= caps.node_cap:
                    g.capped = True
                    suppressed = True
                    continue
                d = len(g.positions)
                ids[key] = d
                g.positions.append(key)
                g.succ.append([])
                depth.append(depth[v] + 1)
                queue.append(d)
            out.append((mv[0], d))
        if suppressed:
            g.frontier.add(v)
    states = engine.states
    g.owner = np.array([sys.owner[states[pos[0][0]]] for pos in g.positions], dtype=np.uint8)
    g.priority = np.array([sys.priority[states[pos[0][0]]] for pos in g.positions], dtype=np.int64)
    return g


class PlainGame:
    """A finite game given directly by owner, priority and successor lists."""

    def __init__(self, owner, priority, succ):
        self.owner = np.asarray(owner, dtype=np.uint8)
        self.priority = np.asarray(priority, dtype=np.int64)
        self.succ_lists = [list(s) for s in succ]
        self.initial = 0

    def __len__(self):
        return len(self.succ_lists)

    def successors(self, v):
        return self.succ_lists[v]


@dataclass
class Solution:
    winner: list  # player per position
    strategy: dict  # position -> chosen successor, for positions owned by their winner

    def region(self, player: int) -> list:
        return [v for v, w in enumerate(self.winner) if w == player]


class _Zielonka:
    def __init__(self, g):
        n = len(g)
        self.n = n
        self.succ = [g.successors(v) for v in range(n)]
        self.csr = kernels.Csr(n, self.succ)
        self.owner = np.ascontiguousarray(g.owner, dtype=np.uint8)
        self.priority = np.asarray(g.priority, dtype=np.int64)

    def attr(self, alive, target, player):
        c = self.csr
        return kernels.attractor(c.succ_ptr, c.succ_idx, c.pred_ptr, c.pred_idx,
                                 self.owner, alive, np.ascontiguousarray(target & alive), player)

    def attr_strategy(self, alive, region, target, player, strat):
        """Moves for ``player`` inside ``region`` that decrease the distance to ``target``."""
        rank = {int(v): 0 for v in np.flatnonzero(target & region)}
        layer = list(rank)
        pred_ptr, pred_idx = self.csr.pred_ptr, self.csr.pred_idx
        while layer:
            nxt = []
            for v in layer:
                for e in range(pred_ptr[v], pred_ptr[v + 1]):
                    u = int(pred_idx[e])
                    if region[u] and u not in rank:
                        if self.owner[u] == player or all(
                            s in rank or not alive[s] for s in self.succ[u]
                        ):
                            rank[u] = rank[v] + 1
                            nxt.append(u)
            layer = nxt
        for u, r in rank.items():
            if r > 0 and self.owner[u] == player:
                strat[u] = next(s for s in self.succ[u] if rank.get(s, r) < r)

    def stay(self, alive, region, player, strat):
        for v in np.flatnonzero(region):
            v = int(v)
            if self.owner[v] == player and v not in strat:
                for s in self.succ[v]:
                    if region[s]:
                        strat[v] = s
                        break

    def solve(self, alive):
        n = self.n
        w = [np.zeros(n, np.uint8), np.zeros(n, np.uint8)]
        strat = [{}, {}]
        if not alive.any():
            return w, strat
        d = int(self.priority[alive.astype(bool)].max())
        p = d % 2
        top = (alive & (self.priority == d)).astype(np.uint8)
        a = self.attr(alive, top, p)
        sub_w, sub_s = self.solve(alive & (1 - a))
        if not sub_w[1 - p].any():
            w[p] = alive.copy()
            strat[p] = dict(sub_s[p])
            self.attr_strategy(alive, a, top, p, strat[p])
            self.stay(alive, alive, p, strat[p])
            return w, strat
        b = self.attr(alive, sub_w[1 - p], 1 - p)
        w2, s2 = self.solve(alive & (1 - b))
        w[p] = w2[p]
        w[1 - p] = w2[1 - p] | b
        strat[p] = s2[p]
        strat[1 - p] = {**s2[1 - p], **sub_s[1 - p]}
        self.attr_strategy(alive, b, sub_w[1 - p], 1 - p, strat[1 - p])
        return w, strat


def solve_parity(g) -> Solution:
    """Winning regions and memoryless strategies; max priority seen infinitely often
    decides (even: player 0), and a player stuck at a deadlock loses."""
    z = _Zielonka(g)
    n = z.n
    old = _sys.getrecursionlimit()
    _sys.setrecursionlimit(max(old, 4 * n + 1000))
    try:
        alive = np.ones(n, np.uint8)
        dead = np.array([not s for s in z.succ], dtype=np.uint8)
        winner = [None] * n
        strategy: dict = {}
        # deadlocks are lost by their owner; peel off their attractors first
        for loser in (0, 1):
            wins = 1 - loser
            target = (dead & (z.owner == loser)).astype(np.uint8) & alive
            a = z.attr(alive, target, wins)
            s: dict = {}
            z.attr_strategy(alive, a, target, wins, s)
            strategy.update(s)
            for v in np.flatnonzero(a):
                winner[int(v)] = wins
            alive = alive & (1 - a)
        w, strat = z.solve(alive)
        for p in (0, 1):
            for v in np.flatnonzero(w[p]):
                winner[int(v)] = p
            for v, t in strat[p].items():
                if w[p][v]:
                    strategy[v] = t
    finally:
        _sys.setrecursionlimit(old)
    strategy = {v: strategy[v] for v in sorted(strategy) if z.owner[v] == winner[v]}
    return Solution(winner, strategy)


def winner_from(g, position=None, solution: Optional[Solution] = None) -> int:
    if position is None:
        position = g.initial
    elif not isinstance(position, int):
        position = g.find(*position)
    if not 0 <= position < len(g):
        raise IndexError(f"unknown position {position}")
    solution = solution or solve_parity(g)
    return solution.winner[position]
