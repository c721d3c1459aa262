"""Finite truncations of the configuration graph under context and size caps."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

from .engine import K_INTERNAL, K_NOOP, K_PUSH, Engine
from .mpds import Configuration, MpdsSystem, MpdsError, validate

NONE_STACK = -1


@dataclass(frozen=True)
class ExplorationBounds:
    context_bound: int = 8
    stack_cap: Union[int, tuple] = 64
    node_cap: int = 1_000_000
    step_cap: int = 1_000_000_000
    # per-stack occurrence caps for individual symbols, e.g. {"a": 4}
    symbol_caps: Optional[dict] = None

    def __post_init__(self):
        caps = self.stack_cap if isinstance(self.stack_cap, tuple) else (self.stack_cap,)
        if self.context_bound < 0 or self.step_cap < 0 or min(caps) < 0:
            raise ValueError("exploration bounds must be non-negative")
        if self.node_cap < 1:
            raise ValueError("node_cap must be at least 1")

    def cap_for(self, stack0: int) -> int:
        if isinstance(self.stack_cap, tuple):
            return self.stack_cap[stack0]
        return self.stack_cap

    def widened(self, delta: int) -> "ExplorationBounds":
        if isinstance(self.stack_cap, tuple):
            cap = tuple(c + delta for c in self.stack_cap)
        else:
            cap = self.stack_cap + delta
        return replace(self, stack_cap=cap)


class Limits:
    """Pre-resolved bounds checks for packed configurations."""

    def __init__(self, engine: Engine, bounds: ExplorationBounds):
        self.bounds = bounds
        self.caps = [bounds.cap_for(j) for j in range(engine.stacks)]
        self.symbol_caps = {}
        for sym, cap in (bounds.symbol_caps or {}).items():
            if sym in engine.symbol_id:
                self.symbol_caps[engine.symbol_id[sym]] = cap

    def push_ok(self, stack_bytes: bytes, j: int, sym: int) -> bool:
        if len(stack_bytes) >= self.caps[j]:
            return False
        cap = self.symbol_caps.get(sym)
        return cap is None or stack_bytes.count(sym) < cap


@dataclass
class ConfigGraph:
    engine: Engine
    bounds: ExplorationBounds
    nodes: list = field(default_factory=list)  # (packed, contexts_used, current_stack0)
    succ: list = field(default_factory=list)  # list of [(tidx, dst)]
    depth: list = field(default_factory=list)
    frontier: set = field(default_factory=set)
    capped: bool = False
    initial: int = 0

    @property
    def truncated(self) -> bool:
        return self.capped or bool(self.frontier)

    def __len__(self):
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return sum(len(s) for s in self.succ)

    def state(self, i: int) -> str:
        return self.engine.states[self.nodes[i][0][0]]

    def labels(self) -> list:
        return [self.engine.states[n[0][0]] for n in self.nodes]

    def configuration(self, i: int) -> Configuration:
        return self.engine.unpack(self.nodes[i][0])

    def contexts(self, i: int) -> int:
        return self.nodes[i][1]

    def successors(self, i: int) -> list:
        """Successor ids as seen by queries: frontier nodes are deadlocks."""
        if i in self.frontier:
            return []
        return [d for _, d in self.succ[i]]

    def max_contexts(self) -> int:
        return max((n[1] for n in self.nodes), default=0)

    def export(self) -> dict:
        nodes = []
        for i, (p, ctx, _) in enumerate(self.nodes):
            c = self.engine.unpack(p)
            nodes.append({
                "id": i,
                "state": c.state,
                "stacks": [list(w) for w in c.stacks],
                "contexts": ctx,
                "frontier": i in self.frontier,
            })
        edges = [
            {"src": i, "transition-index": t, "dst": d}
            for i, out in enumerate(self.succ)
            for t, d in out
        ]
        return {"nodes": nodes, "edges": edges, "capped": self.capped}


def explore(sys: MpdsSystem, init: Configuration, b: ExplorationBounds,
            engine: Optional[Engine] = None) -> ConfigGraph:
    diags = validate(sys)
    if diags:
        raise MpdsError("invalid system: " + "; ".join(diags[:3]))
    if not init.well_formed():
        raise MpdsError(f"ill-formed initial configuration {init}")
    engine = engine or Engine(sys)
    limits = Limits(engine, b)
    g = ConfigGraph(engine, b)
    start = (engine.pack(init), 0, NONE_STACK)
    ids = {start: 0}
    g.nodes.append(start)
    g.succ.append([])
    g.depth.append(0)
    queue = deque([0])
    moves, apply = engine.moves, engine.apply
    while queue:
        i = queue.popleft()
        p, ctx, cur = g.nodes[i]
        d = g.depth[i]
        out = g.succ[i]
        suppressed = False
        for mv in moves(p):
            kind, j = mv[1], mv[2]
            if kind == K_INTERNAL or kind == K_NOOP:
                nctx, ncur = ctx, cur
            else:
                if kind == K_PUSH and not limits.push_ok(p[j + 1], j, mv[3]):
                    suppressed = True
                    continue
                if j != cur:
                    nctx, ncur = ctx + 1, j
                    if nctx > b.context_bound:
                        suppressed = True
                        continue
                else:
                    nctx, ncur = ctx, cur
            if d + 1 > b.step_cap:
                suppressed = True
                continue
            key = (apply(p, mv), nctx, ncur)
            k = ids.get(key)
            if k is None:
                if len(g.nodes) >= b.node_cap:
                    g.capped = True
                    suppressed = True
                    continue
                k = len(g.nodes)
                ids[key] = k
                g.nodes.append(key)
                g.succ.append([])
                g.depth.append(d + 1)
                queue.append(k)
            out.append((mv[0], k))
        if suppressed:
            g.frontier.add(i)
    return g


def reachable(g: ConfigGraph, target: Union[str, Callable[[str], bool]]):
    """Shortest run from the initial node to a node whose control state matches ``target``.

    Returns ``(found, witness)`` where the witness is a list of transitions.
    """
    pred = (lambda q: q == target) if isinstance(target, str) else target
    parent = {g.initial: None}
    queue = deque([g.initial])
    while queue:
        i = queue.popleft()
        if pred(g.state(i)):
            path = []
            while parent[i] is not None:
                i, t = parent[i]
                path.append(g.engine.transitions[t])
            return True, path[::-1]
        for t, d in g.succ[i]:
            if d not in parent:
                parent[d] = (i, t)
                queue.append(d)
    return False, None


def answer_with_stability(run: Callable[[ExplorationBounds], object],
                          b: ExplorationBounds, delta: int):
    """Evaluate ``run`` at ``b`` and at the widened bounds; report ``(answer, stable)``."""
    first = run(b)
    if delta <= 0:
        return first, True
    second = run(b.widened(delta))
    return first, first == second
