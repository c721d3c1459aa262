"""Brute-force reference implementations used to cross-check the real modules.

Nothing here imports the checkers, solvers or compilers it is compared with;
only the plain data types are shared.  Speed is not a goal.
"""
from __future__ import annotations

import itertools
from collections import deque

from .mpds import BOTTOM, WILDCARD, Configuration, MpdsSystem


# -- FO(<) over a finite initial segment of the naturals -----------------------

def fo_eval(phi, n: int, env=None) -> bool:
    """Tarskian truth of ``phi`` over the domain {0..n}."""
    env = dict(env or {})
    op, a = phi.op, phi.args
    if op in ("lt", "eq"):
        for v in a:
            if v not in env:
                raise ValueError(f"free variable {v}")
        return env[a[0]] < env[a[1]] if op == "lt" else env[a[0]] == env[a[1]]
    if op == "not":
        return not fo_eval(a[0], n, env)
    if op == "and":
        return fo_eval(a[0], n, env) and fo_eval(a[1], n, env)
    if op == "or":
        return fo_eval(a[0], n, env) or fo_eval(a[1], n, env)
    if op in ("exists", "forall"):
        results = []
        for d in range(n + 1):
            env[a[0]] = d
            results.append(fo_eval(a[1], n, env))
        return any(results) if op == "exists" else all(results)
    raise ValueError(f"unknown FO node {op}")


# -- CTL by naive iteration ----------------------------------------------------

def ctl_eval_naive(labels, succ, phi) -> set:
    """Satisfaction set of ``phi`` on a graph given as labels and successor lists."""
    n = len(labels)
    nodes = set(range(n))
    op, a = phi.op, phi.args
    if op == "prop":
        return {v for v in nodes if labels[v] == a[0]}
    if op == "not":
        return nodes - ctl_eval_naive(labels, succ, a[0])
    if op == "and":
        return ctl_eval_naive(labels, succ, a[0]) & ctl_eval_naive(labels, succ, a[1])
    if op == "or":
        return ctl_eval_naive(labels, succ, a[0]) | ctl_eval_naive(labels, succ, a[1])
    if op == "EX":
        t = ctl_eval_naive(labels, succ, a[0])
        return {v for v in nodes if any(s in t for s in succ[v])}
    if op in ("EF", "EU"):
        hold = nodes if op == "EF" else ctl_eval_naive(labels, succ, a[0])
        goal = ctl_eval_naive(labels, succ, a[-1])
        cur = set(goal)
        while True:
            nxt = cur | {v for v in hold if any(s in cur for s in succ[v])}
            if nxt == cur:
                return cur
            cur = nxt
    if op == "EG":
        cur = ctl_eval_naive(labels, succ, a[0])
        while True:
            nxt = {v for v in cur if not succ[v] or any(s in cur for s in succ[v])}
            if nxt == cur:
                return cur
            cur = nxt
    raise ValueError(f"unknown CTL node {op}")


# -- parity games by strategy enumeration --------------------------------------

def _play_winner(start, owner, priority, succ, choice):
    seen = {}
    path = []
    v = start
    while v not in seen:
        if not succ[v]:
            return 1 - owner[v]
        seen[v] = len(path)
        path.append(v)
        v = choice[v]
    top = max(priority[u] for u in path[seen[v]:])
    return 0 if top % 2 == 0 else 1


def parity_brute(owner, priority, succ):
    """Winner per position and one uniform memoryless winning strategy per player.

    Player p wins from v iff some strategy of p beats every strategy of the
    opponent.  Returns ``(winner, strategy)`` with strategy a dict v -> successor.
    """
    n = len(owner)
    mine = {p: [v for v in range(n) if owner[v] == p and succ[v]] for p in (0, 1)}

    def profiles(p):
        for pick in itertools.product(*(succ[v] for v in mine[p])):
            yield dict(zip(mine[p], pick))

    winner = [None] * n
    strategy = {}
    for p in (0, 1):
        best = None
        for sp in profiles(p):
            wins = [True] * n
            for so in profiles(1 - p):
                choice = {**sp, **so}
                for v in range(n):
                    if wins[v] and _play_winner(v, owner, priority, succ, choice) != p:
                        wins[v] = False
            region = {v for v in range(n) if wins[v]}
            if best is None or len(region) > len(best[0]):
                best = (region, sp)
        for v in best[0]:
            winner[v] = p
        for v, s in best[1].items():
            if v in best[0]:
                strategy[v] = s
    return winner, strategy


# -- run decompositions ---------------------------------------------------------

def min_blocks_brute(word, phases: bool) -> int:
    """Fewest blocks over all splittings of ``word``, a list of (kind, stack) pairs.

    A block for stack i may contain stack accesses only on i (contexts) or pops
    only on i (phases).  Empty word gives 0.
    """
    if not word:
        return 0
    m = len(word)

    def ok(block):
        rel = {j for kind, j in block if kind == "pop" or (not phases and kind == "push")}
        return len(rel) <= 1

    best = m + 1
    for cuts in range(1 << (m - 1)):
        blocks, start = [], 0
        for k in range(m - 1):
            if cuts >> k & 1:
                blocks.append(word[start:k + 1])
                start = k + 1
        blocks.append(word[start:])
        if all(ok(b) for b in blocks):
            best = min(best, len(blocks))
    return best


# -- bounded exploration by naive closure --------------------------------------

def _naive_step(t, c):
    if t.src != c.state:
        return None
    stacks = list(c.stacks)
    if t.kind == "internal":
        return Configuration(t.dst, tuple(stacks))
    j = t.stack - 1
    word = stacks[j]
    if t.kind == "pop":
        if word[0] != t.symbol or word[0] == BOTTOM:
            return None
        stacks[j] = word[1:]
    else:
        if t.guard != WILDCARD and word[0] != t.guard:
            return None
        if t.kind == "push":
            stacks[j] = (t.symbol,) + tuple(word)
    return Configuration(t.dst, tuple(stacks))


def explore_naive(sys: MpdsSystem, init: Configuration, context_bound, stack_cap, symbol_caps=None):
    """Keys (config, contexts, current stack) reachable under the caps, the
    labelled edges between them, and the keys that lost a successor to a cap."""
    caps = stack_cap if isinstance(stack_cap, tuple) else (stack_cap,) * sys.stacks
    start = (init, 0, 0)
    keys = {start}
    edges = set()
    frontier = set()
    todo = [start]
    while todo:
        key = todo.pop()
        c, ctx, cur = key
        found = []
        lost = False
        for idx, t in enumerate(sys.transitions):
            d = _naive_step(t, c)
            if d is None:
                continue
            nctx, ncur = ctx, cur
            if t.kind in ("push", "pop"):
                if t.stack != cur:
                    nctx, ncur = ctx + 1, t.stack
                if t.kind == "push":
                    word = d.stacks[t.stack - 1]
                    over = len(word) - 1 > caps[t.stack - 1]
                    cap = (symbol_caps or {}).get(t.symbol)
                    if over or (cap is not None and word.count(t.symbol) > cap):
                        lost = True
                        continue
                if nctx > context_bound:
                    lost = True
                    continue
            found.append((idx, (d, nctx, ncur)))
        if lost:
            frontier.add(key)
        for idx, nxt in found:
            edges.add((key, idx, nxt))
            if nxt not in keys:
                keys.add(nxt)
                todo.append(nxt)
    return keys, edges, frontier


# -- Turing machines --------------------------------------------------------------

def tm_accepts(m, w, space: int, step_cap: int = 10**6) -> str:
    """'accept', 'reject' or 'bound_exceeded' for machine ``m`` on ``w`` in ``space`` cells.

    The head starts on cell 0 holding the first input letter; it cannot leave
    the tape.
    """
    if space < len(w):
        raise ValueError("space smaller than input")
    tape = tuple(w) + (m.blank,) * (space - len(w))
    start = (m.initial, 0, tape)
    depth = {start: 0}
    queue = deque([start])
    while queue:
        q, h, t = queue.popleft()
        if q in m.finals:
            return "accept"
        if depth[(q, h, t)] >= step_cap:
            continue
        for tr in m.transitions:
            if tr.src != q or tr.read != t[h]:
                continue
            if tr.write is not None:
                nxt = (tr.dst, h, t[:h] + (tr.write,) + t[h + 1:])
            else:
                nh = h + (1 if tr.move == "R" else -1)
                if not 0 <= nh < space:
                    continue
                nxt = (tr.dst, nh, t)
            if nxt not in depth:
                depth[nxt] = depth[(q, h, t)] + 1
                queue.append(nxt)
    capped = any(d >= step_cap for d in depth.values())
    return "bound_exceeded" if capped else "reject"
